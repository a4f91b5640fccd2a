"""Artifact writers: curve CSV, SVG polyline, plain PGM raster, JSON report.

All writers go through :func:`atomic_write` (temporary file plus rename).
"""
from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .zipper import Curve


def atomic_write(path, text: str) -> None:
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _meta_lines(meta) -> list[str]:
    return [f"# {k}={v}" for k, v in (meta or {}).items()]


def curve_csv(curve: Curve, meta=None) -> str:
    """``t,re,im`` rows at 17 significant digits, preceded by ``# key=value`` lines."""
    lines = _meta_lines(meta) + ["t,re,im"]
    lines += ["%.17g,%.17g,%.17g" % (t, z.real, z.imag) for t, z in zip(curve.times, curve.points)]
    return "\n".join(lines) + "\n"


def write_curve_csv(curve: Curve, path, meta=None) -> None:
    atomic_write(path, curve_csv(curve, meta))


def read_curve_csv(path) -> Curve:
    meta = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key] = val
                continue
            if line == "t,re,im":
                continue
            rows.append([float(x) for x in line.split(",")])
    arr = np.array(rows, dtype=float).reshape(-1, 3)
    return Curve(arr[:, 0], arr[:, 1] + 1j * arr[:, 2], meta.get("mode") == "vertical", meta)


def curve_svg(curve: Curve, size: int = 800, meta=None) -> str:
    """Single-polyline SVG with a real-axis baseline; y is flipped, aspect kept."""
    x = curve.points.real
    y = curve.points.imag
    xmin, xmax = float(x.min()), float(x.max())
    ymax = float(max(y.max(), 1e-12))
    span = max(xmax - xmin, ymax, 1e-12)
    pad = 0.05 * span
    # Width at least the height keeps thin vertical curves on a sane canvas.
    vw, vh = max(xmax - xmin, ymax) + 2 * pad, ymax + 2 * pad
    vx, vy = 0.5 * (xmin + xmax) - 0.5 * vw, -ymax - pad
    pts = " ".join("%.9g,%.9g" % (a, -b) for a, b in zip(x, y))
    comment = "".join(f"<!-- {k}={v} -->\n" for k, v in (meta or {}).items())
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
        f'height="{max(1, int(size * vh / vw))}" viewBox="{vx:.9g} {vy:.9g} {vw:.9g} {vh:.9g}" '
        'preserveAspectRatio="xMidYMid meet">\n'
        + comment
        + f'<line x1="{vx:.9g}" y1="0" x2="{vx + vw:.9g}" y2="0" stroke="#888" '
        'stroke-width="1" vector-effect="non-scaling-stroke"/>\n'
        + f'<polyline fill="none" stroke="black" stroke-width="1" '
        f'vector-effect="non-scaling-stroke" points="{pts}"/>\n'
        "</svg>\n"
    )


def write_svg(curve: Curve, path, meta=None) -> None:
    atomic_write(path, curve_svg(curve, meta=meta))


def raster_pgm(mask: np.ndarray, meta=None) -> str:
    """Plain (P2) graymap: 0 unswallowed, 255 swallowed."""
    h, w = mask.shape
    lines = ["P2"] + _meta_lines(meta) + [f"{w} {h}", "255"]
    for row in mask:
        lines.append(" ".join("255" if v else "0" for v in row))
    return "\n".join(lines) + "\n"


def write_pgm(mask: np.ndarray, path, meta=None) -> None:
    atomic_write(path, raster_pgm(mask, meta))


def read_pgm(path) -> np.ndarray:
    with open(path) as fh:
        tokens = [tok for line in fh if not line.startswith("#") for tok in line.split()]
    if tokens[0] != "P2":
        raise ValueError("not a plain PGM file")
    w, h, _ = int(tokens[1]), int(tokens[2]), int(tokens[3])
    data = np.array(tokens[4:4 + w * h], dtype=int).reshape(h, w)
    return data == 255


def write_json(obj, path) -> None:
    atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")
