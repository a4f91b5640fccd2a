import json
import os

import numpy as np

from loewnersim import output
from loewnersim import driver as drv
from loewnersim import zipper


def test_curve_csv_roundtrip(tmp_path):
    c = zipper.simulate(zipper.build(drv.sample_bm(2.0, 16, 3)), 3)
    p = tmp_path / "c.csv"
    output.write_curve_csv(c, p, {"seed": 3, "mode": "tilted"})
    text = p.read_text().splitlines()
    assert text[:3] == ["# seed=3", "# mode=tilted", "t,re,im"]
    back = output.read_curve_csv(p)
    assert np.array_equal(back.times, c.times)
    assert np.array_equal(back.points, c.points)
    assert back.meta == {"seed": "3", "mode": "tilted"}


def test_svg_structure():
    c = zipper.simulate(zipper.build(drv.zero_driver(4)), 2)
    s = output.curve_svg(c, meta={"n": 4})
    assert s.count("<polyline") == 1
    assert s.count("<line") == 1
    assert "<!-- n=4 -->" in s
    # y axis flipped: the tip 2i is drawn at negative y
    last = s.split('points="')[1].split('"')[0].split()[-1]
    x, y = map(float, last.split(","))
    assert abs(x) < 1e-12 and y == -2.0
    assert 'width="800" height="800"' in s


def test_pgm_roundtrip(tmp_path):
    mask = np.array([[True, False, False], [False, True, True]])
    p = tmp_path / "m.pgm"
    output.write_pgm(mask, p, {"t": 1.0})
    text = p.read_text().splitlines()
    assert text[0] == "P2" and text[1] == "# t=1.0" and text[2] == "3 2" and text[3] == "255"
    assert text[4] == "255 0 0"
    assert np.array_equal(output.read_pgm(p), mask)


def test_atomic_write_leaves_no_temp_files(tmp_path):
    p = tmp_path / "x.json"
    output.write_json({"b": 1, "a": [1, 2]}, p)
    assert json.loads(p.read_text()) == {"a": [1, 2], "b": 1}
    assert os.listdir(tmp_path) == ["x.json"]


def test_atomic_write_keeps_old_file_on_failure(tmp_path):
    p = tmp_path / "keep.txt"
    p.write_text("old")

    class Boom:
        def __str__(self):
            raise RuntimeError

    try:
        output.atomic_write(p, Boom())
    except TypeError:
        pass
    assert p.read_text() == "old"
    assert os.listdir(tmp_path) == ["keep.txt"]
