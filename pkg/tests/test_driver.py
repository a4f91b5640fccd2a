import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loewnersim import driver as drv


def test_bm_starts_at_zero_and_is_deterministic():
    d = drv.sample_bm(8 / 3, 100, 1)
    assert d.values[0] == 0.0
    a = drv.sample_bm(2, 4, 7)
    b = drv.sample_bm(2, 4, 7)
    assert np.array_equal(a.values, b.values)
    assert a.provenance["rng"] == drv.RNG_NAME and a.provenance["seed"] == 7


def test_bm_endpoint_variance():
    # Var(sqrt(kappa) B_1) = kappa
    ends = np.array([drv.sample_bm(2.0, 100, s).values[-1] for s in range(10_000)])
    assert abs(ends.var() / 2.0 - 1.0) < 0.05


def test_refine_bridge_coupling_and_determinism():
    d = drv.sample_bm(2.0, 16, 3)
    r1 = drv.refine_bridge(d, 5)
    r2 = drv.refine_bridge(d, 5)
    assert r1.n == 32
    assert np.array_equal(r1.values[0::2], d.values)
    assert np.array_equal(r1.values, r2.values)
    assert not np.array_equal(drv.refine_bridge(d, 6).values, r1.values)


def test_refine_bridge_midpoint_variance():
    # Bridge midpoint law: variance kappa * delta / 4 with delta = 1/10.
    dev = []
    for s in range(10_000):
        d = drv.sample_bm(1.0, 10, s)
        r = drv.refine_bridge(d, 0)
        dev.append(r.values[1] - 0.5 * (r.values[0] + r.values[2]))
    assert abs(np.var(dev) / (1 / 40) - 1.0) < 0.05


def test_refine_bridge_rejects_other_drivers():
    with pytest.raises(ValueError):
        drv.refine_bridge(drv.sqrt_driver(1.0, 4), 0)
    with pytest.raises(ValueError):
        drv.refine_bridge(drv.sample_rw(2.0, 4, 0), 0)


def test_rw_increments():
    d = drv.sample_rw(3.0, 50, 2)
    assert d.values[0] == 0
    np.testing.assert_allclose(np.abs(np.diff(d.values)), math.sqrt(3.0 / 50), rtol=1e-15)
    d4 = drv.sample_rw(4.0, 4, 0)
    assert set(np.round(np.diff(d4.values), 15)) <= {-1.0, 1.0}


def test_rw_mean_is_zero():
    ends = np.array([drv.sample_rw(2.0, 16, s).values[-1] for s in range(10_000)])
    sigma = math.sqrt(2.0) / math.sqrt(10_000)
    assert abs(ends.mean()) < 3 * sigma


def test_sqrt_driver_values():
    assert np.all(drv.sqrt_driver(0.0, 5).values == 0)
    np.testing.assert_allclose(drv.sqrt_driver(1.0, 4).values,
                               [0, 0.5, math.sqrt(2) / 2, math.sqrt(3) / 2, 1.0], atol=1e-15)
    assert np.array_equal(drv.sqrt_driver(-2.0, 7).values, -drv.sqrt_driver(2.0, 7).values)


def test_save_load_roundtrip(tmp_path):
    d = drv.sample_bm(8 / 3, 33, 4)
    p = tmp_path / "d.txt"
    drv.save_driver(d, p)
    assert p.read_text().splitlines()[0] == "33"
    assert drv.load_driver(p) == d
    assert drv.load_driver(p, drv.STEP).mode == drv.STEP


@pytest.mark.parametrize("text", ["", "x\n1\n2\n", "2\n0\n1\n", "1\n0\nnan\n", "1\n0\nabc\n", "0\n0\n"])
def test_load_rejects_malformed(tmp_path, text):
    p = tmp_path / "bad.txt"
    p.write_text(text)
    with pytest.raises(ValueError):
        drv.load_driver(p)


def test_perturb():
    d = drv.sample_bm(2.0, 64, 1)
    assert drv.perturb(d, 0.0) == d
    p = drv.perturb(d, 0.01, seed=3)
    assert p.values[0] == d.values[0]
    assert np.max(np.abs(p.values - d.values)) <= 0.01
    assert not np.array_equal(p.values, d.values)
    with pytest.raises(ValueError):
        drv.perturb(d, -1.0)


def test_osc_examples():
    assert drv.osc(drv.SampledDriver(np.full(9, 0.7)), 0.5) == 0.0
    assert drv.osc(drv.sqrt_driver(-1.7, 16), 1.0) == pytest.approx(1.7, abs=1e-15)
    # delta below the grid spacing sees no pairs
    assert drv.osc(drv.sample_bm(2, 8, 0), 0.01) == 0.0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_osc_monotone(seed, d1, d2):
    d = drv.sample_bm(2.0, 32, seed)
    lo, hi = sorted((d1, d2))
    assert drv.osc(d, lo) <= drv.osc(d, hi)


def test_weak_holder_estimate():
    # osc(1/m) sqrt(m) / sqrt(log m) stays bounded; report the constant.
    n = 1024
    ratios = []
    for seed in range(20):
        d = drv.sample_bm(2.0, n, seed)
        for m in (4, 16, 64, 256, 1024):
            ratios.append(drv.osc(d, 1 / m) * math.sqrt(m) / math.sqrt(math.log(m)))
    C = max(ratios)
    print(f"weak Holder constant C = {C:.3f}")
    assert C < 10


def test_kappa_to_a_examples():
    assert drv.kappa_to_a(0.0) == 0.5
    assert drv.kappa_to_a(8 / 3) == pytest.approx(0.5 - math.sqrt(7) / 14, abs=1e-15)
    assert abs(drv.kappa_to_a(8 / 3) - 0.3110178) < 1e-6


@given(st.floats(1e-6, 16.0))
def test_kappa_roundtrip(kappa):
    a = drv.kappa_to_a(kappa)
    assert 0 < a <= 0.5
    assert drv.a_to_kappa(a) == pytest.approx(kappa, rel=1e-12)


def test_driver_validation():
    with pytest.raises(ValueError):
        drv.SampledDriver(np.array([0.0]))
    with pytest.raises(ValueError):
        drv.SampledDriver(np.array([0.0, np.inf]))
    with pytest.raises(ValueError):
        drv.SampledDriver(np.zeros(3), mode="linear")
    d = drv.zero_driver(3)
    with pytest.raises(ValueError):
        d.values[0] = 1.0


def test_interpolation_modes():
    d = drv.SampledDriver(np.array([0.0, 2.0, 1.0]))
    # sqrt interpolation: lambda(t_k) + dv * sqrt((t - t_k) n)
    assert d(0.125) == pytest.approx(2.0 * math.sqrt(0.25))
    assert d(0.75) == pytest.approx(2.0 - math.sqrt(0.5))
    s = d.with_mode(drv.STEP)
    assert s(0.49) == 0.0 and s(0.5) == 2.0 and s(1.0) == 1.0
