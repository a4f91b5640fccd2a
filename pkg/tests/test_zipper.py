import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loewnersim import driver as drv
from loewnersim import odesolver, slitmap, zipper


def test_build_constant_driver_is_symmetric():
    chain = zipper.build(drv.SampledDriver(np.full(9, 0.3)))
    assert np.all(chain.alpha == 0.5)
    assert len(chain.steps) == 8


def test_build_differencing():
    chain = zipper.build(drv.SampledDriver(np.array([0.0, 1.0, 1.0])))
    s0, s1 = chain.steps
    assert s0.dlambda == 1.0 and s1.dlambda == 0.0
    assert s0 == slitmap.params_from_step(1.0, 0.5)


def test_build_deterministic():
    d = drv.sample_bm(2, 32, 4)
    c1, c2 = zipper.build(d), zipper.build(d)
    for name in ("alpha", "a", "b"):
        assert np.array_equal(getattr(c1, name), getattr(c2, name))
    with pytest.raises(ValueError):
        zipper.build(d, "diagonal")


def test_vertical_chain_shifts():
    d = drv.sample_bm(2, 8, 0)
    chain = zipper.build(d.with_mode(drv.STEP))
    assert chain.mode == zipper.VERTICAL
    assert np.array_equal(chain.shifts, d.values[:-1])


def test_fhat_identity_and_zero_driver():
    chain = zipper.build(drv.zero_driver(16))
    assert zipper.fhat(chain, 0, 0.3 + 0.4j) == 0.3 + 0.4j
    for k in (1, 5, 16):
        for y in (0.05, 0.5, 3.0):
            assert zipper.fhat(chain, k, 1j * y) == pytest.approx(1j * math.sqrt(y * y + 4 * k / 16), rel=1e-13)


def test_fhat_matches_ode_oracle():
    d = drv.sample_bm(2.0, 64, 11)
    chain = zipper.build(d)
    for k in (3, 20, 64):
        for y in (0.1, 0.5, 1.0):
            ref = odesolver.fhat_oracle(d, k / 64, 1j * y).value
            assert abs(zipper.fhat(chain, k, 1j * y) - ref) <= 1e-6 * abs(ref)


def test_fhat_broadcast_and_errors():
    chain = zipper.build(drv.sample_bm(1.0, 8, 2))
    ks = np.array([0, 3, 8])
    out = zipper.fhat(chain, ks, 1j)
    assert out.shape == (3,)
    assert out[1] == zipper.fhat(chain, 3, 1j)
    with pytest.raises(ValueError):
        zipper.fhat(chain, 9, 1j)
    with pytest.raises(ValueError):
        zipper.fhat(chain, 2, -1j)
    with pytest.raises(TypeError):
        zipper.fhat(chain, 1.5, 1j)


def test_fhat_derivative_matches_finite_difference():
    chain = zipper.build(drv.sample_bm(2.0, 32, 1))
    z = 0.2 + 0.6j
    h = 1e-6
    fd = (zipper.fhat(chain, 20, z + h) - zipper.fhat(chain, 20, z - h)) / (2 * h)
    assert zipper.fhat_derivative(chain, 20, z) == pytest.approx(fd, rel=1e-7)


def test_zero_driver_curve_points():
    chain = zipper.build(drv.zero_driver(8))
    for t in (1 / 8, 1 / 4, 1 / 2, 1.0, 0.3):
        assert abs(zipper.curve_point(chain, t) - 2j * math.sqrt(t)) <= 1e-12
    assert zipper.curve_point(chain, 0.0) == 0


@pytest.mark.parametrize("c", [-3.0, -1.0, 1.0, 3.0])
def test_single_step_curve_is_a_ray(c):
    d = drv.sqrt_driver(c, 1)
    chain = zipper.build(d)
    alpha = 0.5 - 0.5 * c / math.sqrt(16 + c * c)
    direction = cmath.exp(1j * math.pi * alpha)
    for t in np.linspace(0.01, 1.0, 50):
        z = zipper.curve_point(chain, t)
        assert abs((z * direction.conjugate()).imag) <= 1e-9
        assert (z * direction.conjugate()).real > 0
        # the c sqrt(t) driver has hull of capacity t: |tip| grows like sqrt(t)
        assert abs(z) == pytest.approx(abs(zipper.curve_point(chain, 1.0)) * math.sqrt(t), rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_reflection_symmetry(seed):
    d = drv.sample_bm(3.0, 16, seed)
    m = drv.SampledDriver(-d.values)
    a = zipper.simulate(zipper.build(d), 3).points
    b = zipper.simulate(zipper.build(m), 3).points
    assert np.max(np.abs(a + b.conj())) <= 1e-12


def test_continuity_at_grid_times():
    chain = zipper.build(drv.sample_bm(2.0, 32, 5))
    for k in (1, 7, 31):
        t = k / 32
        here = zipper.curve_point(chain, t)
        assert abs(zipper.curve_point(chain, t + 1e-15) - here) <= 1e-9
        assert abs(zipper.curve_point(chain, t - 1e-15) - here) <= 1e-6


def test_grid_tips_match_curve_points():
    chain = zipper.build(drv.sample_bm(2.0, 32, 3))
    tips = zipper.grid_tips(chain)
    pts = zipper.curve_points(chain, np.arange(33) / 32)
    assert np.max(np.abs(tips - pts)) <= 1e-9


def test_simulate_zero_driver_tilted_and_vertical():
    d = drv.zero_driver(16)
    c = zipper.simulate(zipper.build(d), 4)
    assert len(c) == 65 and not c.polyline
    assert np.max(np.abs(c.points - 2j * np.sqrt(c.times))) <= 1e-12
    v = zipper.simulate(zipper.build(d.with_mode(drv.STEP)))
    assert len(v) == 17 and v.polyline
    assert np.max(np.abs(v.points - 2j * np.sqrt(v.times))) <= 1e-12


def test_vertical_tips_against_step_driver_oracle():
    # Grid tip k is where the solution of the downward equation driven by the
    # step function blows up at t_k; the upward flow recovers it.
    d = drv.sample_bm(2.0, 8, 9).with_mode(drv.STEP)
    chain = zipper.build(d)
    tips = zipper.grid_tips(chain)
    for k in (2, 5, 8):
        z = 1j * 1e-3 + d.values[k - 1]
        t = k / 8
        w = odesolver.solve_upward(odesolver.reversed_driver(d, t - 1e-12), z, t - 1e-12).value
        assert abs(w - tips[k]) < 5e-3


def test_simulate_deterministic_and_parallel_identical():
    chain = zipper.build(drv.sample_bm(8 / 3, 64, 1))
    a = zipper.simulate(chain, 4)
    b = zipper.simulate(chain, 4, workers=3)
    assert np.array_equal(a.points, b.points)
    assert a.points[0] == chain.driver.values[0]
    assert np.all(np.diff(a.times) > 0)
    with pytest.raises(ValueError):
        zipper.simulate(chain, 0)


def test_curve_point_rejects_bad_time_and_vertical():
    chain = zipper.build(drv.zero_driver(4))
    with pytest.raises(ValueError):
        zipper.curve_point(chain, 1.5)
    with pytest.raises(ValueError):
        zipper.curve_point(zipper.build(drv.zero_driver(4), zipper.VERTICAL), 0.5)


def test_capacity_estimate():
    d = drv.sample_bm(2.0, 64, 0)
    chain = zipper.build(d)
    for k in (1, 16, 64):
        assert zipper.capacity_estimate(chain, k) == pytest.approx(k / 64, rel=1e-3)


def test_self_intersections_detects_crossing():
    square = np.array([0, 1, 1 + 1j, 0.5 - 0.5j])
    assert zipper.self_intersections(square) == [(0, 2)]
    assert zipper.self_intersections(np.array([0, 1j, 1 + 1j, 1 + 2j])) == []
    # collinear overlap
    assert zipper.self_intersections(np.array([0, 2, 2 + 1j, 1 + 1j, 1, 3])) != []
