import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loewnersim import slitmap as sm
from loewnersim.diagnostics import random_slit_params

finite = st.floats(-20, 20, allow_nan=False)
upper = st.builds(complex, st.floats(-50, 50), st.floats(0, 50))


def test_symmetric_params():
    p = sm.params_from_step(0.0, 1 / 16)
    assert p.alpha == 0.5
    assert p.a == pytest.approx(0.5) and p.b == pytest.approx(0.5)


def test_worked_params():
    p = sm.params_from_step(3.0, 1.0)
    assert p.alpha == pytest.approx(0.2, abs=1e-15)
    assert p.a == pytest.approx(4.0, rel=1e-14) and p.b == pytest.approx(1.0, rel=1e-14)
    assert p.alpha * p.a == pytest.approx((1 - p.alpha) * p.b, rel=1e-14)
    q = sm.params_from_step(-3.0, 1.0)
    assert q.alpha == pytest.approx(0.8) and q.a == pytest.approx(1.0) and q.b == pytest.approx(4.0)


@given(finite, st.floats(1e-6, 1.0))
def test_param_invariants(dl, dt):
    p = sm.params_from_step(dl, dt)
    assert 0 < p.alpha < 1 and p.a > 0 and p.b > 0
    assert abs(p.alpha * p.a - (1 - p.alpha) * p.b) <= 1e-12 * max(p.a, p.b)
    assert abs((1 - p.alpha) * p.a - p.alpha * p.b - dl) <= 1e-12 * max(1.0, abs(dl))


def test_eval_examples():
    p = sm.SlitParams(0.5, 2.0, 2.0, 1.0, 0.0)
    assert sm.eval_tilted(p, 2j) == pytest.approx(math.sqrt(8) * 1j, abs=1e-14)
    q = sm.params_from_step(3.0, 1.0)
    expected = 4 ** 0.8 * cmath.exp(0.2j * math.pi)
    assert sm.eval_tilted(q, 0) == pytest.approx(expected, abs=1e-13)
    w = sm.eval_tilted(q, 0)
    assert abs(w.real - 2.4524) < 1e-4 and abs(w.imag - 1.7819) < 1e-4
    assert sm.tip(q) == pytest.approx(expected, abs=1e-13)


def test_preimages_of_slit_base_map_to_zero():
    q = sm.params_from_step(3.0, 1.0)
    assert abs(sm.eval_tilted(q, -q.a)) == 0.0
    assert abs(sm.eval_tilted(q, q.b)) == 0.0


@settings(max_examples=200)
@given(finite, st.floats(1e-4, 1.0), st.floats(-5, 5), st.floats(1e-3, 5))
def test_matches_principal_powers_off_axis(dl, dt, x, y):
    # Strictly inside H both factors have principal arguments in (0, pi).
    p = sm.params_from_step(dl, dt)
    z = complex(x, y)
    ref = (z + p.a) ** (1 - p.alpha) * (z - p.b) ** p.alpha
    assert sm.eval_tilted(p, z) == pytest.approx(ref, rel=1e-12, abs=1e-13)


def test_hydrodynamic_shift():
    p = sm.params_from_step(3.0, 1.0)
    errs = [abs(sm.eval_tilted(p, 1j * Y) - 1j * Y - 3.0) for Y in (1e3, 1e6)]
    assert errs[0] * 1e3 < 10 and errs[1] * 1e6 < 10
    assert errs[0] / errs[1] >= 1e2


def test_tip_argument():
    alpha, a, b = random_slit_params(100, 1)
    for al, aa, bb in zip(alpha, a, b):
        t = sm.tip(sm.SlitParams(al, aa, bb, 1.0, 0.0))
        assert cmath.phase(t) / math.pi == pytest.approx(al, abs=1e-12)


@settings(max_examples=200)
@given(finite, st.floats(1e-4, 1.0), upper)
def test_range_in_upper_half_plane(dl, dt, z):
    w = sm.eval_tilted(sm.params_from_step(dl, dt), z)
    assert w.imag >= -1e-14 * (1 + abs(z))
    v = sm.eval_vertical(dt, z, shift=dl)
    assert v.imag >= -1e-14 * (1 + abs(z))


@settings(max_examples=200)
@given(finite, st.floats(1e-4, 1.0), upper)
def test_mirror_symmetry(dl, dt, z):
    w = sm.eval_tilted(sm.params_from_step(dl, dt), z)
    m = sm.eval_tilted(sm.params_from_step(-dl, dt), -z.conjugate())
    assert -m.conjugate() == pytest.approx(w, rel=1e-12, abs=1e-12)


def test_vertical_examples():
    assert sm.eval_vertical(0.25, 0.3, shift=0.3) == pytest.approx(0.3 + 1j, abs=1e-15)
    for y in (0.1, 1.0, 7.0):
        assert sm.eval_vertical(0.5, 1j * y) == pytest.approx(1j * math.sqrt(y * y + 2.0), rel=1e-14)
    assert sm.eval_vertical(1.0, 3.0) == pytest.approx(math.sqrt(5), rel=1e-15)
    # the real segment under the slit is sent onto it
    assert sm.eval_vertical(1.0, 1.0).real == pytest.approx(0.0, abs=1e-15)


def test_lower_half_plane_rejected():
    p = sm.params_from_step(0.0, 1.0)
    with pytest.raises(ValueError):
        sm.eval_tilted(p, 1 - 1e-9j)
    with pytest.raises(ValueError):
        sm.eval_vertical(1.0, -1j)
    with pytest.raises(ValueError):
        sm.params_from_step(1.0, 0.0)


def test_derivative_against_finite_difference():
    p = sm.params_from_step(1.3, 0.1)
    z = 0.4 + 0.7j
    h = 1e-6
    fd = (sm.eval_tilted(p, z + h) - sm.eval_tilted(p, z - h)) / (2 * h)
    assert sm.tilted_map_derivative(p.alpha, p.a, p.b, z) == pytest.approx(fd, rel=1e-8)


def test_vectorised_matches_scalar():
    p = sm.params_from_step(-0.7, 0.05)
    zs = np.array([0.0, 1j, -0.3 + 0.2j, 5.0])
    out = sm.eval_tilted(p, zs)
    assert np.array_equal(out, np.array([sm.eval_tilted(p, z) for z in zs]))
