import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qoscillator import AnalyticMap, DomainError, GaussianSuperposition, PoleError, RedundantFactorSpec
from qoscillator import DeformationParams, Kind, SingularOperatorError, make_params
from qoscillator.analytic import (
    big_F,
    constant,
    eval_f,
    f_square_norm,
    part_g,
    part_g_squared,
    part_h,
    periodic_f_map,
    q_derivative,
    redundant_factor,
    shift,
)


def test_map_arithmetic_and_scalars():
    z = AnalyticMap(lambda x: x, "z")
    m = 2 * z + 1 - z / 2 * z
    assert m(2.0) == pytest.approx(3.0)
    assert isinstance(m(1j), complex)
    assert m(np.array([0.0, 1.0])).shape == (2,)
    assert (-constant(3.0))(np.zeros(4)).tolist() == [-3.0] * 4


def test_eval_f_examples():
    one = GaussianSuperposition.single(1.0)
    assert eval_f(one, 0.0) == 1.0
    assert eval_f(one, 1j) == pytest.approx(math.exp(0.5), rel=1e-15)
    two = GaussianSuperposition({0: 1.0, 1: 1.0}, 1.0)
    assert eval_f(two, math.pi) == pytest.approx(2 * math.exp(-math.pi**2 / 2), rel=1e-14)


def test_superposition_validation():
    with pytest.raises(DomainError):
        GaussianSuperposition({0: 0.0}, 0.5)
    with pytest.raises(DomainError):
        GaussianSuperposition({1: 1.0}, 0.5)
    with pytest.raises(DomainError):
        GaussianSuperposition({0: math.inf}, 0.5)
    with pytest.raises(DomainError):
        GaussianSuperposition({0: 1.0}, -1.0)
    c = GaussianSuperposition({2: 1.0, 0: 1.0, -1: 0.5}, 0.5)
    assert list(c.coefficients) == [-1, 0, 2]
    assert c.max_index == 2


def test_f_square_norm():
    assert f_square_norm(GaussianSuperposition.single(0.4)) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    two = GaussianSuperposition({0: 1.0, 1: 1.0}, 1.0)
    expected = math.sqrt(math.pi) * (2 + 2 * math.exp(-math.pi**2))
    assert f_square_norm(two) == pytest.approx(expected, rel=1e-15)


def test_f_square_norm_against_scipy():
    from scipy.integrate import quad

    c = GaussianSuperposition({0: 1.0, 1: -0.4, -2: 0.7}, 1.3)
    value, _ = quad(lambda x: eval_f(c, x).real ** 2, -40, 40, limit=400, points=[-2 * 2 * math.pi / 1.3, 0])
    assert f_square_norm(c) == pytest.approx(value, rel=1e-10)


def test_shift_and_q_derivative():
    p = make_params(0.5, "macfarlane")
    z = AnalyticMap(lambda x: x, "z")
    assert shift(z, 1j)(2.0) == 2 + 1j
    assert np.allclose(q_derivative(constant(3.0), p)(np.linspace(-1, 1, 5)), 0)
    assert np.allclose(q_derivative(z, p)(np.linspace(-1, 1, 5)), 1)
    assert np.allclose(q_derivative(z, make_params(0.5, "dubna"))(np.array([0.3])), 1)


def _plane_wave_ratio(kind, s, k=1.7):
    wave = AnalyticMap(lambda x: np.exp(1j * k * x), "wave")
    x = np.linspace(-2, 2, 7)
    return q_derivative(wave, make_params(s, kind))(x) / (1j * k * wave(x))


def test_q_derivative_classical_limit():
    k, s = 1.7, 1e-4
    # symmetric difference (Dubna): sinh(ks)/(ks)
    assert np.max(np.abs(_plane_wave_ratio("dubna", s, k) - 1)) < 1e-6
    # one-sided difference (Macfarlane): expm1(ks)/(ks), first order
    ratio = _plane_wave_ratio("macfarlane", s, k)
    assert np.allclose(ratio, math.expm1(k * s) / (k * s), rtol=1e-9)
    assert np.max(np.abs(_plane_wave_ratio("macfarlane", 1e-8, k) - 1)) < 1e-6


def test_q_derivative_singular():
    p = DeformationParams(s=0.5, t=0.5, q=math.exp(2.5), log_q=2.5, kind=Kind.MACFARLANE)
    with pytest.raises(SingularOperatorError):
        q_derivative(constant(1.0), p)


def test_part_g_examples():
    amp = (math.e - 1 / math.e) ** 0.25
    assert part_g(make_params(1, "macfarlane"), 3.7) == pytest.approx(amp, rel=1e-15)
    assert part_g(make_params(1, "dubna"), 0.0) == pytest.approx(amp, rel=1e-15)
    assert abs(part_g(make_params(1, "dubna"), math.pi / 2)) < 1e-7


def test_part_g_squared_is_branch_free():
    p = make_params(0.7, "dubna")
    z = np.linspace(-9, 9, 37) + 0.2j
    assert np.allclose(part_g(p, z) ** 2, part_g_squared(p, z), rtol=1e-14, atol=1e-14)


def test_part_h_examples():
    assert part_h(make_params(1, "dubna"), 2.3 + 1j) == 0
    assert part_h(make_params(1, "macfarlane"), 2.0) == -4
    assert part_h(make_params(1, "macfarlane"), 1.0, math.pi) == pytest.approx(math.pi - 2)


def test_big_F_examples():
    p = make_params(0.7, "macfarlane")
    assert big_F(GaussianSuperposition.single(0.7), p, 0.0) == pytest.approx(math.exp(0.49), rel=1e-14)
    c = GaussianSuperposition({0: 1.0, 1: 0.3}, 0.7)
    assert big_F(c, p, 1.1) == pytest.approx(cmath.exp(0.49 - 2j * 0.7 * 1.1), rel=1e-12)



@pytest.mark.parametrize("s", [1e-4, 1e-6, 1e-8])
def test_big_F_tends_to_one(s):
    # F - 1 = s^2 - 2isx + ..., first order in s
    p = make_params(s, "macfarlane")
    value = big_F(GaussianSuperposition.single(s), p, 0.8)
    assert abs(value - 1) <= 2.01 * s * 0.8
    assert value == pytest.approx(cmath.exp(s * s - 1.6j * s), rel=1e-14)


def test_big_F_pole():
    c = GaussianSuperposition({0: 1.0, 1: -1.0}, 1.0)
    with pytest.raises(PoleError) as info:
        big_F(c, make_params(1.0, "macfarlane"), math.pi)
    assert info.value.location == pytest.approx(math.pi)


@settings(max_examples=40, deadline=None)
@given(
    s=st.floats(0.2, 1.2),
    c=st.dictionaries(st.integers(-2, 2), st.floats(-2, 2).filter(lambda v: abs(v) > 1e-3), min_size=1, max_size=4),
    x=st.floats(-2, 2),
)
def test_big_F_lattice_independence(s, c, x):
    c = dict(c)
    c[0] = 1.0
    coeffs = GaussianSuperposition(c, s)
    p = make_params(s, "macfarlane")
    if abs(eval_f(coeffs, x)) < 1e-3:
        return
    assert big_F(coeffs, p, x) == pytest.approx(cmath.exp(s * s - 2j * s * x), rel=1e-10)


def test_periodic_f_is_cellwise():
    s = 0.5
    f = periodic_f_map(s)
    period = 2 * math.pi / s
    x = np.linspace(-3, 3, 13)
    assert np.allclose(f(x + period), f(x))
    assert np.allclose(f(x + 0.3j), np.exp(-0.5 * (x + 0.3j) ** 2))


def test_redundant_factor_examples():
    z = np.linspace(0.2, 2, 5)
    assert np.all(redundant_factor(RedundantFactorSpec(), 1.0, z) == 1)
    assert redundant_factor(RedundantFactorSpec(kappa=1), 1.0, 1.0) == pytest.approx(math.tanh(math.pi / 2))
    with pytest.raises(PoleError):
        redundant_factor(RedundantFactorSpec(lam=1), 1.0, 0.0)
    with pytest.raises(DomainError):
        RedundantFactorSpec(mu=0.5)


@settings(max_examples=40, deadline=None)
@given(
    kappa=st.integers(-2, 2),
    lam=st.integers(-2, 2),
    mu=st.integers(-1, 1),
    nu=st.integers(-1, 1),
    s=st.floats(0.2, 1.5),
    x=st.floats(0.05, 3),
)
def test_half_period_identity(kappa, lam, mu, nu, s, x):
    spec = RedundantFactorSpec(kappa, lam, mu, nu)
    value = redundant_factor(spec, s, x) * redundant_factor(spec, s, x + 1j * s)
    assert value == pytest.approx(1.0, rel=1e-9)
