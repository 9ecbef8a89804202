import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from pncsim.core import DomainError
from pncsim.special import (gauss_legendre_integrate, hyp2f1_1_2_32, legendre_rule,
                            mgf_gamma_grid, mgf_gamma_oracle, q_function)

mpmath.mp.dps = 40


def ref_2f1(z):
    return float(mpmath.hyp2f1(1, 2, mpmath.mpf(3) / 2, z))


def test_hyp_at_zero():
    assert hyp2f1_1_2_32(0.0) == 1.0


def test_hyp_at_minus_one_dual_path():
    # Euler integral: 2F1(1,2;3/2;z) = 1/2 int_0^1 (1-t)^(-1/2) (1-zt)^(-2) dt
    euler = 0.5 * mpmath.quad(lambda t: (1 - t) ** -0.5 * (1 + t) ** -2, [0, 1])
    assert hyp2f1_1_2_32(-1.0) == pytest.approx(float(euler), rel=1e-12)
    assert hyp2f1_1_2_32(-1.0) == pytest.approx(ref_2f1(-1), rel=1e-12)


def test_hyp_large_argument_asymptote():
    z = -1e4
    assert hyp2f1_1_2_32(z) == pytest.approx(0.5 / abs(z), rel=1e-3)


@given(st.floats(-1e8, 0.0))
def test_hyp_matches_mpmath(z):
    assert hyp2f1_1_2_32(z) == pytest.approx(ref_2f1(z), rel=1e-12)


@pytest.mark.parametrize("z", [-0.5, -0.5 - 1e-12, -0.4999999, -0.5000001])
def test_hyp_continuous_at_branch_switch(z):
    assert hyp2f1_1_2_32(z) == pytest.approx(ref_2f1(z), rel=1e-13)


def test_hyp_array_and_monotone():
    z = -np.geomspace(1e-6, 1e6, 1000)[::-1]
    z = np.concatenate([z, [0.0]])
    v = hyp2f1_1_2_32(z)
    assert v.shape == z.shape
    assert np.all(np.diff(v) > 0)
    assert v[-1] == 1.0 and np.all((v > 0) & (v <= 1))


def test_hyp_domain():
    with pytest.raises(DomainError):
        hyp2f1_1_2_32(0.1)
    with pytest.raises(DomainError):
        hyp2f1_1_2_32(np.array([-1.0, 1e-9]))


@pytest.mark.parametrize("order", [2, 8, 32, 96, 192])
def test_legendre_rule(order):
    r = legendre_rule(order)
    assert r.order == order
    assert abs(r.weights.sum() - 2) < 1e-12
    np.testing.assert_allclose(r.nodes, -r.nodes[::-1], atol=1e-15)
    assert np.all(r.weights > 0) and np.all(np.abs(r.nodes) < 1)


def test_legendre_rule_cached():
    assert legendre_rule(40) is legendre_rule(40)


def test_gl_examples():
    assert gauss_legendre_integrate(np.sin, 0, np.pi, 32) == pytest.approx(2, abs=1e-12)
    assert gauss_legendre_integrate(lambda x: x**3, 0, 1, 2) == pytest.approx(0.25, abs=1e-15)


@given(st.integers(2, 12), st.lists(st.floats(-3, 3), min_size=1, max_size=24))
def test_gl_polynomial_exactness(order, coeffs):
    coeffs = coeffs[: 2 * order]
    p = np.polynomial.Polynomial(coeffs)
    exact = p.integ()(2.0) - p.integ()(-1.0)
    assert gauss_legendre_integrate(p, -1.0, 2.0, order) == pytest.approx(exact, abs=1e-9)


def test_craig_integrand_self_convergence():
    c = 4.0 / (2 * 0.5)

    def f(t):
        return hyp2f1_1_2_32(-100 * c / (4 * np.sin(t) ** 2))

    a = gauss_legendre_integrate(f, 0, np.pi / 2, 64)
    b = gauss_legendre_integrate(f, 0, np.pi / 2, 128)
    assert abs(a - b) / abs(b) < 1e-10


def test_q_function_values():
    assert q_function(0.0) == 0.5
    ref, _ = integrate.quad(lambda x: np.exp(-x * x / 2) / np.sqrt(2 * np.pi), 1, np.inf,
                            epsabs=0, epsrel=1e-13)
    assert q_function(1.0) == pytest.approx(ref, rel=1e-12)
    assert q_function(1.0) == pytest.approx(0.1586552539, abs=1e-10)
    assert abs(q_function(-3.0) + q_function(3.0) - 1) < 1e-14


@given(st.floats(-8, 8))
def test_q_reflection(x):
    assert abs(q_function(-x) - (1 - q_function(x))) < 1e-14
    assert 0 < q_function(x) < 1


def test_mgf_oracle_limits():
    assert mgf_gamma_oracle(0.0, 10.0) == 1.0
    vals = [mgf_gamma_oracle(c, 10.0) for c in (0.01, 0.1, 1, 10, 100, 1e4)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-2


def test_mgf_oracle_decides_sign():
    oracle = mgf_gamma_oracle(1.0, 4.0)
    assert hyp2f1_1_2_32(-1.0) == pytest.approx(oracle, rel=1e-6)
    # the positive-argument reading is off the convergent branch entirely
    with pytest.raises(DomainError):
        hyp2f1_1_2_32(+1.0)


def test_mgf_oracle_domain():
    with pytest.raises(DomainError):
        mgf_gamma_oracle(-1.0, 1.0)


@pytest.mark.parametrize("c", [0.0, 0.01, 1.0, 100.0])
def test_mgf_grid_matches_oracle(c):
    assert mgf_gamma_grid(c, 10.0) == pytest.approx(mgf_gamma_oracle(c, 10.0), rel=1e-9)


def test_mgf_grid_vectorised():
    c = np.array([0.1, 1.0, 10.0])
    np.testing.assert_allclose(mgf_gamma_grid(c, 100.0), hyp2f1_1_2_32(-100.0 * c / 4),
                               rtol=1e-10)
