"""Special functions used by the fading-averaged error analysis.

The only hypergeometric function needed is ``2F1(1, 2; 3/2; z)`` on the
non-positive axis, which is the moment generating function of the
harmonic-mean SNR of two i.i.d. Rayleigh links:

    E[exp(-c * g1 g2 / (g1 + g2))] = 2F1(1, 2; 3/2; -gamma_bar * c / 4)

For ``|z| <= 1/2`` the Gauss series is summed directly.  Otherwise the
Pfaff transformation maps the argument to ``w = z / (z - 1)`` in
``[1/3, 1)``; the transformed function ``2F1(1, -1/2; 3/2; w)`` has series
coefficients ``-1 / ((2n - 1)(2n + 1))`` which telescope to the
elementary sum ``1/2 + (1 - w) atanh(sqrt(w)) / (2 sqrt(w))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate, special

from .core import DomainError

SERIES_MAX_TERMS = 500
SERIES_RTOL = 1e-16


def _series(z: np.ndarray) -> np.ndarray:
    # term ratio for (1)_n (2)_n / ((3/2)_n n!) is (n + 2) / (n + 3/2)
    total = np.ones_like(z)
    term = np.ones_like(z)
    for n in range(SERIES_MAX_TERMS):
        term = term * z * (n + 2.0) / (n + 1.5)
        total = total + term
        if np.all(np.abs(term) <= SERIES_RTOL * np.abs(total)):
            break
    return total


def _pfaff(z: np.ndarray) -> np.ndarray:
    one_minus_w = 1.0 / (1.0 - z)
    w = -z * one_minus_w
    t = np.sqrt(w)
    # atanh(t) = log(1 + t) - log(1 - t^2) / 2, with 1 - t^2 = 1 - w exact
    atanh = np.log1p(t) - 0.5 * np.log(one_minus_w)
    transformed = 0.5 + one_minus_w * atanh / (2.0 * t)
    return one_minus_w * transformed


def hyp2f1_1_2_32(z):
    """Evaluate ``2F1(1, 2; 3/2; z)`` for ``z <= 0``.

    Accepts scalars or arrays.  Raises :class:`DomainError` for ``z > 0``.
    """
    za = np.asarray(z, dtype=float)
    if np.any(za > 0) or np.any(np.isnan(za)):
        raise DomainError("hyp2f1_1_2_32 is only defined here for z <= 0")
    flat = za.reshape(-1)
    out = np.empty_like(flat)
    small = np.abs(flat) <= 0.5
    if small.any():
        out[small] = _series(flat[small])
    if (~small).any():
        out[~small] = _pfaff(flat[~small])
    out = out.reshape(za.shape)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    order: int


@lru_cache(maxsize=None)
def legendre_rule(order: int) -> QuadratureRule:
    if order < 2:
        raise ValueError("quadrature order must be >= 2")
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(x, w, order)


def gauss_legendre_integrate(f: Callable, a: float, b: float, order: int = 96) -> float:
    """Gauss-Legendre estimate of the integral of ``f`` over ``[a, b]``.

    ``f`` is called once with the array of mapped nodes.
    """
    if b < a:
        raise ValueError("require a <= b")
    rule = legendre_rule(order)
    half = 0.5 * (b - a)
    if half == 0:
        return 0.0
    x = half * rule.nodes + 0.5 * (a + b)
    return float(half * np.dot(rule.weights, f(x)))


def q_function(x):
    """Gaussian tail probability ``Q(x) = P(N(0, 1) > x)``."""
    return special.ndtr(-np.asarray(x, dtype=float))


def mgf_gamma_oracle(c: float, gamma_bar: float, epsrel: float = 1e-11) -> float:
    """``E[exp(-c G)]`` with ``G = g1 g2 / (g1 + g2)``, g1, g2 ~ Exp(gamma_bar).

    Brute-force validation path.  The quarter plane is mapped by
    ``g1 = gamma_bar * s * t``, ``g2 = gamma_bar * s * (1 - t)`` (Jacobian
    ``gamma_bar**2 * s``), and the resulting 2-D integral over
    ``t in [0, 1/2]`` (doubled by symmetry), ``s in [0, inf)`` is computed
    adaptively.
    """
    if c < 0 or gamma_bar <= 0:
        raise DomainError("need c >= 0 and gamma_bar > 0")
    if c == 0:
        return 1.0

    def integrand(s, t):
        return s * np.exp(-s - c * gamma_bar * s * t * (1.0 - t))

    # symmetric in t about 1/2; the mass piles up near t = 0 when c is large
    opts = {"limit": 200, "epsabs": 0.0, "epsrel": epsrel}
    val, _ = integrate.nquad(integrand, [(0.0, np.inf), (0.0, 0.5)], opts=[opts, opts])
    return 2.0 * float(val)


def mgf_gamma_grid(c, gamma_bar: float, order: int = 200):
    """Vectorised counterpart of :func:`mgf_gamma_oracle` on a fixed tensor grid.

    Same ``(s, t)`` mapping, with ``s = y / (1 - y)`` and ``t = sin^2(pi y / 2)``
    and ``order`` Gauss-Legendre nodes in each direction.  Loses accuracy
    only when ``c * gamma_bar`` is so large that the MGF is negligible.
    """
    c = np.asarray(c, dtype=float)
    if np.any(c < 0) or gamma_bar <= 0:
        raise DomainError("need c >= 0 and gamma_bar > 0")
    rule = legendre_rule(order)
    y = 0.5 * (rule.nodes + 1.0)
    wy = 0.5 * rule.weights
    t = np.sin(0.5 * np.pi * y) ** 2
    wt = wy * 0.5 * np.pi * np.sin(np.pi * y)
    s = y / (1.0 - y)
    ws = wy / (1.0 - y) ** 2
    ss, tt = np.meshgrid(s, t, indexing="ij")
    f = ss * np.exp(-ss - c[..., None, None] * gamma_bar * ss * tt * (1.0 - tt))
    return np.einsum("i,j,...ij->...", ws, wt, f)
