"""Analytical bit error rates of the three-slot scheme over Rayleigh fading.

Relay errors are written as signed sums of Craig integrals

    sign / pi * integral_0^phi  M(-A^2 / (2 sigma^2 sin^2 theta)) d theta

where ``M`` is the MGF of the harmonic-mean SNR.  The term lists are
plain data (:class:`SerTermTable`) so they can be audited and swapped.

Two table sets ship:

``printed``
    The seven-term decompositions for XOR symbols 0 and 1, with the relay
    bit error taken as a quarter of the relay symbol error.
``corrected``
    Decompositions re-derived from the band decision rule.  Symbol 0
    (rails at ``+-(eb1 + eb2)``) and symbol 1 (rails at ``+-(eb1 - eb2)``)
    errors are ``1 - (1 - p)^2`` with ``p`` the per-rail error, expanded
    via ``Q(x)^2`` and ``Q(x) Q(y)`` Craig forms; the relay bit error is the
    exact per-rail XOR error.

Both use the phase-averaged residual variance ``sigma2 (1/g1 + 1/g2)``.
:func:`relay_bit_error_numeric` keeps the channel-phase cross term and
averages over the fades and their relative phase numerically.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass, field
from itertools import product

import numpy as np

from .core import ChannelPair, OutOfRange, SchemeConfig, map_bits, validate_config
from .modem import pnc_decide
from .special import (gauss_legendre_integrate, hyp2f1_1_2_32, legendre_rule,
                      mgf_gamma_grid, q_function)

DEFAULT_ORDER = 96
PROB_TOL = 1e-9
TABLE_MODES = ("printed", "corrected")

HALF_PI = np.pi / 2
QUARTER_PI = np.pi / 4


@dataclass(frozen=True)
class CraigTerm:
    sign: int
    a_squared: float
    phi: float

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.a_squared < 0 or not 0 <= self.phi <= np.pi:
            raise ValueError(f"invalid Craig term {self}")


@dataclass(frozen=True)
class SerTermTable:
    name: str
    terms: tuple

    def signed_angle_sum(self) -> float:
        return sum(t.sign * t.phi for t in self.terms)

    def flipped(self, index: int) -> "SerTermTable":
        """Copy with the sign of term ``index`` reversed (mutation testing)."""
        terms = list(self.terms)
        t = terms[index]
        terms[index] = CraigTerm(-t.sign, t.a_squared, t.phi)
        return SerTermTable(self.name + f"-flip{index}", tuple(terms))


def _angles(cfg: SchemeConfig):
    phi0 = np.arctan(cfg.eb2 / (2 * cfg.eb1 + cfg.eb2))
    phi1 = np.arctan(cfg.eb2 / (2 * cfg.eb1 - cfg.eb2))
    return phi0, phi1


def ser_term_table_symbol0(cfg: SchemeConfig) -> SerTermTable:
    near = cfg.eb2**2
    far = (2 * cfg.eb1 + cfg.eb2) ** 2
    phi0, _ = _angles(cfg)
    return SerTermTable("printed-symbol0", (
        CraigTerm(+1, near, HALF_PI),
        CraigTerm(-1, far, HALF_PI),
        CraigTerm(+1, near, HALF_PI),
        CraigTerm(-1, near, QUARTER_PI),
        CraigTerm(-1, near, QUARTER_PI),
        CraigTerm(+1, far, HALF_PI - phi0),
        CraigTerm(+1, near, phi0),
    ))


def ser_term_table_symbol1(cfg: SchemeConfig) -> SerTermTable:
    near = cfg.eb2**2
    mid = (2 * cfg.eb1 - cfg.eb2) ** 2
    _, phi1 = _angles(cfg)
    return SerTermTable("printed-symbol1", (
        CraigTerm(+1, near, HALF_PI),
        CraigTerm(+1, mid, HALF_PI),
        CraigTerm(+1, near, HALF_PI),
        CraigTerm(-1, near, QUARTER_PI),
        CraigTerm(-1, near, QUARTER_PI),
        CraigTerm(-1, mid, HALF_PI - phi1),
        CraigTerm(-1, near, phi1),
    ))


def corrected_term_table_symbol0(cfg: SchemeConfig) -> SerTermTable:
    # 2p - p^2 with p = Q(near) - Q(far)
    near = cfg.eb2**2
    far = (2 * cfg.eb1 + cfg.eb2) ** 2
    phi0, _ = _angles(cfg)
    return SerTermTable("corrected-symbol0", (
        CraigTerm(+1, near, HALF_PI),
        CraigTerm(-1, far, HALF_PI),
        CraigTerm(+1, near, HALF_PI),
        CraigTerm(-1, far, HALF_PI),
        CraigTerm(-1, near, QUARTER_PI),
        CraigTerm(-1, far, QUARTER_PI),
        CraigTerm(+1, far, HALF_PI - phi0),
        CraigTerm(+1, near, phi0),
    ))


def corrected_term_table_symbol1(cfg: SchemeConfig) -> SerTermTable:
    # 2q - q^2 with q = Q(near) + Q(mid)
    near = cfg.eb2**2
    mid = (2 * cfg.eb1 - cfg.eb2) ** 2
    _, phi1 = _angles(cfg)
    return SerTermTable("corrected-symbol1", (
        CraigTerm(+1, near, HALF_PI),
        CraigTerm(+1, mid, HALF_PI),
        CraigTerm(+1, near, HALF_PI),
        CraigTerm(+1, mid, HALF_PI),
        CraigTerm(-1, near, QUARTER_PI),
        CraigTerm(-1, mid, QUARTER_PI),
        CraigTerm(-1, mid, HALF_PI - phi1),
        CraigTerm(-1, near, phi1),
    ))


def rail_bit_tables(cfg: SchemeConfig):
    """Per-rail XOR bit error tables for rails at ``eb1 + eb2`` and ``eb1 - eb2``."""
    near = cfg.eb2**2
    return (
        SerTermTable("rail-bit0", (CraigTerm(+1, near, HALF_PI),
                                   CraigTerm(-1, (2 * cfg.eb1 + cfg.eb2) ** 2, HALF_PI))),
        SerTermTable("rail-bit1", (CraigTerm(+1, near, HALF_PI),
                                   CraigTerm(+1, (2 * cfg.eb1 - cfg.eb2) ** 2, HALF_PI))),
    )


def term_tables(cfg: SchemeConfig, mode: str = "printed"):
    if mode == "printed":
        return ser_term_table_symbol0(cfg), ser_term_table_symbol1(cfg)
    if mode == "corrected":
        return corrected_term_table_symbol0(cfg), corrected_term_table_symbol1(cfg)
    raise ValueError(f"unknown term table mode {mode!r}; expected one of {TABLE_MODES}")


# -- Craig integrals ---------------------------------------------------------

def _craig_integral(kernel, phi: float, order: int) -> float:
    if phi == 0:
        return 0.0

    def integrand(theta):
        return kernel(np.sin(theta) ** 2)

    return gauss_legendre_integrate(integrand, 0.0, phi, order) / np.pi


def craig_term_rayleigh(term: CraigTerm, gamma_bar: float, sigma2: float,
                        order: int = DEFAULT_ORDER) -> float:
    """Fading-averaged signed Craig term using the harmonic-mean-SNR MGF."""
    if term.a_squared == 0:
        return term.sign * term.phi / np.pi
    scale = gamma_bar * term.a_squared / (8.0 * sigma2)
    value = _craig_integral(lambda s2: hyp2f1_1_2_32(-scale / s2), term.phi, order)
    return term.sign * value


def craig_term_awgn(term: CraigTerm, sigma_n2: float, order: int = DEFAULT_ORDER) -> float:
    """Signed Craig term for a fixed per-rail noise variance ``sigma_n2``."""
    if term.a_squared == 0:
        return term.sign * term.phi / np.pi
    scale = term.a_squared / (2.0 * sigma_n2)
    value = _craig_integral(lambda s2: np.exp(-scale / s2), term.phi, order)
    return term.sign * value


def table_rayleigh(table: SerTermTable, gamma_bar: float, sigma2: float,
                   order: int = DEFAULT_ORDER) -> float:
    return sum(craig_term_rayleigh(t, gamma_bar, sigma2, order) for t in table.terms)


def table_rayleigh_oracle(table: SerTermTable, gamma_bar: float, sigma2: float,
                          order: int = 48) -> float:
    """:func:`table_rayleigh` with a 2-D numerical fading average in place of ``2F1``."""
    total = 0.0
    for t in table.terms:
        c = t.a_squared / (2.0 * sigma2)
        total += t.sign * _craig_integral(lambda s2: mgf_gamma_grid(c / s2, gamma_bar), t.phi,
                                          order)
    return total


def table_awgn(table: SerTermTable, sigma_n2: float, order: int = DEFAULT_ORDER) -> float:
    return sum(craig_term_awgn(t, sigma_n2, order) for t in table.terms)


# -- relay, downlink and end to end ------------------------------------------

@dataclass(frozen=True)
class RelayErrors:
    p_e0: float
    p_e1: float
    p_relay_symbol: float
    p_relay_bit: float


def _check_prob(name: str, p: float) -> float:
    if not (-PROB_TOL <= p <= 1 + PROB_TOL) or not np.isfinite(p):
        raise OutOfRange(f"{name} = {p!r} is outside [0, 1]; check the term tables")
    return float(p)


def relay_error_probabilities(cfg: SchemeConfig, mode: str = "printed",
                              order: int = DEFAULT_ORDER, tables=None) -> RelayErrors:
    """Fading-averaged relay error probabilities.

    ``tables`` overrides the (symbol 0, symbol 1) tables selected by
    ``mode``; it exists for diagnostics and mutation tests.
    """
    validate_config(cfg)
    t0, t1 = tables if tables is not None else term_tables(cfg, mode)
    p_e0 = _check_prob("p_e0", table_rayleigh(t0, cfg.gamma_bar, cfg.sigma2, order))
    p_e1 = _check_prob("p_e1", table_rayleigh(t1, cfg.gamma_bar, cfg.sigma2, order))
    p_sym = 0.5 * (p_e0 + p_e1)
    if mode == "printed":
        p_bit = p_sym / 4.0
    else:
        b0, b1 = rail_bit_tables(cfg)
        p_bit = 0.5 * (table_rayleigh(b0, cfg.gamma_bar, cfg.sigma2, order)
                       + table_rayleigh(b1, cfg.gamma_bar, cfg.sigma2, order))
    return RelayErrors(p_e0, p_e1, _check_prob("p_relay_symbol", p_sym),
                       _check_prob("p_relay_bit", p_bit))


def rayleigh_bpsk_ber(snr_per_bit):
    """Average of ``Q(sqrt(2 g))`` over ``g ~ Exp(snr_per_bit)``."""
    x = np.asarray(snr_per_bit, dtype=float)
    return 0.5 * (1.0 - np.sqrt(x / (1.0 + x)))


def downlink_ber(cfg: SchemeConfig) -> float:
    """Relay-to-node bit error rate, ``Q(er |h| / sigma)`` averaged over Rayleigh ``h``."""
    return float(rayleigh_bpsk_ber(cfg.er**2 * cfg.gamma_bar / (2.0 * cfg.sigma2)))


def serial_ber(p_relay_bit: float, p_downlink: float) -> float:
    return p_relay_bit + p_downlink - p_relay_bit * p_downlink


@dataclass(frozen=True)
class AnalyticBerReport:
    p_e0_symbol: float
    p_e1_symbol: float
    p_relay_symbol: float
    p_relay_bit: float
    p_r1: float
    p_r2: float
    p_1to2: float
    p_2to1: float
    p_overall: float

    def as_dict(self) -> dict:
        return asdict(self)


def compose_report(relay: RelayErrors, p_r1: float, p_r2: float) -> AnalyticBerReport:
    p_1to2 = serial_ber(relay.p_relay_bit, p_r2)
    p_2to1 = serial_ber(relay.p_relay_bit, p_r1)
    return AnalyticBerReport(
        relay.p_e0, relay.p_e1, relay.p_relay_symbol, relay.p_relay_bit,
        p_r1, p_r2, p_1to2, p_2to1, 0.5 * (p_1to2 + p_2to1),
    )


def end_to_end_ber(cfg: SchemeConfig, mode: str = "printed",
                   order: int = DEFAULT_ORDER, tables=None) -> AnalyticBerReport:
    relay = relay_error_probabilities(cfg, mode, order, tables)
    p_r = downlink_ber(cfg)
    report = compose_report(relay, p_r, p_r)
    _check_prob("p_overall", report.p_overall)
    return report


def resolvable_baseline_ber(cfg: SchemeConfig, energy: str = "amplitude") -> float:
    """End-to-end BER of the stream-separated baselines (BPSK and QPSK alike).

    Each stream is detected on its own Rayleigh link; the XOR bit is wrong
    when exactly one stream is wrong.  ``energy="per_bit"`` scales the
    baseline amplitudes by sqrt(2) so a bit carries the energy it gets from
    being sent in two slots under the three-slot scheme.
    """
    validate_config(cfg)
    boost = baseline_amplitude_factor(energy) ** 2
    p1 = rayleigh_bpsk_ber(boost * cfg.eb1**2 * cfg.gamma_bar / (2.0 * cfg.sigma2))
    p2 = rayleigh_bpsk_ber(boost * cfg.eb2**2 * cfg.gamma_bar / (2.0 * cfg.sigma2))
    p_xor = float(p1 + p2 - 2.0 * p1 * p2)
    return serial_ber(p_xor, downlink_ber(cfg))


def baseline_amplitude_factor(energy: str) -> float:
    if energy == "amplitude":
        return 1.0
    if energy == "per_bit":
        return float(np.sqrt(2.0))
    raise ValueError(f"unknown baseline energy normalisation {energy!r}")


def quadrature_self_check(cfg: SchemeConfig, mode: str = "printed",
                          order: int = DEFAULT_ORDER) -> float:
    """Largest relative change of any relay probability when the order doubles."""
    a = relay_error_probabilities(cfg, mode, order)
    b = relay_error_probabilities(cfg, mode, 2 * order)
    worst = 0.0
    for x, y in zip(asdict(a).values(), asdict(b).values()):
        if y != 0:
            worst = max(worst, abs(x - y) / abs(y))
    return worst


# -- instantaneous (fixed channel) oracles -----------------------------------

def nominal_sigma_n2(sigma2: float, gamma1: float, gamma2: float) -> float:
    return sigma2 * (gamma1 + gamma2) / (gamma1 * gamma2)


def instantaneous_ser(cfg: SchemeConfig, gamma1: float, gamma2: float, symbol: int,
                      mode: str = "printed", order: int = DEFAULT_ORDER, tables=None) -> float:
    """Craig-sum symbol error at a fixed channel (exponential integrand)."""
    t = (tables if tables is not None else term_tables(cfg, mode))[symbol]
    return table_awgn(t, nominal_sigma_n2(cfg.sigma2, gamma1, gamma2), order)


def instantaneous_ser_oracle(cfg: SchemeConfig, ch: ChannelPair, symbol: int,
                             mode: str = "printed", order: int = DEFAULT_ORDER,
                             tables=None) -> float:
    """:func:`instantaneous_ser` for a concrete channel pair (depends on gains only)."""
    return instantaneous_ser(cfg, float(ch.gamma1), float(ch.gamma2), symbol, mode, order, tables)


@dataclass(frozen=True)
class PointError:
    bits_node1: tuple
    bits_node2: tuple
    xor_bits: tuple
    point: complex
    symbol_error: float


@dataclass(frozen=True)
class BruteForceSer:
    sigma_n2: float
    points: tuple
    symbol0: float
    symbol1: float
    mixed: float


def _region_mass(mu: complex, sigma: float, eb1: float, xor_bits, nodes_per_segment: int):
    """Gaussian mass where the band rule does not return ``xor_bits``.

    Tensor Gauss-Legendre over a +-12 sigma box, split at the decision
    boundaries so the integrand is smooth inside every cell.
    """
    rule = legendre_rule(nodes_per_segment)

    def axis(m):
        lo, hi = m - 12 * sigma, m + 12 * sigma
        cuts = [lo] + [c for c in (-eb1, eb1) if lo < c < hi] + [hi]
        xs, ws = [], []
        for a, b in zip(cuts[:-1], cuts[1:]):
            half = 0.5 * (b - a)
            xs.append(half * rule.nodes + 0.5 * (a + b))
            ws.append(half * rule.weights)
        return np.concatenate(xs), np.concatenate(ws)

    x, wx = axis(mu.real)
    y, wy = axis(mu.imag)
    gx, gy = np.meshgrid(x, y, indexing="ij")
    density = np.exp(-((gx - mu.real) ** 2 + (gy - mu.imag) ** 2) / (2 * sigma**2))
    density /= 2 * np.pi * sigma**2
    d_i, d_q = pnc_decide(gx + 1j * gy, eb1)
    wrong = (d_i != xor_bits[0]) | (d_q != xor_bits[1])
    return float(np.einsum("i,j,ij->", wx, wy, density * wrong))


def brute_force_instantaneous_ser(cfg: SchemeConfig, gamma1: float, gamma2: float,
                                  nodes_per_segment: int = 48) -> BruteForceSer:
    """Symbol error of the XOR decision at every one of the 16 noise-free points.

    Symbol 0 averages the points whose XOR pair is (0, 0), symbol 1 those
    with (1, 1); ``mixed`` averages the remaining eight.
    """
    sigma_n2 = nominal_sigma_n2(cfg.sigma2, gamma1, gamma2)
    sigma = np.sqrt(sigma_n2)
    points = []
    for b in product((0, 1), repeat=4):
        b1, b2 = b[:2], b[2:]
        xor = (b1[0] ^ b2[0], b1[1] ^ b2[1])
        mu = map_bits(*b1, cfg.eb1) + map_bits(*b2, cfg.eb2)
        ser = _region_mass(mu, sigma, cfg.eb1, xor, nodes_per_segment)
        points.append(PointError(b1, b2, xor, mu, ser))
    groups = {k: [p.symbol_error for p in points if (p.xor_bits == k)] for k in
              [(0, 0), (1, 1), (0, 1), (1, 0)]}
    return BruteForceSer(
        sigma_n2, tuple(points),
        float(np.mean(groups[(0, 0)])), float(np.mean(groups[(1, 1)])),
        float(np.mean(groups[(0, 1)] + groups[(1, 0)])),
    )


def _term_key(t: CraigTerm):
    return (t.sign, round(t.a_squared, 12), round(t.phi, 12))


def term_table_discrepancy(printed: SerTermTable, corrected: SerTermTable) -> dict:
    """Name the printed terms that do not appear in the corrected table and vice versa.

    Term indices are 1-based positions in the respective tables.
    """
    have, want = Counter(map(_term_key, printed.terms)), Counter(map(_term_key, corrected.terms))
    surplus_keys = have - want
    missing_keys = want - have

    def pick(table, keys):
        keys = Counter(keys)
        out = []
        for i, t in enumerate(table.terms, start=1):
            k = _term_key(t)
            if keys[k] > 0:
                keys[k] -= 1
                out.append({"index": i, "sign": t.sign, "a_squared": t.a_squared, "phi": t.phi})
        return out

    return {
        "table": printed.name,
        "surplus_printed_terms": pick(printed, surplus_keys),
        "missing_terms": pick(corrected, missing_keys),
    }


@dataclass
class DualPathReport:
    """Craig-sum vs brute-force comparison on a grid of fixed channels."""

    mode: str
    tolerance: float
    rows: list = field(default_factory=list)
    discrepancies: list = field(default_factory=list)

    @property
    def max_abs_diff(self) -> float:
        return max(max(abs(r["diff0"]), abs(r["diff1"])) for r in self.rows)

    @property
    def agrees(self) -> bool:
        return self.max_abs_diff <= self.tolerance


def dual_path_comparison(cfg: SchemeConfig, gammas=(0.25, 0.5, 1.0, 2.0, 4.0),
                         mode: str = "printed", tolerance: float = 1e-3,
                         tables=None) -> DualPathReport:
    report = DualPathReport(mode, tolerance)
    t0, t1 = tables if tables is not None else term_tables(cfg, mode)
    for g1, g2 in product(gammas, gammas):
        brute = brute_force_instantaneous_ser(cfg, g1, g2)
        c0 = instantaneous_ser(cfg, g1, g2, 0, tables=(t0, t1))
        c1 = instantaneous_ser(cfg, g1, g2, 1, tables=(t0, t1))
        report.rows.append({
            "gamma1": g1, "gamma2": g2, "craig0": c0, "brute0": brute.symbol0,
            "craig1": c1, "brute1": brute.symbol1,
            "diff0": c0 - brute.symbol0, "diff1": c1 - brute.symbol1,
        })
    if not report.agrees:
        c0, c1 = corrected_term_table_symbol0(cfg), corrected_term_table_symbol1(cfg)
        for table, reference, key in ((t0, c0, "diff0"), (t1, c1, "diff1")):
            if max(abs(r[key]) for r in report.rows) > tolerance:
                report.discrepancies.append(term_table_discrepancy(table, reference))
    return report


# -- relay bit error with the exact residual variance -------------------------

def _gamma2_bpsk(c):
    """``E[Q(sqrt(2 c s))]`` for ``s ~ Gamma(2, 1)`` (two-branch MRC form)."""
    mu = np.sqrt(c / (1.0 + c))
    return (0.5 * (1.0 - mu)) ** 2 * (2.0 + mu)


def relay_bit_error_numeric(cfg: SchemeConfig, cross_term: bool = True,
                            order: int = 16, panels: int = 24,
                            phase_points: int = 64) -> float:
    """Relay XOR bit error averaged numerically over both fades and their phase.

    With ``g1 = gamma_bar s t``, ``g2 = gamma_bar s (1 - t)`` the per-rail
    residual variance is ``sigma2 (1 - rho cos psi) / (gamma_bar s t (1-t))``
    with ``rho = sqrt(2 t (1 - t))`` (zero when ``cross_term`` is False).
    The ``s`` average is closed form.  ``t = sin^2 u`` is symmetric about
    ``u = pi/4``; that half is covered by geometrically graded
    Gauss-Legendre panels, which resolve the boundary layer near ``t = 0``
    at high SNR.  The uniform phase ``psi`` uses the periodic trapezoid rule.
    """
    validate_config(cfg)
    rule = legendre_rule(order)
    edges = np.concatenate([[0.0], QUARTER_PI * 2.0 ** -np.arange(panels, -1, -1)])
    half = 0.5 * np.diff(edges)[:, None]
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    u = (mid + half * rule.nodes).ravel()
    wu = 2.0 * (half * rule.weights).ravel()
    t = np.sin(u) ** 2
    jac = np.sin(2.0 * u)
    psi = 2.0 * np.pi * np.arange(phase_points) / phase_points
    tt, pp = np.meshgrid(t, psi, indexing="ij")
    rho = np.sqrt(2.0 * tt * (1.0 - tt)) if cross_term else 0.0
    base = cfg.gamma_bar * tt * (1.0 - tt) / (2.0 * cfg.sigma2 * (1.0 - rho * np.cos(pp)))

    def avg(a_squared):
        vals = _gamma2_bpsk(a_squared * base).mean(axis=1)
        return float(np.dot(wu * jac, vals))

    near, far, mid_ = cfg.eb2**2, (2 * cfg.eb1 + cfg.eb2) ** 2, (2 * cfg.eb1 - cfg.eb2) ** 2
    return 0.5 * (2.0 * avg(near) - avg(far) + avg(mid_))


def end_to_end_ber_exact_variance(cfg: SchemeConfig) -> tuple[float, float]:
    """``(p_relay_bit, p_overall)`` using the exact residual variance.

    A partner bit is wrong when exactly one of the relay and downlink
    stages errs on its rail, which are independent.
    """
    p = _check_prob("p_relay_bit", relay_bit_error_numeric(cfg))
    q = downlink_ber(cfg)
    return p, _check_prob("p_overall", p + q - 2.0 * p * q)
