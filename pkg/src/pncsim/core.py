"""Shared value types and the scheme parameter model.

Complex quantities are plain Python ``complex`` values or numpy complex
arrays; every type here accepts either so that the same code path serves
single-frame checks and vectorised Monte Carlo batches.

Conventions
-----------
* ``eb1``, ``eb2`` and ``er`` are per-rail signal amplitudes: node 1 sends
  ``+-eb1 +- 1j*eb1``.
* ``sigma2`` is the noise variance per real dimension, so each complex
  noise sample has total variance ``2*sigma2``.
* Bit 0 maps to ``+amplitude`` and bit 1 to ``-amplitude`` on each rail.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

ComplexLike = Union[complex, np.ndarray]


class PncError(Exception):
    """Base class for all errors raised by pncsim."""


class AmplitudeOrder(PncError, ValueError):
    """Raised when node 1 is configured weaker than node 2."""


class NonPositive(PncError, ValueError):
    """Raised when a parameter that must be strictly positive is not."""


class DegenerateChannel(PncError, ValueError):
    """Raised when a channel gain is too small to equalise."""


class DomainError(PncError, ValueError):
    """Raised when a special function is evaluated outside its branch."""


class OutOfRange(PncError, ArithmeticError):
    """Raised when a computed probability leaves [0, 1]."""


@dataclass(frozen=True)
class SchemeConfig:
    """Scalar parameters of one experiment.

    Defaults are the reference operating point: amplitudes 4 and 2, relay
    amplitude 1 and an average channel gain of 20 dB.
    """

    eb1: float = 4.0
    eb2: float = 2.0
    er: float = 1.0
    sigma2: float = 0.5
    gamma_bar: float = 100.0

    def with_sigma2(self, sigma2: float) -> "SchemeConfig":
        return SchemeConfig(self.eb1, self.eb2, self.er, sigma2, self.gamma_bar)


def validate_config(cfg: SchemeConfig) -> SchemeConfig:
    """Return ``cfg`` unchanged, or raise if an invariant is broken."""
    for name in ("eb1", "eb2", "er", "sigma2", "gamma_bar"):
        value = getattr(cfg, name)
        if not np.isfinite(value) or value <= 0:
            raise NonPositive(f"{name} must be finite and > 0, got {value!r}")
    if cfg.eb1 < cfg.eb2:
        raise AmplitudeOrder(f"eb1 ({cfg.eb1}) must be >= eb2 ({cfg.eb2})")
    return cfg


def snr_db_to_sigma2(snr_db: float, reference_energy: float) -> float:
    """Per-rail noise variance giving ``reference_energy / sigma2 = snr``."""
    if not reference_energy > 0:
        raise NonPositive(f"reference energy must be > 0, got {reference_energy!r}")
    return reference_energy / 10.0 ** (snr_db / 10.0)


def sigma2_to_snr_db(sigma2: float, reference_energy: float) -> float:
    return 10.0 * np.log10(reference_energy / sigma2)


@dataclass(frozen=True)
class ChannelPair:
    """One block-fading realisation ``(h1, h2)``.

    Fields may be scalars or equally shaped arrays (a batch of frames).
    """

    h1: ComplexLike
    h2: ComplexLike

    @property
    def gamma1(self):
        return np.abs(self.h1) ** 2

    @property
    def gamma2(self):
        return np.abs(self.h2) ** 2

    def check_floor(self, floor: float = 0.0) -> "ChannelPair":
        g1, g2 = self.gamma1, self.gamma2
        ok = np.all(np.isfinite(g1) & np.isfinite(g2) & (g1 > floor) & (g2 > floor))
        if not ok:
            raise DegenerateChannel(f"channel gain at or below floor {floor:g}")
        return self


def map_bits(b_i, b_q, amplitude: float) -> ComplexLike:
    """Map an (in-phase, quadrature) bit pair onto a QPSK point."""
    b_i = np.asarray(b_i)
    b_q = np.asarray(b_q)
    out = amplitude * ((1 - 2 * b_i) + 1j * (1 - 2 * b_q))
    return complex(out) if out.ndim == 0 else out


def demap_bits(x: ComplexLike) -> np.ndarray:
    """Sign detector inverse of :func:`map_bits`; a zero rail decides 0."""
    x = np.asarray(x)
    return np.stack([(x.real < 0).astype(np.int8), (x.imag < 0).astype(np.int8)], axis=-1)


@dataclass(frozen=True)
class SymbolFrame:
    """Data bits of both nodes for one frame and their QPSK symbols.

    ``bits_node1`` and ``bits_node2`` have a trailing axis of length 2
    holding the (in-phase, quadrature) bits.
    """

    bits_node1: np.ndarray
    bits_node2: np.ndarray
    s1: ComplexLike
    s2: ComplexLike

    @classmethod
    def from_bits(cls, bits_node1, bits_node2, eb1: float, eb2: float) -> "SymbolFrame":
        b1 = np.asarray(bits_node1, dtype=np.int8)
        b2 = np.asarray(bits_node2, dtype=np.int8)
        if b1.shape[-1:] != (2,) or b2.shape != b1.shape:
            raise ValueError("bit arrays must share a shape ending in 2")
        if np.any((b1 > 1) | (b1 < 0) | (b2 > 1) | (b2 < 0)):
            raise ValueError("bits must be 0 or 1")
        s1 = map_bits(b1[..., 0], b1[..., 1], eb1)
        s2 = map_bits(b2[..., 0], b2[..., 1], eb2)
        return cls(b1, b2, s1, s2)

    @property
    def xor_bits(self) -> np.ndarray:
        return self.bits_node1 ^ self.bits_node2
