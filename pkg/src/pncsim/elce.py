"""Embedded linear channel equalisation at the relay.

The relay rotates the two uplink observations by the conjugate channels,
``Z1 = Y2 / h1`` and ``Z2 = Y1 / h2``, and applies a fixed-structure 2x2
matrix that returns ``[s2, s1]`` plus noise.  Summing the two outputs
gives the equalised superposition ``s1 + s2 + noise`` without ever
separating the streams.

With the matrix applied as written, the output noise is

    x1 noise = (1+j)/(2 h2) * (n2 - j n1)
    x2 noise = (1+j)/(2 h1) * (n1 - n2)

The two terms share ``n1`` and ``n2``, so their sum carries a
channel-phase dependent cross term (see
:func:`residual_noise_variance_exact`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ChannelPair, ComplexLike


@dataclass(frozen=True)
class EqualizationMatrix:
    m11: ComplexLike
    m12: ComplexLike
    m21: ComplexLike
    m22: ComplexLike

    def apply(self, z1, z2):
        return self.m11 * z1 + self.m12 * z2, self.m21 * z1 + self.m22 * z2

    def as_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]], dtype=complex)


@dataclass(frozen=True)
class ElceOutput:
    x1: ComplexLike
    x2: ComplexLike

    @property
    def x_combined(self):
        return self.x1 + self.x2


def build_z(y1, y2, ch: ChannelPair):
    """Conjugate-rotate the slot observations; note the cross pairing."""
    ch.check_floor()
    z1 = np.conj(ch.h1) / ch.gamma1 * y2
    z2 = np.conj(ch.h2) / ch.gamma2 * y1
    return z1, z2


def equalization_matrix(ch: ChannelPair) -> EqualizationMatrix:
    ch.check_floor()
    h1, h2 = ch.h1, ch.h2
    a = h1 * np.conj(h2) / ch.gamma2
    d = 1j * np.conj(h1) * h2 / ch.gamma1
    left1, left2 = 0.5 * (1 + 1j), 0.5 * (1 - 1j)
    return EqualizationMatrix(left1 * a, left1 * -1j, left2 * -1j, left2 * d)


def elce_combine(y1, y2, ch: ChannelPair) -> ElceOutput:
    z1, z2 = build_z(y1, y2, ch)
    x1, x2 = equalization_matrix(ch).apply(z1, z2)
    return ElceOutput(x1, x2)


def residual_noise_variance_exact(ch: ChannelPair, sigma2: float):
    """Per-rail variance of ``x_combined - (s1 + s2)``.

    The residual is circularly symmetric, so its total complex variance is
    twice this value.
    """
    ch.check_floor()
    g1, g2 = ch.gamma1, ch.gamma2
    cross = np.real((1 + 1j) * ch.h1 * np.conj(ch.h2))
    return sigma2 * (1.0 / g1 + 1.0 / g2) - sigma2 * cross / (g1 * g2)


def residual_noise_variance_nominal(ch: ChannelPair, sigma2: float):
    """Per-rail residual variance without the cross term, ``sigma2 (1/g1 + 1/g2)``."""
    ch.check_floor()
    return sigma2 * (1.0 / ch.gamma1 + 1.0 / ch.gamma2)
