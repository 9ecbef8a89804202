"""Rayleigh block fading and AWGN with reproducible random streams.

Stream derivation rule: every Monte Carlo block of ``frames_per_block``
frames at SNR point ``p`` (index into the sorted SNR grid) and block
index ``k`` draws from ``RngStream(seed, p * 2**32 + k)``. Work is
assigned to threads by block, so the number of threads never changes
which numbers a given frame sees.
"""

from __future__ import annotations

import numpy as np

from .core import ChannelPair, DegenerateChannel, NonPositive

GAIN_FLOOR_FACTOR = 1e-9
MAX_RESAMPLE_ROUNDS = 16


def stream_id(point_index: int, block_index: int) -> int:
    if not 0 <= block_index < 2**32:
        raise ValueError("block index must fit in 32 bits")
    return point_index * 2**32 + block_index


class RngStream:
    """A deterministic random substream keyed by ``(seed, stream_id)``.

    ``tag`` separates otherwise identical streams used by different
    schemes in one sweep.
    """

    def __init__(self, seed: int, stream_id: int = 0, tag: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.tag = int(tag)
        ss = np.random.SeedSequence([self.seed, self.tag], spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(ss))
        # count of channel draws rejected by the gain floor
        self.excluded = 0

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, tag={self.tag})"


def complex_normal(gen: np.random.Generator, variance: float, size=None):
    """Circularly symmetric complex Gaussian with total variance ``variance``."""
    scale = np.sqrt(variance / 2.0)
    re = gen.standard_normal(size)
    im = gen.standard_normal(size)
    return scale * (re + 1j * im)


def sample_fading(rng: RngStream, gamma_bar: float, size=None):
    """Draw Rayleigh coefficients with ``E|h|^2 = gamma_bar`` above the gain floor."""
    if not gamma_bar > 0:
        raise NonPositive(f"gamma_bar must be > 0, got {gamma_bar!r}")
    floor = GAIN_FLOOR_FACTOR * gamma_bar
    h = complex_normal(rng.generator, gamma_bar, size)
    if size is None:
        for _ in range(MAX_RESAMPLE_ROUNDS):
            if abs(h) ** 2 >= floor:
                return complex(h)
            rng.excluded += 1
            h = complex_normal(rng.generator, gamma_bar)
        raise DegenerateChannel("gain floor not met within retry budget")
    h = np.asarray(h)
    for _ in range(MAX_RESAMPLE_ROUNDS):
        bad = np.abs(h) ** 2 < floor
        n_bad = int(bad.sum())
        if n_bad == 0:
            return h
        rng.excluded += n_bad
        h[bad] = complex_normal(rng.generator, gamma_bar, n_bad)
    raise DegenerateChannel("gain floor not met within retry budget")


def sample_channel_pair(rng: RngStream, gamma_bar: float, size=None) -> ChannelPair:
    """Independent Rayleigh uplink channels for one frame or a batch."""
    h1 = sample_fading(rng, gamma_bar, size)
    h2 = sample_fading(rng, gamma_bar, size)
    return ChannelPair(h1, h2)


def sample_awgn(rng: RngStream, sigma2: float, size=None):
    """Complex AWGN with variance ``sigma2`` on each rail."""
    if sigma2 < 0:
        raise NonPositive(f"sigma2 must be >= 0, got {sigma2!r}")
    n = complex_normal(rng.generator, 2.0 * sigma2, size)
    return complex(n) if size is None else n
