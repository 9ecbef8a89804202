"""Monte Carlo end-to-end BER for the three-slot scheme and the baselines.

Frames are simulated in fixed-size blocks.  Block ``k`` of SNR point ``p``
always uses ``RngStream(seed, p * 2**32 + k, tag=scheme)`` and blocks are
merged in index order, so the stopping decision, and therefore every
reported count, is independent of how many threads ran the blocks.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from . import analysis
from .channel import RngStream, sample_awgn, sample_channel_pair, sample_fading, stream_id
from .core import ChannelPair, SchemeConfig, SymbolFrame, snr_db_to_sigma2, validate_config
from .elce import elce_combine
from .modem import RelayDecision, downlink_and_recover, pnc_decide, uplink_superpose

SCHEMES = ("three_slot", "resolvable_bpsk", "resolvable_qpsk")
SCHEME_TAG = {name: i for i, name in enumerate(SCHEMES)}
BITS_PER_FRAME = {"three_slot": 4, "resolvable_bpsk": 2, "resolvable_qpsk": 4}
DEFAULT_BLOCK = 1 << 14


@dataclass(frozen=True)
class Stopping:
    min_errors: int = 200
    max_trials: int = 10**8

    def __post_init__(self):
        if self.min_errors < 1:
            raise ValueError("min_errors must be >= 1")
        if self.max_trials < 1:
            raise ValueError("max_trials must be >= 1")


@dataclass
class FrameErrors:
    """Per-frame error counts of one simulated batch."""

    errors_1to2: np.ndarray
    errors_2to1: np.ndarray
    relay_bit_errors: np.ndarray

    def counts(self, frames: int | None = None) -> "FrameCounts":
        """Totals over the first ``frames`` frames (all by default)."""
        sl = slice(None, frames)
        return FrameCounts(
            frames=int(np.size(self.errors_1to2[sl])),
            errors_1to2=int(self.errors_1to2[sl].sum()),
            errors_2to1=int(self.errors_2to1[sl].sum()),
            relay_bit_errors=int(self.relay_bit_errors[sl].sum()),
        )


def _per_frame(mismatch) -> np.ndarray:
    return np.count_nonzero(mismatch, axis=-1).astype(np.int64)


@dataclass
class FrameCounts:
    frames: int = 0
    errors_1to2: int = 0
    errors_2to1: int = 0
    relay_bit_errors: int = 0
    excluded_channels: int = 0

    def __iadd__(self, other: "FrameCounts"):
        for k, v in asdict(other).items():
            setattr(self, k, getattr(self, k) + v)
        return self

    @property
    def bit_errors(self) -> int:
        return self.errors_1to2 + self.errors_2to1


def three_slot_errors(cfg: SchemeConfig, ch_up: ChannelPair, ch_down1, ch_down2,
                      rng: RngStream) -> FrameErrors:
    """Simulate a batch of three-slot frames over the given channels.

    Channel arguments are arrays of one length (the batch size) or scalars
    for a single frame.  Data bits and noise are drawn from ``rng``.
    """
    n = np.size(ch_up.h1)
    gen = rng.generator
    bits = gen.integers(0, 2, size=(n, 4), dtype=np.int8)
    frame = SymbolFrame.from_bits(bits[:, :2], bits[:, 2:], cfg.eb1, cfg.eb2)
    h1 = np.reshape(ch_up.h1, n)
    h2 = np.reshape(ch_up.h2, n)
    up = ChannelPair(h1, h2)
    n1 = sample_awgn(rng, cfg.sigma2, n)
    n2 = sample_awgn(rng, cfg.sigma2, n)
    y1, y2 = uplink_superpose(frame, up, n1, n2)
    x = elce_combine(y1, y2, up).x_combined
    xor_i, xor_q = pnc_decide(x, cfg.eb1)
    dec = RelayDecision.from_bits(xor_i, xor_q, cfg.er)
    relay_errors = _per_frame(dec.bits != frame.xor_bits)

    # relay -> node 2 recovers node 1's bits, relay -> node 1 recovers node 2's
    at_node2 = downlink_and_recover(dec, frame.bits_node2, np.reshape(ch_down2, n),
                                    sample_awgn(rng, cfg.sigma2, n))
    at_node1 = downlink_and_recover(dec, frame.bits_node1, np.reshape(ch_down1, n),
                                    sample_awgn(rng, cfg.sigma2, n))
    return FrameErrors(_per_frame(at_node2 != frame.bits_node1),
                       _per_frame(at_node1 != frame.bits_node2), relay_errors)


def run_frames(cfg: SchemeConfig, ch_up: ChannelPair, ch_down1, ch_down2,
               rng: RngStream) -> FrameCounts:
    return three_slot_errors(cfg, ch_up, ch_down1, ch_down2, rng).counts()


def run_frame(cfg: SchemeConfig, ch_up: ChannelPair, ch_down1: complex, ch_down2: complex,
              rng: RngStream) -> tuple[int, int]:
    """One three-slot frame; returns bit errors (node 1 -> 2, node 2 -> 1)."""
    c = run_frames(cfg, ch_up, ch_down1, ch_down2, rng)
    return c.errors_1to2, c.errors_2to1


def baseline_errors(cfg: SchemeConfig, scheme: str, ch_up: ChannelPair, ch_down1,
                    ch_down2, rng: RngStream, energy: str = "amplitude") -> FrameErrors:
    """Resolvable baseline: the relay sees each stream separately (genie).

    Each stream is coherently equalised and sign-detected on its own
    channel, the bits are XORed and broadcast.  BPSK uses the in-phase
    rail only; QPSK uses both rails.
    """
    if scheme not in ("resolvable_bpsk", "resolvable_qpsk"):
        raise ValueError(f"not a baseline scheme: {scheme!r}")
    n = np.size(ch_up.h1)
    gen = rng.generator
    rails = 1 if scheme == "resolvable_bpsk" else 2
    boost = analysis.baseline_amplitude_factor(energy)
    bits = np.zeros((n, 4), dtype=np.int8)
    bits[:, :rails] = gen.integers(0, 2, size=(n, rails), dtype=np.int8)
    bits[:, 2:2 + rails] = gen.integers(0, 2, size=(n, rails), dtype=np.int8)
    frame = SymbolFrame.from_bits(bits[:, :2], bits[:, 2:], boost * cfg.eb1, boost * cfg.eb2)
    s1, s2 = frame.s1, frame.s2
    if rails == 1:
        s1, s2 = s1.real + 0j, s2.real + 0j
    h1 = np.reshape(ch_up.h1, n)
    h2 = np.reshape(ch_up.h2, n)
    r1 = h1 * s1 + sample_awgn(rng, cfg.sigma2, n)
    r2 = h2 * s2 + sample_awgn(rng, cfg.sigma2, n)
    est1 = _sign_bits(r1 * np.conj(h1))
    est2 = _sign_bits(r2 * np.conj(h2))
    xor = (est1 ^ est2)[:, :rails]
    xor_full = np.zeros((n, 2), dtype=np.int8)
    xor_full[:, :rails] = xor
    dec = RelayDecision.from_bits(xor_full[:, 0], xor_full[:, 1], cfg.er)
    relay_errors = _per_frame(xor != frame.xor_bits[:, :rails])
    at_node2 = downlink_and_recover(dec, frame.bits_node2, np.reshape(ch_down2, n),
                                    sample_awgn(rng, cfg.sigma2, n))[:, :rails]
    at_node1 = downlink_and_recover(dec, frame.bits_node1, np.reshape(ch_down1, n),
                                    sample_awgn(rng, cfg.sigma2, n))[:, :rails]
    return FrameErrors(_per_frame(at_node2 != frame.bits_node1[:, :rails]),
                       _per_frame(at_node1 != frame.bits_node2[:, :rails]), relay_errors)


def run_baseline_frames(cfg, scheme, ch_up, ch_down1, ch_down2, rng,
                        energy="amplitude") -> FrameCounts:
    return baseline_errors(cfg, scheme, ch_up, ch_down1, ch_down2, rng, energy).counts()


def run_baseline_frame(cfg, scheme, ch_up, ch_down1, ch_down2, rng, energy="amplitude"):
    c = run_baseline_frames(cfg, scheme, ch_up, ch_down1, ch_down2, rng, energy)
    return c.errors_1to2, c.errors_2to1


def _sign_bits(x):
    return np.stack([(x.real < 0), (x.imag < 0)], axis=-1).astype(np.int8)


def simulate_block(cfg: SchemeConfig, scheme: str, frames: int, rng: RngStream,
                   energy: str = "amplitude") -> tuple[FrameErrors, int]:
    """Draw fresh channels for ``frames`` frames and simulate them.

    Returns the per-frame errors and the number of channel draws rejected
    by the gain floor.
    """
    ch_up = sample_channel_pair(rng, cfg.gamma_bar, frames)
    ch_down1 = sample_fading(rng, cfg.gamma_bar, frames)
    ch_down2 = sample_fading(rng, cfg.gamma_bar, frames)
    if scheme == "three_slot":
        errors = three_slot_errors(cfg, ch_up, ch_down1, ch_down2, rng)
    else:
        errors = baseline_errors(cfg, scheme, ch_up, ch_down1, ch_down2, rng, energy)
    return errors, rng.excluded


def wilson_interval(errors: int, trials: int, alpha: float = 0.05) -> tuple[float, float]:
    lo, hi = proportion_confint(errors, trials, alpha=alpha, method="wilson")
    p = errors / trials
    return min(float(lo), p), max(float(hi), p)


@dataclass
class BerEstimate:
    scheme: str
    snr_db: float
    trials: int
    bits: int
    bit_errors: int
    ber: float
    ci_low: float
    ci_high: float
    censored: bool
    stop_reason: str
    errors_1to2: int = 0
    errors_2to1: int = 0
    relay_bit_errors: int = 0
    relay_bits: int = 0
    excluded_channels: int = 0

    @property
    def relay_ber(self) -> float:
        return self.relay_bit_errors / self.relay_bits if self.relay_bits else 0.0

    def widened_interval(self, factor: float = 3.0) -> tuple[float, float]:
        return (self.ber - factor * (self.ber - self.ci_low),
                self.ber + factor * (self.ci_high - self.ber))


def worker_count() -> int:
    env = os.environ.get("PNCSIM_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(8, os.cpu_count() or 1))


def run_point(cfg: SchemeConfig, scheme: str, snr_db: float, stopping: Stopping, seed: int,
              point_index: int = 0, workers: int | None = None,
              block_frames: int = DEFAULT_BLOCK, energy: str = "amplitude") -> BerEstimate:
    """Estimate the end-to-end BER at one SNR point.

    ``cfg.sigma2`` is replaced by the value implied by ``snr_db`` relative
    to ``eb2**2``.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    cfg = validate_config(cfg.with_sigma2(snr_db_to_sigma2(snr_db, cfg.eb2**2)))
    workers = workers or worker_count()
    n_blocks = -(-stopping.max_trials // block_frames)
    total = FrameCounts()
    reason = "max_trials"

    def block(k: int):
        size = min(block_frames, stopping.max_trials - k * block_frames)
        rng = RngStream(seed, stream_id(point_index, k), tag=SCHEME_TAG[scheme])
        return simulate_block(cfg, scheme, size, rng, energy)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        k = 0
        done = False
        while k < n_blocks and not done:
            wave = list(pool.map(block, range(k, min(k + workers, n_blocks))))
            for errors, excluded in wave:
                k += 1
                total.excluded_channels += excluded
                per_frame = errors.errors_1to2 + errors.errors_2to1
                need = stopping.min_errors - total.bit_errors
                if per_frame.sum() >= need:
                    # stop at the frame that reaches min_errors
                    cut = int(np.searchsorted(np.cumsum(per_frame), need)) + 1
                    total += errors.counts(cut)
                    reason = "min_errors"
                    done = True
                    break
                total += errors.counts()

    bits = BITS_PER_FRAME[scheme] * total.frames
    lo, hi = wilson_interval(total.bit_errors, bits)
    rails = 2 if scheme != "resolvable_bpsk" else 1
    return BerEstimate(
        scheme=scheme, snr_db=float(snr_db), trials=total.frames, bits=bits,
        bit_errors=total.bit_errors, ber=total.bit_errors / bits, ci_low=lo, ci_high=hi,
        censored=reason != "min_errors", stop_reason=reason,
        errors_1to2=total.errors_1to2, errors_2to1=total.errors_2to1,
        relay_bit_errors=total.relay_bit_errors, relay_bits=rails * total.frames,
        excluded_channels=total.excluded_channels,
    )


def analytic_ber(cfg: SchemeConfig, scheme: str, snr_db: float, mode: str = "printed",
                 order: int = analysis.DEFAULT_ORDER, energy: str = "amplitude") -> float:
    point = cfg.with_sigma2(snr_db_to_sigma2(snr_db, cfg.eb2**2))
    if scheme == "three_slot":
        return analysis.end_to_end_ber(point, mode, order).p_overall
    return analysis.resolvable_baseline_ber(point, energy)


@dataclass
class SweepResult:
    config: SchemeConfig
    estimates: list
    analytic: dict
    metadata: dict = field(default_factory=dict)

    def rows(self):
        for est in self.estimates:
            yield est, self.analytic[(est.scheme, est.snr_db)]


def sweep(cfg: SchemeConfig, schemes, snr_grid, stopping: Stopping, seed: int,
          mode: str = "printed", order: int = analysis.DEFAULT_ORDER,
          workers: int | None = None, block_frames: int = DEFAULT_BLOCK,
          energy: str = "amplitude") -> SweepResult:
    """Run every (scheme, SNR) point; results are ordered by scheme then SNR.

    The SNR grid is sorted and de-duplicated first, so the stream of each
    point depends only on its rank in the grid.
    """
    grid = sorted({float(s) for s in snr_grid})
    if not grid:
        raise ValueError("empty SNR grid")
    schemes = list(schemes)
    start = time.perf_counter()
    estimates, analytic = [], {}
    for scheme in schemes:
        for idx, snr in enumerate(grid):
            est = run_point(cfg, scheme, snr, stopping, seed, idx, workers, block_frames, energy)
            estimates.append(est)
            analytic[(scheme, snr)] = analytic_ber(cfg, scheme, snr, mode, order, energy)
    meta = {
        "seed": seed,
        "runtime_s": time.perf_counter() - start,
        "excluded_channels": sum(e.excluded_channels for e in estimates),
        "censored_points": sum(e.censored for e in estimates),
        "total_points": len(estimates),
    }
    return SweepResult(cfg, estimates, analytic, meta)
