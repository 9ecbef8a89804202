"""Three-slot transmission chain: uplink, relay PNC decision, downlink.

Slot 1: both nodes send their QPSK symbols.  Slot 2: node 2 repeats and
node 1 sends a 90 degree rotated copy.  Slot 3: the relay broadcasts the
XOR of the two nodes' bit pairs as a QPSK symbol at amplitude ``er``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import ChannelPair, ComplexLike, DegenerateChannel, SymbolFrame, demap_bits, map_bits


@dataclass(frozen=True)
class SlotSignal:
    slot: int
    value: ComplexLike

    def __post_init__(self):
        if self.slot not in (1, 2, 3):
            raise ValueError(f"slot must be 1, 2 or 3, got {self.slot}")


@dataclass(frozen=True)
class RelayDecision:
    xor_i: np.ndarray
    xor_q: np.ndarray
    relay_symbol: ComplexLike

    @classmethod
    def from_bits(cls, xor_i, xor_q, er: float) -> "RelayDecision":
        xor_i = np.asarray(xor_i, dtype=np.int8)
        xor_q = np.asarray(xor_q, dtype=np.int8)
        return cls(xor_i, xor_q, map_bits(xor_i, xor_q, er))

    @property
    def bits(self) -> np.ndarray:
        return np.stack([self.xor_i, self.xor_q], axis=-1)


def uplink_superpose(frame: SymbolFrame, ch: ChannelPair, n1, n2):
    """Relay observations ``(Y1, Y2)`` of the first two slots."""
    y1 = ch.h1 * frame.s1 + ch.h2 * frame.s2 + n1
    y2 = 1j * ch.h1 * frame.s1 + ch.h2 * frame.s2 + n2
    return y1, y2


def pnc_decide(x: ComplexLike, eb1: float):
    """Map an equalised superposition to the XOR bit pair.

    On each rail, ``|r| < eb1`` means the nodes sent opposite bits (XOR 1).
    A rail exactly on the boundary decides 0.
    """
    x = np.asarray(x)
    xor_i = (np.abs(x.real) < eb1).astype(np.int8)
    xor_q = (np.abs(x.imag) < eb1).astype(np.int8)
    return xor_i, xor_q


def downlink_and_recover(dec: RelayDecision, own_bits, h, n):
    """Receive the relay broadcast at an end node and recover the partner's bits.

    The node equalises coherently with ``h``, sign-detects both rails and
    XORs the result with its own bits.
    """
    h = np.asarray(h)
    gain = np.abs(h) ** 2
    if not np.all(gain > 0):
        raise DegenerateChannel("downlink channel gain is zero")
    y = h * dec.relay_symbol + n
    detected = demap_bits(y * np.conj(h) / gain)
    return detected ^ np.asarray(own_bits, dtype=np.int8)


def throughput_symbols_per_slot(scheme: str) -> Fraction:
    """BPSK symbols delivered per node pair per time slot."""
    table = {
        "three_slot": Fraction(4, 3),
        "two_slot_bpsk": Fraction(2, 2),
        "two_slot_qpsk": Fraction(4, 2),
    }
    try:
        return table[scheme]
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}") from None


# the resolvable baselines are the two-slot schemes with stream separation
THROUGHPUT_KEY = {
    "three_slot": "three_slot",
    "resolvable_bpsk": "two_slot_bpsk",
    "resolvable_qpsk": "two_slot_qpsk",
}
