from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pncsim import analysis
from pncsim.channel import RngStream, sample_awgn, sample_fading
from pncsim.core import ChannelPair, DegenerateChannel, SchemeConfig, SymbolFrame
from pncsim.elce import elce_combine
from pncsim.modem import (RelayDecision, SlotSignal, downlink_and_recover, pnc_decide,
                          throughput_symbols_per_slot, uplink_superpose)

ALL = np.array(list(product((0, 1), repeat=4)), dtype=np.int8)


def test_uplink_unit_channels():
    frame = SymbolFrame.from_bits([0, 0], [0, 0], 4, 2)
    y1, y2 = uplink_superpose(frame, ChannelPair(1.0, 1.0), 0, 0)
    assert y1 == 6 + 6j
    assert y2 == -2 + 6j


def test_uplink_zero_signal_is_noise():
    frame = SymbolFrame(np.zeros(2), np.zeros(2), 0j, 0j)
    n = 0.3 - 0.7j
    y1, _ = uplink_superpose(frame, ChannelPair(0.4 + 1j, -2.0), n, 0)
    assert y1 == n


def test_pnc_decide_examples():
    assert pnc_decide(6 - 2j, 4) == (0, 1)
    assert pnc_decide(6 + 6j, 4) == (0, 0)
    assert pnc_decide(2 + 2j, 4) == (1, 1)
    # boundary ties decide 0
    assert pnc_decide(4 - 4j, 4) == (0, 0)


@given(st.floats(0.1, 10), st.floats(0.05, 1.0))
def test_band_rule_reproduces_xor_for_all_points(eb1, frac):
    eb2 = eb1 * frac
    frame = SymbolFrame.from_bits(ALL[:, :2], ALL[:, 2:], eb1, eb2)
    xi, xq = pnc_decide(frame.s1 + frame.s2, eb1)
    np.testing.assert_array_equal(np.stack([xi, xq], -1), frame.xor_bits)


def _axis_neighbours():
    cfg = SchemeConfig()
    frame = SymbolFrame.from_bits(ALL[:, :2], ALL[:, 2:], cfg.eb1, cfg.eb2)
    pts = frame.s1 + frame.s2
    pairs = []
    for along, across in ((np.real, np.imag), (np.imag, np.real)):
        levels = np.unique(along(pts))
        for i, j in product(range(16), repeat=2):
            if across(pts[i]) != across(pts[j]):
                continue
            k = int(np.searchsorted(levels, along(pts[i])))
            if k + 1 < len(levels) and along(pts[j]) == levels[k + 1]:
                pairs.append((i, j))
    return pairs, frame


def test_neighbours_differ_in_at_most_one_xor_bit():
    pairs, frame = _axis_neighbours()
    assert len(pairs) == 2 * 4 * 3
    for i, j in pairs:
        assert np.count_nonzero(frame.xor_bits[i] != frame.xor_bits[j]) <= 1
        assert np.count_nonzero(ALL[i] != ALL[j]) in (1, 2)


@pytest.mark.xfail(strict=True, reason="crossing the origin flips both nodes' bits on that "
                   "rail, so the middle neighbours differ in two data bits")
def test_neighbours_differ_in_one_data_bit():
    pairs, _ = _axis_neighbours()
    for i, j in pairs:
        assert np.count_nonzero(ALL[i] != ALL[j]) == 1


def test_relay_decision_rails():
    dec = RelayDecision.from_bits([0, 1, 1], [1, 0, 1], 1.5)
    assert set(np.abs(dec.relay_symbol.real)) == {1.5}
    np.testing.assert_array_equal(dec.bits, [[0, 1], [1, 0], [1, 1]])


def test_slot_signal_validates_slot():
    SlotSignal(3, 1j)
    with pytest.raises(ValueError):
        SlotSignal(4, 1j)


@pytest.mark.parametrize("dec_bits, own, expected", [((0, 1), (1, 1), (1, 0)),
                                                     ((0, 0), (0, 0), (0, 0))])
def test_downlink_noise_free(dec_bits, own, expected):
    dec = RelayDecision.from_bits(*dec_bits, 1.0)
    for h in (1.0, -0.3 + 2j, 1e-3j):
        assert tuple(downlink_and_recover(dec, own, h, 0)) == expected


def test_downlink_zero_channel():
    with pytest.raises(DegenerateChannel):
        downlink_and_recover(RelayDecision.from_bits(0, 0, 1.0), (0, 0), 0j, 0)


def test_noise_free_chain_recovers_partner_bits():
    cfg = SchemeConfig()
    rng = RngStream(21)
    n = 16 * 100
    b = np.tile(ALL, (100, 1))
    frame = SymbolFrame.from_bits(b[:, :2], b[:, 2:], cfg.eb1, cfg.eb2)
    ch = ChannelPair(sample_fading(rng, 1.0, n), sample_fading(rng, 1.0, n))
    y1, y2 = uplink_superpose(frame, ch, 0, 0)
    dec = RelayDecision.from_bits(*pnc_decide(elce_combine(y1, y2, ch).x_combined, cfg.eb1),
                                  cfg.er)
    np.testing.assert_array_equal(
        downlink_and_recover(dec, frame.bits_node2, sample_fading(rng, 1.0, n), 0),
        frame.bits_node1)
    np.testing.assert_array_equal(
        downlink_and_recover(dec, frame.bits_node1, sample_fading(rng, 1.0, n), 0),
        frame.bits_node2)


def test_downlink_monte_carlo_matches_closed_form():
    cfg = SchemeConfig(er=1.0, sigma2=0.5, gamma_bar=100.0)
    rng = RngStream(8)
    n = 10**6
    xor = rng.generator.integers(0, 2, size=(n, 2), dtype=np.int8)
    own = rng.generator.integers(0, 2, size=(n, 2), dtype=np.int8)
    dec = RelayDecision.from_bits(xor[:, 0], xor[:, 1], cfg.er)
    got = downlink_and_recover(dec, own, sample_fading(rng, cfg.gamma_bar, n),
                               sample_awgn(rng, cfg.sigma2, n))
    errors = np.count_nonzero(got != (xor ^ own))
    p = analysis.downlink_ber(cfg)
    bits = 2 * n
    assert abs(errors - p * bits) < 3 * np.sqrt(bits * p * (1 - p))


def test_throughput():
    assert throughput_symbols_per_slot("three_slot") == Fraction(4, 3)
    assert throughput_symbols_per_slot("two_slot_bpsk") == 1
    assert throughput_symbols_per_slot("two_slot_qpsk") == 2
    ratio = throughput_symbols_per_slot("three_slot") / throughput_symbols_per_slot("two_slot_bpsk")
    assert ratio == Fraction(4, 3)
    with pytest.raises(ValueError):
        throughput_symbols_per_slot("five_slot")
