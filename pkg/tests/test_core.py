import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pncsim.core import (AmplitudeOrder, ChannelPair, DegenerateChannel, NonPositive,
                         SchemeConfig, SymbolFrame, demap_bits, map_bits, sigma2_to_snr_db,
                         snr_db_to_sigma2, validate_config)

bits = st.integers(0, 1)


def test_default_config_is_valid():
    cfg = SchemeConfig(4, 2, 1, 0.5, 100)
    assert validate_config(cfg) is cfg


def test_amplitude_order_rejected():
    with pytest.raises(AmplitudeOrder):
        validate_config(SchemeConfig(eb1=2, eb2=4))


@pytest.mark.parametrize("field", ["eb1", "eb2", "er", "sigma2", "gamma_bar"])
def test_non_positive_rejected(field):
    kwargs = {field: 0.0}
    with pytest.raises(NonPositive):
        validate_config(SchemeConfig(**kwargs))


def test_nan_rejected():
    with pytest.raises(NonPositive):
        validate_config(SchemeConfig(sigma2=float("nan")))


@pytest.mark.parametrize("snr, ref, expected", [(0, 1.0, 1.0), (10, 1.0, 0.1), (20, 4.0, 0.04)])
def test_snr_db_to_sigma2(snr, ref, expected):
    assert snr_db_to_sigma2(snr, ref) == pytest.approx(expected, rel=1e-14)


def test_snr_reference_must_be_positive():
    with pytest.raises(NonPositive):
        snr_db_to_sigma2(3.0, 0.0)


@given(st.floats(-30, 60), st.floats(0.01, 100))
def test_snr_round_trip_and_monotone(snr, ref):
    s2 = snr_db_to_sigma2(snr, ref)
    assert sigma2_to_snr_db(s2, ref) == pytest.approx(snr, abs=1e-9)
    assert snr_db_to_sigma2(snr + 1.0, ref) < s2


@pytest.mark.parametrize("bi, bq, amp, expected",
                         [(0, 0, 4, 4 + 4j), (1, 0, 2, -2 + 2j), (1, 1, 1, -1 - 1j)])
def test_map_bits_convention(bi, bq, amp, expected):
    assert map_bits(bi, bq, amp) == expected


@given(bits, bits, st.floats(1e-3, 1e3))
def test_map_demap_round_trip(bi, bq, amp):
    assert tuple(demap_bits(map_bits(bi, bq, amp))) == (bi, bq)


@given(st.lists(st.tuples(bits, bits, bits, bits), min_size=1, max_size=32),
       st.floats(0.1, 10), st.floats(0.01, 1))
def test_symbol_frame_invariants(rows, eb1, frac):
    eb2 = eb1 * frac
    b = np.array(rows, dtype=np.int8)
    frame = SymbolFrame.from_bits(b[:, :2], b[:, 2:], eb1, eb2)
    assert set(np.abs(frame.s1.real)) == {eb1} and set(np.abs(frame.s1.imag)) == {eb1}
    assert np.allclose(np.abs(frame.s2.real), eb2) and np.allclose(np.abs(frame.s2.imag), eb2)
    np.testing.assert_array_equal(frame.xor_bits, b[:, :2] ^ b[:, 2:])
    np.testing.assert_array_equal(demap_bits(frame.s1), b[:, :2])
    np.testing.assert_array_equal(demap_bits(frame.s2), b[:, 2:])


def test_symbol_frame_rejects_bad_bits():
    with pytest.raises(ValueError):
        SymbolFrame.from_bits([0, 2], [0, 1], 4, 2)
    with pytest.raises(ValueError):
        SymbolFrame.from_bits([0, 1, 0], [0, 1, 1], 4, 2)


@given(st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3),
       st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3))
def test_channel_pair_gains(h1, h2):
    ch = ChannelPair(h1, h2)
    assert ch.gamma1 == pytest.approx(abs(h1) ** 2, rel=1e-12)
    assert ch.gamma2 == pytest.approx(abs(h2) ** 2, rel=1e-12)


def test_channel_floor():
    ChannelPair(1.0, 1j).check_floor(0.5)
    with pytest.raises(DegenerateChannel):
        ChannelPair(1e-6, 1.0).check_floor(1e-9)
    with pytest.raises(DegenerateChannel):
        ChannelPair(0.0, 1.0).check_floor()
