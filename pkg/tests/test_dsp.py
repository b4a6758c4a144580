"""Transmitter primitive tests: PRBS, 16-QAM, RRC shaping."""

import numpy as np
import pytest

from fibereq.dsp import (
    DualPolWaveform,
    SymbolFrame,
    circular_filter,
    dbm_to_watt,
    prbs_generate,
    prbs_states,
    qam16_demap_hard,
    qam16_map,
    resample_waveform,
    rrc_taps,
    shape_and_upsample,
)


class TestPrbs:
    def test_order7_repeats_with_full_period(self):
        bits = prbs_generate(order=7, seed=1, n_bits=254)
        assert np.array_equal(bits[:127], bits[127:254])
        # and not with any shorter period
        assert not np.array_equal(bits[:120], bits[1:121])

    def test_order3_states_visit_all_nonzero(self):
        # hand-enumerable: 3-bit register, feedback from taps (3, 2)
        states = prbs_states(order=3, seed=1, n_steps=7)
        assert sorted(states.tolist()) == [1, 2, 3, 4, 5, 6, 7]

    @pytest.mark.parametrize("order", [2, 3, 5, 7, 9, 11, 13, 16])
    def test_period_is_exactly_2k_minus_1(self, order):
        period = 2**order - 1
        states = prbs_states(order, seed=1, n_steps=2 * period)
        # state returns to the seed exactly every `period` steps
        returns = np.flatnonzero(states == 1) + 1
        assert returns[0] == period or states[period - 1] == 1
        assert np.array_equal(states[:period], states[period:2 * period])

    def test_order32_no_period_within_4m_bits(self):
        # state never revisits the seed within 2^22 steps -> no period <= 2^22
        n = 2**22
        states = prbs_states(order=32, seed=1, n_steps=n)
        assert not np.any(states == 1)

    def test_determinism(self):
        a = prbs_generate(15, seed=77, n_bits=500)
        b = prbs_generate(15, seed=77, n_bits=500)
        assert np.array_equal(a, b)

    def test_rejects_bad_order_and_zero_seed(self):
        with pytest.raises(ValueError):
            prbs_generate(1, 1, 10)
        with pytest.raises(ValueError):
            prbs_generate(33, 1, 10)
        with pytest.raises(ValueError):
            prbs_generate(8, 0, 10)
        with pytest.raises(ValueError):
            prbs_generate(8, 256, 10)  # zero modulo 2**8


class TestQam16:
    def all_words(self):
        return np.array([[b >> 3 & 1, b >> 2 & 1, b >> 1 & 1, b & 1]
                         for b in range(16)]).reshape(-1)

    def test_corner_word(self):
        sym = qam16_map(np.array([1, 0, 1, 0]))
        assert sym[0] == pytest.approx((3 + 3j) / np.sqrt(10))

    def test_constellation_distinct_and_unit_energy(self):
        syms = qam16_map(self.all_words())
        assert len(np.unique(np.round(syms, 12))) == 16
        assert np.mean(np.abs(syms) ** 2) == pytest.approx(1.0, abs=1e-12)

    def test_gray_adjacency(self):
        # neighboring points (distance 2/sqrt(10)) differ in exactly one bit
        syms = qam16_map(self.all_words())
        bits = self.all_words().reshape(16, 4)
        step = 2 / np.sqrt(10)
        for i in range(16):
            for j in range(i + 1, 16):
                if abs(abs(syms[i] - syms[j]) - step) < 1e-9:
                    assert np.sum(bits[i] != bits[j]) == 1

    def test_roundtrip(self):
        bits = self.all_words()
        assert np.array_equal(qam16_demap_hard(qam16_map(bits)), bits)

    def test_decision_cell(self):
        # inside the (1+1j)/sqrt(10) cell
        probe = (0.4 + 0.4j)
        want = qam16_demap_hard(qam16_map(np.array([1, 1, 1, 1])))
        assert np.array_equal(qam16_demap_hard(np.array([probe])), want)

    def test_boundary_tie_breaks_to_lower_level(self):
        # exactly on the +2/sqrt(10) boundary: resolved toward +1, not +3
        edge = 2 / np.sqrt(10) + 0j
        bits = qam16_demap_hard(np.array([edge]))
        sym = qam16_map(bits)
        assert sym[0].real == pytest.approx(1 / np.sqrt(10))
        # and on the 0 boundary: resolved toward -1
        bits0 = qam16_demap_hard(np.array([0j]))
        assert qam16_map(bits0)[0].real == pytest.approx(-1 / np.sqrt(10))

    def test_rejects_bad_length(self):
        with pytest.raises(ValueError):
            qam16_map(np.array([1, 0, 1]))


class TestRrc:
    def test_center_tap_closed_form(self):
        beta = 0.1
        h = rrc_taps(beta, 64, 8)
        unnormalized_center = 1 - beta + 4 * beta / np.pi
        assert unnormalized_center == pytest.approx(1.02732, abs=1e-5)
        # normalization preserves the shape: ratio to a neighbor matches
        t = 1 / 8  # one sample off center, in symbol periods
        num = np.sin(np.pi * t * 0.9) + 4 * beta * t * np.cos(np.pi * t * 1.1)
        den = np.pi * t * (1 - (4 * beta * t) ** 2)
        center = (len(h) - 1) // 2
        assert h[center + 1] / h[center] == pytest.approx((num / den) / unnormalized_center, abs=1e-12)

    def test_symmetry_and_unit_energy(self):
        h = rrc_taps(0.1, 64, 8)
        assert len(h) % 2 == 1
        assert np.array_equal(h, h[::-1])
        assert np.sum(h**2) == pytest.approx(1.0, abs=1e-12)

    def test_cascade_isi_below_1e3(self):
        h = rrc_taps(0.1, 64, 8)
        cascade = np.convolve(h, h)
        center = (len(cascade) - 1) // 2
        at_symbols = cascade[center % 8::8]
        peak_idx = np.argmax(np.abs(at_symbols))
        peak = at_symbols[peak_idx]
        others = np.delete(at_symbols, peak_idx)
        assert np.sqrt(np.sum(others**2)) / peak < 1e-3

    def test_rejects_bad_rolloff(self):
        with pytest.raises(ValueError):
            rrc_taps(0.0, 64, 8)
        with pytest.raises(ValueError):
            rrc_taps(1.5, 64, 8)


class TestShaping:
    def frame(self, n=256, seed=3):
        rng = np.random.Generator(np.random.MT19937(seed))
        return SymbolFrame(
            qam16_map(rng.integers(0, 2, 4 * n)),
            qam16_map(rng.integers(0, 2, 4 * n)),
        )

    def test_sample_rate(self):
        wave = shape_and_upsample(self.frame(), 8, 0.1, 34.4e9)
        assert wave.sample_rate == pytest.approx(275.2e9)

    def test_launch_power(self):
        wave = shape_and_upsample(self.frame(), 8, 0.1, 34.4e9, launch_power_dbm=2.0)
        assert wave.power() == pytest.approx(dbm_to_watt(2.0), rel=5e-3)
        assert wave.power() * 1e3 == pytest.approx(1.585, rel=5e-3)

    def test_single_symbol_is_shifted_taps(self):
        n = 64
        frame = SymbolFrame(
            np.concatenate([[1.0 + 0j], np.zeros(n - 1, dtype=complex)]),
            np.zeros(n, dtype=complex),
        )
        sps = 8
        wave = shape_and_upsample(frame, sps, 0.1, 34.4e9, launch_power_dbm=0.0)
        taps = rrc_taps(0.1, 64, sps)
        # circular placement centered on sample 0, up to the power scaling
        kernel = np.zeros(n * sps)
        half = (len(taps) - 1) // 2
        idx = (np.arange(len(taps)) - half) % (n * sps)
        np.add.at(kernel, idx, taps)
        scale = np.sqrt(dbm_to_watt(0.0) / (np.sum(kernel**2) / (n * sps)))
        assert np.max(np.abs(wave.x_pol - scale * kernel)) < 1e-12

    def test_linearity_superposition(self):
        f1, f2 = self.frame(seed=1), self.frame(seed=2)
        fsum = SymbolFrame(f1.x_pol + f2.x_pol, f1.y_pol + f2.y_pol)
        # superposition holds for the unscaled shaping (circular filter)
        taps = rrc_taps(0.1, 16, 4)

        def shape(frame):
            up = np.zeros(len(frame) * 4, dtype=complex)
            up[::4] = frame.x_pol
            return circular_filter(up, taps)

        assert np.allclose(shape(fsum), shape(f1) + shape(f2), atol=1e-12)

    def test_resample_roundtrip(self):
        wave = shape_and_upsample(self.frame(), 8, 0.1, 34.4e9, launch_power_dbm=0.0)
        down = resample_waveform(wave, 2 * 34.4e9)
        back = resample_waveform(down, 8 * 34.4e9)
        assert len(down) == len(wave) // 4
        assert np.max(np.abs(back.x_pol - wave.x_pol)) < 1e-9


def test_dualpol_validation():
    with pytest.raises(ValueError):
        DualPolWaveform(np.zeros(4, complex), np.zeros(5, complex), 1.0)
    with pytest.raises(ValueError):
        DualPolWaveform(np.zeros(4, complex), np.zeros(4, complex), 0.0)
