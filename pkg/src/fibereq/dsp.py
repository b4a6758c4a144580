"""Bit- and symbol-level transmitter primitives.

PRBS generation, Gray-mapped 16-QAM with hard-decision demapping,
root-raised-cosine pulse shaping and upsampling to a dual-polarization
waveform. Everything here is a pure function of its inputs; frames and
waveforms are thin dataclass containers around complex numpy arrays.

Conventions used throughout the package:

* symbol frames (1 sample per symbol) are normalized so the constellation
  has unit average energy,
* waveforms carry field amplitudes in sqrt(W), so ``|x|**2 + |y|**2``
  averages to the launch power in watts,
* all shaping filters are applied as *circular* convolutions with the tap
  vector centered at lag zero. The whole frame is treated as periodic,
  which keeps symbol k aligned with sample ``k*sps`` through the entire
  simulation chain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SymbolFrame",
    "DualPolWaveform",
    "prbs_generate",
    "qam16_map",
    "qam16_demap_hard",
    "rrc_taps",
    "shape_and_upsample",
    "circular_filter",
    "resample_waveform",
    "dbm_to_watt",
    "watt_to_dbm",
]

# Maximal-length LFSR feedback taps (polynomial exponents) per register order.
# Order 32 uses x^32 + x^22 + x^2 + x + 1.
_MAX_LEN_TAPS = {
    2: (2, 1), 3: (3, 2), 4: (4, 3), 5: (5, 3), 6: (6, 5), 7: (7, 6),
    8: (8, 6, 5, 4), 9: (9, 5), 10: (10, 7), 11: (11, 9), 12: (12, 6, 4, 1),
    13: (13, 4, 3, 1), 14: (14, 5, 3, 1), 15: (15, 14), 16: (16, 15, 13, 4),
    17: (17, 14), 18: (18, 11), 19: (19, 6, 2, 1), 20: (20, 17), 21: (21, 19),
    22: (22, 21), 23: (23, 18), 24: (24, 23, 22, 17), 25: (25, 22),
    26: (26, 6, 2, 1), 27: (27, 5, 2, 1), 28: (28, 25), 29: (29, 27),
    30: (30, 6, 4, 1), 31: (31, 28), 32: (32, 22, 2, 1),
}

# Gray-coded 2-bit word -> amplitude level (before 1/sqrt(10) scaling).
_GRAY2LEVEL = {0b00: -3, 0b01: -1, 0b11: 1, 0b10: 3}
_LEVEL_BITS = np.array([0b00, 0b01, 0b11, 0b10], dtype=np.uint8)  # index = level rank
_QAM16_SCALE = 1.0 / np.sqrt(10.0)


@dataclass
class SymbolFrame:
    """Transmitted symbols for both polarizations at 1 sample/symbol."""

    x_pol: np.ndarray
    y_pol: np.ndarray

    def __post_init__(self):
        self.x_pol = np.asarray(self.x_pol, dtype=np.complex128)
        self.y_pol = np.asarray(self.y_pol, dtype=np.complex128)
        if self.x_pol.shape != self.y_pol.shape or self.x_pol.ndim != 1:
            raise ValueError("polarizations must be equal-length 1-D arrays")

    def __len__(self):
        return self.x_pol.size

    def normalized(self) -> "SymbolFrame":
        """Rescale so the mean symbol energy over both polarizations is 1."""
        p = 0.5 * (np.mean(np.abs(self.x_pol) ** 2) + np.mean(np.abs(self.y_pol) ** 2))
        s = 1.0 / np.sqrt(p)
        return SymbolFrame(self.x_pol * s, self.y_pol * s)


@dataclass
class DualPolWaveform:
    """Complex baseband field samples for both polarizations.

    Amplitudes are in sqrt(W); ``sample_rate`` is in Hz.
    """

    x_pol: np.ndarray
    y_pol: np.ndarray
    sample_rate: float

    def __post_init__(self):
        self.x_pol = np.asarray(self.x_pol, dtype=np.complex128)
        self.y_pol = np.asarray(self.y_pol, dtype=np.complex128)
        if self.x_pol.shape != self.y_pol.shape or self.x_pol.ndim != 1:
            raise ValueError("polarizations must be equal-length 1-D arrays")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")

    def __len__(self):
        return self.x_pol.size

    def power(self) -> float:
        """Mean total power over both polarizations, in watts."""
        return float(np.mean(np.abs(self.x_pol) ** 2 + np.abs(self.y_pol) ** 2))

    def copy(self) -> "DualPolWaveform":
        return DualPolWaveform(self.x_pol.copy(), self.y_pol.copy(), self.sample_rate)


def dbm_to_watt(p_dbm: float) -> float:
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


def watt_to_dbm(p_watt: float) -> float:
    return 10.0 * np.log10(p_watt / 1e-3)


def prbs_generate(order: int, seed: int, n_bits: int) -> np.ndarray:
    """Maximal-length LFSR bit sequence.

    Parameters
    ----------
    order : int
        Register length, 2..32. The feedback polynomial is the standard
        maximal-length choice for that order, so the period is 2**order - 1.
    seed : int
        Nonzero initial register state (only the low ``order`` bits are used,
        and they must not all be zero).
    n_bits : int
        Number of output bits.

    Returns
    -------
    np.ndarray of uint8, shape (n_bits,)
    """
    if not isinstance(order, (int, np.integer)) or not 2 <= order <= 32:
        raise ValueError(f"order must be an integer in [2, 32], got {order}")
    mask = (1 << order) - 1
    state = int(seed) & mask
    if state == 0:
        raise ValueError("seed must be nonzero modulo 2**order")
    if n_bits <= 0:
        raise ValueError("n_bits must be positive")
    shifts = tuple(t - 1 for t in _MAX_LEN_TAPS[order])
    out = np.empty(n_bits, dtype=np.uint8)
    for i in range(n_bits):
        fb = 0
        for s in shifts:
            fb ^= state >> s
        fb &= 1
        state = ((state << 1) | fb) & mask
        out[i] = fb
    return out


def prbs_states(order: int, seed: int, n_steps: int) -> np.ndarray:
    """Successive LFSR register states (useful for period checks)."""
    if not 2 <= order <= 32:
        raise ValueError("order must be in [2, 32]")
    mask = (1 << order) - 1
    state = int(seed) & mask
    if state == 0:
        raise ValueError("seed must be nonzero modulo 2**order")
    shifts = tuple(t - 1 for t in _MAX_LEN_TAPS[order])
    out = np.empty(n_steps, dtype=np.uint64)
    for i in range(n_steps):
        fb = 0
        for s in shifts:
            fb ^= state >> s
        fb &= 1
        state = ((state << 1) | fb) & mask
        out[i] = state
    return out


def qam16_map(bits: np.ndarray) -> np.ndarray:
    """Map bits (4 per symbol) onto the Gray-coded 16-QAM constellation.

    Bit word (b0 b1 b2 b3): (b0 b1) select the in-phase level, (b2 b3) the
    quadrature level, each through the 2-bit Gray code 00->-3, 01->-1,
    11->+1, 10->+3, scaled by 1/sqrt(10) for unit average energy.
    """
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.size == 0 or bits.size % 4 != 0:
        raise ValueError("bit count must be a positive multiple of 4")
    b = bits.astype(np.int64).reshape(-1, 4)
    if np.any((b != 0) & (b != 1)):
        raise ValueError("bits must be 0 or 1")
    lut = np.zeros(4, dtype=np.float64)
    for word, level in _GRAY2LEVEL.items():
        lut[word] = level
    i_lvl = lut[2 * b[:, 0] + b[:, 1]]
    q_lvl = lut[2 * b[:, 2] + b[:, 3]]
    return (i_lvl + 1j * q_lvl) * _QAM16_SCALE


def _levels_to_bits(idx: np.ndarray) -> np.ndarray:
    """Level rank (0..3, low to high amplitude) -> 2-bit Gray words."""
    words = _LEVEL_BITS[idx]
    return np.stack([(words >> 1) & 1, words & 1], axis=-1)


def qam16_demap_hard(symbols: np.ndarray) -> np.ndarray:
    """Nearest-point hard decision, inverse of :func:`qam16_map` when noiseless.

    Decision boundaries sit at -2, 0, +2 (times 1/sqrt(10)) per axis; a value
    exactly on a boundary is resolved toward the lower level index.
    """
    symbols = np.asarray(symbols, dtype=np.complex128).ravel()
    edges = np.array([-2.0, 0.0, 2.0]) * _QAM16_SCALE
    # right=True sends boundary hits to the lower-level bin
    i_idx = np.digitize(symbols.real, edges, right=True)
    q_idx = np.digitize(symbols.imag, edges, right=True)
    bits = np.concatenate([_levels_to_bits(i_idx), _levels_to_bits(q_idx)], axis=1)
    return bits.reshape(-1).astype(np.uint8)


def rrc_taps(roll_off: float, span_symbols: int, samples_per_symbol: int) -> np.ndarray:
    """Root-raised-cosine impulse response, unit energy, odd length.

    Length is ``span_symbols * samples_per_symbol + 1`` with the peak at the
    center tap. At t=0 the unnormalized response is ``1 - beta + 4*beta/pi``.
    """
    beta = float(roll_off)
    if not 0.0 < beta <= 1.0:
        raise ValueError("roll_off must be in (0, 1]")
    if span_symbols < 8:
        raise ValueError("span_symbols must be >= 8")
    if samples_per_symbol < 2:
        raise ValueError("samples_per_symbol must be >= 2")
    n = span_symbols * samples_per_symbol + 1
    t = (np.arange(n) - (n - 1) // 2) / samples_per_symbol  # in symbol periods

    h = np.empty(n, dtype=np.float64)
    center = np.isclose(t, 0.0)
    knee = np.isclose(np.abs(t), 1.0 / (4.0 * beta))
    other = ~(center | knee)

    h[center] = 1.0 - beta + 4.0 * beta / np.pi
    if np.any(knee):
        a = np.pi / (4.0 * beta)
        h[knee] = (beta / np.sqrt(2.0)) * (
            (1.0 + 2.0 / np.pi) * np.sin(a) + (1.0 - 2.0 / np.pi) * np.cos(a)
        )
    to = t[other]
    num = np.sin(np.pi * to * (1.0 - beta)) + 4.0 * beta * to * np.cos(np.pi * to * (1.0 + beta))
    den = np.pi * to * (1.0 - (4.0 * beta * to) ** 2)
    h[other] = num / den

    return h / np.sqrt(np.sum(h**2))


def circular_filter(samples: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Zero-delay circular convolution of ``samples`` with symmetric ``taps``.

    The taps are centered at lag 0 modulo the frame length, so a symmetric
    filter introduces no group delay. Tap count must not exceed the frame.
    """
    samples = np.asarray(samples)
    taps = np.asarray(taps, dtype=np.float64)
    n = samples.size
    if taps.size > n:
        raise ValueError("frame shorter than the filter")
    kernel = np.zeros(n, dtype=np.float64)
    half = (taps.size - 1) // 2
    idx = (np.arange(taps.size) - half) % n
    np.add.at(kernel, idx, taps)
    return np.fft.ifft(np.fft.fft(samples) * np.fft.fft(kernel))


def shape_and_upsample(
    frame: SymbolFrame,
    sps: int,
    roll_off: float,
    symbol_rate: float,
    launch_power_dbm: float = 0.0,
    span_symbols: int = 64,
) -> DualPolWaveform:
    """Zero-stuff by ``sps``, RRC-shape, and scale to the launch power.

    Returns a waveform with ``sample_rate = sps * symbol_rate`` whose mean
    total power (both polarizations) equals the requested launch power.
    """
    if sps < 2:
        raise ValueError("sps must be >= 2")
    taps = rrc_taps(roll_off, span_symbols, sps)
    out = []
    for sym in (frame.x_pol, frame.y_pol):
        up = np.zeros(sym.size * sps, dtype=np.complex128)
        up[::sps] = sym
        out.append(circular_filter(up, taps))
    wave = DualPolWaveform(out[0], out[1], sps * symbol_rate)
    target = dbm_to_watt(launch_power_dbm)
    scale = np.sqrt(target / wave.power())
    return DualPolWaveform(wave.x_pol * scale, wave.y_pol * scale, wave.sample_rate)


def resample_waveform(wave: DualPolWaveform, new_sample_rate: float) -> DualPolWaveform:
    """Exact FFT-domain resampling of a band-limited periodic waveform.

    The new rate must slice the frame into an integer number of samples and
    the retained band must contain the whole signal spectrum (the caller's
    responsibility; with RRC-shaped signals at >= 2 samples/symbol it does).
    """
    n = len(wave)
    ratio = new_sample_rate / wave.sample_rate
    m = n * ratio
    if abs(m - round(m)) > 1e-9:
        raise ValueError("new rate must give an integer frame length")
    m = int(round(m))
    out = []
    for sig in (wave.x_pol, wave.y_pol):
        spec = np.fft.fft(sig)
        if m < n:  # decimate: keep the central band
            half = m // 2
            kept = np.concatenate([spec[:half], spec[-(m - half):]])
        else:  # interpolate: zero-pad the spectrum
            half = n // 2
            kept = np.zeros(m, dtype=np.complex128)
            kept[:half] = spec[:half]
            kept[-(n - half):] = spec[-(n - half):]
        out.append(np.fft.ifft(kept) * (m / n))
    return DualPolWaveform(out[0], out[1], new_sample_rate)
