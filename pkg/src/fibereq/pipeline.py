"""End-to-end glue: dataset generation, equalization, and gain reports.

``simulate_frame`` runs transmitter -> fiber link -> receiver DSP for one
frame and returns both the symbol-domain dataset (the equalizers' input)
and the received waveform resampled to 2 samples/symbol (the
back-propagation baseline's input). The optional noise loading to a target
Q applies to the symbol-domain dataset only; it models residual transceiver
distortion on the soft symbols the equalizers see.

Gains are always quoted against the dispersion-compensated (CDC-only)
metrics of the same symbol slice and polarization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import LinkConfig, propagate_link
from .config import ExperimentConfig
from .dbp import DbpConfig, dbp_equalize
from .dsp import (
    DualPolWaveform,
    SymbolFrame,
    prbs_generate,
    qam16_map,
    resample_waveform,
    shape_and_upsample,
)
from .neural.data import window_dataset
from .neural.models import build_model
from .neural.training import TrainConfig, train
from .receiver import (
    EqualizedSymbols,
    Metrics,
    ber_count,
    cdc_compensate,
    load_noise_to_target_q,
    matched_filter_downsample,
    normalize_and_align,
    q_from_ber,
)

__all__ = [
    "FrameData",
    "GainReport",
    "generate_frame",
    "simulate_frame",
    "equalize_frame",
    "gain_report",
    "evaluate_dbp",
    "train_equalizer",
]


@dataclass
class FrameData:
    """One simulated frame: aligned symbols plus the 2 sps waveform."""

    tx: SymbolFrame
    rx: EqualizedSymbols
    rx_wave_2sps: DualPolWaveform
    cdc_metrics: Metrics


@dataclass
class GainReport:
    q_db: float
    q_gain_db: float
    ber: float
    n_bits: int
    q_cdc_db: float


def generate_frame(n_symbols: int, source: str, seed: int) -> SymbolFrame:
    """Random 16-QAM symbols for both polarizations.

    ``mt`` draws bits from a Mersenne-twister generator; ``prbs`` taps an
    order-32 maximal-length LFSR (slower, bit-exact with the shift-register
    description). The two polarizations use decorrelated streams.
    """
    n_bits = 4 * n_symbols
    if source == "mt":
        rng = np.random.Generator(np.random.MT19937(seed))
        bits_x = rng.integers(0, 2, n_bits).astype(np.uint8)
        bits_y = rng.integers(0, 2, n_bits).astype(np.uint8)
    elif source == "prbs":
        bits_x = prbs_generate(32, seed, n_bits)
        bits_y = prbs_generate(32, seed ^ 0x5A5A5A5A or 1, n_bits)
    else:
        raise ValueError("source must be 'mt' or 'prbs'")
    return SymbolFrame(qam16_map(bits_x), qam16_map(bits_y))


def simulate_frame(
    config: ExperimentConfig,
    n_symbols: int,
    data_seed: int,
    noise_seed: int,
) -> FrameData:
    """Transmit one frame over the configured link and run the receiver DSP."""
    tx_cfg, link = config.tx, config.link
    frame = generate_frame(n_symbols, tx_cfg.data_source, data_seed)
    wave = shape_and_upsample(
        frame, tx_cfg.sps, tx_cfg.roll_off, tx_cfg.baud,
        launch_power_dbm=link.launch_power_dbm,
        span_symbols=tx_cfg.rrc_span_symbols,
    )
    rx_wave = propagate_link(wave, link, noise_seed)
    rx_wave_2sps = resample_waveform(rx_wave, 2 * tx_cfg.baud)

    compensated = cdc_compensate(rx_wave, link.total_length_km, link.spans[0])
    rx = matched_filter_downsample(
        compensated, tx_cfg.roll_off, tx_cfg.baud, tx_cfg.rrc_span_symbols
    )
    rx = normalize_and_align(rx, frame)
    if config.target_q_db is not None:
        rx = load_noise_to_target_q(rx, frame, config.target_q_db, seed=noise_seed)
    metrics = ber_count(rx, frame, pol=config.pol)
    return FrameData(tx=frame, rx=rx, rx_wave_2sps=rx_wave_2sps, cdc_metrics=metrics)


def equalize_frame(model, rx: EqualizedSymbols, tx: SymbolFrame, pol: str,
                   batch_size: int = 8192) -> np.ndarray:
    """Model predictions over all windows, as complex symbols.

    The output covers tx indices ``N .. len-N`` (edge windows are dropped).
    """
    n = (model.spec.window_symbols - 1) // 2
    data = window_dataset(rx, tx, n, pol)
    preds = np.empty((len(data), 2))
    for start in range(0, len(data), batch_size):
        preds[start:start + batch_size] = model.forward(data.inputs[start:start + batch_size])
    return preds[:, 0] + 1j * preds[:, 1]


def _slice_metrics(pred: np.ndarray, tx_center: np.ndarray) -> Metrics:
    rx = EqualizedSymbols(pred, pred)
    tx = SymbolFrame(tx_center, tx_center)
    return ber_count(rx, tx, pol="x")


def gain_report(model, rx: EqualizedSymbols, tx: SymbolFrame, pol: str) -> GainReport:
    """Equalized metrics and the gain over CDC on the same symbol slice."""
    n = (model.spec.window_symbols - 1) // 2
    pred = equalize_frame(model, rx, tx, pol)
    tx_sl = tx.x_pol[n:len(tx) - n] if pol == "x" else tx.y_pol[n:len(tx) - n]
    rx_sl = rx.pol(pol)[n:len(rx) - n]
    eq = _slice_metrics(pred, tx_sl)
    cdc = _slice_metrics(rx_sl, tx_sl)
    return GainReport(
        q_db=eq.q_factor_db,
        q_gain_db=eq.q_factor_db - cdc.q_factor_db,
        ber=eq.ber,
        n_bits=eq.n_bits,
        q_cdc_db=cdc.q_factor_db,
    )


def identity_report(rx: EqualizedSymbols, tx: SymbolFrame, pol: str) -> GainReport:
    """Pass-through equalizer: by construction the gain is exactly 0 dB."""
    m = ber_count(rx, tx, pol=pol)
    return GainReport(q_db=m.q_factor_db, q_gain_db=0.0, ber=m.ber,
                      n_bits=m.n_bits, q_cdc_db=m.q_factor_db)


def evaluate_dbp(
    frame: FrameData, link: LinkConfig, cfg: DbpConfig,
    baud: float, roll_off: float, pol: str,
) -> GainReport:
    """Back-propagate the stored 2 sps waveform and report gain over CDC."""
    rx = dbp_equalize(frame.rx_wave_2sps, link, cfg, baud, roll_off)
    rx = normalize_and_align(rx, frame.tx)
    eq = ber_count(rx, frame.tx, pol=pol)
    q_cdc = frame.cdc_metrics.q_factor_db
    return GainReport(
        q_db=eq.q_factor_db,
        q_gain_db=eq.q_factor_db - q_cdc,
        ber=eq.ber,
        n_bits=eq.n_bits,
        q_cdc_db=q_cdc,
    )


def train_equalizer(
    spec,
    train_frame: FrameData,
    test_frame: FrameData,
    train_cfg: TrainConfig,
    pol: str,
    model_seed: int | None = None,
):
    """Train on one frame, report gain on the other.

    Returns (model, train_result, gain_report).
    """
    seed = train_cfg.seed if model_seed is None else model_seed
    n = (spec.window_symbols - 1) // 2
    data = window_dataset(train_frame.rx, train_frame.tx, n, pol)
    model = build_model(spec, seed=seed)
    result = train(model, data, train_cfg)
    report = gain_report(model, test_frame.rx, test_frame.tx, pol)
    return model, result, report
