"""Dataset files: deterministic containers for simulated frames.

A dataset bundles the train and test frames of one experiment: aligned
symbol-domain data (the equalizer inputs/targets), the received waveforms
at 2 samples/symbol (the back-propagation baseline's input) and the
configuration echo. Identical configs and seeds produce byte-identical
files.
"""

from __future__ import annotations

import numpy as np

from .config import ExperimentConfig
from .dsp import DualPolWaveform, SymbolFrame
from .pipeline import FrameData, simulate_frame
from .receiver import EqualizedSymbols, Metrics
from .serialization import array_to_json, json_to_array, load_arrays, save_arrays

__all__ = ["simulate_dataset", "save_dataset", "load_dataset"]

DATASET_VERSION = 1


def simulate_dataset(config: ExperimentConfig) -> dict:
    """Simulate the train and test frames described by ``config``."""
    seeds = config.seeds
    train = simulate_frame(
        config, config.tx.n_train_symbols, data_seed=seeds.data, noise_seed=seeds.noise
    )
    test = simulate_frame(
        config, config.tx.n_test_symbols,
        data_seed=seeds.data + 1000003, noise_seed=seeds.noise + 1000033,
    )
    return {"train": train, "test": test}


def save_dataset(path, config: ExperimentConfig, frames: dict) -> None:
    arrays = {
        "format": np.array([DATASET_VERSION], dtype=np.int64),
        "meta": json_to_array({
            "dataset_version": DATASET_VERSION,
            "config": config.to_dict(),
            "config_hash": config.hash(),
            "cdc": {
                part: {
                    "ber": fr.cdc_metrics.ber,
                    "q_factor_db": _json_q(fr.cdc_metrics.q_factor_db),
                    "n_bits": fr.cdc_metrics.n_bits,
                }
                for part, fr in frames.items()
            },
            "wave_sample_rate": frames["train"].rx_wave_2sps.sample_rate,
        }),
    }
    for part, fr in frames.items():
        arrays[f"{part}_tx_x"] = fr.tx.x_pol
        arrays[f"{part}_tx_y"] = fr.tx.y_pol
        arrays[f"{part}_rx_x"] = fr.rx.x_pol
        arrays[f"{part}_rx_y"] = fr.rx.y_pol
        arrays[f"{part}_wave_x"] = fr.rx_wave_2sps.x_pol
        arrays[f"{part}_wave_y"] = fr.rx_wave_2sps.y_pol
    save_arrays(path, arrays)


def load_dataset(path):
    """Returns (config, {"train": FrameData, "test": FrameData}, meta)."""
    data = load_arrays(path)
    if int(data["format"][0]) != DATASET_VERSION:
        raise ValueError(f"unsupported dataset version {int(data['format'][0])}")
    meta = array_to_json(data["meta"])
    config = ExperimentConfig.from_dict(meta["config"])
    fs = meta["wave_sample_rate"]
    frames = {}
    for part in ("train", "test"):
        cdc = meta["cdc"][part]
        frames[part] = FrameData(
            tx=SymbolFrame(data[f"{part}_tx_x"], data[f"{part}_tx_y"]),
            rx=EqualizedSymbols(data[f"{part}_rx_x"], data[f"{part}_rx_y"]),
            rx_wave_2sps=DualPolWaveform(
                data[f"{part}_wave_x"], data[f"{part}_wave_y"], fs
            ),
            cdc_metrics=Metrics(cdc["ber"], _unjson_q(cdc["q_factor_db"]), cdc["n_bits"]),
        )
    return config, frames, meta


def _json_q(q: float):
    return "inf" if np.isinf(q) else float(q)


def _unjson_q(q) -> float:
    return np.inf if q == "inf" else float(q)
