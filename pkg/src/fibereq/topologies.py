"""Equalizer topology descriptions.

A topology is one of five architectures with its hyper-parameters plus the
shared input geometry: ``window_symbols`` symbols per window (odd, centered
on the symbol of interest), 4 real features per symbol (Re/Im of both
polarizations) and 2 real outputs (Re/Im of the recovered symbol).

These dataclasses are consumed both by the neural stack (to build and train
models) and by the complexity calculator (to evaluate the per-symbol
real-multiplication count analytically).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Union

__all__ = [
    "MlpSpec",
    "BiLstmSpec",
    "EsnSpec",
    "CnnMlpSpec",
    "CnnBiLstmSpec",
    "TopologySpec",
    "spec_to_dict",
    "spec_from_dict",
    "FAMILIES",
]

N_FEATURES = 4
N_OUTPUTS = 2
DEFAULT_WINDOW = 41  # 2*20 + 1 taps


def _check_common(spec) -> None:
    if spec.window_symbols < 1 or spec.window_symbols % 2 == 0:
        raise ValueError("window_symbols must be a positive odd integer")


@dataclass(frozen=True)
class MlpSpec:
    """Three dense hidden layers (tanh) and a linear output."""

    hidden1: int
    hidden2: int
    hidden3: int
    window_symbols: int = DEFAULT_WINDOW
    activation: str = "tanh"

    kind = "mlp"

    def __post_init__(self):
        _check_common(self)
        if min(self.hidden1, self.hidden2, self.hidden3) < 1:
            raise ValueError("all layer widths must be >= 1")


@dataclass(frozen=True)
class BiLstmSpec:
    """One bidirectional LSTM layer, flattened into a linear output layer."""

    hidden_units: int
    window_symbols: int = DEFAULT_WINDOW

    kind = "bilstm"

    def __post_init__(self):
        _check_common(self)
        if self.hidden_units < 1:
            raise ValueError("hidden_units must be >= 1")


@dataclass(frozen=True)
class EsnSpec:
    """Leaky echo state network; only the readout is trained (ridge fit)."""

    reservoir_size: int
    sparsity: float = 0.18
    leak_rate: float = 0.57
    spectral_radius: float = 0.667
    window_symbols: int = DEFAULT_WINDOW

    kind = "esn"

    def __post_init__(self):
        _check_common(self)
        if self.reservoir_size < 1:
            raise ValueError("reservoir_size must be >= 1")
        if not 0.0 <= self.sparsity <= 1.0:
            raise ValueError("sparsity must lie in [0, 1]")
        if not 0.0 <= self.leak_rate <= 1.0:
            raise ValueError("leak_rate must lie in [0, 1]")
        if self.spectral_radius < 0.0:
            raise ValueError("spectral_radius must be >= 0")


@dataclass(frozen=True)
class CnnMlpSpec:
    """1-D convolution front end feeding two dense layers and a linear output."""

    filters: int
    kernel_size: int
    hidden1: int
    hidden2: int
    window_symbols: int = DEFAULT_WINDOW
    leaky_slope: float = 0.2

    kind = "cnn_mlp"

    def __post_init__(self):
        _check_common(self)
        if min(self.filters, self.kernel_size, self.hidden1, self.hidden2) < 1:
            raise ValueError("all counts must be >= 1")
        if self.kernel_size > self.window_symbols:
            raise ValueError("kernel_size must not exceed window_symbols")


@dataclass(frozen=True)
class CnnBiLstmSpec:
    """1-D convolution front end feeding a bidirectional LSTM layer."""

    filters: int
    kernel_size: int
    hidden_units: int
    window_symbols: int = DEFAULT_WINDOW
    leaky_slope: float = 0.2

    kind = "cnn_bilstm"

    def __post_init__(self):
        _check_common(self)
        if min(self.filters, self.kernel_size, self.hidden_units) < 1:
            raise ValueError("all counts must be >= 1")
        if self.kernel_size > self.window_symbols:
            raise ValueError("kernel_size must not exceed window_symbols")


TopologySpec = Union[MlpSpec, BiLstmSpec, EsnSpec, CnnMlpSpec, CnnBiLstmSpec]

FAMILIES = {
    "mlp": MlpSpec,
    "bilstm": BiLstmSpec,
    "esn": EsnSpec,
    "cnn_mlp": CnnMlpSpec,
    "cnn_bilstm": CnnBiLstmSpec,
}


def spec_to_dict(spec: TopologySpec) -> dict:
    d = asdict(spec)
    d["kind"] = spec.kind
    return d


def spec_from_dict(d: dict) -> TopologySpec:
    d = dict(d)
    kind = d.pop("kind")
    try:
        cls = FAMILIES[kind]
    except KeyError:
        raise ValueError(f"unknown topology kind {kind!r}") from None
    return cls(**d)
