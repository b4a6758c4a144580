"""From-scratch neural equalizers: layers, models, training, checkpoints."""

from .checkpoint import load_model, save_model
from .data import WindowedDataset, window_dataset
from .esn import EsnModel, esn_fit_readout
from .layers import (
    BiLstm,
    Conv1d,
    Dense,
    Flatten,
    LeakyRelu,
    Lstm,
    Parameter,
    Sequential,
    glorot_uniform,
    mse_loss,
)
from .models import EqualizerModel, build_model
from .training import Adam, NumericalError, TrainConfig, TrainResult, train

__all__ = [
    "Adam",
    "BiLstm",
    "Conv1d",
    "Dense",
    "EqualizerModel",
    "EsnModel",
    "Flatten",
    "LeakyRelu",
    "Lstm",
    "NumericalError",
    "Parameter",
    "Sequential",
    "TrainConfig",
    "TrainResult",
    "WindowedDataset",
    "build_model",
    "esn_fit_readout",
    "glorot_uniform",
    "load_model",
    "mse_loss",
    "save_model",
    "train",
    "window_dataset",
]
