"""Adam/MSE training loop with shuffling and early stopping.

The validation set is the (unshuffled) tail of the training windows; early
stopping restores the parameters of the best validation epoch. Training is
deterministic given the seed in single-threaded evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import WindowedDataset
from .esn import EsnModel
from .layers import Parameter, mse_loss
from .models import EqualizerModel

__all__ = ["TrainConfig", "TrainResult", "Adam", "train", "NumericalError"]

VALIDATION_FRACTION = 0.1


class NumericalError(RuntimeError):
    """Raised when training diverges (NaN/inf loss)."""


@dataclass
class TrainConfig:
    learning_rate: float = 0.001
    max_epochs: int = 1000
    patience_epochs: int = 150
    batch_size: int = 4331
    loss: str = "mse"
    seed: int = 0
    ridge_lambda: float = 1e-8  # reservoir readout regularization

    def __post_init__(self):
        if self.loss != "mse":
            raise ValueError("only the MSE loss is supported")
        if min(self.max_epochs, self.patience_epochs, self.batch_size) < 1:
            raise ValueError("epochs, patience and batch size must be >= 1")


@dataclass
class TrainResult:
    model: object
    epochs_used: int
    best_val_loss: float
    history: list = field(default_factory=list)  # (epoch, train_loss, val_loss)

    def best_so_far(self) -> list:
        out, best = [], np.inf
        for _, _, val in self.history:
            best = min(best, val)
            out.append(best)
        return out


class Adam:
    """Adam with the standard defaults (b1=0.9, b2=0.999, eps=1e-8)."""

    def __init__(self, params: list[Parameter], learning_rate: float = 0.001,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.value) for p in params]
        self.v = [np.zeros_like(p.value) for p in params]

    def step(self):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for i, p in enumerate(self.params):
            self.m[i] = b1 * self.m[i] + (1.0 - b1) * p.grad
            self.v[i] = b2 * self.v[i] + (1.0 - b2) * p.grad**2
            m_hat = self.m[i] / (1.0 - b1**self.t)
            v_hat = self.v[i] / (1.0 - b2**self.t)
            p.value -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def _epoch_loss(model, inputs, targets, batch_size) -> float:
    total, count = 0.0, 0
    for start in range(0, inputs.shape[0], batch_size):
        pred = model.forward(inputs[start:start + batch_size])
        tgt = targets[start:start + batch_size]
        total += float(np.sum((pred - tgt) ** 2))
        count += tgt.size
    return total / count


def train(model, dataset: WindowedDataset, cfg: TrainConfig) -> TrainResult:
    """Fit an equalizer on windowed data.

    Gradient-trained families run mini-batch Adam on the MSE with per-epoch
    shuffling; the reservoir family fits its readout in closed form (one
    "epoch"). The returned model carries the best-validation parameters.
    """
    train_set, val_set = dataset.split(VALIDATION_FRACTION)
    if len(train_set) == 0 or len(val_set) == 0:
        raise ValueError("dataset too small to split off a validation part")

    if isinstance(model, EsnModel):
        model.fit(train_set.inputs, train_set.targets, cfg.ridge_lambda)
        val_pred = model.forward(val_set.inputs)
        val_loss = float(np.mean((val_pred - val_set.targets) ** 2))
        if not np.isfinite(val_loss):
            raise NumericalError("reservoir readout fit produced a non-finite loss")
        train_loss = float(np.mean((model.forward(train_set.inputs) - train_set.targets) ** 2))
        return TrainResult(model, 1, val_loss, [(1, train_loss, val_loss)])

    assert isinstance(model, EqualizerModel)
    rng = np.random.Generator(np.random.MT19937(cfg.seed))
    opt = Adam(model.params(), cfg.learning_rate)

    best_val = np.inf
    best_params = model.get_flat_params()
    best_epoch = 0
    history = []
    n = len(train_set)
    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(n)
        running, seen = 0.0, 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            x, t = train_set.inputs[idx], train_set.targets[idx]
            model.zero_grad()
            pred = model.forward(x, training=True)
            loss, dy = mse_loss(pred, t)
            if not np.isfinite(loss):
                raise NumericalError(
                    f"non-finite training loss at epoch {epoch} "
                    f"(lr={cfg.learning_rate}, batch={cfg.batch_size})"
                )
            model.backward(dy)
            opt.step()
            running += loss * t.size
            seen += t.size
        val_loss = _epoch_loss(model, val_set.inputs, val_set.targets, cfg.batch_size)
        if not np.isfinite(val_loss):
            raise NumericalError(f"non-finite validation loss at epoch {epoch}")
        history.append((epoch, running / seen, val_loss))
        if val_loss < best_val:
            best_val = val_loss
            best_params = model.get_flat_params()
            best_epoch = epoch
        elif epoch - best_epoch >= cfg.patience_epochs:
            break
    model.set_flat_params(best_params)
    return TrainResult(model, len(history), best_val, history)
