"""Equalizer model construction and the instrumented multiply counter."""

from __future__ import annotations

import numpy as np

from ..topologies import (
    N_FEATURES,
    N_OUTPUTS,
    BiLstmSpec,
    CnnBiLstmSpec,
    CnnMlpSpec,
    EsnSpec,
    MlpSpec,
    TopologySpec,
)
from .esn import EsnModel
from .layers import BiLstm, Conv1d, Dense, Flatten, LeakyRelu, Sequential

__all__ = ["EqualizerModel", "build_model"]


class EqualizerModel:
    """A trained (or trainable) equalizer: spec + layers + multiply counter.

    ``forward`` consumes windows shaped (B, window_symbols, 4) and returns
    (B, 2). ``multiply_counter`` is refreshed on every forward call with the
    exact per-window real-multiplication count of the layers that ran.
    """

    def __init__(self, spec: TopologySpec, net: Sequential, seed: int):
        self.spec = spec
        self.net = net
        self.seed = seed
        self.multiply_counter = 0

    def params(self):
        return self.net.params()

    def forward(self, windows: np.ndarray, training: bool = False) -> np.ndarray:
        out = self.net.forward(windows, training)
        self.multiply_counter = self.net.multiplies_per_symbol()
        return out

    def backward(self, dy: np.ndarray) -> np.ndarray:
        return self.net.backward(dy)

    def zero_grad(self):
        for p in self.params():
            p.grad[:] = 0.0

    def multiplies_per_symbol(self) -> int:
        return self.net.multiplies_per_symbol()

    # -- flat parameter vector (checkpoints, finite-difference checks) --

    def get_flat_params(self) -> np.ndarray:
        ps = self.params()
        if not ps:
            return np.zeros(0)
        return np.concatenate([p.value.ravel() for p in ps])

    def set_flat_params(self, flat: np.ndarray):
        flat = np.asarray(flat, dtype=np.float64)
        offset = 0
        for p in self.params():
            n = p.value.size
            p.value[...] = flat[offset:offset + n].reshape(p.value.shape)
            offset += n
        if offset != flat.size:
            raise ValueError("flat vector length does not match the model")


def build_model(spec: TopologySpec, seed: int = 0):
    """Instantiate an equalizer for ``spec`` with seeded initialization.

    Returns an :class:`EqualizerModel` for the gradient-trained families and
    an :class:`EsnModel` for the reservoir family (its readout is fitted in
    closed form rather than by gradient descent).
    """
    if isinstance(spec, EsnSpec):
        return EsnModel(spec, seed=seed)

    rng = np.random.Generator(np.random.MT19937(seed))
    ns, ni, no = spec.window_symbols, N_FEATURES, N_OUTPUTS
    if isinstance(spec, MlpSpec):
        layers = [
            Flatten(),
            Dense(ns * ni, spec.hidden1, spec.activation, bias=True, rng=rng),
            Dense(spec.hidden1, spec.hidden2, spec.activation, bias=True, rng=rng),
            Dense(spec.hidden2, spec.hidden3, spec.activation, bias=True, rng=rng),
            # output stage is a pure weight matrix
            Dense(spec.hidden3, no, "linear", bias=False, rng=rng),
        ]
    elif isinstance(spec, BiLstmSpec):
        nh = spec.hidden_units
        layers = [
            BiLstm(ni, nh, ns, rng=rng),
            Flatten(),
            Dense(ns * 2 * nh, no, "linear", bias=True, rng=rng),
        ]
    elif isinstance(spec, CnnMlpSpec):
        conv = Conv1d(ni, spec.filters, spec.kernel_size, ns, bias=True, rng=rng)
        layers = [
            conv,
            LeakyRelu(spec.leaky_slope),
            Flatten(),
            Dense(conv.out_steps * spec.filters, spec.hidden1, "tanh", bias=True, rng=rng),
            Dense(spec.hidden1, spec.hidden2, "tanh", bias=True, rng=rng),
            Dense(spec.hidden2, no, "linear", bias=True, rng=rng),
        ]
    elif isinstance(spec, CnnBiLstmSpec):
        conv = Conv1d(ni, spec.filters, spec.kernel_size, ns, bias=True, rng=rng)
        nh = spec.hidden_units
        layers = [
            conv,
            LeakyRelu(spec.leaky_slope),
            BiLstm(spec.filters, nh, conv.out_steps, rng=rng),
            Flatten(),
            Dense(conv.out_steps * 2 * nh, no, "linear", bias=True, rng=rng),
        ]
    else:
        raise TypeError(f"unsupported topology {type(spec).__name__}")
    return EqualizerModel(spec, Sequential(layers), seed)
