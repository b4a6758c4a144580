"""Minimal dense/convolutional/recurrent layers with reverse-mode gradients.

Everything runs in float64 numpy. Each layer implements ``forward`` (which
caches what ``backward`` needs), ``backward`` (which accumulates parameter
gradients and returns the input gradient) and ``multiplies_per_symbol``,
the exact number of real multiplications one forward pass spends per input
window under the package-wide accounting contract: matrix products cost
rows*cols, element-wise vector products cost their length, bias additions
and activations are free.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Parameter",
    "Layer",
    "Dense",
    "Conv1d",
    "LeakyRelu",
    "Flatten",
    "Lstm",
    "BiLstm",
    "Sequential",
    "mse_loss",
    "glorot_uniform",
]


class Parameter:
    """A trainable array with its gradient accumulator."""

    __slots__ = ("value", "grad")

    def __init__(self, value: np.ndarray):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)


def glorot_uniform(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class Layer:
    def params(self) -> list[Parameter]:
        return []

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dy: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def multiplies_per_symbol(self) -> int:
        return 0


class Dense(Layer):
    """Fully connected layer, optionally with bias and tanh activation."""

    def __init__(self, in_features: int, out_features: int, activation: str = "linear",
                 bias: bool = True, rng: np.random.Generator | None = None):
        if activation not in ("linear", "tanh"):
            raise ValueError("activation must be 'linear' or 'tanh'")
        rng = rng or np.random.default_rng(0)
        self.in_features = in_features
        self.out_features = out_features
        self.activation = activation
        self.weight = Parameter(
            glorot_uniform(rng, (in_features, out_features), in_features, out_features)
        )
        self.bias = Parameter(np.zeros(out_features)) if bias else None

    def params(self):
        return [self.weight] + ([self.bias] if self.bias is not None else [])

    def forward(self, x, training=False):
        self._x = x
        z = x @ self.weight.value
        if self.bias is not None:
            z = z + self.bias.value
        if self.activation == "tanh":
            self._y = np.tanh(z)
            return self._y
        return z

    def backward(self, dy):
        if self.activation == "tanh":
            dy = dy * (1.0 - self._y**2)
        self.weight.grad += self._x.T @ dy
        if self.bias is not None:
            self.bias.grad += dy.sum(axis=0)
        return dy @ self.weight.value.T

    def multiplies_per_symbol(self):
        return self.in_features * self.out_features


class Conv1d(Layer):
    """Valid 1-D convolution over the time axis, stride 1, linear output.

    Input (B, T, F) -> output (B, T - k + 1, filters); kernels span all
    input features. Bias per filter is included by default.
    """

    def __init__(self, in_features: int, filters: int, kernel_size: int, n_steps: int,
                 bias: bool = True, rng: np.random.Generator | None = None):
        rng = rng or np.random.default_rng(0)
        if kernel_size > n_steps:
            raise ValueError("kernel longer than the input sequence")
        self.in_features = in_features
        self.filters = filters
        self.kernel_size = kernel_size
        self.n_steps = n_steps
        self.out_steps = n_steps - kernel_size + 1
        fan_in = in_features * kernel_size
        fan_out = filters * kernel_size
        self.kernel = Parameter(
            glorot_uniform(rng, (filters, kernel_size, in_features), fan_in, fan_out)
        )
        self.bias = Parameter(np.zeros(filters)) if bias else None

    def params(self):
        return [self.kernel] + ([self.bias] if self.bias is not None else [])

    def forward(self, x, training=False):
        # windows[b, l, n, k] = x[b, l + k, n]
        self._windows = np.lib.stride_tricks.sliding_window_view(
            x, self.kernel_size, axis=1
        )
        self._in_shape = x.shape
        y = np.einsum("blnk,okn->blo", self._windows, self.kernel.value, optimize=True)
        if self.bias is not None:
            y = y + self.bias.value
        return y

    def backward(self, dy):
        self.kernel.grad += np.einsum(
            "blo,blnk->okn", dy, self._windows, optimize=True
        )
        if self.bias is not None:
            self.bias.grad += dy.sum(axis=(0, 1))
        dx = np.zeros(self._in_shape)
        for k in range(self.kernel_size):
            dx[:, k:k + self.out_steps, :] += dy @ self.kernel.value[:, k, :]
        return dx

    def multiplies_per_symbol(self):
        return self.in_features * self.filters * self.kernel_size * self.out_steps


class LeakyRelu(Layer):
    """LeakyReLU activation; costs nothing under the accounting contract."""

    def __init__(self, negative_slope: float = 0.2):
        self.negative_slope = negative_slope

    def forward(self, x, training=False):
        self._mask = x >= 0
        return np.where(self._mask, x, self.negative_slope * x)

    def backward(self, dy):
        return np.where(self._mask, dy, self.negative_slope * dy)


class Flatten(Layer):
    def forward(self, x, training=False):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy):
        return dy.reshape(self._shape)


class Lstm(Layer):
    """Single-direction LSTM without biases, returning the full state sequence.

    Gate equations per step (sigma = logistic, candidate via tanh):
    ``i,f,o = sigma(W x + U h)``, ``C = f*C_prev + i*tanh(Wc x + Uc h)``,
    ``h = o * tanh(C)``. Set ``reverse=True`` to scan the sequence backward
    (output stays aligned to the input's time order). An optional bias flag
    exists for experimentation; it does not change the multiply count.
    """

    def __init__(self, in_features: int, hidden_units: int, n_steps: int,
                 reverse: bool = False, bias: bool = False,
                 rng: np.random.Generator | None = None):
        rng = rng or np.random.default_rng(0)
        self.in_features = in_features
        self.hidden_units = hidden_units
        self.n_steps = n_steps
        self.reverse = reverse
        nh = hidden_units
        self.w_in = Parameter(
            glorot_uniform(rng, (in_features, 4 * nh), in_features, nh)
        )
        self.w_rec = Parameter(glorot_uniform(rng, (nh, 4 * nh), nh, nh))
        self.bias = Parameter(np.zeros(4 * nh)) if bias else None

    def params(self):
        return [self.w_in, self.w_rec] + ([self.bias] if self.bias is not None else [])

    def step(self, x_t: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray):
        """One cell update; returns (h_t, C_t)."""
        z = x_t @ self.w_in.value + h_prev @ self.w_rec.value
        if self.bias is not None:
            z = z + self.bias.value
        nh = self.hidden_units
        i = _sigmoid(z[..., 0:nh])
        f = _sigmoid(z[..., nh:2 * nh])
        o = _sigmoid(z[..., 2 * nh:3 * nh])
        g = np.tanh(z[..., 3 * nh:4 * nh])
        c_t = f * c_prev + i * g
        h_t = o * np.tanh(c_t)
        return h_t, c_t

    def forward(self, x, training=False):
        if self.reverse:
            x = x[:, ::-1, :]
        b, t, _ = x.shape
        nh = self.hidden_units
        h = np.zeros((b, nh))
        c = np.zeros((b, nh))
        # input projection for all steps in one product
        xw = x.reshape(b * t, -1) @ self.w_in.value
        xw = xw.reshape(b, t, 4 * nh)
        if self.bias is not None:
            xw = xw + self.bias.value
        self._x = x
        self._cache = []
        out = np.empty((b, t, nh))
        for step in range(t):
            z = xw[:, step, :] + h @ self.w_rec.value
            i = _sigmoid(z[:, 0:nh])
            f = _sigmoid(z[:, nh:2 * nh])
            o = _sigmoid(z[:, 2 * nh:3 * nh])
            g = np.tanh(z[:, 3 * nh:4 * nh])
            c_new = f * c + i * g
            tanh_c = np.tanh(c_new)
            h_new = o * tanh_c
            self._cache.append((h, c, i, f, o, g, tanh_c))
            h, c = h_new, c_new
            out[:, step, :] = h
        if self.reverse:
            out = out[:, ::-1, :]
        return out

    def backward(self, dy):
        if self.reverse:
            dy = dy[:, ::-1, :]
        b, t, nh = dy.shape
        dz_all = np.empty((b, t, 4 * nh))
        dh_next = np.zeros((b, nh))
        dc_next = np.zeros((b, nh))
        for step in range(t - 1, -1, -1):
            h_prev, c_prev, i, f, o, g, tanh_c = self._cache[step]
            dh = dy[:, step, :] + dh_next
            dc = dh * o * (1.0 - tanh_c**2) + dc_next
            dz = dz_all[:, step, :]
            dz[:, 0:nh] = dc * g * i * (1.0 - i)
            dz[:, nh:2 * nh] = dc * c_prev * f * (1.0 - f)
            dz[:, 2 * nh:3 * nh] = dh * tanh_c * o * (1.0 - o)
            dz[:, 3 * nh:4 * nh] = dc * i * (1.0 - g**2)
            self.w_rec.grad += h_prev.T @ dz
            dh_next = dz @ self.w_rec.value.T
            dc_next = dc * f
        flat_dz = dz_all.reshape(b * t, 4 * nh)
        self.w_in.grad += self._x.reshape(b * t, -1).T @ flat_dz
        if self.bias is not None:
            self.bias.grad += flat_dz.sum(axis=0)
        dx = (flat_dz @ self.w_in.value.T).reshape(b, t, self.in_features)
        if self.reverse:
            dx = dx[:, ::-1, :]
        return dx

    def multiplies_per_symbol(self):
        # per step: 4 input products, 4 recurrent products, 3 gate products
        nh = self.hidden_units
        per_step = 4 * self.in_features * nh + 4 * nh * nh + 3 * nh
        return self.n_steps * per_step


class BiLstm(Layer):
    """Forward and reversed LSTM passes, concatenated per time step."""

    def __init__(self, in_features: int, hidden_units: int, n_steps: int,
                 bias: bool = False, rng: np.random.Generator | None = None):
        rng = rng or np.random.default_rng(0)
        self.fwd = Lstm(in_features, hidden_units, n_steps, reverse=False, bias=bias, rng=rng)
        self.bwd = Lstm(in_features, hidden_units, n_steps, reverse=True, bias=bias, rng=rng)
        self.hidden_units = hidden_units

    def params(self):
        return self.fwd.params() + self.bwd.params()

    def forward(self, x, training=False):
        return np.concatenate(
            [self.fwd.forward(x, training), self.bwd.forward(x, training)], axis=2
        )

    def backward(self, dy):
        nh = self.hidden_units
        return self.fwd.backward(dy[:, :, :nh]) + self.bwd.backward(dy[:, :, nh:])

    def multiplies_per_symbol(self):
        return self.fwd.multiplies_per_symbol() + self.bwd.multiplies_per_symbol()


class Sequential(Layer):
    def __init__(self, layers: list[Layer]):
        self.layers = layers

    def params(self):
        out = []
        for layer in self.layers:
            out.extend(layer.params())
        return out

    def forward(self, x, training=False):
        for layer in self.layers:
            x = layer.forward(x, training)
        return x

    def backward(self, dy):
        for layer in reversed(self.layers):
            dy = layer.backward(dy)
        return dy

    def multiplies_per_symbol(self):
        return sum(layer.multiplies_per_symbol() for layer in self.layers)


def mse_loss(pred: np.ndarray, target: np.ndarray):
    """Mean squared error and its gradient with respect to ``pred``."""
    diff = pred - target
    loss = float(np.mean(diff**2))
    return loss, 2.0 * diff / diff.size
