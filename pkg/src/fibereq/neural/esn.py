"""Leaky echo state network with a ridge-fitted readout.

The reservoir and input weights are drawn once from the seed and frozen;
only the readout matrix is trained. The reservoir matrix stores exactly
``round(reservoir_size**2 * sparsity)`` nonzero entries (half-up), which is
also what the multiply counter bills for it, and is rescaled to the
requested spectral radius using 50 power iterations.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..complexity import round_half_up
from ..topologies import N_FEATURES, N_OUTPUTS, EsnSpec

__all__ = ["EsnModel", "esn_fit_readout"]

_POWER_ITERATIONS = 50


def esn_fit_readout(states: np.ndarray, targets: np.ndarray, ridge_lambda: float) -> np.ndarray:
    """Ridge least-squares readout, shape (n_outputs, n_states).

    ``ridge_lambda = 0`` falls back to a minimum-norm least-squares solve.
    """
    states = np.asarray(states, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if ridge_lambda < 0:
        raise ValueError("ridge_lambda must be >= 0")
    if ridge_lambda == 0:
        w, *_ = np.linalg.lstsq(states, targets, rcond=None)
        return w.T
    gram = states.T @ states + ridge_lambda * np.eye(states.shape[1])
    return np.linalg.solve(gram, states.T @ targets).T


class EsnModel:
    """Reservoir equalizer: fixed dynamics, trainable final-state readout."""

    def __init__(self, spec: EsnSpec, seed: int = 0):
        self.spec = spec
        self.seed = seed
        rng = np.random.Generator(np.random.MT19937(seed))
        nr = spec.reservoir_size

        self.w_in = rng.uniform(-1.0, 1.0, size=(N_FEATURES, nr))
        self.nnz = round_half_up(nr * nr * spec.sparsity)
        flat = rng.choice(nr * nr, size=self.nnz, replace=False) if self.nnz else np.array([], dtype=int)
        vals = rng.uniform(-1.0, 1.0, size=self.nnz)
        rows, cols = np.divmod(flat, nr)
        w_r = sp.csr_matrix((vals, (rows, cols)), shape=(nr, nr))

        radius = self._power_iteration_radius(w_r, rng)
        if radius > 0:
            w_r = w_r * (spec.spectral_radius / radius)
        self.w_r = w_r
        self.w_out = np.zeros((N_OUTPUTS, nr))
        self.multiply_counter = 0

    @staticmethod
    def _power_iteration_radius(w_r: sp.csr_matrix, rng: np.random.Generator) -> float:
        n = w_r.shape[0]
        v = rng.standard_normal(n)
        norm = np.linalg.norm(v)
        if norm == 0 or w_r.nnz == 0:
            return 0.0
        v /= norm
        radius = 0.0
        for _ in range(_POWER_ITERATIONS):
            v = w_r @ v
            norm = np.linalg.norm(v)
            if norm == 0:
                return 0.0
            radius = norm
            v /= norm
        return float(radius)

    def states(self, inputs: np.ndarray) -> np.ndarray:
        """Final leaky-integrated reservoir state per window, shape (B, Nr)."""
        inputs = np.asarray(inputs, dtype=np.float64)
        b, t, _ = inputs.shape
        s = np.zeros((b, self.spec.reservoir_size))
        mu = self.spec.leak_rate
        driven = (inputs.reshape(b * t, -1) @ self.w_in).reshape(b, t, -1)
        for step in range(t):
            a = np.tanh(self._recur(s) + driven[:, step, :])
            s = (1.0 - mu) * s + mu * a
        return s

    def _recur(self, s: np.ndarray) -> np.ndarray:
        # csr @ dense.T keeps the sparse structure in play; result back to (B, Nr)
        return (self.w_r @ s.T).T

    def forward(self, inputs: np.ndarray) -> np.ndarray:
        """Readout applied to the final state; updates the multiply counter."""
        s = self.states(inputs)
        self.multiply_counter = self.multiplies_per_symbol()
        return s @ self.w_out.T

    def fit(self, inputs: np.ndarray, targets: np.ndarray, ridge_lambda: float = 1e-8):
        self.w_out = esn_fit_readout(self.states(inputs), targets, ridge_lambda)
        return self

    def multiplies_per_symbol(self) -> int:
        """Billed per the accounting contract, with a per-step readout.

        Functionally the readout runs once on the final state, but the cost
        model charges it at every step, matching a streaming implementation
        that exposes an output per time step.
        """
        spec = self.spec
        nr = spec.reservoir_size
        per_step = N_FEATURES * nr + self.nnz + 2 * nr + nr * N_OUTPUTS
        return spec.window_symbols * per_step
