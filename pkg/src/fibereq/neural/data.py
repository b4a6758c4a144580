"""Windowed dataset construction for the equalizers.

Each training example is the received symbol at index k together with its
``n_neighbors`` past and future neighbors: a (2N+1, 4) block of real
features in the fixed order (Re x-pol, Im x-pol, Re y-pol, Im y-pol). The
target is (Re, Im) of the *transmitted* center symbol on the selected
polarization. Edge symbols without a complete neighborhood are dropped, so
a frame of length T yields T - 2N windows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dsp import SymbolFrame
from ..receiver import EqualizedSymbols

__all__ = ["WindowedDataset", "window_dataset"]


@dataclass
class WindowedDataset:
    """Inputs (B, 2N+1, 4) and targets (B, 2) plus bookkeeping."""

    inputs: np.ndarray
    targets: np.ndarray
    n_neighbors: int
    pol: str

    def __post_init__(self):
        if self.inputs.ndim != 3 or self.inputs.shape[2] != 4:
            raise ValueError("inputs must be (B, M, 4)")
        if self.inputs.shape[1] % 2 == 0:
            raise ValueError("window length must be odd")
        if self.targets.shape != (self.inputs.shape[0], 2):
            raise ValueError("targets must be (B, 2)")

    def __len__(self):
        return self.inputs.shape[0]

    @property
    def window_symbols(self) -> int:
        return self.inputs.shape[1]

    def split(self, fraction: float):
        """Head/tail split (unshuffled); the tail is the validation part."""
        n_val = int(round(len(self) * fraction))
        n_train = len(self) - n_val
        head = WindowedDataset(
            self.inputs[:n_train], self.targets[:n_train], self.n_neighbors, self.pol
        )
        tail = WindowedDataset(
            self.inputs[n_train:], self.targets[n_train:], self.n_neighbors, self.pol
        )
        return head, tail


def window_dataset(
    rx: EqualizedSymbols, tx: SymbolFrame, n_neighbors: int, pol: str = "x"
) -> WindowedDataset:
    """Slide a (2N+1)-symbol window over the received frame.

    The window for output index k covers received symbols k .. k+2N and is
    labeled with transmitted symbol k+N (the window center).
    """
    if n_neighbors <= 0:
        raise ValueError("n_neighbors must be positive")
    if pol not in ("x", "y"):
        raise ValueError("pol must be 'x' or 'y'")
    t_len = len(rx)
    m = 2 * n_neighbors + 1
    if t_len <= 2 * n_neighbors:
        raise ValueError("frame shorter than one full window")
    if len(tx) != t_len:
        raise ValueError("rx and tx must have equal length")

    feats = np.stack(
        [rx.x_pol.real, rx.x_pol.imag, rx.y_pol.real, rx.y_pol.imag], axis=1
    )  # (T, 4)
    windows = np.lib.stride_tricks.sliding_window_view(feats, m, axis=0)  # (B, 4, M)
    inputs = np.ascontiguousarray(windows.transpose(0, 2, 1))

    center = tx.x_pol if pol == "x" else tx.y_pol
    center = center[n_neighbors:t_len - n_neighbors]
    targets = np.stack([center.real, center.imag], axis=1)
    return WindowedDataset(inputs, targets, n_neighbors, pol)
