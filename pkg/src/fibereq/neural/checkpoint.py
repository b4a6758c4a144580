"""Versioned equalizer checkpoints.

A checkpoint is a deterministic npz container with three members:

* ``meta``   -- UTF-8 JSON: format version, topology spec, seed provenance,
  training bookkeeping (epochs used, best validation loss),
* ``params`` -- the flat float64 parameter vector (gradient-trained
  families) or the readout matrix raveled (reservoir family),
* ``format`` -- single int array with the container version.

Version 1 is the only format; loaders must reject unknown versions.
"""

from __future__ import annotations

import numpy as np

from ..serialization import array_to_json, json_to_array, load_arrays, save_arrays
from ..topologies import spec_from_dict, spec_to_dict
from .esn import EsnModel
from .models import EqualizerModel, build_model

__all__ = ["save_model", "load_model", "FORMAT_VERSION"]

FORMAT_VERSION = 1


def save_model(path, model, epochs_used: int = 0, best_val_loss: float = float("nan")) -> None:
    if isinstance(model, EsnModel):
        params = model.w_out.ravel()
    elif isinstance(model, EqualizerModel):
        params = model.get_flat_params()
    else:
        raise TypeError(f"cannot checkpoint a {type(model).__name__}")
    meta = {
        "format_version": FORMAT_VERSION,
        "spec": spec_to_dict(model.spec),
        "seed": model.seed,
        "epochs_used": int(epochs_used),
        "best_val_loss": None if np.isnan(best_val_loss) else float(best_val_loss),
    }
    save_arrays(path, {
        "format": np.array([FORMAT_VERSION], dtype=np.int64),
        "meta": json_to_array(meta),
        "params": np.asarray(params, dtype=np.float64),
    })


def load_model(path):
    """Rebuild the model from a checkpoint; returns (model, meta dict)."""
    data = load_arrays(path)
    version = int(data["format"][0])
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format version {version}")
    meta = array_to_json(data["meta"])
    spec = spec_from_dict(meta["spec"])
    model = build_model(spec, seed=int(meta["seed"]))
    params = data["params"]
    if isinstance(model, EsnModel):
        model.w_out = params.reshape(model.w_out.shape).copy()
    else:
        model.set_flat_params(params)
    return model, meta
