"""Deterministic on-disk containers.

``save_arrays``/``load_arrays`` implement an npz-compatible zip of .npy
members with all timestamps pinned, so identical inputs produce
byte-identical files (plain ``np.savez`` embeds the current time in the
zip headers). JSON metadata rides along as a UTF-8 bytes array.
"""

from __future__ import annotations

import io
import json
import zipfile
from pathlib import Path

import numpy as np

__all__ = ["save_arrays", "load_arrays", "json_to_array", "array_to_json", "config_hash"]

_EPOCH = (1980, 1, 1, 0, 0, 0)


def save_arrays(path, arrays: dict) -> None:
    """Write arrays to an npz-format file with deterministic bytes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
        for name in sorted(arrays):
            buf = io.BytesIO()
            np.lib.format.write_array(buf, np.asarray(arrays[name]))
            info = zipfile.ZipInfo(f"{name}.npy", date_time=_EPOCH)
            info.compress_type = zipfile.ZIP_STORED
            info.external_attr = 0o600 << 16
            zf.writestr(info, buf.getvalue())


def load_arrays(path) -> dict:
    with np.load(path, allow_pickle=False) as data:
        return {k: data[k] for k in data.files}


def array_to_json(arr: np.ndarray):
    return json.loads(bytes(arr.tobytes()).decode("utf-8"))


def json_to_array(obj) -> np.ndarray:
    payload = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return np.frombuffer(payload, dtype=np.uint8)


def config_hash(obj) -> str:
    """Stable short hash of a JSON-serializable configuration tree."""
    import hashlib

    payload = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()[:12]
