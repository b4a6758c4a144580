"""Experiment configuration: a JSON-compatible tree with explicit units.

Schema version 1. All physical quantities carry their unit in the key name
(``length_km``, ``baud``, ``launch_power_dbm``, ...). Symbol counts must be
powers of two. ``equalizer`` is one of:

* ``{"preset": "<tier>/<family>"}``          -- catalog entry
* ``{"kind": "...", ...}``                   -- explicit topology spec
* ``{"dbp": {"steps_per_span": ..., ...}}``  -- back-propagation baseline
* ``{"identity": true}``                     -- pass-through (gain 0 dB)
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .channel import FiberParams, LinkConfig
from .neural.training import TrainConfig
from .serialization import config_hash

__all__ = ["ConfigError", "TxConfig", "SeedConfig", "ExperimentConfig", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass
class TxConfig:
    baud: float = 34.4e9
    roll_off: float = 0.1
    sps: int = 8
    n_train_symbols: int = 2**20
    n_test_symbols: int = 2**18
    rrc_span_symbols: int = 64
    data_source: str = "mt"  # "mt" (Mersenne twister) or "prbs"

    def __post_init__(self):
        if not _is_pow2(self.n_train_symbols) or not _is_pow2(self.n_test_symbols):
            raise ConfigError("symbol counts must be powers of two")
        if self.data_source not in ("mt", "prbs"):
            raise ConfigError("data_source must be 'mt' or 'prbs'")
        if self.sps < 2:
            raise ConfigError("sps must be >= 2")


@dataclass
class SeedConfig:
    data: int = 1
    noise: int = 2
    train: int = 3


@dataclass
class ExperimentConfig:
    link: LinkConfig = field(default_factory=LinkConfig)
    tx: TxConfig = field(default_factory=TxConfig)
    equalizer: dict = field(default_factory=lambda: {"preset": "best/mlp"})
    train: TrainConfig = field(default_factory=TrainConfig)
    target_q_db: float | None = None
    seeds: SeedConfig = field(default_factory=SeedConfig)
    pol: str = "x"  # polarization recovered by the equalizer / reported

    def __post_init__(self):
        if self.pol not in ("x", "y", "both"):
            raise ConfigError("pol must be 'x', 'y' or 'both'")

    # -- JSON round trip -------------------------------------------------

    def to_dict(self) -> dict:
        spans = [asdict(sp) for sp in self.link.spans]
        return {
            "schema_version": SCHEMA_VERSION,
            "link": {
                "spans": spans,
                "amp_noise_figure_db": self.link.amp_noise_figure_db,
                "ssfm_step_km": self.link.ssfm_step_km,
                "launch_power_dbm": self.link.launch_power_dbm,
                "carrier_freq_thz": self.link.carrier_freq_thz,
            },
            "tx": asdict(self.tx),
            "equalizer": self.equalizer,
            "train": asdict(self.train),
            "target_q_db": self.target_q_db,
            "seeds": asdict(self.seeds),
            "pol": self.pol,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            version = d.get("schema_version", SCHEMA_VERSION)
            if version != SCHEMA_VERSION:
                raise ConfigError(f"unsupported schema_version {version}")
            link_d = dict(d.get("link", {}))
            spans = [FiberParams(**sp) for sp in link_d.pop("spans", [{}])]
            link = LinkConfig(spans=spans, **link_d)
            return cls(
                link=link,
                tx=TxConfig(**d.get("tx", {})),
                equalizer=d.get("equalizer", {"preset": "best/mlp"}),
                train=TrainConfig(**d.get("train", {})),
                target_q_db=d.get("target_q_db"),
                seeds=SeedConfig(**d.get("seeds", {})),
                pol=d.get("pol", "x"),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {path}: {exc}") from exc

    def hash(self) -> str:
        return config_hash(self.to_dict())


def default_link_9x50() -> LinkConfig:
    """The package's reference link: 9 x 50 km low-dispersion spans."""
    return LinkConfig()
