"""Run configuration: defaults, JSON file loading, validation, hashing,
and the named fan-out of the master seed."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional


def derive_seed(master: int, name: str) -> int:
    """Deterministic child seed for a named random stream."""
    digest = hashlib.sha256(f"{master}/{name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


class ConfigError(ValueError):
    """A configuration file or value is invalid; the message names the key."""


@dataclass
class Config:
    """All tunables in one flat record.

    ``epochs`` and ``lr_halve_every`` default per subtask (classification:
    200 and 25; extraction: 10 and 1); every other default is the final
    system setting.
    """

    seed: int = 42
    subtask: str = "1"
    # embeddings / encoding
    word_dim: int = 200
    pos_dim: int = 30
    relpos_dim: int = 20
    relpos_clip: int = 30
    min_count: int = 1
    finetune_words: bool = True
    pos_fallback: bool = True
    # architectures
    cnn_filters: int = 192
    cnn_widths: tuple[int, ...] = (2, 3, 4, 5, 6, 7)
    lstm_units: int = 600
    dropout_keep: float = 0.5
    l2_lambda: float = 0.01
    # optimization
    lr_initial: float = 0.01
    lr_halve_every: Optional[int] = None
    epochs: Optional[int] = None
    batch_size: int = 64
    ensemble_size: int = 20
    # data handling
    upsample_ratio: float = 1.0
    max_distance: int = 19
    # augmentation
    lm_order: int = 3
    lm_threshold: float = -21.0
    min_interior: int = 5
    # execution
    dtype: str = "float32"
    workers: int = 1

    def __post_init__(self) -> None:
        self.cnn_widths = tuple(self.cnn_widths)
        self.validate()

    # -- derived values -------------------------------------------------------

    @property
    def scheme(self) -> str:
        return "six" if self.subtask == "1" else "twelve"

    @property
    def n_classes(self) -> int:
        return 6 if self.subtask == "1" else 12

    @property
    def resolved_epochs(self) -> int:
        if self.epochs is not None:
            return self.epochs
        return 200 if self.subtask == "1" else 10

    @property
    def resolved_halve_every(self) -> int:
        if self.lr_halve_every is not None:
            return self.lr_halve_every
        return 25 if self.subtask == "1" else 1

    # -- validation -----------------------------------------------------------

    def validate(self) -> None:
        def require(cond: bool, key: str, message: str) -> None:
            if not cond:
                raise ConfigError(f"config key {key!r}: {message}")

        require(self.subtask in ("1", "2"), "subtask", "must be '1' or '2'")
        for key in ("word_dim", "pos_dim", "relpos_dim", "relpos_clip",
                    "min_count", "cnn_filters", "lstm_units", "batch_size",
                    "ensemble_size", "lm_order", "min_interior", "workers"):
            value = getattr(self, key)
            require(isinstance(value, int) and not isinstance(value, bool)
                    and value >= 1, key, f"must be a positive integer, got {value!r}")
        require(
            bool(self.cnn_widths)
            and all(isinstance(w, int) and w >= 1 for w in self.cnn_widths)
            and list(self.cnn_widths) == sorted(set(self.cnn_widths)),
            "cnn_widths", f"must be strictly ascending positive integers, "
            f"got {list(self.cnn_widths)!r}",
        )
        require(0.0 < self.dropout_keep <= 1.0, "dropout_keep",
                f"must be in (0, 1], got {self.dropout_keep!r}")
        require(self.l2_lambda >= 0.0, "l2_lambda",
                f"must be >= 0, got {self.l2_lambda!r}")
        require(self.lr_initial > 0.0, "lr_initial",
                f"must be positive, got {self.lr_initial!r}")
        if self.lr_halve_every is not None:
            require(self.lr_halve_every >= 1, "lr_halve_every",
                    f"must be >= 1, got {self.lr_halve_every!r}")
        if self.epochs is not None:
            require(self.epochs >= 0, "epochs",
                    f"must be >= 0, got {self.epochs!r}")
        require(self.upsample_ratio > 0.0, "upsample_ratio",
                f"must be positive, got {self.upsample_ratio!r}")
        require(self.max_distance >= 1, "max_distance",
                f"must be >= 1, got {self.max_distance!r}")
        require(2 <= self.lm_order <= 5, "lm_order",
                f"must be within [2, 5], got {self.lm_order!r}")
        require(self.dtype in ("float32", "float64"), "dtype",
                "must be 'float32' or 'float64'")

    # -- (de)serialization ------------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Config":
        known = {f.name for f in dataclasses.fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
        try:
            return cls(**data)
        except TypeError as err:
            raise ConfigError(str(err)) from err

    @classmethod
    def from_file(cls, path: str | Path) -> "Config":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as err:
            raise ConfigError(f"{path}: not valid JSON ({err})") from err
        if not isinstance(payload, dict):
            raise ConfigError(f"{path}: expected a JSON object at the top level")
        return cls.from_dict(payload)

    def to_dict(self) -> dict[str, Any]:
        out = dataclasses.asdict(self)
        out["cnn_widths"] = list(self.cnn_widths)
        return out

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()[:12]

    def replace(self, **changes) -> "Config":
        return dataclasses.replace(self, **changes)


#: Documented experiment envelopes for the sweep command, per parameter.
#: ``cnn_widths`` sweeps over preset width ranges rather than scalars.
SWEEP_RANGES: dict[str, Any] = {
    "word_dim": (100, 300),
    "pos_dim": (10, 50),
    "relpos_dim": (10, 50),
    "cnn_filters": (64, 384),
    "lstm_units": (1, 2400),
    "l2_lambda": (0.0, 1.0),
    "dropout_keep": (0.3, 1.0),
    "lr_initial": (0.001, 0.1),
    "epochs": (5, 400),
    "ensemble_size": (1, 30),
    "batch_size": (32, 192),
    "upsample_ratio": (0.5, 5.0),
    "max_distance": (7, 23),
    "cnn_widths": [(2, 4), (2, 7), (5, 9)],
}

_INT_SWEEPS = {"word_dim", "pos_dim", "relpos_dim", "cnn_filters", "lstm_units",
               "epochs", "ensemble_size", "batch_size", "max_distance"}
_LOG_SWEEPS = {"lr_initial"}


def default_sweep_grid(param: str, points: int = 5) -> list[Any]:
    """Evenly spaced default grid inside the documented envelope."""
    if param not in SWEEP_RANGES:
        raise ConfigError(
            f"unknown sweep parameter {param!r}; choose from "
            + ", ".join(sorted(SWEEP_RANGES))
        )
    bounds = SWEEP_RANGES[param]
    if param == "cnn_widths":
        return [tuple(range(lo, hi + 1)) for lo, hi in bounds]
    low, high = bounds
    if param in _LOG_SWEEPS:
        import numpy as np

        values = np.geomspace(low, high, points)
    else:
        import numpy as np

        values = np.linspace(low, high, points)
    if param in _INT_SWEEPS:
        seen: list[int] = []
        for v in values:
            iv = max(1, int(round(v)))
            if iv not in seen:
                seen.append(iv)
        return seen
    return [float(v) for v in values]
