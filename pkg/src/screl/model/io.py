"""Versioned model checkpoints: one .npz per model, parameters stored
bit-exactly next to a JSON metadata record."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .base import EmbedSpec
from .cnn import CnnConfig, CnnModel
from .rnn import RnnConfig, RnnModel

FORMAT = "screl-model"
VERSION = 1


def save_model(path: str | Path, model, extra: Optional[dict[str, Any]] = None) -> None:
    """Write a checkpoint; ``extra`` is an arbitrary JSON-serializable
    payload the caller wants back from load_model (vocabulary, hashes...)."""
    embed = model.embed
    meta = {
        "format": FORMAT,
        "version": VERSION,
        "arch": model.arch,
        "n_classes": model.n_classes,
        "seed": model.seed,
        "dtype": model.dtype.name,
        "embed": {
            "vocab_size": embed.vocab_size,
            "pos_size": embed.pos_size,
            "relpos_size": embed.relpos_size,
            "word_dim": embed.word_dim,
            "pos_dim": embed.pos_dim,
            "relpos_dim": embed.relpos_dim,
            "finetune_words": embed.finetune_words,
        },
        "extra": extra or {},
    }
    if model.arch == "cnn":
        meta["config"] = {
            "filter_widths": list(model.config.filter_widths),
            "filters_per_width": model.config.filters_per_width,
            "dropout_keep": model.config.dropout_keep,
            "l2_lambda": model.config.l2_lambda,
        }
    elif model.arch == "rnn":
        meta["config"] = {
            "lstm_units": model.config.lstm_units,
            "dropout_keep": model.config.dropout_keep,
            "l2_lambda": model.config.l2_lambda,
        }
    else:
        raise ValueError(f"cannot checkpoint unknown architecture {model.arch!r}")
    arrays = {f"param_{name}": value for name, value in model.params.items()}
    np.savez(path, __meta__=np.array(json.dumps(meta)), **arrays)


def load_model(path: str | Path):
    """Load a checkpoint; returns ``(model, extra)``."""
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["__meta__"][()]))
        if meta.get("format") != FORMAT:
            raise ValueError(f"{path}: not a model checkpoint")
        if meta.get("version") != VERSION:
            raise ValueError(
                f"{path}: unsupported checkpoint version {meta.get('version')}"
            )
        params = {
            key[len("param_") :]: data[key]
            for key in data.files
            if key.startswith("param_")
        }
    embed = EmbedSpec(**meta["embed"])
    dtype = np.dtype(meta["dtype"])
    if meta["arch"] == "cnn":
        cfg = meta["config"]
        model = CnnModel(
            embed,
            CnnConfig(
                tuple(cfg["filter_widths"]),
                cfg["filters_per_width"],
                cfg["dropout_keep"],
                cfg["l2_lambda"],
            ),
            meta["n_classes"],
            seed=meta["seed"],
            dtype=dtype,
        )
    elif meta["arch"] == "rnn":
        cfg = meta["config"]
        model = RnnModel(
            embed,
            RnnConfig(cfg["lstm_units"], cfg["dropout_keep"], cfg["l2_lambda"]),
            meta["n_classes"],
            seed=meta["seed"],
            dtype=dtype,
        )
    else:
        raise ValueError(f"{path}: unknown architecture {meta['arch']!r}")
    for name in model.params:
        if f"param_{name}" not in [f"param_{k}" for k in params]:
            raise ValueError(f"{path}: checkpoint is missing parameter {name!r}")
        model.params[name] = params[name]
    return model, meta["extra"]
