"""Numpy building blocks with explicit forward/backward passes.

Everything here is pure array math; parameters live in plain dicts owned
by the model classes, so the same code runs at 32-bit for training and at
64-bit for finite-difference gradient checking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def glorot(rng: np.random.Generator, shape: tuple[int, ...], dtype) -> np.ndarray:
    limit = np.sqrt(6.0 / (shape[0] + shape[-1]))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


@dataclass
class Batch:
    """Padded id channels for a batch of encoded examples."""

    word: np.ndarray  # (B, T) int64
    pos: np.ndarray
    relpos1: np.ndarray
    relpos2: np.ndarray
    lengths: np.ndarray  # (B,) true lengths before padding
    labels: Optional[np.ndarray] = None
    original_lengths: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return self.word.shape[0]

    def mask(self, dtype=np.float64) -> np.ndarray:
        t = np.arange(self.word.shape[1])
        return (t[None, :] < self.lengths[:, None]).astype(dtype)


def make_batch(
    examples: Sequence,
    word_pad: int,
    pos_pad: int,
    relpos_pad: int,
    min_length: int = 1,
) -> Batch:
    """Right-pad encoded examples to a common length (at least
    ``min_length``, so convolution windows always fit)."""
    if not examples:
        raise ValueError("cannot build an empty batch")
    n = len(examples)
    t = max(max(ex.length for ex in examples), min_length)
    word = np.full((n, t), word_pad, dtype=np.int64)
    pos = np.full((n, t), pos_pad, dtype=np.int64)
    rp1 = np.full((n, t), relpos_pad, dtype=np.int64)
    rp2 = np.full((n, t), relpos_pad, dtype=np.int64)
    lengths = np.empty(n, dtype=np.int64)
    originals = np.empty(n, dtype=np.int64)
    labels = np.full(n, -1, dtype=np.int64)
    labeled = True
    for b, ex in enumerate(examples):
        word[b, : ex.length] = ex.word_ids
        pos[b, : ex.length] = ex.pos_ids
        rp1[b, : ex.length] = ex.relpos1_ids
        rp2[b, : ex.length] = ex.relpos2_ids
        lengths[b] = ex.length
        originals[b] = ex.original_length
        if ex.label is None:
            labeled = False
        else:
            labels[b] = ex.label
    return Batch(
        word=word,
        pos=pos,
        relpos1=rp1,
        relpos2=rp2,
        lengths=lengths,
        labels=labels if labeled else None,
        original_lengths=originals,
    )


def embed_forward(
    tables: dict[str, np.ndarray], batch: Batch
) -> tuple[np.ndarray, dict]:
    """Concatenate the four embedding channels into (B, T, D)."""
    parts = [
        tables["word_emb"][batch.word],
        tables["pos_emb"][batch.pos],
        tables["relpos1_emb"][batch.relpos1],
        tables["relpos2_emb"][batch.relpos2],
    ]
    x = np.concatenate(parts, axis=2)
    dims = [p.shape[2] for p in parts]
    return x, {"batch": batch, "dims": dims}


def embed_backward(
    dx: np.ndarray, cache: dict, tables: dict[str, np.ndarray]
) -> dict[str, np.ndarray]:
    batch: Batch = cache["batch"]
    dims = cache["dims"]
    ids = [batch.word, batch.pos, batch.relpos1, batch.relpos2]
    names = ["word_emb", "pos_emb", "relpos1_emb", "relpos2_emb"]
    grads: dict[str, np.ndarray] = {}
    offset = 0
    for name, channel, width in zip(names, ids, dims):
        grad = np.zeros_like(tables[name])
        np.add.at(grad, channel, dx[:, :, offset : offset + width])
        grads[name] = grad
        offset += width
    return grads


def conv_maxpool_forward(
    x: np.ndarray, w: np.ndarray, b: np.ndarray, width: int, valid: np.ndarray
) -> tuple[np.ndarray, dict]:
    """One filter-width convolution over time, ReLU, max over the ``valid``
    window positions of each example. Returns (B, F) features."""
    n, t, d = x.shape
    positions = t - width + 1
    patches = np.concatenate(
        [x[:, i : i + positions, :] for i in range(width)], axis=2
    )
    z = patches @ w + b
    a = np.maximum(z, 0.0)
    in_range = np.arange(positions)[None, :, None] < valid[:, None, None]
    masked = np.where(in_range, a, -1.0)
    arg = masked.argmax(axis=1)
    pooled = np.take_along_axis(masked, arg[:, None, :], axis=1)[:, 0, :]
    return pooled, {"patches": patches, "z": z, "arg": arg, "xshape": x.shape,
                    "width": width}


def conv_maxpool_backward(
    dpooled: np.ndarray, w: np.ndarray, cache: dict
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    patches, z, arg = cache["patches"], cache["z"], cache["arg"]
    n, t, d = cache["xshape"]
    width = cache["width"]
    positions = t - width + 1
    f = w.shape[1]
    da = np.zeros((n, positions, f), dtype=dpooled.dtype)
    np.put_along_axis(da, arg[:, None, :], dpooled[:, None, :], axis=1)
    dz = da * (z > 0)
    dw = patches.reshape(n * positions, -1).T @ dz.reshape(n * positions, f)
    db = dz.sum(axis=(0, 1))
    dpatches = dz @ w.T
    dx = np.zeros(cache["xshape"], dtype=dpooled.dtype)
    for i in range(width):
        dx[:, i : i + positions, :] += dpatches[:, :, i * d : (i + 1) * d]
    return dx, dw, db


def lstm_forward(
    x: np.ndarray, mask: np.ndarray, w: np.ndarray, b: np.ndarray
) -> tuple[np.ndarray, np.ndarray, dict]:
    """Dynamic LSTM: padded steps (mask 0) carry state through unchanged,
    so batching never touches computation beyond each true length.

    Returns the final hidden and cell states (B, H) and the backprop cache.
    Gate layout along the 4H axis is input, forget, candidate, output.
    """
    n, t, d = x.shape
    h_size = w.shape[1] // 4
    h = np.zeros((n, h_size), dtype=x.dtype)
    c = np.zeros((n, h_size), dtype=x.dtype)
    steps = []
    for step in range(t):
        m = mask[:, step : step + 1]
        xh = np.concatenate([x[:, step, :], h], axis=1)
        z = xh @ w + b
        gi = sigmoid(z[:, :h_size])
        gf = sigmoid(z[:, h_size : 2 * h_size])
        gg = np.tanh(z[:, 2 * h_size : 3 * h_size])
        go = sigmoid(z[:, 3 * h_size :])
        c_new = gf * c + gi * gg
        tc = np.tanh(c_new)
        h_new = go * tc
        steps.append((xh, gi, gf, gg, go, c, tc, m))
        h = m * h_new + (1.0 - m) * h
        c = m * c_new + (1.0 - m) * c
    return h, c, {"steps": steps, "xshape": x.shape}


def lstm_backward(
    dh_last: np.ndarray, dc_last: np.ndarray, w: np.ndarray, cache: dict
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    steps = cache["steps"]
    n, t, d = cache["xshape"]
    dw = np.zeros_like(w)
    db = np.zeros(w.shape[1], dtype=w.dtype)
    dx = np.zeros(cache["xshape"], dtype=w.dtype)
    dh = dh_last.astype(w.dtype).copy()
    dc = dc_last.astype(w.dtype).copy()
    for step in reversed(range(t)):
        xh, gi, gf, gg, go, c_prev, tc, m = steps[step]
        dh_new = m * dh
        dc_new = m * dc
        dh_skip = (1.0 - m) * dh
        dc_skip = (1.0 - m) * dc
        dgo = dh_new * tc
        dc_new = dc_new + dh_new * go * (1.0 - tc * tc)
        dgi = dc_new * gg
        dgf = dc_new * c_prev
        dgg = dc_new * gi
        dc_prev = dc_new * gf + dc_skip
        dz = np.concatenate(
            [
                dgi * gi * (1.0 - gi),
                dgf * gf * (1.0 - gf),
                dgg * (1.0 - gg * gg),
                dgo * go * (1.0 - go),
            ],
            axis=1,
        )
        dw += xh.T @ dz
        db += dz.sum(axis=0)
        dxh = dz @ w.T
        dx[:, step, :] = dxh[:, :d]
        dh = dxh[:, d:] + dh_skip
        dc = dc_prev
    return dx, dw, db


def reverse_padded(arr: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Reverse each row's first ``lengths[b]`` entries along axis 1;
    padding stays in place. Its own inverse."""
    out = arr.copy()
    for b, n in enumerate(lengths):
        out[b, :n] = arr[b, :n][::-1]
    return out


def dropout_forward(
    x: np.ndarray, keep: float, rng: Optional[np.random.Generator]
) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """Inverted dropout; ``rng=None`` (evaluation) is the identity."""
    if rng is None or keep >= 1.0:
        return x, None
    mask = (rng.random(x.shape) < keep).astype(x.dtype) / keep
    return x * mask, mask


def dropout_backward(dx: np.ndarray, mask: Optional[np.ndarray]) -> np.ndarray:
    if mask is None:
        return dx
    return dx * mask
