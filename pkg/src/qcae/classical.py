"""Minimal dense / lookup layers with exact backpropagation.

Everything is batched: inputs are (B, in_dim), outputs (B, out_dim).
Layers are plain containers; forward/backward are free functions so the
same weights can be evaluated functionally (needed by the finite-difference
oracle).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DomainError

ACTIVATIONS = ("relu", "softmax", "linear")


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray  # (out_dim,)
    activation: str = "linear"

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def num_params(self) -> int:
        return self.weights.size + self.bias.size


def dense_init(rng: np.random.Generator, in_dim: int, out_dim: int,
               activation: str = "linear") -> DenseLayer:
    """Symmetric fan-based uniform init on [-sqrt(6/(in+out)), +sqrt(6/(in+out))].

    Biases draw from the same range; with one-hot inputs a zero bias would
    let fully-dead ReLU columns emit exact zero vectors downstream.
    """
    if activation not in ACTIVATIONS:
        raise DomainError(f"unknown activation {activation!r}")
    limit = np.sqrt(6.0 / (in_dim + out_dim))
    w = rng.uniform(-limit, limit, size=(out_dim, in_dim))
    b = rng.uniform(-limit, limit, size=out_dim)
    return DenseLayer(w, b, activation)


def softmax(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def dense_forward(layer: DenseLayer, v: np.ndarray) -> np.ndarray:
    v = np.atleast_2d(np.asarray(v, dtype=float))
    if v.shape[1] != layer.in_dim:
        raise DomainError(f"expected input dim {layer.in_dim}, got {v.shape[1]}")
    z = v @ layer.weights.T + layer.bias
    if layer.activation == "relu":
        return np.maximum(z, 0.0)
    if layer.activation == "softmax":
        return softmax(z)
    return z


def dense_backward(layer: DenseLayer, v: np.ndarray, upstream: np.ndarray):
    """Chain-rule gradients; returns (input_grad, weight_grad, bias_grad).

    Weight/bias gradients are summed over the batch.
    """
    v = np.atleast_2d(np.asarray(v, dtype=float))
    upstream = np.atleast_2d(np.asarray(upstream, dtype=float))
    if v.shape[1] != layer.in_dim or upstream.shape[1] != layer.out_dim:
        raise DomainError("shape mismatch in dense_backward")
    z = v @ layer.weights.T + layer.bias
    if layer.activation == "relu":
        dz = upstream * (z > 0)
    elif layer.activation == "softmax":
        p = softmax(z)
        dz = p * (upstream - np.sum(upstream * p, axis=1, keepdims=True))
    else:
        dz = upstream
    dv = dz @ layer.weights
    dw = dz.T @ v
    db = dz.sum(axis=0)
    return dv, dw, db


def softmax_xent_grad(p: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Fused gradient of -log p[s-1] w.r.t. the softmax logits: p - onehot."""
    g = p.copy()
    g[np.arange(len(s)), np.asarray(s) - 1] -= 1.0
    return g


# dense stacks ---------------------------------------------------------------


def stack_init(rng: np.random.Generator, dims: tuple[int, ...],
               final_activation: str) -> list[DenseLayer]:
    """ReLU hidden layers ending in the given final activation."""
    layers = []
    for i in range(len(dims) - 1):
        act = final_activation if i == len(dims) - 2 else "relu"
        layers.append(dense_init(rng, dims[i], dims[i + 1], act))
    return layers


def stack_forward(layers, v):
    """Returns (output, cache of per-layer inputs)."""
    cache = []
    for layer in layers:
        cache.append(v)
        v = dense_forward(layer, v)
    return v, cache


def stack_backward(layers, cache, upstream):
    """Returns (input_grad, flat parameter gradient over all layers)."""
    grads = []
    for layer, v in zip(reversed(layers), reversed(cache)):
        upstream, dw, db = dense_backward(layer, v, upstream)
        grads.append((dw, db))
    flat = np.concatenate([np.concatenate([dw.ravel(), db]) for dw, db in reversed(grads)])
    return upstream, flat


def stack_param_count(layers) -> int:
    return sum(layer.num_params for layer in layers)


def stack_get_params(layers) -> np.ndarray:
    return np.concatenate([np.concatenate([l.weights.ravel(), l.bias]) for l in layers])


def stack_set_params(layers, flat: np.ndarray) -> None:
    pos = 0
    for layer in layers:
        nw = layer.weights.size
        layer.weights = flat[pos:pos + nw].reshape(layer.weights.shape).copy()
        pos += nw
        nb = layer.bias.size
        layer.bias = flat[pos:pos + nb].copy()
        pos += nb
    if pos != flat.size:
        raise DomainError(f"parameter vector has {flat.size} entries, stack uses {pos}")


# lookup encoder -------------------------------------------------------------


@dataclass
class LookupEncoder:
    table: np.ndarray  # (M, 2n)

    @property
    def num_params(self) -> int:
        return self.table.size


def lookup_init(rng: np.random.Generator, num_symbols: int, out_dim: int) -> LookupEncoder:
    return LookupEncoder(rng.uniform(-1.0, 1.0, size=(num_symbols, out_dim)))


def lookup_forward(enc: LookupEncoder, s) -> np.ndarray:
    s = np.atleast_1d(np.asarray(s))
    M = enc.table.shape[0]
    if np.any(s < 1) or np.any(s > M):
        raise DomainError(f"symbols must lie in [1, {M}]")
    return enc.table[s - 1].copy()


def lookup_backward(enc: LookupEncoder, s, upstream: np.ndarray) -> np.ndarray:
    """Gradient w.r.t. the table, summed over the batch; shape like the table."""
    s = np.atleast_1d(np.asarray(s))
    grad = np.zeros_like(enc.table)
    np.add.at(grad, s - 1, np.atleast_2d(upstream))
    return grad


# power normalization ---------------------------------------------------------


def normalize(x: np.ndarray, uses: int) -> np.ndarray:
    """Scale each row to squared norm ``uses`` (unit average power per use)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise DegenerateInputError("cannot normalize a zero transmit vector")
    return x * (np.sqrt(uses) / norms)


def normalize_backward(x: np.ndarray, upstream: np.ndarray, uses: int) -> np.ndarray:
    """VJP of normalize; the result is orthogonal to each input row."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    upstream = np.atleast_2d(np.asarray(upstream, dtype=float))
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise DegenerateInputError("cannot normalize a zero transmit vector")
    proj = np.sum(upstream * x, axis=1, keepdims=True) / norms**2
    return (np.sqrt(uses) / norms) * (upstream - x * proj)
