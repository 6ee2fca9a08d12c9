"""Goemans-Williamson baseline.

The SDP relaxation ``max sum w_ij (1 - v_i . v_j) / 2`` over unit vectors is
solved in low-rank (Burer-Monteiro) form by projected gradient ascent with an
adaptive step, keeping the best of several random restarts. Rounding draws
Gaussian hyperplane normals ``r`` and sets ``x_i = [r . v_i >= 0]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .problem import MaxCutInstance, index_to_bits


@dataclass(frozen=True)
class Embedding:
    vectors: np.ndarray  # (n, k), unit rows
    objective: float

    @property
    def rank(self) -> int:
        return self.vectors.shape[1]


def _weights(instance: MaxCutInstance) -> np.ndarray:
    W = np.zeros((instance.n, instance.n))
    for i, j, w in instance.edges:
        W[i - 1, j - 1] = W[j - 1, i - 1] = w
    return W


def relaxation_objective(V: np.ndarray, instance: MaxCutInstance) -> float:
    W = _weights(instance)
    return float(0.25 * np.sum(W) - 0.25 * np.sum(W * (V @ V.T)))


def _normalize(V):
    return V / np.linalg.norm(V, axis=1, keepdims=True)


def _ascend(W, V, iters, tol):
    total = 0.25 * W.sum()

    def f(V):
        return total - 0.25 * np.sum(W * (V @ V.T))

    step = 1.0 / max(1.0, np.abs(W).sum(axis=1).max())
    val = f(V)
    for _ in range(iters):
        G = -0.5 * (W @ V)
        G -= np.sum(G * V, axis=1, keepdims=True) * V  # tangent-space projection
        if np.linalg.norm(G) < tol:
            break
        while True:
            cand = _normalize(V + step * G)
            new = f(cand)
            if new >= val or step < 1e-12:
                break
            step *= 0.5
        if new < val:
            break
        V, val = cand, new
        step *= 1.5
    return V, val


def gw_solve(instance: MaxCutInstance, rank: int | None = None, restarts: int = 10,
             iters: int = 3000, seed: int = 0, tol: float = 1e-7) -> Embedding:
    if rank is None:
        rank = max(2, math.ceil(math.sqrt(2 * instance.n)))
    if rank < 2:
        raise InputError("embedding rank must be at least 2")
    if restarts < 1:
        raise InputError("need at least one restart")
    W = _weights(instance)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        V0 = _normalize(rng.standard_normal((instance.n, rank)))
        V, val = _ascend(W, V0, iters, tol)
        if best is None or val > best.objective:
            best = Embedding(V, float(val))
    return best


def rounding_costs(emb: Embedding, instance: MaxCutInstance, M: int, seed: int):
    """Costs (minimisation form) and basis indices of ``M`` hyperplane roundings."""
    if M < 1:
        raise InputError("need at least one rounding")
    rng = np.random.default_rng(seed)
    R = rng.standard_normal((M, emb.rank))
    bits = (R @ emb.vectors.T >= 0).astype(np.int64)  # (M, n)
    costs = np.zeros(M)
    for i, j, w in instance.edges:
        costs -= w * (bits[:, i - 1] != bits[:, j - 1])
    indices = bits @ (1 << np.arange(instance.n, dtype=np.int64))
    return costs, indices


def hyperplane_round(emb: Embedding, instance: MaxCutInstance, M: int, seed: int):
    """Best of ``M`` roundings as ``(bitstring, cost)``; the first minimum wins ties."""
    costs, indices = rounding_costs(emb, instance, M, seed)
    k = int(np.argmin(costs))
    return index_to_bits(int(indices[k]), instance.n), float(costs[k])
