"""MaxCut instances, cost evaluation and the diagonal Hamiltonian.

Bit convention used everywhere in the package: vertex ``k`` (1-based) is bit
``k - 1`` of a basis-state index, i.e. vertex 1 is the least significant bit.
Bitstrings written as text list vertex 1 first, so ``"01"`` on two vertices is
index 2.
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CapacityError, FormatError, InputError

DENSE_LIMIT = 24

Edge = tuple[int, int, float]


@dataclass(frozen=True)
class MaxCutInstance:
    """Weighted graph with 1-based vertices; edges are ``(i, j, w)`` with ``i < j``."""

    n: int
    edges: tuple[Edge, ...]
    seed: int = 0
    model: str = "manual"
    metadata: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.n < 1:
            raise InputError(f"vertex count must be positive, got {self.n}")
        seen = set()
        clean = []
        for e in self.edges:
            if len(e) != 3:
                raise InputError(f"edge {e!r} is not an (i, j, w) triple")
            i, j, w = int(e[0]), int(e[1]), float(e[2])
            if not 1 <= i < j <= self.n:
                raise InputError(f"edge ({i}, {j}) violates 1 <= i < j <= {self.n}")
            if (i, j) in seen:
                raise InputError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
            clean.append((i, j, w))
        object.__setattr__(self, "edges", tuple(clean))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def is_unweighted(self) -> bool:
        return all(w == 1.0 for _, _, w in self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for i, j, _ in self.edges:
            deg[i - 1] += 1
            deg[j - 1] += 1
        return deg

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "edges": [[i, j, w] for i, j, w in self.edges],
            "seed": self.seed,
            "model": self.model,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MaxCutInstance":
        try:
            n = int(data["n"])
            edges = tuple((int(e[0]), int(e[1]), float(e[2])) for e in data["edges"])
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            raise FormatError(f"bad graph record: {exc}") from exc
        model = data.get("model", "manual")
        if model not in ("regular", "er", "manual"):
            raise FormatError(f"unknown graph model {model!r}")
        return cls(n=n, edges=edges, seed=int(data.get("seed", 0)), model=model)


def save_instance(instance: MaxCutInstance, path) -> None:
    Path(path).write_text(json.dumps(instance.to_dict()) + "\n")


def load_instance(path) -> MaxCutInstance:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    return MaxCutInstance.from_dict(data)


def bits_to_index(x: str | Sequence[int]) -> int:
    idx = 0
    for k, b in enumerate(x):
        b = int(b)
        if b not in (0, 1):
            raise InputError(f"bit value {b!r} is not 0/1")
        idx |= b << k
    return idx


def index_to_bits(index: int, n: int) -> str:
    return "".join(str((index >> k) & 1) for k in range(n))


def complement(x: str) -> str:
    return "".join("1" if c == "0" else "0" for c in x)


def maxcut_cost(instance: MaxCutInstance, x: str | Sequence[int]) -> float:
    """Minimisation-form cost ``-sum w_ij (x_i - x_j)^2``; lower is better."""
    if len(x) != instance.n:
        raise InputError(f"bitstring length {len(x)} != vertex count {instance.n}")
    bits = [int(b) for b in x]
    total = 0.0
    for i, j, w in instance.edges:
        if bits[i - 1] != bits[j - 1]:
            total -= w
    return total


def _check_dense(n: int, limit: int | None) -> None:
    limit = DENSE_LIMIT if limit is None else limit
    if n > limit:
        raise CapacityError(f"{n} qubits exceeds dense limit {limit}")


def hamiltonian_diagonal(instance: MaxCutInstance, limit: int | None = None) -> np.ndarray:
    """Return ``h`` with ``h[x] = C(x)`` for every basis index ``x``."""
    _check_dense(instance.n, limit)
    idx = np.arange(1 << instance.n, dtype=np.int64)
    h = np.zeros(1 << instance.n)
    for i, j, w in instance.edges:
        crossing = ((idx >> (i - 1)) ^ (idx >> (j - 1))) & 1
        h -= w * crossing
    return h


@dataclass(frozen=True)
class Spectrum:
    """Distinct cost levels ``C_1 < ... < C_K`` and the level of each bitstring."""

    distinct_costs: np.ndarray
    level_index: np.ndarray
    optimal_mask: np.ndarray

    @property
    def K(self) -> int:
        return len(self.distinct_costs)

    @property
    def C1(self) -> float:
        return float(self.distinct_costs[0])

    @property
    def CK(self) -> float:
        return float(self.distinct_costs[-1])

    @property
    def n(self) -> int:
        return int(self.level_index.size).bit_length() - 1

    @property
    def optimal_set(self) -> np.ndarray:
        return np.flatnonzero(self.optimal_mask)

    def optimal_bitstrings(self) -> list[str]:
        return [index_to_bits(int(i), self.n) for i in self.optimal_set]


def spectrum_from_diagonal(h: np.ndarray, rel_tol: float = 1e-9) -> Spectrum:
    """Group the diagonal into levels; costs closer than ``rel_tol * scale`` merge."""
    values, inverse = np.unique(h, return_inverse=True)
    scale = max(1.0, float(np.max(np.abs(values))))
    # merge floating-point near-duplicates (weighted graphs sum in different orders)
    new_level = np.zeros(values.size, dtype=np.int64)
    reps = [values[0]]
    for k in range(1, values.size):
        if values[k] - reps[-1] > rel_tol * scale:
            reps.append(values[k])
        new_level[k] = len(reps) - 1
    level_index = new_level[inverse].astype(np.int32)
    distinct = np.array(reps, dtype=float)
    return Spectrum(distinct, level_index, level_index == 0)


def brute_force_spectrum(instance: MaxCutInstance, limit: int | None = None) -> Spectrum:
    return spectrum_from_diagonal(hamiltonian_diagonal(instance, limit))


def generate_regular(n: int, d: int, seed: int) -> MaxCutInstance:
    """Random simple d-regular graph.

    Stubs are paired at random; colliding stubs (self-loops, repeated edges) are
    re-paired among themselves, restarting from scratch if no valid pairing is
    left. This keeps the sampler close to uniform and still works at high degree.
    """
    if n < 1 or d < 0 or d >= n or (n * d) % 2:
        raise InputError(f"no simple {d}-regular graph on {n} vertices")
    rng = np.random.default_rng(seed)
    if d == 0:
        return MaxCutInstance(n=n, edges=(), seed=seed, model="regular")

    def suitable(edges, potential):
        if not potential:
            return True
        nodes = list(potential)
        for a in range(len(nodes)):
            for b in range(a):
                s1, s2 = sorted((nodes[a], nodes[b]))
                if (s1, s2) not in edges:
                    return True
        return False

    def attempt():
        edges = set()
        stubs = [v for v in range(n) for _ in range(d)]
        while stubs:
            potential = defaultdict(int)
            order = rng.permutation(len(stubs))
            shuffled = [stubs[k] for k in order]
            for a, b in zip(shuffled[::2], shuffled[1::2]):
                a, b = sorted((a, b))
                if a != b and (a, b) not in edges:
                    edges.add((a, b))
                else:
                    potential[a] += 1
                    potential[b] += 1
            if not suitable(edges, potential):
                return None
            stubs = [v for v, cnt in sorted(potential.items()) for _ in range(cnt)]
        return edges

    while True:
        edges = attempt()
        if edges is not None:
            break
    edge_list = tuple((a + 1, b + 1, 1.0) for a, b in sorted(edges))
    return MaxCutInstance(n=n, edges=edge_list, seed=seed, model="regular")


def generate_er_weighted(n: int, p: float, seed: int) -> MaxCutInstance:
    """G(n, p) with standard-normal edge weights."""
    if not 0.0 <= p <= 1.0:
        raise InputError(f"edge probability {p} outside [0, 1]")
    if n < 1:
        raise InputError("vertex count must be positive")
    rng = np.random.default_rng(seed)
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    u = rng.random(len(pairs))
    weights = rng.standard_normal(len(pairs))
    edges = tuple(
        (i, j, float(w)) for (i, j), uu, w in zip(pairs, u, weights) if uu < p
    )
    return MaxCutInstance(
        n=n, edges=edges, seed=seed, model="er",
        metadata={"p": p, "weight_law": "normal(0,1)"},
    )
