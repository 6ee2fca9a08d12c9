"""Pauli-set ansatze (P1A, P2A and the ZY/XY pair subsets) and their gradients."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import InputError
from .pauli import PauliString, _parity, rotate_inplace
from .statevec import num_qubits, probabilities

VARIANTS = ("P1A", "P2A", "P2A-ZY", "P2A-XY")

# within a qubit pair (i < j): Z_iY_j, Y_iZ_j, X_iY_j, Y_iX_j
_PAIR_ORDER = (("Z", "Y"), ("Y", "Z"), ("X", "Y"), ("Y", "X"))
_PAIR_KINDS = {
    "P2A": _PAIR_ORDER,
    "P2A-ZY": _PAIR_ORDER[:2],
    "P2A-XY": _PAIR_ORDER[2:],
}


def build_full_set(n: int, D: int) -> list[PauliString]:
    """All non-identity strings supported on at most ``D`` of ``n`` qubits."""
    if not 1 <= D <= n:
        raise InputError(f"domain size {D} outside 1..{n}")
    seen = set()
    out = []
    for qubits in itertools.combinations(range(1, n + 1), D):
        for letters in itertools.product("IXYZ", repeat=D):
            P = PauliString.from_factors(n, dict(zip(qubits, letters)))
            if P.weight and P not in seen:
                seen.add(P)
                out.append(P)
    return out


def build_reduced_set(n: int, D: int) -> list[PauliString]:
    return [P for P in build_full_set(n, D) if P.odd_y]


def round_robin_schedule(n: int) -> list[list[tuple[int, int]]]:
    """Circle-method tournament over qubits ``1..n``; every pair appears once."""
    if n < 2:
        raise InputError("round-robin needs at least two qubits")
    players: list[int | None] = list(range(1, n + 1))
    if n % 2:
        players.append(None)
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        pairs = []
        for k in range(m // 2):
            a, b = players[k], players[m - 1 - k]
            if a is not None and b is not None:
                pairs.append((min(a, b), max(a, b)))
        rounds.append(sorted(pairs))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


@dataclass(frozen=True)
class AnsatzSpec:
    n: int
    strings: tuple[PauliString, ...]
    variant: str
    schedule: tuple[tuple[int, ...], ...]

    @property
    def num_params(self) -> int:
        return len(self.strings)

    @property
    def real_preserving(self) -> bool:
        return all(P.odd_y for P in self.strings)

    def labels(self) -> list[str]:
        return [P.label for P in self.strings]

    def depth(self) -> int:
        """Gate layers: one for the single-qubit layer plus one per gate slot per round."""
        singles = any(P.weight == 1 for P in self.strings)
        layers = int(singles)
        for rnd in self.schedule:
            per_pair: dict[tuple[int, ...], int] = {}
            for k in rnd:
                sup = self.strings[k].support
                per_pair[sup] = per_pair.get(sup, 0) + 1
            layers += max(per_pair.values(), default=0)
        return layers


def _canonical(n: int, strings, variant: str) -> AnsatzSpec:
    singles = sorted((P for P in strings if P.weight == 1), key=lambda P: (P.support, P.label))
    pair_strings = [P for P in strings if P.weight == 2]
    rest = [P for P in strings if P.weight > 2]
    by_pair: dict[tuple[int, ...], list[PauliString]] = {}
    for P in pair_strings:
        by_pair.setdefault(P.support, []).append(P)

    def pair_key(P):
        i, j = P.support
        kind = (P.factor(i), P.factor(j))
        rank = _PAIR_ORDER.index(kind) if kind in _PAIR_ORDER else 4
        return rank, P.label

    ordered = list(singles)
    schedule = []
    if by_pair:
        for rnd in round_robin_schedule(n):
            idx = []
            for pair in rnd:
                for P in sorted(by_pair.get(pair, []), key=pair_key):
                    idx.append(len(ordered))
                    ordered.append(P)
            if idx:
                schedule.append(tuple(idx))
    ordered.extend(rest)
    return AnsatzSpec(n, tuple(ordered), variant, tuple(schedule))


def build_ansatz(n: int, variant: str) -> AnsatzSpec:
    """Build one of the named ansatze with its canonical gate order.

    Order: single-qubit Y rotations by qubit, then the pair strings round by
    round of the round-robin schedule, pairs ascending within a round, and
    ZY, YZ, XY, YX within a pair.
    """
    if variant not in VARIANTS:
        raise InputError(f"unknown ansatz variant {variant!r}; expected one of {VARIANTS}")
    singles = [PauliString.from_factors(n, {q: "Y"}) for q in range(1, n + 1)]
    if variant == "P1A" or n == 1:
        return _canonical(n, singles, variant)
    pairs = []
    for i, j in itertools.combinations(range(1, n + 1), 2):
        for a, b in _PAIR_KINDS[variant]:
            pairs.append(PauliString.from_factors(n, {i: a, j: b}))
    return _canonical(n, singles + pairs, variant)


def custom_ansatz(strings, n: int | None = None) -> AnsatzSpec:
    """Ansatz from arbitrary distinct strings, reordered canonically.

    Even-Y strings are accepted here for experiments, but the resulting circuit
    no longer keeps real states real.
    """
    strings = list(strings)
    if not strings:
        raise InputError("custom ansatz needs at least one string")
    n = strings[0].n if n is None else n
    if any(P.n != n for P in strings) or len(set(strings)) != len(strings):
        raise InputError("custom strings must be distinct and share one qubit count")
    if any(P.weight == 0 for P in strings):
        raise InputError("identity string carries no parameter")
    return _canonical(n, strings, "custom")


def _working_copy(spec: AnsatzSpec, psi0: np.ndarray) -> np.ndarray:
    if num_qubits(psi0) != spec.n:
        raise InputError(f"state has {num_qubits(psi0)} qubits, ansatz {spec.n}")
    if spec.real_preserving and not np.iscomplexobj(psi0):
        return np.array(psi0, dtype=np.float64)
    return np.array(psi0, dtype=np.complex128)


def _check_theta(spec: AnsatzSpec, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.num_params,):
        raise InputError(f"expected {spec.num_params} parameters, got shape {theta.shape}")
    return theta


def apply_ansatz(spec: AnsatzSpec, theta, psi0: np.ndarray) -> np.ndarray:
    theta = _check_theta(spec, theta)
    psi = _working_copy(spec, psi0)
    for P, t in zip(spec.strings, theta):
        if t != 0.0:
            rotate_inplace(P, t, psi)
    return psi


def energy(spec: AnsatzSpec, theta, psi0: np.ndarray, h_diag: np.ndarray) -> float:
    return float(np.dot(h_diag, probabilities(apply_ansatz(spec, theta, psi0))))


@njit(cache=True)
def _signed_overlap(lam, psi, xm, zm):
    # sum_x conj(lam[x ^ xm]) (-1)^{popcount(x & zm)} psi[x]  ==  <lam|Q psi>
    acc = lam[0] * psi[0] * 0.0
    for x in range(psi.shape[0]):
        term = np.conj(lam[x ^ xm]) * psi[x]
        if _parity(x & zm):
            acc -= term
        else:
            acc += term
    return acc


def _adjoint(spec: AnsatzSpec, theta: np.ndarray, psi: np.ndarray, h_diag: np.ndarray) -> np.ndarray:
    # psi is the final state U(theta) psi0 and is consumed
    lam = h_diag * psi
    grad = np.zeros(spec.num_params)
    for j in range(spec.num_params - 1, -1, -1):
        P = spec.strings[j]
        z = complex(_signed_overlap(lam, psi, P.x_mask, P.z_mask)) * P.phase
        grad[j] = z.imag
        if theta[j] != 0.0:
            rotate_inplace(P, -theta[j], psi)
            rotate_inplace(P, -theta[j], lam)
    return grad


def energy_and_gradient(spec: AnsatzSpec, theta, psi0, h_diag, method: str = "adjoint"):
    """Return ``(energy, gradient, state)`` at ``theta``."""
    theta = _check_theta(spec, theta)
    if h_diag.shape != psi0.shape:
        raise InputError("Hamiltonian diagonal and state sizes differ")
    psi = apply_ansatz(spec, theta, psi0)
    e = float(np.dot(h_diag, probabilities(psi)))
    if method == "adjoint":
        grad = _adjoint(spec, theta, psi.copy(), h_diag)
    elif method == "parameter-shift":
        grad = _parameter_shift(spec, theta, psi0, h_diag)
    else:
        raise InputError(f"unknown gradient method {method!r}")
    return e, grad, psi


def _parameter_shift(spec, theta, psi0, h_diag) -> np.ndarray:
    grad = np.zeros(spec.num_params)
    shifted = theta.copy()
    for j in range(spec.num_params):
        shifted[j] = theta[j] + np.pi / 2
        plus = energy(spec, shifted, psi0, h_diag)
        shifted[j] = theta[j] - np.pi / 2
        minus = energy(spec, shifted, psi0, h_diag)
        shifted[j] = theta[j]
        grad[j] = (plus - minus) / 2
    return grad


def energy_gradient(spec: AnsatzSpec, theta, psi0, h_diag, method: str = "adjoint") -> np.ndarray:
    """Gradient of ``<psi(theta)|H|psi(theta)>`` by adjoint sweep or parameter shift."""
    return energy_and_gradient(spec, theta, psi0, h_diag, method)[1]
