"""Sparse Pauli strings in (x_mask, z_mask) form and their action on states.

A string acts on a basis state as ``P|x> = i^{n_Y} (-1)^{popcount(x & z_mask)} |x ^ x_mask>``
(Y-qubits sit in both masks). This reproduces ``Y|0> = i|1>`` and ``Y|1> = -i|0>``.
The kernels below work on float64 or complex128 arrays; states whose
amplitudes are all real stay real whenever the operation keeps them real.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import InputError

_LABEL_RE = re.compile(r"([XYZ])(\d+)")
_PHASES = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


@dataclass(frozen=True, order=True)
class PauliString:
    n: int
    x_mask: int
    z_mask: int

    def __post_init__(self):
        full = (1 << self.n) - 1
        if self.n < 1 or self.x_mask & ~full or self.z_mask & ~full:
            raise InputError(f"masks out of range for {self.n} qubits")

    @classmethod
    def from_factors(cls, n: int, factors: dict[int, str]) -> "PauliString":
        """Build from ``{qubit (1-based): 'X'|'Y'|'Z'|'I'}``."""
        xm = zm = 0
        for q, f in factors.items():
            if not 1 <= q <= n:
                raise InputError(f"qubit {q} out of range 1..{n}")
            bit = 1 << (q - 1)
            if f in ("X", "Y"):
                xm |= bit
            if f in ("Z", "Y"):
                zm |= bit
            if f not in ("I", "X", "Y", "Z"):
                raise InputError(f"unknown Pauli factor {f!r}")
        return cls(n, xm, zm)

    @classmethod
    def from_label(cls, label: str, n: int) -> "PauliString":
        """Parse ``"Z1Y4"``-style labels; ``"I"`` is the identity."""
        if label == "I":
            return cls(n, 0, 0)
        parts = _LABEL_RE.findall(label)
        if "".join(f + q for f, q in parts) != label:
            raise InputError(f"cannot parse Pauli label {label!r}")
        factors = {}
        for f, q in parts:
            q = int(q)
            if q in factors:
                raise InputError(f"qubit {q} repeated in {label!r}")
            factors[q] = f
        return cls.from_factors(n, factors)

    @property
    def y_mask(self) -> int:
        return self.x_mask & self.z_mask

    @property
    def support(self) -> tuple[int, ...]:
        m = self.x_mask | self.z_mask
        return tuple(q + 1 for q in range(self.n) if m >> q & 1)

    @property
    def weight(self) -> int:
        return (self.x_mask | self.z_mask).bit_count()

    @property
    def y_count(self) -> int:
        return self.y_mask.bit_count()

    @property
    def odd_y(self) -> bool:
        return self.y_count % 2 == 1

    @property
    def phase(self) -> complex:
        """The global ``i^{n_Y}`` factor in front of the signed permutation."""
        return _PHASES[self.y_count % 4]

    def factor(self, q: int) -> str:
        bit = 1 << (q - 1)
        x, z = bool(self.x_mask & bit), bool(self.z_mask & bit)
        return "Y" if x and z else "X" if x else "Z" if z else "I"

    @property
    def label(self) -> str:
        if not self.weight:
            return "I"
        return "".join(f"{self.factor(q)}{q}" for q in self.support)

    def __str__(self) -> str:
        return self.label


@njit(cache=True)
def _parity(v):
    v ^= v >> 32
    v ^= v >> 16
    v ^= v >> 8
    v ^= v >> 4
    v ^= v >> 2
    v ^= v >> 1
    return v & 1


@njit(cache=True)
def _signed_permute(psi, xm, zm):
    # out[x ^ xm] = (-1)^{popcount(x & zm)} psi[x]
    out = np.empty_like(psi)
    for x in range(psi.shape[0]):
        if _parity(x & zm):
            out[x ^ xm] = -psi[x]
        else:
            out[x ^ xm] = psi[x]
    return out


@njit(cache=True)
def _rotate_inplace(psi, xm, zm, c, s):
    # psi <- c psi + s Q psi, Q the signed permutation of (xm, zm)
    if xm == 0:
        for x in range(psi.shape[0]):
            if _parity(x & zm):
                psi[x] = (c - s) * psi[x]
            else:
                psi[x] = (c + s) * psi[x]
        return
    for x in range(psi.shape[0]):
        y = x ^ xm
        if x < y:
            a = psi[x]
            b = psi[y]
            sx = -1.0 if _parity(x & zm) else 1.0
            sy = -1.0 if _parity(y & zm) else 1.0
            psi[x] = c * a + s * sy * b
            psi[y] = c * b + s * sx * a


def _check(P: PauliString, psi: np.ndarray) -> None:
    if psi.shape != (1 << P.n,):
        raise InputError(f"state of length {psi.shape} does not match {P.n} qubits")


def signed_permutation(P: PauliString, psi: np.ndarray) -> np.ndarray:
    """``Q psi`` where ``P = phase * Q``; real in, real out."""
    _check(P, psi)
    return _signed_permute(psi, P.x_mask, P.z_mask)


def apply_pauli(P: PauliString, psi: np.ndarray) -> np.ndarray:
    _check(P, psi)
    out = _signed_permute(psi, P.x_mask, P.z_mask)
    ph = P.phase
    if ph.imag == 0.0:
        return out * ph.real
    return out.astype(np.complex128) * ph


def rotation_coefficients(P: PauliString, theta: float):
    """``(c, s)`` with ``exp(-i theta/2 P) = c I + s Q``; ``s`` is real for odd-Y strings."""
    s = -1j * np.sin(theta / 2) * P.phase
    if s.imag == 0.0:
        s = s.real
    return np.cos(theta / 2), s


def rotate_inplace(P: PauliString, theta: float, psi: np.ndarray) -> None:
    """In-place ``psi <- exp(-i theta/2 P) psi``; ``psi`` must already hold a dtype
    able to represent the result (complex unless ``P`` is odd-Y and ``psi`` real)."""
    c, s = rotation_coefficients(P, theta)
    if isinstance(s, complex) and psi.dtype != np.complex128:
        raise InputError("rotation produces complex amplitudes; pass a complex state")
    _rotate_inplace(psi, P.x_mask, P.z_mask, c, s)


def apply_pauli_rotation(P: PauliString, theta: float, psi: np.ndarray) -> np.ndarray:
    _check(P, psi)
    c, s = rotation_coefficients(P, theta)
    if isinstance(s, complex) or np.iscomplexobj(psi):
        out = psi.astype(np.complex128, copy=True)
    else:
        out = psi.astype(np.float64, copy=True)
    _rotate_inplace(out, P.x_mask, P.z_mask, c, s)
    return out


def dense_matrix(P: PauliString) -> np.ndarray:
    """Explicit ``2^n x 2^n`` matrix from Kronecker products; test oracle only."""
    mats = {
        "I": np.eye(2, dtype=complex),
        "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    }
    out = np.ones((1, 1), dtype=complex)
    # qubit 1 is the least significant bit, so it is the rightmost Kronecker factor
    for q in range(P.n, 0, -1):
        out = np.kron(out, mats[P.factor(q)])
    return out
