"""Dense statevectors stored as plain 1-D numpy arrays of length ``2^n``.

States that only ever see real operations are kept as float64; anything else is
complex128. Index ``x`` carries qubit 1 in its least significant bit.
"""
from __future__ import annotations

import json

import numpy as np

from .errors import CapacityError, InputError
from .problem import DENSE_LIMIT, index_to_bits

NORM_TOL = 1e-10


def num_qubits(psi: np.ndarray) -> int:
    size = psi.shape[0] if psi.ndim == 1 else -1
    n = size.bit_length() - 1
    if size < 2 or size != 1 << n:
        raise InputError(f"state length {psi.shape} is not a power of two")
    return n


def _check_n(n: int) -> None:
    if n < 1:
        raise InputError("need at least one qubit")
    if n > DENSE_LIMIT:
        raise CapacityError(f"{n} qubits exceeds dense limit {DENSE_LIMIT}")


def plus_state(n: int) -> np.ndarray:
    _check_n(n)
    return np.full(1 << n, 2.0 ** (-n / 2))


def zero_plus_state(n: int) -> np.ndarray:
    """Qubit 1 in ``|0>``, all other qubits in ``|+>``."""
    _check_n(n)
    psi = np.zeros(1 << n)
    psi[0::2] = 2.0 ** (-(n - 1) / 2)
    return psi


def basis_state(n: int, index: int) -> np.ndarray:
    _check_n(n)
    psi = np.zeros(1 << n)
    psi[index] = 1.0
    return psi


def probabilities(psi: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(psi):
        return psi.real**2 + psi.imag**2
    return psi * psi


def norm(psi: np.ndarray) -> float:
    return float(np.sqrt(probabilities(psi).sum()))


def expectation_diagonal(h: np.ndarray, psi: np.ndarray) -> float:
    if h.shape != psi.shape:
        raise InputError(f"diagonal {h.shape} and state {psi.shape} differ in size")
    return float(np.dot(h, probabilities(psi)))


def inner(a: np.ndarray, b: np.ndarray) -> complex:
    """``<a|b>``, conjugating the first argument."""
    if a.shape != b.shape:
        raise InputError(f"states of sizes {a.shape} and {b.shape}")
    return complex(np.vdot(a, b))


def sample_indices(psi: np.ndarray, m: int, seed: int) -> np.ndarray:
    if m < 1:
        raise InputError("need at least one sample")
    cdf = np.cumsum(probabilities(psi))
    rng = np.random.default_rng(seed)
    u = rng.random(m) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, cdf.size - 1)


def sample(psi: np.ndarray, m: int, seed: int) -> list[str]:
    """Draw ``m`` measurement outcomes as bitstrings (vertex 1 first)."""
    n = num_qubits(psi)
    return [index_to_bits(int(i), n) for i in sample_indices(psi, m, seed)]


def dump_amplitudes(psi: np.ndarray) -> str:
    """Debug dump: JSON array of ``[re, im]`` pairs."""
    z = psi.astype(np.complex128)
    return json.dumps([[float(a.real), float(a.imag)] for a in z])
