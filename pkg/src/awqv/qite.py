"""QITE linear system, compressed and Trotterised QITE runs, and exact ITE.

For a state ``psi`` and Pauli strings ``P`` the system is

    S[P, P'] = Re <P psi | P' psi>,     b[P] = Im <P psi | H psi>

with ``H`` diagonal, so ``H psi`` is an elementwise product.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ansatz import AnsatzSpec, apply_ansatz
from .errors import InputError, NumericError
from .pauli import _signed_permute, rotate_inplace
from .problem import MaxCutInstance, Spectrum, hamiltonian_diagonal, spectrum_from_diagonal
from .statevec import num_qubits, probabilities
from .trace import RunTrace, StepRecord

MEMORY_BUDGET = 2 * 1024**3


@dataclass(frozen=True)
class QiteSystem:
    S: np.ndarray
    b: np.ndarray


def _rows(psi, strings, start, stop) -> np.ndarray:
    out = np.empty((stop - start, psi.shape[0]), dtype=psi.dtype)
    for r, P in enumerate(strings[start:stop]):
        out[r] = _signed_permute(psi, P.x_mask, P.z_mask)
    return out


def assemble_system(psi: np.ndarray, strings, h_diag: np.ndarray,
                    memory_budget: int = MEMORY_BUDGET) -> QiteSystem:
    """Build ``(S, b)``; all ``P psi`` vectors are cached if they fit the budget,
    otherwise the Gram matrix is filled block by block."""
    strings = list(strings.strings if isinstance(strings, AnsatzSpec) else strings)
    n = num_qubits(psi)
    if h_diag.shape != psi.shape:
        raise InputError("Hamiltonian diagonal and state sizes differ")
    if any(P.n != n for P in strings):
        raise InputError("Pauli strings and state disagree on qubit count")
    m = len(strings)
    phases = np.array([P.phase for P in strings])
    hpsi = h_diag * psi
    block = max(1, int(memory_budget // psi.nbytes))

    G = np.empty((m, m), dtype=psi.dtype)
    c = np.empty(m, dtype=psi.dtype)
    for i0 in range(0, m, block):
        i1 = min(m, i0 + block)
        Wi = _rows(psi, strings, i0, i1)
        Wi_conj = Wi.conj() if np.iscomplexobj(Wi) else Wi
        c[i0:i1] = Wi_conj @ hpsi
        G[i0:i1, i0:i1] = Wi_conj @ Wi.T
        for j0 in range(i1, m, block):
            j1 = min(m, j0 + block)
            Wj = _rows(psi, strings, j0, j1)
            G[i0:i1, j0:j1] = Wi_conj @ Wj.T
            G[j0:j1, i0:i1] = G[i0:i1, j0:j1].conj().T

    S = (np.conj(phases)[:, None] * phases[None, :] * G).real
    S = 0.5 * (S + S.T)
    b = (np.conj(phases) * c).imag
    return QiteSystem(S, np.ascontiguousarray(b))


def solve_step(system: QiteSystem, rel_tol: float = 1e-8) -> tuple[np.ndarray, float]:
    """Minimum-norm least squares for ``S phi = b`` via a truncated eigen-pseudo-inverse.

    Returns ``(phi, residual)`` with ``residual = ||S phi - b||``.
    """
    S, b = system.S, system.b
    if not (np.all(np.isfinite(S)) and np.all(np.isfinite(b))):
        raise NumericError("non-finite entries in QITE system")
    vals, vecs = np.linalg.eigh(S)
    scale = np.max(np.abs(vals)) if vals.size else 0.0
    keep = np.abs(vals) > rel_tol * scale
    if scale == 0.0 or not keep.any():
        phi = np.zeros_like(b)
    else:
        Uk = vecs[:, keep]
        phi = Uk @ ((Uk.T @ b) / vals[keep])
    return phi, float(np.linalg.norm(S @ phi - b))


def problem_data(instance: MaxCutInstance, h_diag, spectrum):
    h = hamiltonian_diagonal(instance) if h_diag is None else h_diag
    spec = spectrum_from_diagonal(h) if spectrum is None else spectrum
    return h, spec


def ground_mass(psi: np.ndarray, spectrum: Spectrum) -> float:
    return float(probabilities(psi)[spectrum.optimal_mask].sum())


def cqite_run(instance: MaxCutInstance, spec: AnsatzSpec, psi0: np.ndarray,
              dtau: float, steps: int, *, h_diag=None, spectrum=None,
              rel_tol: float = 1e-8, memory_budget: int = MEMORY_BUDGET) -> RunTrace:
    """Compressed QITE: each imaginary-time step becomes ``theta += 2 dtau phi``."""
    if steps < 1:
        raise InputError("cQITE needs at least one step")
    h, spectrum = problem_data(instance, h_diag, spectrum)
    trace = RunTrace("cqite", meta={"ansatz": spec.variant, "dtau": dtau, "steps": steps})
    theta = np.zeros(spec.num_params)
    psi = apply_ansatz(spec, theta, psi0)
    trace.add(StepRecord(0, float(np.dot(h, probabilities(psi))), ground_mass(psi, spectrum)), theta)
    for s in range(1, steps + 1):
        phi, res = solve_step(assemble_system(psi, spec.strings, h, memory_budget), rel_tol)
        theta = theta + 2 * dtau * phi
        psi = apply_ansatz(spec, theta, psi0)
        e = float(np.dot(h, probabilities(psi)))
        trace.add(StepRecord(s, e, ground_mass(psi, spectrum), residual=res,
                             phi_norm=float(np.linalg.norm(phi))), theta)
    return trace


def qite_run(instance: MaxCutInstance, strings, psi0: np.ndarray, dtau: float,
             steps: int, *, h_diag=None, spectrum=None, rel_tol: float = 1e-8,
             memory_budget: int = MEMORY_BUDGET) -> RunTrace:
    """Trotterised QITE: the state itself is rotated by every step's solution.

    ``trace.meta["phis"]`` keeps each step's solution, i.e. the angles of the
    depth-``steps`` circuit the run corresponds to.
    """
    if steps < 1:
        raise InputError("QITE needs at least one step")
    if isinstance(strings, AnsatzSpec):
        variant, strings = strings.variant, list(strings.strings)
    else:
        variant, strings = "custom", list(strings)
    h, spectrum = problem_data(instance, h_diag, spectrum)
    real = all(P.odd_y for P in strings) and not np.iscomplexobj(psi0)
    psi = np.array(psi0, dtype=np.float64 if real else np.complex128)
    trace = RunTrace("qite", meta={"ansatz": variant, "dtau": dtau, "steps": steps, "phis": []})
    trace.add(StepRecord(0, float(np.dot(h, probabilities(psi))), ground_mass(psi, spectrum)))
    trace.best_state = psi.copy()
    for s in range(1, steps + 1):
        phi, res = solve_step(assemble_system(psi, strings, h, memory_budget), rel_tol)
        for P, f in zip(strings, phi):
            if f != 0.0:
                rotate_inplace(P, 2 * dtau * f, psi)
        trace.meta["phis"].append(phi)
        trace.add(StepRecord(s, float(np.dot(h, probabilities(psi))), ground_mass(psi, spectrum),
                             residual=res, phi_norm=float(np.linalg.norm(phi))))
        if trace.best_step == s:
            trace.best_state = psi.copy()
    return trace


def exact_ite_step(psi: np.ndarray, h_diag: np.ndarray, dtau: float) -> np.ndarray:
    """Normalised ``exp(-dtau H) psi`` for diagonal ``H``."""
    if dtau <= 0:
        raise InputError("imaginary time step must be positive")
    if h_diag.shape != psi.shape:
        raise InputError("Hamiltonian diagonal and state sizes differ")
    support = probabilities(psi) > 0
    if not support.any():
        raise NumericError("zero state")
    # shifting by the lowest supported level cancels in the normalisation
    shift = h_diag[support].min()
    out = psi * np.exp(-dtau * (h_diag - shift))
    nrm = np.sqrt(probabilities(out).sum())
    if not np.isfinite(nrm) or nrm == 0.0:
        raise NumericError("norm collapsed during imaginary time step")
    return out / nrm
