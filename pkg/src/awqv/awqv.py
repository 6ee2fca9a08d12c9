"""Adaptive weighted QITE-VQE and its binary-switch ablation (QIV).

Each iteration blends the energy gradient with the compressed-QITE step::

    theta <- theta - eta * w * (|phi| / |grad|) * grad
    theta <- theta + 2 * eta * (1 - w) * phi

where ``w`` starts at 0 and grows, never decreasing, as the per-step energy
drop falls below its running mean.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ansatz import AnsatzSpec, apply_ansatz, energy_and_gradient
from .errors import InputError
from .problem import MaxCutInstance, index_to_bits
from .qite import MEMORY_BUDGET, assemble_system, ground_mass, problem_data, solve_step
from .statevec import probabilities, sample_indices
from .trace import RunTrace, StepRecord

GRAD_EPS = 1e-12


@dataclass
class WeightSchedule:
    mu: float = 0.9
    lam: float = 1.0
    weights: list[float] = field(default_factory=list)  # w(1), w(2), ...
    energies: list[float] = field(default_factory=list)  # <H>^(0), <H>^(1), ...

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise InputError(f"smoothing factor mu={self.mu} must lie in (0, 1)")
        if self.lam <= 0.0:
            raise InputError(f"lambda={self.lam} must be positive")

    def delta(self, l: int) -> float:
        """Energy drop of iteration ``l``: ``<H>^(l-1) - <H>^(l)``."""
        return self.energies[l - 1] - self.energies[l]


def drop_ratio(sched: WeightSchedule, s: int) -> float:
    """``delta(s-1)`` over the mean of ``delta(1..s-1)``; 0 when that mean is 0."""
    deltas = [sched.delta(l) for l in range(1, s)]
    mean = sum(deltas) / (s - 1)
    return 0.0 if mean == 0.0 else deltas[-1] / mean


def update_weight(sched: WeightSchedule, s: int) -> float:
    """Compute ``w(s)``, append it to ``sched.weights`` and return it."""
    if s < 1:
        raise InputError("iterations are numbered from 1")
    if len(sched.weights) != s - 1:
        raise InputError(f"schedule holds {len(sched.weights)} weights, cannot compute w({s})")
    if s == 1:
        w = 0.0
    else:
        if len(sched.energies) < s:
            raise InputError(f"w({s}) needs energies <H>^(0..{s - 1})")
        prev = sched.weights[-1]
        raw = sched.mu * prev + (1 - sched.mu) * (1 - sched.lam * drop_ratio(sched, s))
        w = min(max(raw, prev), 1.0)
    sched.weights.append(w)
    return w


def awqv_direction(grad, phi, w: float) -> np.ndarray:
    """Modified update direction; ``theta - eta * direction`` is one AWQV step.

    A vanishing gradient (norm below 1e-12) drops the gradient term, leaving
    only the QITE part.
    """
    grad = np.asarray(grad, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if grad.shape != phi.shape:
        raise InputError("gradient and QITE step differ in dimension")
    if not 0.0 <= w <= 1.0:
        raise InputError(f"weight {w} outside [0, 1]")
    gnorm = np.linalg.norm(grad)
    grad_term = np.zeros_like(grad) if gnorm < GRAD_EPS else w * (np.linalg.norm(phi) / gnorm) * grad
    return grad_term - 2 * (1 - w) * phi


def _split_update(theta, grad, phi, w, eta):
    gnorm = np.linalg.norm(grad)
    if gnorm >= GRAD_EPS:
        theta = theta - eta * w * (np.linalg.norm(phi) / gnorm) * grad
    return theta + 2 * eta * (1 - w) * phi


def _best_of_samples(trace, spec, psi0, h, m_samples, seed):
    psi = apply_ansatz(spec, trace.best_theta, psi0)
    idx = sample_indices(psi, m_samples, seed)
    best = int(idx[np.argmin(h[idx])])
    trace.solution = index_to_bits(best, spec.n)
    trace.solution_cost = float(h[best])
    trace.meta["samples"] = [index_to_bits(int(i), spec.n) for i in idx]
    return trace.solution


def awqv_run(instance: MaxCutInstance, spec: AnsatzSpec, psi0, eta: float = 0.05,
             mu: float = 0.9, lam: float = 1.0, iters: int = 50, m_samples: int = 10,
             seed: int = 0, *, h_diag=None, spectrum=None, grad_method: str = "adjoint",
             weight_override: float | None = None, rel_tol: float = 1e-8,
             memory_budget: int = MEMORY_BUDGET) -> tuple[str, RunTrace]:
    """Run AWQV for ``iters`` iterations and return ``(best sampled bitstring, trace)``.

    ``weight_override`` pins ``w`` for every iteration (module cross-checks only).
    """
    if iters < 1 or m_samples < 1:
        raise InputError("need iters >= 1 and m_samples >= 1")
    h, spectrum = problem_data(instance, h_diag, spectrum)
    sched = WeightSchedule(mu, lam)
    trace = RunTrace("awqv", meta={"ansatz": spec.variant, "eta": eta, "mu": mu,
                                   "lambda": lam, "iters": iters, "samples": m_samples})
    theta = np.zeros(spec.num_params)
    e, grad, psi = energy_and_gradient(spec, theta, psi0, h, grad_method)
    sched.energies.append(e)
    trace.add(StepRecord(0, e, ground_mass(psi, spectrum)), theta)

    for s in range(1, iters + 1):
        w = update_weight(sched, s)
        if weight_override is not None:
            w = sched.weights[-1] = float(weight_override)
        phi, res = solve_step(assemble_system(psi, spec.strings, h, memory_budget), rel_tol)
        gnorm = float(np.linalg.norm(grad))
        theta = _split_update(theta, grad, phi, w, eta)
        if s < iters:
            e, grad, psi = energy_and_gradient(spec, theta, psi0, h, grad_method)
        else:
            psi = apply_ansatz(spec, theta, psi0)
            e = float(np.dot(h, probabilities(psi)))
        sched.energies.append(e)
        trace.add(StepRecord(s, e, ground_mass(psi, spectrum), w=w, delta=sched.delta(s),
                             residual=res, grad_norm=gnorm,
                             phi_norm=float(np.linalg.norm(phi))), theta)

    return _best_of_samples(trace, spec, psi0, h, m_samples, seed), trace


def qiv_run(instance: MaxCutInstance, spec: AnsatzSpec, psi0, eta: float = 0.05,
            iters: int = 50, m_samples: int = 10, seed: int = 0, *, h_diag=None,
            spectrum=None, grad_method: str = "adjoint", rel_tol: float = 1e-8,
            memory_budget: int = MEMORY_BUDGET) -> tuple[str, RunTrace]:
    """cQITE until the energy first rises, then gradient descent from the best point.

    The trace's ``w`` column is 0 for QITE iterations and 1 for gradient ones;
    ``meta["switch_step"]`` is the iteration whose energy rose (``None`` if never).
    """
    if iters < 1 or m_samples < 1:
        raise InputError("need iters >= 1 and m_samples >= 1")
    h, spectrum = problem_data(instance, h_diag, spectrum)
    trace = RunTrace("qiv", meta={"ansatz": spec.variant, "eta": eta, "iters": iters,
                                  "samples": m_samples, "switch_step": None})
    theta = np.zeros(spec.num_params)
    psi = apply_ansatz(spec, theta, psi0)
    e = float(np.dot(h, probabilities(psi)))
    trace.add(StepRecord(0, e, ground_mass(psi, spectrum)), theta)
    grad = None

    for s in range(1, iters + 1):
        e_prev = e
        if grad is None:
            phi, res = solve_step(assemble_system(psi, spec.strings, h, memory_budget), rel_tol)
            theta = theta + 2 * eta * phi
            psi = apply_ansatz(spec, theta, psi0)
            e = float(np.dot(h, probabilities(psi)))
            trace.add(StepRecord(s, e, ground_mass(psi, spectrum), w=0.0, delta=e_prev - e,
                                 residual=res, phi_norm=float(np.linalg.norm(phi))), theta)
            if e > e_prev and s < iters:
                trace.meta["switch_step"] = s
                theta = trace.best_theta.copy()
                trace.meta["switch_theta"] = theta.copy()
                e, grad, psi = energy_and_gradient(spec, theta, psi0, h, grad_method)
            elif e > e_prev:
                trace.meta["switch_step"] = s
        else:
            gnorm = float(np.linalg.norm(grad))
            theta = theta - eta * grad
            e, grad, psi = energy_and_gradient(spec, theta, psi0, h, grad_method)
            trace.add(StepRecord(s, e, ground_mass(psi, spectrum), w=1.0, delta=e_prev - e,
                                 grad_norm=gnorm), theta)

    return _best_of_samples(trace, spec, psi0, h, m_samples, seed), trace
