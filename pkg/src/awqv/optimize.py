"""Gradient descent, Adam, and the plain VQE loop."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ansatz import AnsatzSpec, apply_ansatz, energy_and_gradient
from .errors import InputError
from .problem import MaxCutInstance
from .qite import problem_data, assemble_system, ground_mass, solve_step
from .statevec import probabilities
from .trace import RunTrace, StepRecord


def _match(theta, grad):
    theta = np.asarray(theta, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if theta.shape != grad.shape:
        raise InputError(f"parameter shape {theta.shape} != gradient shape {grad.shape}")
    return theta, grad


def gd_step(theta, grad, eta: float) -> np.ndarray:
    theta, grad = _match(theta, grad)
    return theta - eta * grad


@dataclass
class OptimizerState:
    kind: str = "gd"
    eta: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: np.ndarray | None = None
    v: np.ndarray | None = None
    t: int = 0

    def __post_init__(self):
        if self.kind not in ("gd", "adam"):
            raise InputError(f"unknown optimizer {self.kind!r}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "eta": self.eta, "beta1": self.beta1, "beta2": self.beta2,
            "eps": self.eps, "t": self.t,
            "m": None if self.m is None else self.m.tolist(),
            "v": None if self.v is None else self.v.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OptimizerState":
        d = dict(d)
        for key in ("m", "v"):
            if d.get(key) is not None:
                d[key] = np.array(d[key], dtype=float)
        return cls(**d)


def adam_step(state: OptimizerState, theta, grad) -> tuple[np.ndarray, OptimizerState]:
    """Bias-corrected Adam update; returns a new state, ``state`` is left untouched."""
    theta, grad = _match(theta, grad)
    m = np.zeros_like(theta) if state.m is None else state.m
    v = np.zeros_like(theta) if state.v is None else state.v
    if m.shape != theta.shape:
        raise InputError("Adam moments do not match the parameter dimension")
    t = state.t + 1
    m = state.beta1 * m + (1 - state.beta1) * grad
    v = state.beta2 * v + (1 - state.beta2) * grad**2
    m_hat = m / (1 - state.beta1**t)
    v_hat = v / (1 - state.beta2**t)
    new_theta = theta - state.eta * m_hat / (np.sqrt(v_hat) + state.eps)
    new_state = OptimizerState(state.kind, state.eta, state.beta1, state.beta2, state.eps, m, v, t)
    return new_theta, new_state


def qite_init(spec: AnsatzSpec, psi0, h_diag, dtau: float, rel_tol: float = 1e-8) -> np.ndarray:
    """Parameters after one compressed-QITE step from ``theta = 0``."""
    phi, _ = solve_step(assemble_system(np.asarray(psi0), spec.strings, h_diag), rel_tol)
    return 2 * dtau * phi


def vqe_run(instance: MaxCutInstance, spec: AnsatzSpec, psi0, optimizer: str | OptimizerState = "gd",
            eta: float = 0.05, iters: int = 50, init: str = "zero", *, h_diag=None,
            spectrum=None, grad_method: str = "adjoint", theta0=None) -> RunTrace:
    """Gradient-based VQE; ``init="single-qite-step"`` starts from one QITE solve with ``dtau = eta``."""
    if iters < 1:
        raise InputError("VQE needs at least one iteration")
    h, spectrum = problem_data(instance, h_diag, spectrum)
    state = optimizer if isinstance(optimizer, OptimizerState) else OptimizerState(optimizer, eta)
    if theta0 is not None:
        theta = np.array(theta0, dtype=float)
    elif init == "zero":
        theta = np.zeros(spec.num_params)
    elif init == "single-qite-step":
        theta = qite_init(spec, psi0, h, eta)
    else:
        raise InputError(f"unknown initialisation {init!r}")

    trace = RunTrace("vqe", meta={"ansatz": spec.variant, "optimizer": state.to_dict(),
                                  "eta": eta, "iters": iters, "init": init})
    e, grad, psi = energy_and_gradient(spec, theta, psi0, h, grad_method)
    trace.add(StepRecord(0, e, ground_mass(psi, spectrum)), theta)
    for s in range(1, iters + 1):
        if state.kind == "gd":
            theta = gd_step(theta, grad, state.eta)
        else:
            theta, state = adam_step(state, theta, grad)
        gnorm = float(np.linalg.norm(grad))
        if s < iters:
            e, grad, psi = energy_and_gradient(spec, theta, psi0, h, grad_method)
        else:
            psi = apply_ansatz(spec, theta, psi0)
            e = float(np.dot(h, probabilities(psi)))
        trace.add(StepRecord(s, e, ground_mass(psi, spectrum), grad_norm=gnorm), theta)
    return trace
