"""Per-iteration run records shared by every optimiser, plus JSON-lines I/O."""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError


@dataclass
class StepRecord:
    step: int
    energy: float
    p_gs: float
    w: float | None = None
    delta: float | None = None
    theta_norm: float | None = None
    residual: float | None = None
    grad_norm: float | None = None
    phi_norm: float | None = None
    time: float = 0.0


@dataclass
class RunTrace:
    method: str
    records: list[StepRecord] = field(default_factory=list)
    thetas: list[np.ndarray] = field(default_factory=list)
    best_step: int = 0
    best_energy: float = math.inf
    best_theta: np.ndarray | None = None
    best_state: np.ndarray | None = field(default=None, repr=False)
    solution: str | None = None
    solution_cost: float | None = None
    meta: dict = field(default_factory=dict)
    _t0: float = field(default_factory=time.perf_counter, repr=False)

    def add(self, record: StepRecord, theta: np.ndarray | None = None) -> None:
        """Append a step; the best point only moves on a strict energy decrease."""
        record.time = time.perf_counter() - self._t0
        if theta is not None:
            theta = np.array(theta, dtype=float)
            record.theta_norm = float(np.linalg.norm(theta))
            self.thetas.append(theta)
        self.records.append(record)
        if record.energy < self.best_energy:
            self.best_energy = record.energy
            self.best_step = record.step
            self.best_theta = theta

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    @property
    def p_gs(self) -> np.ndarray:
        return np.array([r.p_gs for r in self.records])

    @property
    def weights(self) -> np.ndarray:
        return np.array([np.nan if r.w is None else r.w for r in self.records])

    @property
    def final(self) -> StepRecord:
        return self.records[-1]

    @property
    def best_record(self) -> StepRecord:
        return next(r for r in self.records if r.step == self.best_step)

    @property
    def wall_time(self) -> float:
        return self.records[-1].time if self.records else 0.0

    def to_jsonl(self, path) -> None:
        last = self.records[-1].step if self.records else None
        with open(path, "w") as fh:
            for k, rec in enumerate(self.records):
                row = asdict(rec)
                if self.thetas and rec.step in (self.best_step, last):
                    row["theta"] = self.thetas[k].tolist()
                fh.write(json.dumps(row) + "\n")


def read_jsonl(path) -> list[dict]:
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
        for key in ("step", "energy", "p_gs"):
            if key not in row:
                raise FormatError(f"{path}:{lineno}: missing {key!r}")
        rows.append(row)
    return rows
