"""Experiment configuration and its JSON form."""
import json
from dataclasses import asdict, dataclass, field, fields, replace
from typing import List, Optional

import numpy as np

from .._validation import check_count
from ..ensemble import MAX_SEED

KINDS = ("init_closeness", "phase_transition", "image_recovery", "init_comparison", "bench_init")
SOLVER_FIELDS = ("step_scale", "max_iters", "succ_tol", "tol_mode")


def _grid(start, stop, step):
    return [round(float(v), 10) for v in np.arange(start, stop + step / 2, step)]


@dataclass
class ExperimentConfig:
    kind: str
    n: int = 64
    m_over_n_grid: List[float] = field(default_factory=lambda: [4.0])
    q_values: List[float] = field(default_factory=lambda: [0.0])
    trials: int = 20
    base_seed: int = 0
    solver: dict = field(default_factory=dict)
    success_tol: float = 1e-5
    output_path: str = "results.csv"
    power_iters: int = 10
    n_grid: List[int] = field(default_factory=list)
    image_path: Optional[str] = None
    n_jobs: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        check_count(self.n, "n")
        check_count(self.trials, "trials")
        check_count(self.power_iters, "power_iters")
        check_count(self.n_jobs, "n_jobs")
        if not self.m_over_n_grid or not self.q_values:
            raise ValueError("m_over_n_grid and q_values must be non-empty")
        if any(r <= 0 for r in self.m_over_n_grid):
            raise ValueError("m_over_n_grid entries must be positive")
        if any(not -1.0 <= q <= 0.0 for q in self.q_values):
            raise ValueError("q_values must lie in [-1, 0]")
        if self.kind == "bench_init" and not self.n_grid:
            raise ValueError("bench_init needs a non-empty n_grid")
        if not 0 <= int(self.base_seed) <= MAX_SEED:
            raise ValueError("base_seed must be a 64-bit unsigned integer")
        unknown = set(self.solver) - set(SOLVER_FIELDS)
        if unknown:
            raise ValueError(f"unknown solver fields {sorted(unknown)}; allowed {SOLVER_FIELDS}")
        if self.success_tol <= 0:
            raise ValueError("success_tol must be positive")

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def with_overrides(self, **kwargs):
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


def default_config(kind, full=False):
    """Desk-scale defaults (n = 64, 20 trials), or full scale with ``full``."""
    n, trials = (100, 100) if full else (64, 20)
    all_q = [-1.0, -0.5, 0.0]
    if kind == "init_closeness":
        grid = _grid(1, 10, 0.5 if full else 1)
        return ExperimentConfig(kind, n=n, m_over_n_grid=grid, q_values=all_q, trials=trials)
    if kind == "phase_transition":
        return ExperimentConfig(kind, n=n, m_over_n_grid=_grid(1.5, 5.5, 0.25 if full else 0.5),
                                q_values=all_q if full else [0.0], trials=trials)
    if kind == "init_comparison":
        grid = _grid(1.0, 2.0, 0.1) + _grid(2.5, 5.0, 0.5) if full else [1.1, 1.4, 1.7, 2.0, 3.0, 4.0, 5.0]
        return ExperimentConfig(kind, n=n, m_over_n_grid=grid, trials=trials)
    if kind == "image_recovery":
        grid = _grid(1, 6, 0.5) if full else [1.0, 4.0]
        return ExperimentConfig(kind, n=330, m_over_n_grid=grid, trials=1,
                                solver={"tol_mode": "absolute"})
    if kind == "bench_init":
        return ExperimentConfig(kind, n=2000, m_over_n_grid=[4.0], trials=5 if full else 3,
                                n_grid=[2000, 5000, 7000, 10000] if full else [500, 1000, 2000])
    raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
