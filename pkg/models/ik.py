from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from models.geometry import RigidTransform


class IkStatus(str, Enum):
    CONVERGED = "converged"
    TIMED_OUT = "timed_out"
    UNREACHABLE = "unreachable"


class IkSolverKind(str, Enum):
    PSEUDOINVERSE = "pseudoinverse"
    SQP_SS = "sqp_ss"


class ExecutionMode(str, Enum):
    SEQUENTIAL = "sequential"
    THREADED = "threaded"


@dataclass(frozen=True, eq=False)
class IkRequest:
    target: RigidTransform
    seed: np.ndarray
    time_budget: float
    pos_tol: float = 1e-4
    rot_tol: float = 1e-3
    rng_seed: int = 0
    mode: ExecutionMode = ExecutionMode.SEQUENTIAL

    def __post_init__(self):
        if not self.time_budget > 0:
            raise ValueError("time budget must be positive")
        if not (self.pos_tol > 0 and self.rot_tol > 0):
            raise ValueError("tolerances must be positive")
        seed = np.array(self.seed, dtype=float).reshape(-1)
        seed.setflags(write=False)
        object.__setattr__(self, "seed", seed)


@dataclass(frozen=True)
class IkResult:
    solution: Optional[tuple]
    status: IkStatus
    solver: IkSolverKind
    iterations: int = 0
    restarts: int = 0
    phi_ss: float = 0.0
    candidates: int = 0
    elapsed: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if (self.solution is not None) != (self.status == IkStatus.CONVERGED):
            raise ValueError("a solution is present exactly when the solver converged")

    @property
    def converged(self) -> bool:
        return self.status == IkStatus.CONVERGED

    def joints(self) -> np.ndarray:
        return np.array(self.solution, dtype=float)

    def to_dict(self) -> dict:
        return {
            "solution": None if self.solution is None else [float(v) for v in self.solution],
            "status": self.status.value,
            "solver": self.solver.value,
            "iterations": self.iterations,
            "restarts": self.restarts,
            "phi_ss": self.phi_ss,
            "candidates": self.candidates,
            "elapsed": self.elapsed,
        }
