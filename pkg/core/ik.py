"""Inverse kinematics: damped pseudoinverse with random restarts, SQP on a sum-of-squares
error, and a race between the two under a shared budget."""

import logging
import math
import threading
import time
from collections import deque
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import replace
from typing import Dict, Iterator, List, Optional, Sequence

import numpy as np
from scipy.optimize import lsq_linear
from scipy.spatial.transform import Rotation

from core.errors import SingularityError
from core.kinematics import damped_pseudoinverse, end_effector, jacobian, manipulability, max_reach
from models.chain import KinematicChain
from models.geometry import RigidTransform
from models.ik import ExecutionMode, IkRequest, IkResult, IkSolverKind, IkStatus

logger = logging.getLogger(__name__)

# Sequential mode counts iterations instead of wall-clock time so runs replay exactly.
ITERATIONS_PER_SECOND = 20_000
STALL_WINDOW = 10
STALL_PROGRESS = 1e-12
MAX_SEED_ITERATIONS = 100
MAX_POS_STEP = 0.2
MAX_ROT_STEP = math.pi / 4
MAX_JOINT_STEP = 0.5
SINGULAR_MANIPULABILITY = 1e-6
DEFAULT_DAMPING = 1e-3
LINE_SEARCH_FACTOR = 0.5
LINE_SEARCH_STEPS = 20
PENALTY_START = 10.0
PENALTY_GROWTH = 4.0
PENALTY_MAX = 1e10
SQP_CANDIDATES = 3
SEED_MATCH = 1e-18


def pose_error(current: RigidTransform, target: RigidTransform) -> np.ndarray:
    """Position error (target - current) and axis-angle of R_cur^T R_tgt."""
    position = target.translation - current.translation
    rotation = Rotation.from_matrix(current.rotation.T @ target.rotation).as_rotvec()
    return np.concatenate([position, rotation])


def ss_metric(p_err: Sequence[float]) -> float:
    p_err = np.asarray(p_err, dtype=float)
    return float(p_err @ p_err)


def within_tolerance(p_err: np.ndarray, pos_tol: float, rot_tol: float) -> bool:
    return bool(np.linalg.norm(p_err[:3]) <= pos_tol and np.linalg.norm(p_err[3:]) <= rot_tol)


def is_reachable(chain: KinematicChain, target: RigidTransform) -> bool:
    return float(np.linalg.norm(target.translation - chain.base_frame.translation)) <= max_reach(chain)


def _as_chain(model) -> KinematicChain:
    return getattr(model, "chain", model)


class _Budget:
    """Time allowance of one request.

    Racing searches run side by side, so in sequential mode each one may take
    `max_iterations` steps of its own.
    """

    def __init__(self, req: IkRequest):
        self.mode = req.mode
        self.max_iterations = int(req.time_budget * ITERATIONS_PER_SECOND)
        self.deadline = time.monotonic() + req.time_budget
        self.cancel = threading.Event()

    def spend(self, used: int) -> bool:
        if self.cancel.is_set():
            return False
        if self.mode == ExecutionMode.SEQUENTIAL:
            return used < self.max_iterations
        return time.monotonic() < self.deadline


class _Search:
    kind: IkSolverKind

    def __init__(self, chain: KinematicChain, req: IkRequest, budget: _Budget, rng: np.random.Generator):
        self.chain = chain
        self.req = req
        self.budget = budget
        self.rng = rng
        self.iterations = 0
        self.restarts = 0
        self.last_phi = math.inf
        self.result: Optional[IkResult] = None

    def _evaluate(self, q: np.ndarray):
        """(world-frame error for the update, tolerance-frame error)"""
        current = end_effector(self.chain, q)
        local = pose_error(current, self.req.target)
        world = np.concatenate([local[:3], current.rotation @ local[3:]])
        self.last_phi = ss_metric(local)
        return world, local

    def _converged(self, local: np.ndarray) -> bool:
        return within_tolerance(local, self.req.pos_tol, self.req.rot_tol)

    def _restart(self) -> np.ndarray:
        self.restarts += 1
        return self.chain.random_configuration(self.rng)

    def _finish(self, solution: Optional[np.ndarray], status: IkStatus, candidates: int = 0) -> None:
        if solution is not None:
            phi = ss_metric(pose_error(end_effector(self.chain, solution), self.req.target))
        else:
            phi = 0.0 if self.last_phi == math.inf else self.last_phi
        self.result = IkResult(
            solution=None if solution is None else tuple(float(v) for v in solution),
            status=status,
            solver=self.kind,
            iterations=self.iterations,
            restarts=self.restarts,
            phi_ss=phi,
            candidates=candidates,
        )

    def steps(self) -> Iterator[None]:
        raise NotImplementedError

    def run(self) -> IkResult:
        for _ in self.steps():
            pass
        return self.result


def _clamp_error(err: np.ndarray) -> np.ndarray:
    out = err.copy()
    pos = np.linalg.norm(err[:3])
    if pos > MAX_POS_STEP:
        out[:3] *= MAX_POS_STEP / pos
    rot = np.linalg.norm(err[3:])
    if rot > MAX_ROT_STEP:
        out[3:] *= MAX_ROT_STEP / rot
    return out


def _stalled(history: deque, seed_iterations: int) -> bool:
    if seed_iterations >= MAX_SEED_ITERATIONS:
        return True
    return len(history) > STALL_WINDOW and history[0] - history[-1] < STALL_PROGRESS


class _PinvSearch(_Search):
    kind = IkSolverKind.PSEUDOINVERSE

    def _damped_step(self, q: np.ndarray, err: np.ndarray) -> np.ndarray:
        jac = jacobian(self.chain, q)
        lam = DEFAULT_DAMPING if manipulability(jac) < SINGULAR_MANIPULABILITY else 0.0
        try:
            pinv = damped_pseudoinverse(jac, lam)
        except SingularityError:
            pinv = damped_pseudoinverse(jac, DEFAULT_DAMPING)
        step = pinv @ _clamp_error(err)
        largest = np.max(np.abs(step))
        if largest > MAX_JOINT_STEP:
            step *= MAX_JOINT_STEP / largest
        return step

    def steps(self) -> Iterator[None]:
        q = self.chain.clamp(self.req.seed)
        history: deque = deque(maxlen=STALL_WINDOW + 1)
        seed_iterations = 0
        while True:
            world, local = self._evaluate(q)
            if self._converged(local):
                self._finish(q, IkStatus.CONVERGED, candidates=1)
                return
            if not self.budget.spend(self.iterations):
                self._finish(None, IkStatus.TIMED_OUT)
                return
            self.iterations += 1
            seed_iterations += 1
            history.append(float(np.linalg.norm(local)))
            if _stalled(history, seed_iterations):
                logger.debug("pinv: local minimum at phi=%.3e, restarting", ss_metric(local))
                q = self._restart()
                history.clear()
                seed_iterations = 0
            else:
                q = self.chain.clamp(q + self._damped_step(q, world))
            yield


def select_closest(seed: Sequence[float], candidates: List[np.ndarray]) -> np.ndarray:
    """Candidate with the smallest (seed - q)^T (seed - q)."""
    seed = np.asarray(seed, dtype=float)
    return min(candidates, key=lambda q: float((seed - q) @ (seed - q)))


class _SqpSearch(_Search):
    kind = IkSolverKind.SQP_SS

    def __init__(self, *args, max_candidates: int = SQP_CANDIDATES, **kwargs):
        super().__init__(*args, **kwargs)
        self.max_candidates = max_candidates
        self.candidates: List[np.ndarray] = []

    def _merit(self, q: np.ndarray, penalty: float) -> float:
        offset = self.req.seed - q
        local = pose_error(end_effector(self.chain, q), self.req.target)
        return float(offset @ offset) + penalty * ss_metric(local)

    def _subproblem(self, q: np.ndarray, err: np.ndarray, penalty: float) -> np.ndarray:
        """min |q + d - seed|^2 + penalty |err - J d|^2 inside the joint box."""
        jac = jacobian(self.chain, q)
        n = len(self.chain)
        root = math.sqrt(penalty)
        lhs = np.vstack([root * jac, np.eye(n)])
        rhs = np.concatenate([root * _clamp_error(err), self.req.seed - q])
        solution = lsq_linear(lhs, rhs, bounds=(self.chain.lower - q, self.chain.upper - q), method="bvls")
        return solution.x

    def _line_search(self, q: np.ndarray, step: np.ndarray, penalty: float) -> np.ndarray:
        baseline = self._merit(q, penalty)
        scale = 1.0
        for _ in range(LINE_SEARCH_STEPS):
            trial = self.chain.clamp(q + scale * step)
            if self._merit(trial, penalty) < baseline:
                return trial
            scale *= LINE_SEARCH_FACTOR
        return q

    def _finish_with_candidates(self) -> None:
        if self.candidates:
            self._finish(select_closest(self.req.seed, self.candidates), IkStatus.CONVERGED, len(self.candidates))
        else:
            self._finish(None, IkStatus.TIMED_OUT)

    def steps(self) -> Iterator[None]:
        q = self.chain.clamp(self.req.seed)
        penalty = PENALTY_START
        history: deque = deque(maxlen=STALL_WINDOW + 1)
        seed_iterations = 0
        while True:
            world, local = self._evaluate(q)
            if self._converged(local):
                self.candidates.append(q.copy())
                offset = self.req.seed - q
                # nothing beats a solution at the seed itself
                if len(self.candidates) >= self.max_candidates or offset @ offset < SEED_MATCH:
                    self._finish_with_candidates()
                    return
                q, penalty = self._restart(), PENALTY_START
                history.clear()
                seed_iterations = 0
                yield
                continue
            if not self.budget.spend(self.iterations):
                self._finish_with_candidates()
                return
            self.iterations += 1
            seed_iterations += 1
            history.append(float(np.linalg.norm(local)))
            if _stalled(history, seed_iterations):
                logger.debug("sqp_ss: stalled at phi=%.3e, restarting", ss_metric(local))
                q, penalty = self._restart(), PENALTY_START
                history.clear()
                seed_iterations = 0
            else:
                step = self._subproblem(q, world, penalty)
                q = self._line_search(q, step, penalty)
                penalty = min(penalty * PENALTY_GROWTH, PENALTY_MAX)
            yield


def _unreachable(kind: IkSolverKind) -> IkResult:
    return IkResult(solution=None, status=IkStatus.UNREACHABLE, solver=kind)


def _rng(req: IkRequest, stream: int) -> np.random.Generator:
    return np.random.default_rng([req.rng_seed, stream])


def _timed(solve):
    def wrapper(model, req: IkRequest, *args, **kwargs) -> IkResult:
        start = time.perf_counter()
        result = solve(model, req, *args, **kwargs)
        return replace(result, elapsed=time.perf_counter() - start)

    wrapper.__name__ = solve.__name__
    wrapper.__doc__ = solve.__doc__
    return wrapper


@_timed
def solve_pinv(model, req: IkRequest) -> IkResult:
    chain = _as_chain(model)
    if not is_reachable(chain, req.target):
        return _unreachable(IkSolverKind.PSEUDOINVERSE)
    return _PinvSearch(chain, req, _Budget(req), _rng(req, 0)).run()


@_timed
def solve_sqp_ss(model, req: IkRequest, max_candidates: int = SQP_CANDIDATES) -> IkResult:
    """Minimum joint motion from the seed subject to the sum-of-squares error bound.

    Restarts until `max_candidates` solutions are found or the budget runs out,
    then keeps the one closest to the seed.
    """
    chain = _as_chain(model)
    if not is_reachable(chain, req.target):
        return _unreachable(IkSolverKind.SQP_SS)
    search = _SqpSearch(chain, req, _Budget(req), _rng(req, 1), max_candidates=max_candidates)
    return search.run()


def _race_sequential(searches: List[_Search]) -> Optional[IkResult]:
    active = [(search, search.steps()) for search in searches]
    while active:
        for entry in list(active):
            search, stream = entry
            try:
                next(stream)
            except StopIteration:
                active.remove(entry)
                if search.result.converged:
                    return search.result
    return None


def _race_threaded(searches: List[_Search], budget: _Budget) -> Optional[IkResult]:
    with ThreadPoolExecutor(max_workers=len(searches), thread_name_prefix="ik-race") as pool:
        pending = {pool.submit(search.run) for search in searches}
        while pending:
            done, pending = wait(pending, return_when=FIRST_COMPLETED)
            for future in done:
                result = future.result()
                if result.converged:
                    budget.cancel.set()
                    return result
    return None


@_timed
def solve_race(model, req: IkRequest) -> IkResult:
    """Run both strategies under one budget; the first converged result wins."""
    chain = _as_chain(model)
    if not is_reachable(chain, req.target):
        return _unreachable(IkSolverKind.PSEUDOINVERSE)
    budget = _Budget(req)
    searches: List[_Search] = [
        _PinvSearch(chain, req, budget, _rng(req, 0)),
        _SqpSearch(chain, req, budget, _rng(req, 1)),
    ]
    if req.mode == ExecutionMode.SEQUENTIAL:
        winner = _race_sequential(searches)
    else:
        winner = _race_threaded(searches, budget)
    if winner is not None:
        return winner
    # final sum-of-squares error of each search
    loser = min((s.result for s in searches if s.result is not None), key=lambda r: r.phi_ss)
    return replace(loser, status=IkStatus.TIMED_OUT, solution=None)


def bench_ik(
    chain: KinematicChain,
    samples: int,
    time_budget: float,
    rng_seed: int = 0,
    mode: ExecutionMode = ExecutionMode.SEQUENTIAL,
) -> Dict[str, dict]:
    """Success rate and latency percentiles per solver over FK-generated reachable poses."""
    rng = np.random.default_rng(rng_seed)
    poses = []
    for _ in range(samples):
        q_true = chain.random_configuration(rng)
        seed = chain.random_configuration(rng)
        poses.append((end_effector(chain, q_true), seed))

    solvers = {
        "pseudoinverse": solve_pinv,
        "sqp_ss": solve_sqp_ss,
        "race": solve_race,
    }
    report = {}
    for name, solve in solvers.items():
        latencies, successes, violations, recheck_failures = [], 0, 0, 0
        for index, (target, seed) in enumerate(poses):
            req = IkRequest(target=target, seed=seed, time_budget=time_budget, rng_seed=rng_seed + index, mode=mode)
            result = solve(chain, req)
            latencies.append(result.elapsed * 1e3)
            if not result.converged:
                continue
            successes += 1
            q = result.joints()
            if not chain.within_limits(q):
                violations += 1
            if not within_tolerance(pose_error(end_effector(chain, q), target), req.pos_tol, req.rot_tol):
                recheck_failures += 1
        p50, p90, p99 = np.percentile(latencies, [50, 90, 99])
        report[name] = {
            "samples": samples,
            "success_rate": successes / samples,
            "limit_violations": violations,
            "recheck_failures": recheck_failures,
            "latency_ms": {"p50": float(p50), "p90": float(p90), "p99": float(p99), "mean": float(np.mean(latencies))},
        }
        logger.info("bench %s: %.1f%% converged", name, 100.0 * successes / samples)
    return report
