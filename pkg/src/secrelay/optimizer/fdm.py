"""Feasible-direction method for smooth inequality-constrained problems.

Problems are posed as *maximize* ``F(x)`` subject to ``g_i(x) >= 0`` and a
box ``lower <= x <= upper``. Box sides are handled as linear constraints
with exact gradients; everything else is differentiated by central finite
differences.

Iteration outline:

1. Collect the ``eps_k``-active constraints (``0 <= g_i <= eps_k``).
2. No active constraint: step along the gradient (scaled into ``|d_j| <= 1``).
   Otherwise solve the direction LP

       min delta  s.t.  -d.gradF <= delta,  -d.grad g_i <= delta,  |d_j| <= 1

   and halve ``eps_k`` whenever it certifies no improving direction.
3. Find the largest feasible step ``a_max`` along ``d`` by bracketing and
   bisection, then maximize ``F`` on ``[0, a_max]`` with a coarse scan
   followed by golden-section refinement.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog

__all__ = [
    "NlpProblem",
    "SolverState",
    "DirectionResult",
    "LineSearchResult",
    "SolverError",
    "fd_gradient",
    "lp_direction",
    "line_search",
    "golden_section",
    "solve",
]

log = logging.getLogger(__name__)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class SolverError(RuntimeError):
    pass


@dataclass
class NlpProblem:
    """Smooth NLP in the ``g_i(x) >= 0`` convention.

    ``sense`` only matters for reporting: :attr:`value` returns the
    objective in its natural sign, while the solver always maximizes
    :meth:`merit`.
    """

    objective: Callable[[np.ndarray], float]
    constraints: Sequence[Callable[[np.ndarray], float]]
    lower: np.ndarray
    upper: np.ndarray
    sense: str = "maximize"
    names: Sequence[str] = ()
    kind: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if self.sense not in ("maximize", "minimize"):
            raise ValueError(f"sense must be maximize|minimize, got {self.sense!r}")
        if len(self.constraints) < 1:
            raise ValueError("at least one constraint is required")
        if not (np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper))):
            raise ValueError("box bounds must be finite")
        if np.any(self.lower > self.upper):
            raise ValueError("empty box")

    @property
    def dim(self) -> int:
        return len(self.lower)

    def merit(self, x) -> float:
        f = self.objective(x)
        return f if self.sense == "maximize" else -f

    def g(self, x) -> np.ndarray:
        """All constraint values, general ones first, then ``x - lower`` and ``upper - x``."""
        x = np.asarray(x, dtype=float)
        general = [c(x) for c in self.constraints]
        return np.concatenate([general, x - self.lower, self.upper - x])

    def violation(self, x) -> float:
        return float(max(0.0, -np.min(self.g(x))))

    def feasible(self, x, strict=False) -> bool:
        g = self.g(x)
        return bool(np.all(g > 0) if strict else np.all(g >= 0))


def fd_gradient(f, x, lower=None, upper=None, rel_step=1e-6) -> np.ndarray:
    """Central differences with step ``rel_step * max(|x_j|, 1)``.

    Falls back to a one-sided difference where a central probe would leave
    the box (e.g. at a branch seam that is also a box face).
    """
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for j in range(len(x)):
        h = rel_step * max(abs(x[j]), 1.0)
        up, dn = x.copy(), x.copy()
        up[j] += h
        dn[j] -= h
        if lower is not None and dn[j] < lower[j]:
            grad[j] = (f(up) - f(x)) / h
        elif upper is not None and up[j] > upper[j]:
            grad[j] = (f(x) - f(dn)) / h
        else:
            grad[j] = (f(up) - f(dn)) / (2.0 * h)
    return grad


@dataclass(frozen=True)
class DirectionResult:
    d: np.ndarray
    delta: float


def lp_direction(grad_objective, active_grads=()) -> DirectionResult:
    """Best strictly feasible ascent direction at a point.

    ``grad_objective`` is the gradient of the function being maximized and
    ``active_grads`` the gradients of the active ``g_i >= 0`` constraints.
    """
    gf = np.asarray(grad_objective, dtype=float)
    n = len(gf)
    rows = [gf] + [np.asarray(gi, dtype=float) for gi in active_grads]
    if not all(np.all(np.isfinite(r)) for r in rows):
        raise ValueError("gradients must be finite")
    # variables z = (d_1..d_n, delta);  -row.d - delta <= 0
    A = np.array([np.concatenate([-r, [-1.0]]) for r in rows])
    c = np.zeros(n + 1)
    c[-1] = 1.0
    bounds = [(-1.0, 1.0)] * n + [(None, None)]
    res = linprog(c, A_ub=A, b_ub=np.zeros(len(rows)), bounds=bounds, method="highs")
    if res.status != 0:
        # d = 0, delta = 0 is always feasible, so this is a solver failure
        raise SolverError(f"direction LP failed: {res.message}")
    d, delta = res.x[:n], float(res.x[n])
    if delta > -1e-12:
        return DirectionResult(np.zeros(n), 0.0)
    return DirectionResult(d, delta)


def golden_section(f, lo, hi, tol=1e-6, maxiter=200):
    """Maximize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


@dataclass(frozen=True)
class LineSearchResult:
    a_max: float
    a_k: float
    value: float
    blocked: bool
    at_boundary: bool


def _box_limit(x, d, lower, upper):
    lim = math.inf
    for j in range(len(x)):
        if d[j] > 0:
            lim = min(lim, (upper[j] - x[j]) / d[j])
        elif d[j] < 0:
            lim = min(lim, (lower[j] - x[j]) / d[j])
    return max(lim, 0.0)


def _max_feasible_step(problem, x, d, tol):
    """Largest ``a`` in the box with all general ``g_i(x + a d) >= 0``."""
    cap = _box_limit(x, d, problem.lower, problem.upper)
    if cap == 0.0:
        return 0.0

    def ok(a):
        y = np.clip(x + a * d, problem.lower, problem.upper)
        return all(c(y) >= 0 for c in problem.constraints)

    # march outward geometrically; first failure brackets the crossing
    step = min(cap, 1e-6 * max(1.0, float(np.max(np.abs(x)))))
    good, bad = 0.0, None
    a = step
    while True:
        if not ok(a):
            bad = a
            break
        good = a
        if a >= cap:
            return cap
        a = min(2.0 * a, cap)
    while bad - good > tol * max(1.0, good):
        mid = 0.5 * (good + bad)
        if ok(mid):
            good = mid
        else:
            bad = mid
    return good


def line_search(problem: NlpProblem, x, d, tol: float = 1e-6, n_scan: int = 24) -> LineSearchResult:
    """Step along ``d`` that maximizes the merit without leaving the feasible set."""
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    a_max = _max_feasible_step(problem, x, d, tol * 1e-3)
    f0 = problem.merit(x)
    if a_max <= 0.0:
        return LineSearchResult(0.0, 0.0, f0, True, True)

    def phi(a):
        # the doubling march can hop over an infeasible pocket; never pick one
        y = np.clip(x + a * d, problem.lower, problem.upper)
        if not all(c(y) >= 0 for c in problem.constraints):
            return -math.inf
        return problem.merit(y)

    # coarse scan guards against multimodality, golden section polishes
    grid = np.concatenate([[0.0], a_max * np.geomspace(1e-6, 1.0, n_scan)])
    vals = [f0] + [phi(a) for a in grid[1:]]
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    a_k, v = golden_section(phi, lo, hi, tol=tol * max(1.0, a_max) * 1e-3 if hi - lo > tol else 0.0)
    if vals[i] > v:
        a_k, v = grid[i], vals[i]
    if v < f0:
        return LineSearchResult(a_max, 0.0, f0, False, False)
    return LineSearchResult(a_max, float(a_k), float(v), False, bool(a_k >= a_max * (1 - 1e-9)))


@dataclass
class SolverState:
    x: np.ndarray
    eps_k: float
    iterations: int = 0
    history: list = field(default_factory=list)
    status: str = "running"
    objective: float = math.nan

    def record(self, problem):
        self.objective = problem.objective(self.x)
        self.history.append((self.objective, problem.violation(self.x)))


def _active_grads(problem, x, active):
    n_general = len(problem.constraints)
    grads = []
    for i in active:
        if i < n_general:
            grads.append(fd_gradient(problem.constraints[i], x, problem.lower, problem.upper))
        else:
            j = (i - n_general) % problem.dim
            e = np.zeros(problem.dim)
            e[j] = 1.0 if i - n_general < problem.dim else -1.0
            grads.append(e)
    return grads


def solve(
    problem: NlpProblem,
    x0,
    eps0: float = 0.1,
    tol: float = 1e-6,
    max_iter: int = 500,
) -> SolverState:
    """Run the feasible-direction iteration from a feasible ``x0``.

    Stops when the gradient vanishes with nothing active, when the LP
    certifies no improving direction at ``eps_k < tol``, or when an
    unconstrained line step moves less than ``tol``. On hitting
    ``max_iter`` the best iterate is returned with ``status="max_iter"``.
    """
    x = np.asarray(x0, dtype=float).copy()
    if not problem.feasible(x):
        raise ValueError(f"x0={x} is infeasible (violation {problem.violation(x):.3g})")
    state = SolverState(x=x, eps_k=eps0)
    state.record(problem)
    merit = problem.merit(x)

    while state.iterations < max_iter:
        state.iterations += 1
        g = problem.g(x)
        active = [i for i, gi in enumerate(g) if gi <= state.eps_k]
        grad = fd_gradient(problem.merit, x, problem.lower, problem.upper)

        if not active:
            norm = float(np.linalg.norm(grad))
            if norm <= tol:
                state.status = "stationary"
                break
            d = grad / max(1.0, float(np.max(np.abs(grad))))
            delta = -1.0
        else:
            direction = lp_direction(grad, _active_grads(problem, x, active))
            d, delta = direction.d, direction.delta
            if delta == 0.0:
                if state.eps_k < tol:
                    state.status = "kkt"
                    break
                state.eps_k /= 2.0
                continue

        ls = line_search(problem, x, d, tol=tol)
        if ls.blocked or ls.a_k == 0.0:
            if state.eps_k < tol:
                state.status = "blocked"
                break
            state.eps_k /= 2.0
            continue

        x_new = np.clip(x + ls.a_k * d, problem.lower, problem.upper)
        if not problem.feasible(x_new):
            raise SolverError(f"line search produced infeasible point {x_new}")
        new_merit = problem.merit(x_new)
        if new_merit < merit:
            raise SolverError("merit decreased along an accepted step")
        step = float(np.linalg.norm(x_new - x))
        x, merit = x_new, new_merit
        state.x = x
        state.record(problem)
        if step < tol and not ls.at_boundary:
            state.status = "small_step"
            break
        if state.eps_k > -delta:
            state.eps_k /= 2.0
    else:
        state.status = "max_iter"
        log.info("feasible-direction solve hit max_iter=%d", max_iter)
    state.x = x
    state.objective = problem.objective(x)
    return state
