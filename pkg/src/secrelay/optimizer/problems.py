"""Threshold/rate design problems over ``x = (alpha, beta, r_s)``.

Six problems, three per transmission mechanism:

* ``PA1``/``PF1``: maximize secrecy outage capacity ``r_s * rho_r`` with the
  end-to-end SOP capped at ``mu`` and the idle probability at ``nu``.
* ``PA2``/``PF2``: minimize end-to-end SOP with capacity at least ``theta``
  and idle probability at most ``nu``.
* ``PA3``/``PF3``: maximize exact secrecy throughput ``tau_rb`` with idle
  probability at most ``nu`` and secure arrivals covering departures,
  ``tau_ar >= tau_rb``. The throughput optimum sits on the edge
  ``tau_ar == tau_rb``.

Every problem also carries ``min(alpha, beta) >= 2**r_s - 1`` as two
inequalities. Fixed-rate problems additionally need ``r_s < r_a`` and are
split along the seam ``alpha = 2**r_a - 1``; :func:`solve_problem` solves
both halves and keeps the better one.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..analytic import MetricSet, adaptive_metrics, fixed_metrics
from ..channel import ChannelParams
from .fdm import NlpProblem, SolverState, solve

__all__ = [
    "KINDS",
    "Constants",
    "Solution",
    "build_problem",
    "grid_scan",
    "coarse_grid_best",
    "solve_problem",
    "sweep",
    "effective_est",
]

KINDS = ("PA1", "PA2", "PA3", "PF1", "PF2", "PF3")

THRESHOLD_MAX = 1e4
RS_MIN = 1e-6
MARGIN = 1e-9


@dataclass(frozen=True)
class Constants:
    """Problem constants: SOP cap ``mu``, idle cap ``nu``, capacity floor ``theta``."""

    mu: float = 0.1
    nu: float = 0.2
    theta: float = 0.1
    r_a: float = 3.0

    def __post_init__(self):
        for name in ("mu", "nu"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")
        if not self.theta > 0:
            raise ValueError(f"theta must be > 0, got {self.theta}")
        if not self.r_a > 0:
            raise ValueError(f"r_a must be > 0, got {self.r_a}")


def _metric_fn(kind: str, ch: ChannelParams, r_a: float):
    if kind.startswith("PA"):

        @lru_cache(maxsize=4096)
        def at(alpha, beta, r_s) -> MetricSet:
            return adaptive_metrics(ch, alpha, beta, r_s, check=False)

    else:

        @lru_cache(maxsize=4096)
        def at(alpha, beta, r_s) -> MetricSet:
            return fixed_metrics(ch, alpha, beta, r_a, r_s, check=False)

    return lambda x: at(float(x[0]), float(x[1]), float(x[2]))


def build_problem(
    kind: str, ch: ChannelParams, constants: Constants | None = None, branch: str | None = None
) -> NlpProblem:
    """Wire one of the six problems to the closed-form evaluators.

    ``branch`` is required for fixed-rate kinds: ``"low"`` restricts
    ``alpha <= 2**r_a - 1`` and ``"high"`` restricts ``alpha >= 2**r_a - 1``.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown problem kind {kind!r}; expected one of {KINDS}")
    c = constants or Constants()
    fixed = kind.startswith("PF")
    m = _metric_fn(kind, ch, c.r_a)

    rs_hi = math.log2(1.0 + THRESHOLD_MAX)
    lower = np.array([MARGIN, MARGIN, RS_MIN])
    upper = np.array([THRESHOLD_MAX, THRESHOLD_MAX, rs_hi])
    if fixed:
        seam = 2.0**c.r_a - 1.0
        if branch == "low":
            upper[0] = seam
        elif branch == "high":
            lower[0] = seam
        else:
            raise ValueError("fixed-rate problems need branch='low' or 'high'")
        upper[2] = min(upper[2], c.r_a)

    cons = [
        lambda x: x[0] - (2.0 ** x[2] - 1.0) - MARGIN,
        lambda x: x[1] - (2.0 ** x[2] - 1.0) - MARGIN,
    ]
    names = ["alpha_floor", "beta_floor"]
    if fixed:
        cons.append(lambda x: c.r_a - x[2] - MARGIN)
        names.append("rs_below_ra")

    idle = lambda x: c.nu - m(x).rho_id
    if kind[2] == "1":
        objective, sense = (lambda x: m(x).soct), "maximize"
        cons += [lambda x: c.mu - m(x).sop_e2e, idle]
        names += ["sop_cap", "idle_cap"]
    elif kind[2] == "2":
        objective, sense = (lambda x: m(x).sop_e2e), "minimize"
        cons += [lambda x: m(x).soct - c.theta, idle]
        names += ["soc_floor", "idle_cap"]
    else:
        objective, sense = (lambda x: m(x).tau_rb), "maximize"
        cons += [idle, lambda x: m(x).tau_ar - m(x).tau_rb]
        names += ["idle_cap", "non_absorbing_edge"]

    return NlpProblem(
        objective=objective,
        constraints=cons,
        lower=lower,
        upper=upper,
        sense=sense,
        names=names,
        kind=kind,
        meta={"constants": c, "branch": branch, "metrics": m, "channel": ch},
    )


def _grid_axes(problem: NlpProblem, n_threshold: int, n_rate: int):
    # geometric axes: the interesting region spans decades of threshold
    lo, hi = problem.lower, problem.upper
    th = lambda j: np.geomspace(max(lo[j], 1e-2), hi[j], n_threshold)
    rs = np.geomspace(max(lo[2], 1e-2), hi[2] * (1 - 1e-6), n_rate)
    return th(0), th(1), rs


def grid_scan(problem: NlpProblem, n_threshold: int = 50, n_rate: int = 20, strict: bool = True):
    """Feasible grid points sorted best-first as ``(merit, x)`` pairs."""
    out = []
    for x in itertools.product(*_grid_axes(problem, n_threshold, n_rate)):
        x = np.array(x)
        if problem.feasible(x, strict=strict):
            out.append((problem.merit(x), x))
    out.sort(key=lambda t: -t[0])
    return out


def coarse_grid_best(kind: str, ch: ChannelParams, constants: Constants | None = None, shape=(50, 50, 20)):
    """Best feasible objective (natural sign) on a ``shape`` grid, both seam branches."""
    c = constants or Constants()
    best = -math.inf
    sense = "maximize"
    for br in ("low", "high") if kind.startswith("PF") else (None,):
        problem = build_problem(kind, ch, c, br)
        sense = problem.sense
        scan = grid_scan(problem, shape[0], shape[2], strict=False)
        if scan:
            best = max(best, scan[0][0])
    return best if sense == "maximize" else -best


def _spread_starts(scan, k, lower, upper):
    """Overall best grid point, then the best point in each octant of the log-box.

    Large-threshold plateaus otherwise soak up every start.
    """
    lo = np.log(np.maximum(lower, 1e-2))
    mid = 0.5 * (lo + np.log(upper))
    starts, seen = [], set()
    for merit, x in scan:
        cell = tuple(np.log(x) >= mid)
        if not starts or cell not in seen:
            seen.add(cell)
            starts.append(x)
        if len(starts) == k:
            break
    return starts


@dataclass
class Solution:
    kind: str
    x: np.ndarray
    objective: float
    metrics: MetricSet
    residuals: dict
    iterations: int
    status: str
    branch: str | None = None
    constants: Constants = field(default_factory=Constants)
    grid_best: float = math.nan

    @property
    def alpha(self):
        return float(self.x[0])

    @property
    def beta(self):
        return float(self.x[1])

    @property
    def r_s(self):
        return float(self.x[2])


def _solve_one(problem: NlpProblem, starts: int, tol: float, max_iter: int, n_threshold: int, n_rate: int, extra=()):
    scan = grid_scan(problem, n_threshold, n_rate)
    seeds = [np.asarray(x, dtype=float) for x in extra]
    seeds = [x for x in seeds if problem.feasible(x)]
    if not scan and not seeds:
        return None, math.nan
    best: SolverState | None = None
    for x0 in _spread_starts(scan, starts, problem.lower, problem.upper) + seeds:
        st = solve(problem, x0, tol=tol, max_iter=max_iter)
        if best is None or problem.merit(st.x) > problem.merit(best.x):
            best = st
    return best, scan[0][0] if scan else math.nan


def solve_problem(
    kind: str,
    ch: ChannelParams,
    constants: Constants | None = None,
    starts: int = 8,
    tol: float = 1e-6,
    max_iter: int = 300,
    n_threshold: int = 24,
    n_rate: int = 12,
    extra_starts=(),
) -> Solution | None:
    """Multi-start solve; fixed-rate kinds compare the two seam branches.

    ``extra_starts`` are tried in addition to the grid starts wherever they
    are feasible (sweeps pass the previous optimum here). Returns ``None``
    when no feasible start exists.
    """
    c = constants or Constants()
    branches = ("low", "high") if kind.startswith("PF") else (None,)
    found = []
    for br in branches:
        problem = build_problem(kind, ch, c, br)
        st, grid_best = _solve_one(problem, starts, tol, max_iter, n_threshold, n_rate, extra_starts)
        if st is not None:
            found.append((problem.merit(st.x), problem, st, grid_best))
    if not found:
        return None
    merit, problem, st, _ = max(found, key=lambda t: t[0])
    grid_best = max((t[3] for t in found if not math.isnan(t[3])), default=math.nan)
    m = problem.meta["metrics"](st.x)
    g = problem.g(st.x)
    residuals = dict(zip(problem.names, g[: len(problem.constraints)]))
    return Solution(
        kind=kind,
        x=st.x,
        objective=float(problem.objective(st.x)),
        metrics=m,
        residuals=residuals,
        iterations=st.iterations,
        status=st.status,
        branch=problem.meta["branch"],
        constants=c,
        grid_best=grid_best if problem.sense == "maximize" else -grid_best,
    )


SWEEP_AXES = ("mu", "nu", "theta")


def sweep(kind: str, ch: ChannelParams, axis: str, values, base: Constants | None = None, **solve_kw):
    """Solve ``kind`` at each value of one constant, in the given order.

    Each solve also starts from the previous optimum when it is still
    feasible, so relaxing a cap can never report a worse optimum.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
    base = base or Constants()
    out, prev = [], ()
    for v in values:
        c = dataclasses.replace(base, **{axis: float(v)})
        sol = solve_problem(kind, ch, c, extra_starts=prev, **solve_kw)
        out.append(sol)
        prev = (sol.x,) if sol is not None else ()
    return out


def effective_est(ch: ChannelParams, x, r_a: float | None = None) -> float:
    """Throughput Bob can actually sustain: ``min(tau_ar, tau_rb)``."""
    alpha, beta, r_s = (float(v) for v in x)
    if r_a is None:
        m = adaptive_metrics(ch, alpha, beta, r_s)
    else:
        m = fixed_metrics(ch, alpha, beta, r_a, r_s)
    return min(m.tau_ar, m.tau_rb)
