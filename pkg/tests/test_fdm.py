import itertools
import math

import numpy as np
import pytest

from secrelay.analytic import adaptive_metrics, fixed_metrics
from secrelay.optimizer import Constants, build_problem, grid_scan
from secrelay.optimizer.fdm import (
    NlpProblem,
    fd_gradient,
    golden_section,
    line_search,
    lp_direction,
    solve,
)


def brute_force_delta(rows, n):
    """Min delta over the direction polytope by enumerating its vertices."""
    A, b = [], []
    for r in rows:
        A.append(np.concatenate([-np.asarray(r), [-1.0]]))
        b.append(0.0)
    for j in range(n):
        e = np.zeros(n + 1)
        e[j] = 1.0
        A += [e, -e]
        b += [1.0, 1.0]
    A, b = np.array(A), np.array(b)
    best = math.inf
    for idx in itertools.combinations(range(len(A)), n + 1):
        M = A[list(idx)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        z = np.linalg.solve(M, b[list(idx)])
        if np.all(A @ z <= b + 1e-9):
            best = min(best, z[-1])
    return best


def toy_problem():
    return NlpProblem(
        objective=lambda x: -(x[0] ** 2 + x[1] ** 2),
        constraints=[lambda x: x[0] + x[1] - 1.0],
        lower=[-5.0, -5.0],
        upper=[5.0, 5.0],
    )


def test_lp_no_active_constraints():
    r = lp_direction([1.0, 0.0, 0.0])
    assert r.delta == -1.0 and r.d[0] == 1.0


def test_lp_antiparallel_is_degenerate():
    r = lp_direction([1.0, 0.0, 0.0], [[-1.0, 0.0, 0.0]])
    assert r.delta == 0.0 and np.all(r.d == 0)


def test_lp_derived_example():
    r = lp_direction([1.0, 1.0, 0.0], [[1.0, -1.0, 0.0]])
    assert r.delta == pytest.approx(-1.0, abs=1e-12)
    assert r.d[0] == pytest.approx(1.0) and r.d[1] == pytest.approx(0.0, abs=1e-12)
    assert brute_force_delta([[1, 1, 0], [1, -1, 0]], 3) == pytest.approx(-1.0)


def test_lp_matches_vertex_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = 3
        k = rng.integers(0, 4)
        rows = rng.normal(size=(k + 1, n))
        r = lp_direction(rows[0], rows[1:])
        assert np.all(np.abs(r.d) <= 1 + 1e-12)
        assert np.all(-rows @ r.d <= r.delta + 1e-9)
        assert abs(r.delta - min(brute_force_delta(rows, n), 0.0)) <= 1e-9


def test_lp_rejects_non_finite():
    with pytest.raises(ValueError):
        lp_direction([math.nan, 0.0])


def test_golden_section_parabola():
    x, fx = golden_section(lambda t: -(t - 0.3) ** 2, 0.0, 1.0, tol=1e-9)
    assert x == pytest.approx(0.3, abs=1e-8)


def test_line_search_interior_minimizer():
    p = NlpProblem(lambda x: -np.sum(x**2), [lambda x: 1.0], -10 * np.ones(3), 10 * np.ones(3))
    ls = line_search(p, np.array([1.0, 0, 0]), np.array([-1.0, 0, 0]))
    assert ls.a_k == pytest.approx(1.0, abs=1e-6)


def test_line_search_boundary_step():
    p = NlpProblem(lambda x: x[0], [lambda x: 1.0 - x[0]], -10 * np.ones(3), 10 * np.ones(3))
    ls = line_search(p, np.zeros(3), np.array([1.0, 0, 0]))
    assert ls.a_max == pytest.approx(1.0, abs=1e-6)
    assert ls.a_k == pytest.approx(1.0, abs=1e-6)
    assert ls.a_k <= ls.a_max


def test_line_search_blocked():
    p = NlpProblem(lambda x: x[0], [lambda x: -x[0]], -np.ones(1), np.ones(1))
    ls = line_search(p, np.zeros(1), np.ones(1))
    assert ls.blocked and ls.a_k == 0.0


def test_line_search_on_design_problem(ref_channel):
    # returned step is a maximizer on [0, a_max] up to a dense-grid check
    prob = build_problem("PA1", ref_channel, Constants(mu=0.1, nu=0.2))
    x = grid_scan(prob, 12, 6)[0][1]
    d = fd_gradient(prob.merit, x)
    d = d / np.max(np.abs(d))
    ls = line_search(prob, x, d)
    grid = np.arange(0.0, ls.a_max, 1e-4 * max(ls.a_max, 1.0))
    dense = max(prob.merit(x + a * d) for a in grid if prob.feasible(x + a * d))
    assert ls.value >= dense - 1e-6
    h = 1e-6 * max(ls.a_max, 1)
    interior = h < ls.a_k < ls.a_max - h
    if interior:
        slope = (prob.merit(x + (ls.a_k + h) * d) - prob.merit(x + (ls.a_k - h) * d)) / (2 * h)
        assert abs(slope) < 1e-3


def test_solve_toy_problem():
    for x0 in ([2.0, 2.0], [4.0, -1.0], [0.6, 0.6], [-2.0, 4.5]):
        st = solve(toy_problem(), x0)
        assert np.allclose(st.x, [0.5, 0.5], atol=1e-4)
        assert st.iterations <= 200


def test_solve_history_monotone_and_feasible():
    st = solve(toy_problem(), [3.0, 1.0])
    objs = [h[0] for h in st.history]
    assert all(b >= a - 1e-15 for a, b in zip(objs, objs[1:]))
    assert all(h[1] == 0.0 for h in st.history)


def test_solve_rejects_infeasible_start():
    with pytest.raises(ValueError):
        solve(toy_problem(), [0.0, 0.0])


def test_solve_reports_max_iter():
    st = solve(toy_problem(), [4.0, 4.0], max_iter=2)
    assert st.status == "max_iter"
    assert toy_problem().feasible(st.x)


def test_unconstrained_interior_stationary():
    p = NlpProblem(lambda x: -((x[0] - 1) ** 2), [lambda x: 10.0], [-5.0], [5.0])
    st = solve(p, [1.0])
    assert st.status == "stationary"


def test_problem_validation():
    with pytest.raises(ValueError):
        NlpProblem(lambda x: 0, [], [0.0], [1.0])
    with pytest.raises(ValueError):
        NlpProblem(lambda x: 0, [lambda x: 1], [0.0], [math.inf])
    with pytest.raises(ValueError):
        NlpProblem(lambda x: 0, [lambda x: 1], [0.0], [1.0], sense="up")


@pytest.mark.parametrize(
    "fn",
    [
        lambda x, ch: adaptive_metrics(ch, *x).soct,
        lambda x, ch: adaptive_metrics(ch, *x).sop_e2e,
        lambda x, ch: adaptive_metrics(ch, *x).tau_ar,
        lambda x, ch: adaptive_metrics(ch, *x).tau_rb,
        lambda x, ch: adaptive_metrics(ch, *x).rho_id,
        lambda x, ch: fixed_metrics(ch, x[0], x[1], 4.0, x[2]).sop_e2e,
        lambda x, ch: fixed_metrics(ch, x[0], x[1], 3.0, x[2]).tau_rb,
    ],
)
def test_gradients_richardson(ref_channel, fn):
    for x in ([7.0, 8.0, 1.0], [3.0, 12.0, 0.8], [20.0, 4.0, 1.5]):
        f = lambda y: fn(y, ref_channel)
        g1 = fd_gradient(f, np.array(x), rel_step=1e-6)
        g2 = fd_gradient(f, np.array(x), rel_step=5e-7)
        rich = (4 * g2 - g1) / 3
        scale = max(np.max(np.abs(rich)), 1e-12)
        assert np.max(np.abs(g1 - rich)) <= 1e-4 * scale
