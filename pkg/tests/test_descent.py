import numpy as np
import pytest

from robustmoments.classical import classical_bound
from robustmoments.core import (CostKind, EmpiricalSample, MomentSpec, ProblemSpec,
                                empirical_moments, empirical_partial_moment)
from robustmoments.descent import build_breaklines, dd_minimize_plane, solve_dd
from robustmoments.dual import DualPoint, dual_value, xi_threshold
from robustmoments.errors import DomainError, InfeasibleError

ALL_KINDS = list(CostKind)


def test_breaklines_lzpm_example(twopoint_sample):
    lines = build_breaklines(CostKind.LZPM, 1.0, twopoint_sample, 11.0)
    table = {(l.family, l.index): (l.slope, l.intercept) for l in lines}
    assert len(lines) == 4
    assert table[("U", 1)] == (20.0, -22.0)
    assert table[("U", 2)] == (24.0, -22.0)
    assert table[("L", 1)] == (20.0, -24.0)
    assert table[("L", 2)] == (24.0, -24.0)


def test_breaklines_lfpm_single_family():
    sample = EmpiricalSample([3.0])
    (line,) = build_breaklines(CostKind.LFPM, 1.0, sample, 2.0)
    # branch boundary tau = (4*l1*x - 2*l2 - 1) / (4*xi) rearranged
    assert line.slope == pytest.approx(6.0)
    assert line.intercept == pytest.approx(-2.0 * 2.0 - 0.5)


def test_breaklines_counts():
    sample = EmpiricalSample([1.0])
    assert len(build_breaklines(CostKind.LZPM, 2.0, sample, 0.0)) == 2
    assert len(build_breaklines(CostKind.UZPM, 2.0, sample, 0.0)) == 2
    assert len(build_breaklines(CostKind.UFPM, 2.0, sample, 0.0)) == 1
    assert len(build_breaklines(CostKind.LSPM, 2.0, sample, 0.0)) == 1
    with pytest.raises(DomainError):
        build_breaklines(CostKind.LSPM, 1.0, sample, 0.0)


def test_plane_minimality_probes(twopoint_sample, twopoint_moments):
    rng = np.random.default_rng(31)
    prob = ProblemSpec(CostKind.LZPM, 11.0, twopoint_moments, twopoint_sample, 0.5)
    xi = 0.4
    res = dd_minimize_plane(CostKind.LZPM, xi, prob)
    for _ in range(100):
        lam1 = rng.uniform(0.0, 3.0)
        lam2 = rng.uniform(-30.0, 10.0)
        probe = dual_value(CostKind.LZPM, DualPoint(lam1, lam2, xi - lam1), prob)
        assert res.value <= probe + 1e-9


def test_plane_matches_scipy_style_local_refinement(twopoint_sample, twopoint_moments):
    # Nelder-Mead style refinement from the reported argmin cannot improve.
    from scipy.optimize import minimize

    prob = ProblemSpec(CostKind.UZPM, 11.5, twopoint_moments, twopoint_sample, 0.5)
    xi = 0.3
    res = dd_minimize_plane(CostKind.UZPM, xi, prob)

    def f(v):
        lam1 = max(v[0], 0.0)
        return dual_value(CostKind.UZPM, DualPoint(lam1, v[1], xi - lam1), prob)

    out = minimize(f, [res.lam1, res.lam2], method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 2000})
    assert res.value <= out.fun + 1e-8


def test_solve_dd_two_point_lc(twopoint_sample, twopoint_moments):
    targets = {0.1: 0.589, 0.5: 0.8043, 1.0: 0.9286, 1.5: 0.9839, 2.0: 1.0}
    for d, want in targets.items():
        prob = ProblemSpec(CostKind.LZPM, 11.0, twopoint_moments, twopoint_sample, d)
        assert solve_dd(prob).value == pytest.approx(want, abs=5e-3)


def test_solve_dd_two_point_uc(twopoint_sample, twopoint_moments):
    targets = {0.1: 0.5425, 0.5: 0.68, 1.0: 0.80}
    for d, want in targets.items():
        prob = ProblemSpec(CostKind.UZPM, 11.5, twopoint_moments, twopoint_sample, d)
        assert solve_dd(prob).value == pytest.approx(want, abs=5e-3)


def test_solve_dd_result_fields(twopoint_sample, twopoint_moments):
    prob = ProblemSpec(CostKind.UZPM, 11.5, twopoint_moments, twopoint_sample, 0.5)
    res = solve_dd(prob)
    assert res.method == "DD"
    assert res.iterations > 0
    assert res.argmin.xi == pytest.approx(res.xi_star)
    assert res.argmin.xi > xi_threshold(prob.kind)
    assert dual_value(prob.kind, res.argmin, prob) == pytest.approx(res.value, abs=1e-12)


def test_solve_dd_infeasible_moments(twopoint_sample):
    prob = ProblemSpec(CostKind.LZPM, 11.0, MomentSpec(0.0, 1.0), twopoint_sample, 0.0)
    with pytest.raises(InfeasibleError):
        solve_dd(prob)


def test_classical_ceiling_and_empirical_floor():
    rng = np.random.default_rng(41)
    for trial in range(24):
        kind = ALL_KINDS[trial % 6]
        n = int(rng.integers(2, 7))
        sample = EmpiricalSample(np.sort(rng.uniform(-4, 4, size=n)))
        mom = empirical_moments(sample)
        if mom.sigma < 0.1:
            continue
        tau = float(rng.uniform(-4, 4))
        prob = ProblemSpec(kind, tau, mom, sample, float(rng.uniform(0.05, 2.0)))
        value = solve_dd(prob).value
        assert value <= classical_bound(kind, mom, tau) + 1e-6
        assert value >= empirical_partial_moment(sample, kind, tau) - 1e-9


def test_monotone_in_delta(twopoint_sample, twopoint_moments):
    deltas = [0.05, 0.2, 0.6, 1.2, 2.5]
    vals = [solve_dd(ProblemSpec(CostKind.LZPM, 11.0, twopoint_moments,
                                 twopoint_sample, d)).value for d in deltas]
    assert all(a <= b + 1e-9 for a, b in zip(vals, vals[1:]))


def test_outer_objective_convex_on_bracket(twopoint_sample, twopoint_moments):
    prob = ProblemSpec(CostKind.LZPM, 11.0, twopoint_moments, twopoint_sample, 0.5)
    xis = np.linspace(0.05, 1.2, 50)
    f = [dd_minimize_plane(CostKind.LZPM, float(x), prob).value for x in xis]
    for i in range(1, len(f) - 1):
        assert f[i] <= 0.5 * (f[i - 1] + f[i + 1]) + 1e-9


def test_plane_visit_budget_random_lzpm():
    rng = np.random.default_rng(53)
    for _ in range(25):
        n = int(rng.integers(2, 15))
        sample = EmpiricalSample(np.sort(rng.uniform(-5, 5, size=n)))
        mom = empirical_moments(sample)
        mom = MomentSpec(mom.mu, mom.sigma + 0.3)
        prob = ProblemSpec(CostKind.LZPM, float(rng.uniform(-5, 5)), mom, sample,
                           float(rng.uniform(0.05, 2.0)))
        xi = float(rng.uniform(0.05, 3.0))
        res = dd_minimize_plane(CostKind.LZPM, xi, prob)
        assert res.visits <= n * n + 2 * n
