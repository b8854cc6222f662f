"""Command-line interface.

Subcommands: bound, trajectory, classical, calibrate, wasserstein, oracle.
Exit codes: 0 success, 1 usage error, 2 infeasible problem, 3 solver failure
(including method disagreement under ``--method both``).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .calibration import confidence_to_delta, delta_to_alpha, w2_empirical
from .classical import classical_bound
from .core import (CostKind, MomentSpec, ProblemSpec, empirical_moments,
                   empirical_partial_moment, quantile)
from .dataio import load_series_csv, result_to_json
from .descent import solve_dd
from .errors import DomainError, InfeasibleError, RobustMomentsError, SolverFailureError
from .oracle import default_support_grid, dual_grid_oracle, primal_lp_bound
from .spherical import GridSpec, solve_sm

METHOD_AGREEMENT_TOL = 1e-3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class TrajectoryRow:
    delta: float
    bound: float
    classical: float
    method: str

    def __post_init__(self):
        if not self.bound <= self.classical + 1e-6:
            raise SolverFailureError(
                f"bound {self.bound} exceeds classical limit {self.classical} "
                f"at delta={self.delta}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="robustmoments",
                description="Distributionally robust moment bounds over "
                            "Wasserstein neighborhoods of an empirical sample.")
    p.add_argument("--json", action="store_true", help="emit machine-readable JSON")
    p.add_argument("--jobs", type=int, default=1, metavar="N",
                   help="parallel workers for trajectory sweeps")
    p.add_argument("--grid", default="750x750", metavar="TxP",
                   help="spherical grid (theta x phi cells)")
    p.add_argument("--seed", type=int, default=None,
                   help="replay seed for randomized test harnesses (recorded only)")
    sub = p.add_subparsers(dest="command", required=True)

    kinds = [k.name.lower() for k in CostKind]

    def add_problem_args(sp, with_method=True):
        sp.add_argument("--kind", required=True, choices=kinds)
        sp.add_argument("--data", required=True, help="CSV series file")
        sp.add_argument("--tau", type=float)
        sp.add_argument("--tau-quantile", type=float, dest="tau_quantile",
                        help="set tau at this sample quantile")
        sp.add_argument("--delta", type=float)
        sp.add_argument("--beta", type=float, help="confidence level for calibration")
        sp.add_argument("--r", type=float, help="support radius for calibration")
        sp.add_argument("--mu", type=float, help="override the mean target")
        sp.add_argument("--sigma", type=float, help="override the deviation target")
        sp.add_argument("--sqrt", action="store_true",
                        help="report the square root (semideviation scale)")
        if with_method:
            sp.add_argument("--method", choices=["dd", "sm", "both"], default="dd")

    b = sub.add_parser("bound", help="one robust bound")
    add_problem_args(b)

    t = sub.add_parser("trajectory", help="bounds along a delta sweep")
    add_problem_args(t)
    t.add_argument("--deltas", help="comma-separated delta list")
    t.add_argument("--delta-range", dest="delta_range", metavar="LO:HI:COUNT",
                   help="geometric sweep from LO to HI with COUNT points")

    c = sub.add_parser("classical", help="closed-form classical limit")
    c.add_argument("--kind", required=True, choices=kinds)
    c.add_argument("--mu", type=float, required=True)
    c.add_argument("--sigma", type=float, required=True)
    c.add_argument("--tau", type=float, required=True)
    c.add_argument("--sqrt", action="store_true")

    k = sub.add_parser("calibrate", help="map confidence level to ambiguity radius")
    k.add_argument("--n", type=int, required=True)
    k.add_argument("--r", type=float, required=True)
    k.add_argument("--beta", type=float, required=True)

    w = sub.add_parser("wasserstein", help="order-2 distance between two samples")
    w.add_argument("file_a")
    w.add_argument("file_b")

    o = sub.add_parser("oracle", help="primal LP / dual lattice sandwich check")
    add_problem_args(o, with_method=False)
    o.add_argument("--grid-m", type=int, default=600, dest="grid_m",
                   help="support grid size for the primal LP")
    return p


def _parse_grid(spec: str) -> GridSpec:
    try:
        t_count, p_count = (int(part) for part in spec.lower().split("x"))
        return GridSpec(t_count, p_count)
    except (ValueError, DomainError) as exc:
        raise UsageError(f"bad --grid value {spec!r}: {exc}") from exc


def _build_base(args):
    """Sample, moments, tau, and kind shared by the solving subcommands."""
    sample = load_series_csv(args.data)
    emp = empirical_moments(sample)
    mu = args.mu if args.mu is not None else emp.mu
    sigma = args.sigma if args.sigma is not None else emp.sigma
    moments = MomentSpec(mu, sigma)
    if (args.tau is None) == (args.tau_quantile is None):
        raise UsageError("give exactly one of --tau / --tau-quantile")
    tau = args.tau if args.tau is not None else quantile(sample, args.tau_quantile)
    kind = CostKind.from_name(args.kind)
    return kind, tau, moments, sample


def _resolve_delta(args, sample) -> float:
    have_delta = args.delta is not None
    have_beta = args.beta is not None or args.r is not None
    if have_delta == have_beta:
        raise UsageError("give exactly one of --delta / (--beta and --r)")
    if have_delta:
        return args.delta
    if args.beta is None or args.r is None:
        raise UsageError("--beta and --r must be given together")
    return confidence_to_delta(sample.n, args.r, args.beta)


def _build_problem(args) -> tuple[ProblemSpec, float]:
    kind, tau, moments, sample = _build_base(args)
    delta = _resolve_delta(args, sample)
    return ProblemSpec(kind, tau, moments, sample, delta), delta


def _solve(problem: ProblemSpec, method: str, grid: GridSpec):
    if method == "dd":
        return solve_dd(problem), None
    if method == "sm":
        return solve_sm(problem, grid), None
    r_dd = solve_dd(problem)
    r_sm = solve_sm(problem, grid)
    gap = abs(r_dd.value - r_sm.value)
    if gap > METHOD_AGREEMENT_TOL:
        raise SolverFailureError(
            "method disagreement: "
            f"dd={r_dd.value!r} sm={r_sm.value!r} gap={gap:.3e} "
            f"(dd argmin {r_dd.argmin}, sm argmin {r_sm.argmin})")
    return r_dd, r_sm


def _report_scale(value: float, use_sqrt: bool) -> float:
    return math.sqrt(value) if use_sqrt else value


def _problem_fields(args, problem: ProblemSpec) -> dict:
    return {
        "kind": problem.kind.name,
        "tau": problem.tau,
        "mu": problem.moments.mu,
        "sigma": problem.moments.sigma,
        "n": problem.sample.n,
        "data": args.data,
    }


def cmd_bound(args, out) -> int:
    problem, delta = _build_problem(args)
    grid = _parse_grid(args.grid)
    t0 = time.perf_counter()
    result, second = _solve(problem, args.method, grid)
    runtime_ms = 1000.0 * (time.perf_counter() - t0)
    classical = classical_bound(problem.kind, problem.moments, problem.tau)
    empirical = empirical_partial_moment(problem.sample, problem.kind, problem.tau)
    bound = _report_scale(result.value, args.sqrt)
    if args.json:
        out.write(result_to_json(_problem_fields(args, problem), delta, bound,
                                 _report_scale(classical, args.sqrt),
                                 result.method, runtime_ms) + "\n")
    else:
        out.write(f"kind       {problem.kind.name}\n")
        out.write(f"tau        {problem.tau:.6g}\n")
        out.write(f"delta      {delta:.6g}  (sqrt {math.sqrt(delta):.6g})\n")
        out.write(f"bound      {bound:.6g}  [{result.method}]\n")
        if second is not None:
            out.write(f"bound(sm)  {_report_scale(second.value, args.sqrt):.6g}  [SM]\n")
        out.write(f"classical  {_report_scale(classical, args.sqrt):.6g}\n")
        out.write(f"empirical  {_report_scale(empirical, args.sqrt):.6g}\n")
    return 0


def _delta_list(args) -> list[float]:
    if (args.deltas is None) == (args.delta_range is None):
        raise UsageError("give exactly one of --deltas / --delta-range")
    if args.deltas is not None:
        try:
            deltas = [float(tok) for tok in args.deltas.split(",") if tok.strip()]
        except ValueError as exc:
            raise UsageError(f"bad --deltas: {exc}") from exc
    else:
        try:
            lo_s, hi_s, count_s = args.delta_range.split(":")
            lo, hi, count = float(lo_s), float(hi_s), int(count_s)
        except ValueError as exc:
            raise UsageError(f"bad --delta-range: {exc}") from exc
        if count < 1 or lo <= 0 or hi < lo:
            raise UsageError("--delta-range needs 0 < LO <= HI and COUNT >= 1")
        ratio = (hi / lo) ** (1.0 / max(count - 1, 1))
        deltas = [lo * ratio ** i for i in range(count)]
    if not deltas:
        raise UsageError("empty delta sweep")
    if any(d < 0 for d in deltas):
        raise UsageError("deltas must be nonnegative")
    return sorted(deltas)


def _trajectory_point(payload):
    problem, method, grid = payload
    if method == "sm":
        return solve_sm(problem, grid).value, "SM"
    result = solve_dd(problem)
    return result.value, result.method


def cmd_trajectory(args, out) -> int:
    if args.delta is not None or args.beta is not None or args.r is not None:
        raise UsageError("trajectory takes --deltas / --delta-range, not --delta/--beta")
    kind, tau, moments, sample = _build_base(args)
    grid = _parse_grid(args.grid)
    deltas = _delta_list(args)
    classical = classical_bound(kind, moments, tau)
    method = "dd" if args.method == "both" else args.method
    problems = [ProblemSpec(kind, tau, moments, sample, d) for d in deltas]
    payloads = [(pb, method, grid) for pb in problems]
    rows: list[TrajectoryRow] = []
    failure: Exception | None = None
    try:
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                for d, (value, tag) in zip(deltas, pool.map(_trajectory_point, payloads)):
                    rows.append(TrajectoryRow(d, value, classical, tag))
        else:
            for d, payload in zip(deltas, payloads):
                value, tag = _trajectory_point(payload)
                rows.append(TrajectoryRow(d, value, classical, tag))
    except RobustMomentsError as exc:
        failure = exc

    use_sqrt = args.sqrt
    if args.json:
        payload = [{"delta": r.delta, "bound": _report_scale(r.bound, use_sqrt),
                    "classical": _report_scale(r.classical, use_sqrt),
                    "method": r.method} for r in rows]
        out.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        out.write("delta,bound,classical,method\n")
        for r in rows:
            out.write(f"{r.delta:.10g},{_report_scale(r.bound, use_sqrt):.10g},"
                      f"{_report_scale(r.classical, use_sqrt):.10g},{r.method}\n")
    out.flush()
    if failure is not None:
        raise failure
    return 0


def cmd_classical(args, out) -> int:
    kind = CostKind.from_name(args.kind)
    value = classical_bound(kind, MomentSpec(args.mu, args.sigma), args.tau)
    value = _report_scale(value, args.sqrt)
    if args.json:
        out.write(json.dumps({"kind": kind.name, "mu": args.mu, "sigma": args.sigma,
                              "tau": args.tau, "classical": value},
                             sort_keys=True) + "\n")
    else:
        out.write(f"{value:.10g}\n")
    return 0


def cmd_calibrate(args, out) -> int:
    if not 0.0 < args.beta < 1.0:
        raise UsageError("--beta must lie in (0, 1)")
    delta = confidence_to_delta(args.n, args.r, args.beta)
    alpha = delta_to_alpha(args.n, args.r, delta)
    if args.json:
        out.write(json.dumps({"n": args.n, "r": args.r, "beta": args.beta,
                              "delta": delta, "sqrt_delta": math.sqrt(delta),
                              "alpha": alpha}, sort_keys=True) + "\n")
    else:
        out.write(f"delta       {delta:.6g}\n")
        out.write(f"sqrt(delta) {math.sqrt(delta):.6g}\n")
        out.write(f"alpha       {alpha:.6g}\n")
    return 0


def cmd_wasserstein(args, out) -> int:
    a = load_series_csv(args.file_a)
    b = load_series_csv(args.file_b)
    if a.n != b.n:
        raise UsageError(f"samples differ in size ({a.n} vs {b.n})")
    d = w2_empirical(a, b)
    if args.json:
        out.write(json.dumps({"w2": d, "squared": d * d}, sort_keys=True) + "\n")
    else:
        out.write(f"{d:.10g}\n")
    return 0


def cmd_oracle(args, out) -> int:
    problem, delta = _build_problem(args)
    grid = default_support_grid(problem, m=args.grid_m)
    lp = primal_lp_bound(problem, grid)
    dd = solve_dd(problem)
    upper = dual_grid_oracle(problem)
    ok = lp - 1e-7 <= dd.value <= upper + 1e-7
    if args.json:
        out.write(json.dumps({"delta": delta, "primal_lp": lp, "dd": dd.value,
                              "dual_lattice": upper, "sandwich_ok": ok},
                             sort_keys=True) + "\n")
    else:
        out.write(f"primal LP lower   {lp:.8g}\n")
        out.write(f"directional desc. {dd.value:.8g}\n")
        out.write(f"dual lattice upper {upper:.8g}\n")
        out.write(f"sandwich {'OK' if ok else 'VIOLATED'}\n")
    if not ok:
        raise SolverFailureError(
            f"weak-duality sandwich violated: lp={lp!r} dd={dd.value!r} upper={upper!r}")
    return 0


_COMMANDS = {
    "bound": cmd_bound,
    "trajectory": cmd_trajectory,
    "classical": cmd_classical,
    "calibrate": cmd_calibrate,
    "wasserstein": cmd_wasserstein,
    "oracle": cmd_oracle,
}


def main(argv=None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return 1
    except DomainError as exc:
        err.write(f"error: {exc}\n")
        return 1
    except InfeasibleError as exc:
        err.write(f"infeasible: {exc}\n")
        return 2
    except SolverFailureError as exc:
        err.write(f"solver failure: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
