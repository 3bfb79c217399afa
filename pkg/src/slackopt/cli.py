"""Command-line front end: rank slack candidates, sweep participation
factors over gamma, and run the self-consistency identity checks.

Output is plot-ready CSV (default) or JSON with floats at 12 significant
digits so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__, powerflow
from .case_io import Homogeneous, Tabulated, load_case, prepare_network
from .errors import NoConvergence, SlackoptError
from .graph_metrics import gamma_inverse_identity_check
from .loss_analysis import lossless_state
from .slack_select import filter_candidates, sweep_gamma, validate_ranking

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SOLVER = 2
EXIT_IDENTITY = 3
EXIT_USAGE = 64

_FLOAT_FMT = "%.12g"


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return _FLOAT_FMT % x
    return str(x)


@dataclass
class RunReport:
    case_name: str
    mode: str
    candidate_rows: list = field(default_factory=list)
    participation_rows: list = field(default_factory=list)
    identity_rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def to_json(self):
        def clean(v):
            if isinstance(v, float):
                return float(_FLOAT_FMT % v)
            return v

        payload = {
            "case": self.case_name,
            "mode": self.mode,
            "candidates": [
                {k: clean(v) for k, v in row.items()} for row in self.candidate_rows
            ],
            "participation": [
                {k: clean(v) for k, v in row.items()}
                for row in self.participation_rows
            ],
            "identities": [
                {k: clean(v) for k, v in row.items()} for row in self.identity_rows
            ],
            "metadata": self.metadata,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_csv(self):
        rows = self.candidate_rows or self.participation_rows or self.identity_rows
        if not rows:
            return ""
        header = list(rows[0].keys())
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_fmt(row.get(k)) for k in header))
        return "\n".join(lines) + "\n"


def _emit(report, args):
    text = report.to_json() if args.format == "json" else report.to_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_gammas(spec):
    """Comma list ('0.1,0.3') or range syntax ('start:stop:step')."""
    spec = spec.strip()
    if not spec:
        raise ValueError("empty gamma list")
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError("range syntax is start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("step must be positive")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [start + k * step for k in range(count)]
    return [float(tok) for tok in spec.split(",") if tok.strip()]


def _mode_from_args(args):
    if args.tabulated:
        return Tabulated(), "tabulated"
    gamma = args.gamma if args.gamma is not None else 0.1
    return Homogeneous(gamma), f"homogeneous({_FLOAT_FMT % gamma})"


def _candidate_set(args, net):
    if args.candidates in (None, "all"):
        return filter_candidates(net, args.min_injection)
    wanted = [int(tok) for tok in args.candidates.split(",") if tok.strip()]
    return frozenset(net.index(b) for b in wanted)


def cmd_rank(args):
    case = load_case(args.case)
    mode, mode_name = _mode_from_args(args)
    cfg = powerflow.SolverConfig(tolerance=args.tol, max_iterations=args.max_iter)
    probe = prepare_network(case, mode)
    candidates = _candidate_set(args, probe)

    if args.validate:
        net, state, rows = validate_ranking(case, mode, candidates, cfg)
    else:
        from .slack_select import rank_candidates

        net = probe
        base = powerflow.solve_lossless(net, cfg)
        gamma = mode.gamma if isinstance(mode, Homogeneous) else None
        state = lossless_state(net, base.theta, gamma=gamma)
        rows = rank_candidates(state, net, candidates, gamma=gamma)

    report = RunReport(case_name=case.name, mode=mode_name)
    report.metadata = {"tolerance": cfg.tolerance, "version": __version__,
                       "d0": state.d0}
    for row in rows:
        report.candidate_rows.append(
            {
                "bus": net.bus_ids[row.bus],
                "score": row.score,
                "d0": state.d0,
                "loss_o2": row.predicted_loss_o2,
                "loss_o3": row.predicted_loss_o3,
                "loss_exact": row.exact_loss,
                "iterations": row.iterations,
                "tied": int(row.tied),
                "error": row.error,
            }
        )
    _emit(report, args)
    if any(r.error for r in rows):
        return EXIT_SOLVER
    return EXIT_OK


def cmd_sweep(args):
    case = load_case(args.case)
    try:
        gammas = _parse_gammas(args.gammas)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    cfg = powerflow.SolverConfig(tolerance=args.tol, max_iterations=args.max_iter)
    probe = prepare_network(case, Homogeneous(0.0))
    candidates = _candidate_set(args, probe)

    rows = sweep_gamma(case, candidates, gammas, cfg, args.min_injection)
    report = RunReport(case_name=case.name, mode="homogeneous-sweep")
    report.metadata = {"tolerance": cfg.tolerance, "version": __version__}
    failed = False
    for gamma, result, error in rows:
        if error is not None:
            failed = True
            report.participation_rows.append(
                {"gamma": gamma, "bus": None, "factor": None, "error": error}
            )
            continue
        for bus, factor in zip(result.buses, result.factors):
            report.participation_rows.append(
                {
                    "gamma": gamma,
                    "bus": probe.bus_ids[bus],
                    "factor": float(factor),
                    "error": None,
                }
            )
    _emit(report, args)
    return EXIT_SOLVER if failed else EXIT_OK


def cmd_check(args):
    case = load_case(args.case)
    mode, mode_name = _mode_from_args(args)
    cfg = powerflow.SolverConfig(tolerance=args.tol, max_iterations=args.max_iter)
    net = prepare_network(case, mode)
    base = powerflow.solve_lossless(net, cfg)
    gamma = mode.gamma if isinstance(mode, Homogeneous) else None
    state = lossless_state(net, base.theta, gamma=gamma)
    spec = state.spectrum

    checks = []
    # regularized-inverse identity
    checks.append(("gamma_inverse", gamma_inverse_identity_check(spec), 1e-8))

    # spectral projection identity: u_l . P against the edge sum
    p = net.injection
    i, j = net.edge_i, net.edge_j
    sinw = net.b * net.voltage[i] * net.voltage[j] * np.sin(
        base.theta[i] - base.theta[j]
    )
    lhs = spec.vectors[:, 1:].T @ p
    rhs = (spec.vectors[i, 1:] - spec.vectors[j, 1:]).T @ sinw
    checks.append(("spectral_projection", float(np.max(np.abs(lhs - rhs))), 1e-8))

    # conservation: slack injection equals the exact dissipation
    cand = sorted(filter_candidates(net)) or sorted(net.gen_buses)
    slack = cand[0]
    try:
        sol = powerflow.solve_single_slack(
            net, slack, powerflow.SolverConfig(cfg.tolerance, cfg.max_iterations,
                                               start=base.theta)
        )
        gap = abs(sol.total_slack - powerflow.exact_dissipation(net, sol.theta))
        checks.append(("conservation", gap, 1e-10))
    except NoConvergence as exc:
        checks.append(("conservation", float("nan"), 1e-10))
        print(f"warning: {exc}", file=sys.stderr)

    report = RunReport(case_name=case.name, mode=mode_name)
    report.metadata = {"tolerance": cfg.tolerance, "version": __version__}
    ok = True
    for name, deviation, threshold in checks:
        passed = bool(deviation == deviation and deviation < threshold)
        ok = ok and passed
        report.identity_rows.append(
            {
                "identity": name,
                "max_deviation": deviation,
                "threshold": threshold,
                "pass": int(passed),
            }
        )
    _emit(report, args)
    return EXIT_OK if ok else EXIT_IDENTITY


def build_parser():
    parser = argparse.ArgumentParser(
        prog="slackopt",
        description="Loss-optimal slack bus selection via resistance distance.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, gammas=False):
        p.add_argument("--case", required=True, help="MATPOWER case file")
        p.add_argument("--gamma", type=float, default=None,
                       help="homogeneous conductance-to-susceptance ratio")
        p.add_argument("--tabulated", action="store_true",
                       help="use tabulated line conductances")
        if gammas:
            p.add_argument("--gammas", required=True,
                           help="comma list or start:stop:step range")
        p.add_argument("--candidates", default=None,
                       help="comma list of bus ids, or 'all'")
        p.add_argument("--min-injection", type=float, default=0.0,
                       help="candidate threshold, p.u.")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--max-iter", type=int, default=50)
        p.add_argument("--out", default=None, help="write output to a file")

    p_rank = sub.add_parser("rank", help="score slack candidates")
    common(p_rank)
    p_rank.add_argument("--validate", action="store_true",
                        help="also run the exact Newton-Raphson solve per candidate")
    p_rank.set_defaults(func=cmd_rank)

    p_sweep = sub.add_parser("sweep", help="participation factors vs gamma")
    common(p_sweep, gammas=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_check = sub.add_parser("check", help="run identity self-tests")
    common(p_check)
    p_check.set_defaults(func=cmd_check)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors; remap to 64
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (OSError, SlackoptError) as exc:
        if isinstance(exc, NoConvergence):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
