"""Command line entry point: ``invcg <subcommand> ...``.

Exit codes: 0 success, 2 parameter error, 3 solver failure, 4 property failure.
"""

import argparse
import sys

import numpy as np

from . import experiments as ex
from .errors import IntegrationFailure, ParameterError
from .galerkin import DEFAULT_QUAD_POINTS, NewtonConfig
from .invariance import AugmentedForm, SmoothCurve, admissible_samples, invariance_defect
from .schemes import get_problem

EXIT_OK, EXIT_PARAM, EXIT_SOLVER, EXIT_PROPERTY = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    # raise instead of exiting so main() owns the exit code
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ParameterError(message)


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParameterError(f"expected a comma separated list of numbers, got {text!r}")


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParameterError(f"expected a comma separated list of integers, got {text!r}")


def _l2_quad(text):
    return ex.L2_MATCHED if text == ex.L2_MATCHED else int(text)


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _newton(args):
    return NewtonConfig(tolerance=args.newton_tol) if args.newton_tol is not None else NewtonConfig()


def _common(p, scheme=True):
    p.add_argument("--problem", required=True)
    if scheme:
        p.add_argument("--scheme", default="standard", choices=ex.SCHEMES)
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--t-start", type=float, default=None)
    p.add_argument("--quad", type=int, default=DEFAULT_QUAD_POINTS)
    p.add_argument("--l2-quad", default=str(DEFAULT_QUAD_POINTS),
                   help="L2 points per element, or 'matched'")
    p.add_argument("--newton-tol", type=float, default=None)
    p.add_argument("--guess", default="constant", choices=("constant", "extrapolate"))
    p.add_argument("--out", default=None, help="CSV path ('-' or omitted: stdout)")


def build_parser():
    parser = _Parser(prog="invcg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="one (problem, scheme, q, tau) cell")
    _common(p)
    p.add_argument("--q", type=int, default=0)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("convergence", help="tau-halving study with EOC")
    _common(p)
    p.add_argument("--q", type=_ints, default=[0])
    p.add_argument("--tau0", type=float, required=True)
    p.add_argument("--levels", type=int, default=4)

    p = sub.add_parser("sweep", help="solvability over step sizes")
    p.add_argument("--problem", default="noproject")
    p.add_argument("--taus", type=_floats, default=list(ex.SWEEP_TAUS))
    p.add_argument("--schemes", default="standard,invariant")
    p.add_argument("--q", type=int, default=0)
    p.add_argument("--t-end", type=float, default=100.0)
    p.add_argument("--guess", default="constant", choices=("constant", "extrapolate"))
    p.add_argument("--newton-tol", type=float, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("invariance", help="worst invariance defect over random group elements")
    p.add_argument("--problem", required=True)
    p.add_argument("--scheme", default="invariant", choices=ex.SCHEMES)
    p.add_argument("--q", type=int, default=0)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius", type=float, default=0.3)

    sub.add_parser("properties", help="run the property suite")

    p = sub.add_parser("series", help="pointwise error series (figure data)")
    _common(p)
    p.add_argument("--q", type=int, default=0)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--samples", type=int, default=10, help="samples per element")
    return parser


def _config(args, q, tau=None):
    return ex.RunConfig(args.problem, args.scheme, q, tau=tau, t_end=args.t_end, t_start=args.t_start,
                        quad=args.quad, l2_quad=_l2_quad(args.l2_quad), newton=_newton(args),
                        guess=args.guess, seed=getattr(args, "seed", 0), out=args.out)


def cmd_run(args):
    cfg = _config(args, args.q, args.tau)
    P = cfg.validate()
    n = ex._mesh(P, cfg, args.tau).n_elements
    try:
        _, met = ex.run_metrics(cfg, P=P)
    except IntegrationFailure as exc:
        row = ex.ReportRow(P.name, cfg.scheme, cfg.q, cfg.tau, n, None, None)
        _write(args.out, ex.emit_report(ex.ExperimentReport([row])))
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    row = ex.ReportRow(P.name, cfg.scheme, cfg.q, cfg.tau, n, met.max_nodal_error, met.l2_error)
    _write(args.out, ex.emit_report(ex.ExperimentReport([row])))
    return EXIT_OK


def cmd_convergence(args):
    report = ex.convergence_study(args.problem, args.scheme, args.q, args.tau0, args.levels, t_end=args.t_end,
                                  l2_quad=_l2_quad(args.l2_quad), quad=args.quad, newton=_newton(args),
                                  guess=args.guess, t_start=args.t_start)
    _write(args.out, ex.emit_report(report))
    return EXIT_SOLVER if any(r.failed for r in report.rows) else EXIT_OK


def cmd_sweep(args):
    rows = ex.solvability_sweep(args.problem, tuple(s for s in args.schemes.split(",") if s), args.taus,
                                t_end=args.t_end, q=args.q, guess=args.guess, newton=_newton(args))
    _write(args.out, ex.emit_sweep(rows))
    return EXIT_OK


def _defect_curve(P):
    from .properties import _CURVES, generic_curve
    if P.name in _CURVES:
        return generic_curve(P.name)
    lo = P.t_start
    return SmoothCurve.from_problem(P, (lo, lo + 0.5))


def cmd_invariance(args):
    P = get_problem(args.problem)
    if args.samples < 1:
        raise ParameterError("--samples must be positive")
    if args.scheme == "augmented":
        if P.frame is None:
            raise ParameterError(f"problem {args.problem!r} has no frame")
        form = AugmentedForm(P.form("standard", args.q), P.action, P.frame.cross_section, P.contact)
    else:
        form = P.form(args.scheme, args.q)
    curve = _defect_curve(P)
    gs = admissible_samples(P.action, np.random.default_rng(args.seed), args.samples, radius=args.radius)
    d = invariance_defect(form, P.action, curve, curve.domain, gs, contact=P.contact)
    print(f"{P.name} {args.scheme} q={args.q}: invariance defect {d:.3e} over {args.samples} samples")
    return EXIT_OK


def cmd_properties(args):
    from .properties import run_all
    results = run_all()
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_PROPERTY


def cmd_series(args):
    cfg = _config(args, args.q, args.tau)
    P = cfg.validate()
    try:
        traj = ex.run_trajectory(cfg, P=P)
    except IntegrationFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    _write(args.out, ex.emit_series(ex.pointwise_error_series(traj, P.exact, args.samples)))
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "convergence": cmd_convergence,
    "sweep": cmd_sweep,
    "invariance": cmd_invariance,
    "properties": cmd_properties,
    "series": cmd_series,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except IntegrationFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
