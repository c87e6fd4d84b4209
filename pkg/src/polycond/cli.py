"""Command line interface: ``polycond phi|constants|solve|verify|estimate|campaign``.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 numerical failure.
"""
import argparse
import json
import sys

import numpy as np

from . import __version__
from .conditioning import estimate_mu_star, estimate_relative_constants
from .errors import InputError, NoDataError, NumericalError
from .experiments import (condition_report, rate_constants, reference_minimum,
                          run_campaign)
from .geometry import LiftedAtoms, diameter, facial_distance_details
from .problem import builtin_problem, load_problem
from .solvers import SolveConfig, minimize_quadratic, read_trace_csv, solve, verify_linear_rate

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
ALGO_NAMES = {"fw-away": "fw_away", "pg": "proj_grad"}


def _problem(args):
    if args.problem and args.builtin:
        raise InputError("give either --problem or --builtin, not both")
    if args.problem:
        return load_problem(args.problem)
    if args.builtin:
        return builtin_problem(args.builtin)
    raise InputError("one of --problem FILE or --builtin NAME is required")


def _emit_json(obj, out):
    text = json.dumps(obj, indent=1, sort_keys=False) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _list(a):
    return None if a is None else np.asarray(a, dtype=float).tolist()


def cmd_phi(args):
    spec = _problem(args)
    fd = facial_distance_details(spec.A, spec.range_norm)
    _emit_json({
        "problem": spec.name,
        "diam": diameter(spec.A, spec.range_norm),
        "phi": fd.value,
        "face_count": fd.face_count,
        "minimizing_face": fd.face.to_dict(),
        "witness_y": _list(fd.pair.witness_y),
        "witness_z": _list(fd.pair.witness_z),
    }, args.out)
    return EXIT_OK


def cmd_constants(args):
    spec = _problem(args)
    u_star = None
    if spec.is_quadratic:
        _, u_star = reference_minimum(spec)
    report = condition_report(spec, u_star)
    out = {"problem": spec.name, **report.to_dict()}
    if u_star is not None:
        out["u_star"] = _list(u_star)
    _emit_json(out, args.out)
    return EXIT_OK


def _solve_config(args, report):
    algo = ALGO_NAMES[args.algo]
    L, _ = rate_constants(report, algo)
    kw = dict(algorithm=algo, max_iters=args.iters, target_gap=args.tol or 0.0,
              x0=args.x0, seed=args.seed or 0)
    if args.line_search == "rate":
        kw["L"] = L
    elif args.line_search == "exact":
        kw["exact_line_search"] = True
        if algo == "proj_grad":
            kw["L"] = L
    else:
        kw["L0"] = L / 8.0
    return SolveConfig(**kw)


def cmd_solve(args):
    spec = _problem(args)
    u_star = reference_minimum(spec)[1] if spec.is_quadratic else None
    report = condition_report(spec, u_star)
    trace = solve(spec.objective(), spec.A, _solve_config(args, report))
    if args.out:
        with open(args.out, "w") as fh:
            trace.write_csv(fh)
    else:
        trace.write_csv(sys.stdout)
    return EXIT_OK


def cmd_verify(args):
    spec = _problem(args)
    if not args.trace:
        raise InputError("--trace FILE is required")
    algo = ALGO_NAMES[args.algo]
    try:
        with open(args.trace) as fh:
            trace = read_trace_csv(fh, algo)
    except OSError as exc:
        raise InputError(f"{args.trace}: {exc.strerror}") from None
    f_star, u_star = reference_minimum(spec)
    report = condition_report(spec, u_star if spec.is_quadratic else None)
    L, mu = rate_constants(report, algo)
    trace.L_mode, trace.L_given = "given", L
    verdict = verify_linear_rate(trace, f_star, L, mu, algo, slack=args.tol or 1e-12)
    if args.out:
        with open(args.out, "w") as fh:
            verdict.write_csv(fh)
    else:
        verdict.write_csv(sys.stdout)
    return EXIT_OK if verdict.ok else EXIT_VERIFY


def cmd_estimate(args):
    spec = _problem(args)
    obj = spec.objective()
    samples = args.samples if args.samples is not None else 1000
    est = estimate_relative_constants(obj, spec.A, samples, args.seed or 0)
    out = {"problem": spec.name, "L_est": est.L_est, "mu_est": est.mu_est,
           "quotients": est.count, "samples": samples, "seed": args.seed or 0,
           "provenance": est.provenance}
    if spec.is_quadratic:
        f_star, u_star = reference_minimum(spec)
        report = condition_report(spec, u_star)
        out["closed_form"] = report.to_dict()
        if spec.z_star_basis is not None:
            basis = spec.z_star_basis
            fiber = None
        else:
            x_star = minimize_quadratic(obj, spec.A).x
            lifted = LiftedAtoms.from_quadratic(obj, spec.A, u_star)
            basis, fiber = None, (lifted.Abar, lifted.Abar @ x_star)
        grid = args.grid_step if spec.n <= 3 else None
        try:
            mu = estimate_mu_star(obj, spec.A, f_star, basis, grid_step=grid,
                                  samples=samples, seed=args.seed or 0, fiber=fiber)
            out["mu_star_est"] = mu.value
            out["mu_star_points"] = mu.count
            out["mu_star_grid_step"] = grid
        except NoDataError as exc:
            out["mu_star_est"] = None
            out["mu_star_note"] = str(exc)
    _emit_json(out, args.out)
    return EXIT_OK


def cmd_campaign(args):
    if not args.builtin or "random_quadratic" not in args.builtin:
        raise InputError("campaign expects --builtin random_quadratic(m,n,SEED,cond)")
    base = builtin_problem(args.builtin)
    m, n = base.m, base.n
    cond = args.cond
    specs = [builtin_problem(f"random_quadratic({m},{n},{s},{cond})")
             for s in range(args.seed or 0, (args.seed or 0) + args.cells)]
    results = run_campaign(specs, args.iters, args.out)
    ok = all(v.ok for r in results for v in r.verdicts.values())
    _emit_json([r.summary() for r in results], None)
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser():
    p = argparse.ArgumentParser(prog="polycond",
                                description="Condition numbers relative to a polytope.")
    p.add_argument("--version", action="version", version=f"polycond {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--problem", metavar="FILE")
        sp.add_argument("--builtin", metavar="NAME",
                        help="simplex(m), l1ball(m), random_quadratic(m,n,seed,cond), example2")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", metavar="FILE")
        sp.add_argument("--tol", type=float, default=None)

    sp = sub.add_parser("phi", help="diameter and facial distance of conv(A)")
    common(sp)
    sp.set_defaults(func=cmd_phi)

    sp = sub.add_parser("constants", help="relative smoothness / strong convexity report")
    common(sp)
    sp.set_defaults(func=cmd_constants)

    for name, func in (("solve", cmd_solve), ("verify", cmd_verify)):
        sp = sub.add_parser(name)
        common(sp)
        sp.add_argument("--algo", choices=sorted(ALGO_NAMES), default="fw-away")
        sp.set_defaults(func=func)
        if name == "solve":
            sp.add_argument("--iters", type=int, default=500)
            sp.add_argument("--x0", default="vertex:0")
            sp.add_argument("--line-search", choices=("rate", "exact", "backtrack"),
                            default="rate")
        else:
            sp.add_argument("--trace", metavar="FILE")

    sp = sub.add_parser("estimate", help="sampling estimates of the relative constants")
    common(sp)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--grid-step", type=float, default=0.01)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("campaign", help="rate verification over random quadratic cells")
    common(sp)
    sp.add_argument("--cells", type=int, default=10)
    sp.add_argument("--iters", type=int, default=500)
    sp.add_argument("--cond", type=float, default=10.0)
    sp.set_defaults(func=cmd_campaign)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"polycond: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"polycond: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
