"""Experiment orchestration: constants, solves and rate verdicts per problem cell."""
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .conditioning import general_relative_bounds, quadratic_relative_constants
from .errors import DataError
from .solvers import SolveConfig, minimize_quadratic, solve, verify_linear_rate

ALGOS = ("fw_away", "proj_grad")


@dataclass
class ExperimentResult:
    problem: str
    report: object
    f_star: float
    u_star: np.ndarray | None
    traces: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    seed: int = 0

    def summary(self):
        return {
            "problem": self.problem,
            "seed": self.seed,
            "report": self.report.to_dict(),
            "f_star": self.f_star,
            "u_star": None if self.u_star is None else self.u_star.tolist(),
            "verdicts": {a: {"ok": v.ok, "rate": v.rate, "first_failure": v.first_failure,
                             "iterations": len(v.lhs) - 1}
                         for a, v in self.verdicts.items()},
            "timings": self.timings,
        }


def reference_minimum(spec):
    """``(f_star, u_star)`` from the problem file or a high-accuracy solve."""
    obj = spec.objective()
    if spec.f_star is not None and spec.u_star is not None:
        return spec.f_star, np.asarray(spec.u_star)
    if not spec.is_quadratic:
        raise DataError("non-quadratic problems must supply f_star and u_star")
    res = minimize_quadratic(obj, spec.A)
    f_star = spec.f_star if spec.f_star is not None else res.value
    u_star = np.asarray(spec.u_star) if spec.u_star is not None else res.u
    return f_star, u_star


def condition_report(spec, u_star=None):
    obj = spec.objective()
    if spec.is_quadratic:
        return quadratic_relative_constants(obj, spec.A, u_star=u_star)
    return general_relative_bounds(obj, spec.A, spec.domain_norm)


def rate_constants(report, algorithm):
    """Step constant and growth lower bound used by each algorithm's rate.

    Frank-Wolfe measures distances in l1 on the weights; projected gradient
    in l2, so it needs the l2 smoothness constant. The l1 growth bound is
    also a valid l2 growth bound.
    """
    L = report.L_rel if algorithm == "fw_away" else report.L_rel_l2
    return L, report.mu_star_lb


def run_cell(spec, iters=500, algos=ALGOS, seed=0, x0="vertex:0"):
    t0 = time.perf_counter()
    f_star, u_star = reference_minimum(spec)
    report = condition_report(spec, u_star)
    result = ExperimentResult(spec.name, report, f_star, u_star, seed=seed)
    result.timings["constants"] = time.perf_counter() - t0
    obj = spec.objective()
    for algo in algos:
        t0 = time.perf_counter()
        L, mu = rate_constants(report, algo)
        cfg = SolveConfig(algorithm=algo, max_iters=iters, L=L, x0=x0, seed=seed)
        trace = solve(obj, spec.A, cfg)
        result.traces[algo] = trace
        result.verdicts[algo] = verify_linear_rate(trace, f_star, L, mu, algo)
        result.timings[algo] = time.perf_counter() - t0
    return result


def _threads():
    try:
        return max(1, int(os.environ.get("POLYCOND_THREADS", "1")))
    except ValueError:
        return 1


def run_campaign(specs, iters=500, out_dir=None, threads=None):
    """Run independent cells, optionally writing ``<out_dir>/<cell>.json`` and trace CSVs."""
    workers = threads or _threads()

    def cell(spec):
        res = run_cell(spec, iters)
        if out_dir is not None:
            key = _cell_key(spec.name)
            with open(os.path.join(out_dir, f"{key}.json"), "w") as fh:
                json.dump(res.summary(), fh, indent=1)
            for algo, trace in res.traces.items():
                with open(os.path.join(out_dir, f"{key}.{algo}.csv"), "w") as fh:
                    trace.write_csv(fh)
        return res

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(cell, specs))
    return [cell(s) for s in specs]


def _cell_key(name):
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name).strip("_")
