"""Frank-Wolfe with away steps and projected gradient over conv(A).

Both solvers work on weights ``x`` in the standard simplex and record one
:class:`StepRecord` per iterate, including a terminal ``"stop"`` row, so a
trace of ``K`` steps has ``K + 1`` rows.
"""
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, InputError, LExplosionError
from .lp import project_simplex

SUPPORT_TOL = 1e-14
RENORM_TOL = 1e-13
MAX_DOUBLINGS = 60
TRACE_COLUMNS = ("k", "f", "gap", "step_type", "alpha", "alpha_max", "support_size")


@dataclass
class SolveConfig:
    """Solver settings.

    ``L`` set means the step rule uses that constant directly; ``L=None``
    switches to backtracking from ``L0``. ``x0`` is ``"vertex:i"``,
    ``"barycenter"`` or an explicit simplex point.
    """

    algorithm: str = "fw_away"
    max_iters: int = 1000
    L: float | None = None
    L0: float = 1.0
    growth: float = 2.0
    shrink: float = 0.5
    exact_line_search: bool = False
    target_gap: float = 0.0
    seed: int = 0
    x0: object = "vertex:0"

    def __post_init__(self):
        if self.algorithm not in ("fw_away", "proj_grad"):
            raise InputError(f"unknown algorithm {self.algorithm!r}")
        if self.max_iters < 1:
            raise InputError("max_iters must be >= 1")
        if self.target_gap < 0:
            raise InputError("target_gap must be >= 0")
        if not self.growth > 1 > self.shrink > 0:
            raise InputError("need growth > 1 > shrink > 0")
        if self.L is not None and not self.L > 0:
            raise InputError("given L must be positive")

    @property
    def L_mode(self):
        return "given" if self.L is not None else "backtracking"


@dataclass
class StepRecord:
    k: int
    f: float
    gap: float
    step_type: str  # regular | away | drop | stop
    alpha: float
    alpha_max: float
    support_size: int
    x: np.ndarray | None = field(default=None, repr=False)
    L: float = math.nan


@dataclass
class SolveTrace:
    algorithm: str
    records: list = field(default_factory=list)
    status: str = "max_iters"
    L_mode: str = "given"
    L_given: float | None = None
    vertex_start: bool = False

    def f_values(self):
        return np.array([r.f for r in self.records])

    @property
    def final(self):
        return self.records[-1]

    def counts(self):
        out = {"regular": 0, "away": 0, "drop": 0}
        for r in self.records:
            if r.step_type in out:
                out[r.step_type] += 1
        return out

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in self.records:
            w.writerow([r.k, _g17(r.f), _g17(r.gap), r.step_type, _g17(r.alpha),
                        _g17(r.alpha_max), r.support_size])


def _g17(v):
    return format(float(v), ".17g")


def read_trace_csv(fh, algorithm="fw_away"):
    reader = csv.DictReader(fh)
    if reader.fieldnames is None or tuple(reader.fieldnames) != TRACE_COLUMNS:
        raise InputError(f"trace CSV must have columns {','.join(TRACE_COLUMNS)}")
    records = []
    for i, row in enumerate(reader):
        try:
            records.append(StepRecord(int(row["k"]), float(row["f"]), float(row["gap"]),
                                      row["step_type"], float(row["alpha"]),
                                      float(row["alpha_max"]), int(row["support_size"])))
        except (TypeError, ValueError) as exc:
            raise InputError(f"trace CSV row {i + 2}: {exc}") from None
    if not records:
        raise InputError("trace CSV has no rows")
    trace = SolveTrace(algorithm, records, status="loaded")
    trace.vertex_start = records[0].support_size == 1
    return trace


def _matrix(atoms):
    return np.asarray(getattr(atoms, "A", atoms), dtype=float)


def initial_point(x0, n, seed=0):
    if isinstance(x0, str):
        if x0 == "barycenter":
            return np.full(n, 1.0 / n)
        if x0.startswith("vertex:"):
            i = int(x0.split(":", 1)[1])
            if not 0 <= i < n:
                raise InputError(f"vertex index {i} out of range for n={n}")
            x = np.zeros(n)
            x[i] = 1.0
            return x
        if x0 == "random_vertex":
            x = np.zeros(n)
            x[np.random.default_rng(seed).integers(n)] = 1.0
            return x
        raise InputError(f"unknown x0 {x0!r}")
    x = np.asarray(x0, dtype=float)
    if x.shape != (n,) or np.any(x < 0) or abs(x.sum() - 1.0) > 1e-12:
        raise InputError("x0 must be a point of the standard simplex")
    return x.copy()


def _clean(x):
    x[x < SUPPORT_TOL] = 0.0
    s = x.sum()
    if abs(s - 1.0) > RENORM_TOL:
        x /= s
    return x


def _fw_direction(obj, A, x):
    u = A @ x
    g = obj.grad(u)
    s = A.T @ g
    support = np.flatnonzero(x > 0)
    j = int(np.argmin(s))
    ell = int(support[np.argmax(s[support])])
    gu = float(g @ u)
    reg = s[j] - gu
    away = gu - s[ell]
    if reg < away or support.size == 1:
        return dict(kind="regular", idx=j, slope=float(reg), alpha_max=1.0,
                    v=A[:, j] - u, u=u, support=support.size)
    xl = x[ell]
    return dict(kind="away", idx=ell, slope=float(away), alpha_max=xl / (1.0 - xl),
                v=u - A[:, ell], u=u, support=support.size)


def _move(x, d, alpha, hit):
    i = d["idx"]
    if d["kind"] == "regular":
        if hit:
            xn = np.zeros_like(x)
            xn[i] = 1.0
            return xn
        xn = (1.0 - alpha) * x
        xn[i] += alpha
    else:
        xn = (1.0 + alpha) * x
        xn[i] -= alpha
        if hit:
            xn[i] = 0.0
    return _clean(xn)


def _step_type(d, hit):
    if d["kind"] == "regular":
        return "regular"
    return "drop" if hit and d["alpha_max"] < 1.0 else "away"


def fw_away_step(obj, atoms, x, L, exact_ls=False):
    """One iteration of Frank-Wolfe with away steps.

    Step size is ``min(alpha_max, -<grad, v> / (4 L))``, or with
    ``exact_ls`` the exact minimizer along ``v`` (quadratics only), clipped
    to ``[0, alpha_max]``. Returns ``(x_next, record)``.
    """
    A = _matrix(atoms)
    d = _fw_direction(obj, A, x)
    f = obj.value(d["u"])
    alpha, hit = _choose_alpha(obj, d, L, exact_ls)
    rec = StepRecord(0, f, -d["slope"], _step_type(d, hit), alpha, d["alpha_max"],
                     d["support"], x.copy(), L)
    return _move(x, d, alpha, hit), rec


def _choose_alpha(obj, d, L, exact_ls):
    slope, amax = d["slope"], d["alpha_max"]
    if slope >= 0:
        return 0.0, False
    if exact_ls:
        curv = obj.curvature(d["v"]) if hasattr(obj, "curvature") else None
        if curv is None:
            raise InputError("exact line search requires a quadratic objective")
        a = -slope / curv if curv > 0 else math.inf
    else:
        a = -slope / (4.0 * L)
    if a >= amax:
        return amax, True
    return a, False


def solve_fw_away(obj, atoms, cfg):
    A = _matrix(atoms)
    n = A.shape[1]
    x = initial_point(cfg.x0, n, cfg.seed)
    trace = SolveTrace("fw_away", L_mode=cfg.L_mode, L_given=cfg.L,
                       vertex_start=int(np.count_nonzero(x)) == 1)
    L_work = cfg.L if cfg.L is not None else cfg.L0
    for k in range(cfg.max_iters):
        d = _fw_direction(obj, A, x)
        f = obj.value(d["u"])
        gap = -d["slope"]
        if gap <= cfg.target_gap:
            trace.records.append(StepRecord(k, f, gap, "stop", 0.0, 0.0, d["support"], x.copy(), L_work))
            trace.status = "converged"
            return trace
        if cfg.L is None and not cfg.exact_line_search:
            L_work, alpha, hit, xn = _fw_backtrack(obj, A, x, d, f, L_work, cfg)
        else:
            alpha, hit = _choose_alpha(obj, d, L_work, cfg.exact_line_search)
            xn = _move(x, d, alpha, hit)
        trace.records.append(StepRecord(k, f, gap, _step_type(d, hit), alpha, d["alpha_max"],
                                        d["support"], x.copy(), L_work))
        if cfg.L is None and not cfg.exact_line_search:
            L_work = max(cfg.L0, L_work * cfg.shrink)
        if np.array_equal(xn, x):
            trace.records.append(_stop_record(obj, A, k + 1, x, L_work))
            trace.status = "stalled"
            return trace
        x = xn
    trace.records.append(_stop_record(obj, A, cfg.max_iters, x, L_work))
    return trace


def _stop_record(obj, A, k, x, L):
    d = _fw_direction(obj, A, x)
    return StepRecord(k, obj.value(d["u"]), -d["slope"], "stop", 0.0, 0.0, d["support"], x.copy(), L)


def _fw_backtrack(obj, A, x, d, f, L, cfg):
    for _ in range(MAX_DOUBLINGS + 1):
        alpha, hit = _choose_alpha(obj, d, L, False)
        xn = _move(x, d, alpha, hit)
        model = f + alpha * d["slope"] + 2.0 * L * alpha * alpha
        if obj.value(A @ xn) <= model + 1e-15 * max(1.0, abs(f)):
            return L, alpha, hit, xn
        L *= cfg.growth
    raise LExplosionError(f"backtracking exceeded {MAX_DOUBLINGS} doublings (L={L:.3e})")


def solve_proj_grad(obj, atoms, cfg):
    """Projected gradient on the weights: ``x+ = P_simplex(x - A^T grad / L)``."""
    A = _matrix(atoms)
    n = A.shape[1]
    x = initial_point(cfg.x0, n, cfg.seed)
    trace = SolveTrace("proj_grad", L_mode=cfg.L_mode, L_given=cfg.L,
                       vertex_start=int(np.count_nonzero(x)) == 1)
    L = cfg.L if cfg.L is not None else cfg.L0
    for k in range(cfg.max_iters):
        u = A @ x
        g = obj.grad(u)
        s = A.T @ g
        f = obj.value(u)
        gap = float(g @ u - s.min())
        supp = int(np.count_nonzero(x))
        if gap <= cfg.target_gap:
            trace.records.append(StepRecord(k, f, gap, "stop", 0.0, 0.0, supp, x.copy(), L))
            trace.status = "converged"
            return trace
        for doublings in range(MAX_DOUBLINGS + 1):
            xn = _clean(project_simplex(x - s / L))
            if cfg.L is not None:
                break
            dx = xn - x
            model = f + s @ dx + 0.5 * L * (dx @ dx)
            if obj.value(A @ xn) <= model + 1e-15 * max(1.0, abs(f)):
                break
            L *= cfg.growth
        else:
            raise LExplosionError(f"backtracking exceeded {MAX_DOUBLINGS} doublings (L={L:.3e})")
        trace.records.append(StepRecord(k, f, gap, "regular", 1.0 / L, 1.0 / L, supp, x.copy(), L))
        if cfg.L is None:
            L = max(cfg.L0, L * cfg.shrink)
        if np.array_equal(xn, x):
            trace.records.append(StepRecord(k + 1, f, gap, "stop", 0.0, 0.0, supp, x.copy(), L))
            trace.status = "stalled"
            return trace
        x = xn
    u = A @ x
    g = obj.grad(u)
    trace.records.append(StepRecord(cfg.max_iters, obj.value(u), float(g @ u - (A.T @ g).min()),
                                    "stop", 0.0, 0.0, int(np.count_nonzero(x)), x.copy(), L))
    return trace


def solve(obj, atoms, cfg):
    if cfg.algorithm == "fw_away":
        return solve_fw_away(obj, atoms, cfg)
    return solve_proj_grad(obj, atoms, cfg)


@dataclass
class QuadraticMinimum:
    x: np.ndarray
    u: np.ndarray
    value: float
    gap: float
    iterations: int


def _polish(obj, A, x):
    """Stationary point of the quadratic on the affine hull of the current face."""
    idx = np.flatnonzero(x > 0)
    k = idx.size
    if k < 2:
        return None
    AI = A[:, idx]
    H = AI.T @ obj.Q @ AI
    c = AI.T @ obj.b
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = H
    K[:k, k] = 1.0
    K[k, :k] = 1.0
    rhs = np.concatenate([-c, [1.0]])
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    y = sol[:k]
    if np.any(y < -1e-15) or not np.all(np.isfinite(y)):
        return None
    y = np.clip(y, 0.0, None)
    y /= y.sum()
    xn = np.zeros_like(x)
    xn[idx] = y
    return _clean(xn)


def minimize_quadratic(obj, atoms, tol=1e-14, max_iters=200000, x0=None, polish_every=25):
    """High-accuracy minimum of a convex quadratic over conv(A).

    Away-step Frank-Wolfe with exact line search, interleaved with a solve of
    the KKT system on the current support. Stops when the Frank-Wolfe gap is
    at most ``tol * max(1, |f|)``.
    """
    A = _matrix(atoms)
    n = A.shape[1]
    if x0 is None:
        vals = [obj.value(A[:, i]) for i in range(n)]
        x = np.zeros(n)
        x[int(np.argmin(vals))] = 1.0
    else:
        x = np.asarray(x0, dtype=float).copy()

    def fw_gap(x):
        u = A @ x
        g = obj.grad(u)
        return float(g @ u - (A.T @ g).min())

    it = 0
    for it in range(1, max_iters + 1):
        d = _fw_direction(obj, A, x)
        f = obj.value(d["u"])
        gap = fw_gap(x)
        if gap <= tol * max(1.0, abs(f)):
            break
        alpha, hit = _choose_alpha(obj, d, None, True)
        xn = _move(x, d, alpha, hit)
        if it % polish_every == 0 or np.array_equal(xn, x):
            xp = _polish(obj, A, xn)
            if xp is not None and obj.value(A @ xp) <= obj.value(A @ xn):
                xn = xp
        if np.array_equal(xn, x):
            break
        x = xn
    xp = _polish(obj, A, x)
    if xp is not None and obj.value(A @ xp) <= obj.value(A @ x) and fw_gap(xp) <= fw_gap(x):
        x = xp
    u = A @ x
    return QuadraticMinimum(x, u, obj.value(u), fw_gap(x), it)


@dataclass
class RateVerdict:
    algorithm: str
    rate: float
    exponents: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    holds: np.ndarray

    @property
    def ok(self):
        return bool(np.all(self.holds))

    @property
    def first_failure(self):
        bad = np.flatnonzero(~self.holds)
        return int(bad[0]) if bad.size else None

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("k", "primal_gap", "bound", "holds"))
        for k, (a, b, h) in enumerate(zip(self.lhs, self.rhs, self.holds)):
            w.writerow((k, _g17(a), _g17(b), int(h)))


def contraction_factor(L_rel, mu_star, algorithm):
    div = 16.0 if algorithm == "fw_away" else 4.0
    return 1.0 - min(mu_star / (div * L_rel), 0.5)


def verify_linear_rate(trace, f_star, L_rel, mu_star, algorithm=None, slack=1e-12):
    """Check the per-iterate linear rate bound along a trace.

    For ``fw_away`` the bound is ``(1 - min(mu/(16 L), 1/2))^(k/2)`` and needs
    a vertex start; for ``proj_grad`` it is ``(1 - min(mu/(4 L), 1/2))^k``.
    """
    algorithm = algorithm or trace.algorithm
    f = trace.f_values()
    if f_star > f.min() + 1e-12:
        raise DataError(f"f_star={f_star!r} exceeds the trace minimum {f.min()!r}")
    if not mu_star > 0 or not L_rel > 0:
        raise DataError("mu_star and L_rel must be positive")
    if algorithm == "fw_away" and not trace.vertex_start:
        raise DataError("fw_away rate certificate requires a vertex start")
    if trace.L_mode != "given":
        raise DataError("rate certificate requires L_mode = given")
    if trace.L_given is not None and not math.isclose(trace.L_given, L_rel, rel_tol=1e-12):
        raise DataError(f"trace used L={trace.L_given!r}, verification asked for {L_rel!r}")
    q = contraction_factor(L_rel, mu_star, algorithm)
    k = np.array([r.k for r in trace.records], dtype=float)
    expo = k / 2.0 if algorithm == "fw_away" else k
    lhs = f - f_star
    rhs = q ** expo * (f[0] - f_star)
    return RateVerdict(algorithm, q, expo, lhs, rhs, lhs <= rhs + slack)
