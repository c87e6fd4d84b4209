"""Dense two-phase primal simplex, simplex projection and the l1 fiber distance."""
from dataclasses import dataclass, field

import numpy as np

from .errors import CyclingError, InfeasiblePointError, InputError

FEAS_TOL = 1e-9
OPT_TOL = 1e-11
PIVOT_TOL = 1e-11


@dataclass(frozen=True)
class LinearProgram:
    """``min c^T x  s.t.  A x = b, x >= 0``."""

    objective: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float)
        A = np.asarray(self.eq_matrix, dtype=float)
        b = np.asarray(self.eq_rhs, dtype=float)
        if A.ndim != 2:
            raise InputError("eq_matrix must be 2-D")
        if A.shape[0] != b.shape[0] or A.shape[1] != c.shape[0]:
            raise InputError(
                f"inconsistent LP shapes: A {A.shape}, b {b.shape}, c {c.shape}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise InputError("LP data must be finite")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "eq_matrix", A)
        object.__setattr__(self, "eq_rhs", b)


@dataclass
class LPSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    point: np.ndarray | None
    value: float
    basis: tuple = ()
    reduced_costs: np.ndarray | None = field(default=None, repr=False)
    residual: float = 0.0


class _Tableau:
    """Dense tableau ``[A | b]`` over a cost row ``[reduced costs | -z]``."""

    def __init__(self, T, basis):
        self.T = T
        self.basis = list(basis)
        rows, cols = T.shape
        self.bland_after = 3 * (rows + cols)
        self.degenerate = 0
        self.cap = 50 * (rows + cols) + 500
        self.pivots = 0

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, j] = 0.0
        T[r, j] = 1.0
        self.basis[r] = j

    def run(self, ncols):
        """Iterate to optimality over the first ``ncols`` columns.

        Returns ``"optimal"`` or ``"unbounded"``.
        """
        T = self.T
        m = T.shape[0] - 1
        while True:
            rc = T[m, :ncols]
            if self.degenerate > self.bland_after:
                cand = np.flatnonzero(rc < -OPT_TOL)
                if cand.size == 0:
                    return "optimal"
                j = int(cand[0])
            else:
                j = int(np.argmin(rc))
                if rc[j] >= -OPT_TOL:
                    return "optimal"
            colj = T[:m, j]
            pos = np.flatnonzero(colj > PIVOT_TOL)
            if pos.size == 0:
                return "unbounded"
            ratios = T[pos, -1] / colj[pos]
            best = ratios.min()
            ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))
            if best <= FEAS_TOL:
                self.degenerate += 1
            self.pivots += 1
            if self.pivots > self.cap:
                raise CyclingError(f"simplex exceeded {self.cap} pivots")
            self.pivot(r, j)


def solve_lp(p):
    """Solve a standard-form :class:`LinearProgram` by the two-phase simplex.

    Dantzig pricing is used until the count of degenerate pivots exceeds
    ``3 * (rows + cols)``; after that Bland's rule guarantees termination.
    """
    A = p.eq_matrix.copy()
    b = p.eq_rhs.copy()
    c = p.objective
    m, n = A.shape
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    if m == 0:
        if np.any(c < -OPT_TOL):
            return LPSolution("unbounded", None, -np.inf)
        return LPSolution("optimal", np.zeros(n), 0.0, (), c.copy(), 0.0)

    # phase 1: artificial basis
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    tab = _Tableau(T, range(n, n + m))
    tab.run(n + m)
    if -tab.T[m, -1] > FEAS_TOL:
        return LPSolution("infeasible", None, np.nan)

    # drive artificials out of the basis; drop redundant rows
    keep = []
    for r in range(m):
        if tab.basis[r] >= n:
            row = tab.T[r, :n]
            cand = np.flatnonzero(np.abs(row) > 1e-9)
            if cand.size == 0:
                continue
            j = int(cand[np.argmax(np.abs(row[cand]))])
            tab.pivot(r, j)
        keep.append(r)
    T2 = np.zeros((len(keep) + 1, n + 1))
    T2[:-1, :n] = tab.T[keep, :n]
    T2[:-1, -1] = tab.T[keep, -1]
    basis = [tab.basis[r] for r in keep]
    T2[-1, :n] = c
    for i, j in enumerate(basis):
        if c[j] != 0.0:
            T2[-1] -= c[j] * T2[i]
    tab2 = _Tableau(T2, basis)
    tab2.degenerate = tab.degenerate
    tab2.pivots = tab.pivots
    status = tab2.run(n)
    if status == "unbounded":
        return LPSolution("unbounded", None, -np.inf, tuple(tab2.basis))

    x = np.zeros(n)
    for i, j in enumerate(tab2.basis):
        x[j] = max(tab2.T[i, -1], 0.0)
    residual = float(np.max(np.abs(p.eq_matrix @ x - p.eq_rhs))) if m else 0.0
    return LPSolution("optimal", x, float(c @ x), tuple(tab2.basis),
                      tab2.T[-1, :n].copy(), residual)


def project_simplex(y):
    """Euclidean projection of ``y`` onto the standard simplex.

    Sort-based threshold search: the result is ``max(y - theta, 0)`` with
    ``theta`` chosen so the entries sum to one.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    s = np.sort(y)[::-1]
    css = np.cumsum(s) - 1.0
    k = np.arange(1, n + 1)
    rho = np.flatnonzero(s - css / k > 0)[-1]
    theta = css[rho] / (rho + 1)
    x = np.maximum(y - theta, 0.0)
    # fold the final rounding error into the largest entry
    x[np.argmax(x)] += 1.0 - x.sum()
    return x


def fiber_distance(x, u, A):
    """l1 distance from ``x`` to the fiber ``{z in simplex : A z = u}``.

    Solved as an LP over ``(z, p, q) >= 0`` with ``x - z = p - q``,
    minimizing ``1^T (p + q)``.
    """
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    m, n = A.shape
    E = np.zeros((m + 1 + n, 3 * n))
    E[:m, :n] = A
    E[m, :n] = 1.0
    E[m + 1:, :n] = np.eye(n)
    E[m + 1:, n:2 * n] = np.eye(n)
    E[m + 1:, 2 * n:] = -np.eye(n)
    rhs = np.concatenate([u, [1.0], x])
    cost = np.concatenate([np.zeros(n), np.ones(2 * n)])
    sol = solve_lp(LinearProgram(cost, E, rhs))
    if sol.status != "optimal":
        raise InfeasiblePointError("u is not in conv(A) within 1e-9")
    return max(sol.value, 0.0)


def convex_weights(P, target):
    """Weights ``lam`` in the simplex with ``P lam = target``, or None."""
    P = np.asarray(P, dtype=float)
    k = P.shape[1]
    E = np.vstack([P, np.ones((1, k))])
    rhs = np.concatenate([np.asarray(target, dtype=float), [1.0]])
    sol = solve_lp(LinearProgram(np.zeros(k), E, rhs))
    return sol.point if sol.status == "optimal" else None
