"""Smoothness and strong convexity constants of f relative to conv(A).

Closed forms for quadratics, generic bounds from classical constants, a
certified lower bound on the quadratic functional growth constant, and
sampling estimators for all three.
"""
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from itertools import combinations_with_replacement

import numpy as np

from .errors import (DegeneratePolytopeError, InfeasiblePointError, InputError,
                     InsufficientDataError, NoDataError, StaleMinimizerError)
from .geometry import (LiftedAtoms, diameter, facial_distance_details, local_facial_distance,
                       restricted_operator_norm, unique_columns)
from .linalg import sym_eigen
from .lp import LinearProgram, convex_weights, fiber_distance, solve_lp

OPTIMALITY_TOL = 1e-7
SHARD_SIZE = 500
FIBER_ZERO = 1e-12


@dataclass
class ConditionReport:
    diam: float
    phi: float
    L_rel: float
    mu_rel: float
    mu_star_lb: float
    kappa_rel: float
    provenance: str  # closed_form_quadratic | bound_general | estimated
    L_rel_l2: float = math.nan

    def to_dict(self):
        return {k: _json_float(v) for k, v in asdict(self).items()}


def _json_float(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return v


def _matrix(atoms):
    return np.asarray(getattr(atoms, "A", atoms), dtype=float)


def _centered_rank(M, rtol=1e-10):
    """Rank of ``M P`` with ``P`` the projector onto ``sum(w) = 0``."""
    n = M.shape[1]
    P = np.eye(n) - np.full((n, n), 1.0 / n)
    G = P @ M.T @ M @ P
    lam = sym_eigen(0.5 * (G + G.T)).eigenvalues
    if lam[0] <= 0:
        return 0
    return int(np.sum(lam > rtol * lam[0]))


def quadratic_relative_constants(obj, atoms, u_star=None):
    """Relative constants of ``1/2 <Qu,u> + <b,u>`` from the geometry of ``Q^{1/2} A``.

    ``L_rel = diam^2 / 4`` and ``mu_rel = Phi^2 / 4`` with both taken of
    ``Q^{1/2} A``. For singular ``Q`` the smoothness value stays exact; the
    strong convexity constant is zero when ``Q^{1/2}`` collapses a direction
    of conv(A), and ``Phi^2/4`` otherwise, and the provenance reads
    ``bound_general``.
    """
    A = _matrix(atoms)
    if obj.dim != A.shape[0]:
        raise InputError(f"Q is {obj.dim}x{obj.dim} but atoms live in R^{A.shape[0]}")
    B = obj.sqrtQ @ A
    if len(unique_columns(B)[0]) < 2:
        raise DegeneratePolytopeError("Q^{1/2} A has fewer than two distinct columns")
    diam = diameter(B)
    phi = facial_distance_details(B).value
    L_rel = diam ** 2 / 4.0
    if obj.is_positive_definite():
        provenance = "closed_form_quadratic"
        mu_rel = phi ** 2 / 4.0
    else:
        provenance = "bound_general"
        mu_rel = phi ** 2 / 4.0 if _centered_rank(B) == _centered_rank(A) else 0.0
    kappa = diam ** 2 / phi ** 2 if mu_rel > 0 else math.inf
    if u_star is not None:
        mu_star = mu_star_lower_bound_quadratic(obj, A, u_star)
    else:
        mu_star = mu_rel
    L2 = restricted_operator_norm(B, "l2") ** 2
    return ConditionReport(diam, phi, L_rel, mu_rel, mu_star, kappa, provenance, L2)


def general_relative_bounds(obj, atoms, domain_norm="l1"):
    """Bounds on the relative constants from classical ``L_f`` and ``mu_f``."""
    if obj.L_f is None or obj.mu_f is None:
        raise InsufficientDataError("objective must carry classical L_f and mu_f")
    A = _matrix(atoms)
    diam = diameter(A)
    phi = facial_distance_details(A).value
    if domain_norm == "l1":
        L_ub = obj.L_f * diam ** 2 / 4.0
        mu_lb = obj.mu_f * phi ** 2 / 4.0
        kappa = (obj.L_f / obj.mu_f) * diam ** 2 / phi ** 2 if obj.mu_f > 0 else math.inf
    elif domain_norm == "l2":
        # max_i ||e_i||_2 = 1
        L_ub = obj.L_f * restricted_operator_norm(A, "l2") ** 2
        mu_lb = obj.mu_f * phi ** 2 / 4.0
        kappa = L_ub / mu_lb if mu_lb > 0 else math.inf
    else:
        raise InputError(f"unsupported domain norm {domain_norm!r}")
    L2 = obj.L_f * restricted_operator_norm(A, "l2") ** 2
    return ConditionReport(diam, phi, L_ub, mu_lb, mu_lb, kappa, "bound_general", L2)


def check_minimizer(obj, atoms, u_star, tol=OPTIMALITY_TOL):
    A = _matrix(atoms)
    u_star = np.asarray(u_star, dtype=float)
    if convex_weights(A, u_star) is None:
        raise InfeasiblePointError("u_star is not in conv(A)")
    g = obj.grad(u_star)
    worst = float((A.T @ g).min() - g @ u_star)
    if worst < -tol:
        raise StaleMinimizerError(
            f"u_star fails first-order optimality: min_i <grad, a_i - u*> = {worst:.3e}")
    return worst


def mu_star_lower_bound_quadratic(obj, atoms, u_star):
    """Certified lower bound ``Phi_v(Abar)^2 / 4`` on the functional growth constant.

    ``Abar = [Q^{1/2} A; 2 b^T A]`` and ``v = 2 Q^{1/2} u_star``; any
    minimizer gives the same ``v``.
    """
    A = _matrix(atoms)
    check_minimizer(obj, A, u_star)
    lifted = LiftedAtoms.from_quadratic(obj, A, u_star)
    return local_facial_distance(lifted) ** 2 / 4.0


def _threads():
    try:
        return max(1, int(os.environ.get("POLYCOND_THREADS", "1")))
    except ValueError:
        return 1


def _shard_quotients(obj, A, count, seq):
    rng = np.random.default_rng(seq)
    n = A.shape[1]
    out = []
    for _ in range(count):
        x = rng.dirichlet(np.ones(n))
        y = rng.dirichlet(np.ones(n))
        q = _quotient(obj, A, x, y)
        if q is not None:
            out.append(q)
    return out


def _quotient(obj, A, x, y):
    u = A @ y
    d = fiber_distance(x, u, A)
    if d <= FIBER_ZERO:
        return None
    return 2.0 * obj.bregman(u, A @ x) / d ** 2


def relative_quotients(obj, atoms, samples, seed=0, include_vertex_pairs=True, threads=None):
    """Bregman-gap quotients ``2 D_f(u, Ax) / dist_1(x, Z(u))^2`` on sampled pairs.

    Pairs ``(x, y)`` are drawn uniformly from the simplex with ``u = A y``,
    in shards of ``SHARD_SIZE`` seeded from ``SeedSequence(seed).spawn``, so
    the output does not depend on the thread count. All ordered vertex pairs
    are prepended when ``include_vertex_pairs`` is set.
    """
    A = _matrix(atoms)
    n = A.shape[1]
    out = []
    if include_vertex_pairs:
        I = np.eye(n)
        for i in range(n):
            for j in range(n):
                if i != j:
                    q = _quotient(obj, A, I[i], I[j])
                    if q is not None:
                        out.append(q)
    sizes = [SHARD_SIZE] * (samples // SHARD_SIZE)
    if samples % SHARD_SIZE:
        sizes.append(samples % SHARD_SIZE)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    workers = threads or _threads()
    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda a: _shard_quotients(obj, A, *a), zip(sizes, seqs)))
    else:
        parts = [_shard_quotients(obj, A, c, s) for c, s in zip(sizes, seqs)]
    for p in parts:
        out.extend(p)
    return np.array(out)


@dataclass
class RelativeEstimate:
    L_est: float
    mu_est: float
    count: int
    provenance: str = "estimated"


def estimate_relative_constants(obj, atoms, samples, seed=0, include_vertex_pairs=True):
    """Sampled max and min of the relative quotient.

    ``L_est`` is a lower estimate of the relative smoothness constant and
    ``mu_est`` an upper estimate of the relative strong convexity constant.
    """
    if samples < 1:
        raise InputError("samples must be >= 1")
    q = relative_quotients(obj, atoms, samples, seed, include_vertex_pairs)
    if q.size == 0:
        raise NoDataError("every sampled pair fell inside its fiber")
    return RelativeEstimate(float(q.max()), float(q.min()), int(q.size))


def simplex_grid(n, step):
    N = int(round(1.0 / step))
    if not math.isclose(N * step, 1.0, rel_tol=1e-9):
        raise InputError("grid step must divide 1")
    pts = []
    for combo in combinations_with_replacement(range(n), N):
        x = np.bincount(combo, minlength=n) / N
        pts.append(x)
    return pts


def _dist_to_hull(x, Z):
    """l1 distance from ``x`` to ``conv`` of the columns of ``Z``."""
    n, r = Z.shape
    if r == 1:
        return float(np.sum(np.abs(x - Z[:, 0])))
    E = np.zeros((n + 1, r + 2 * n))
    E[:n, :r] = Z
    E[:n, r:r + n] = np.eye(n)
    E[:n, r + n:] = -np.eye(n)
    E[n, :r] = 1.0
    cost = np.concatenate([np.zeros(r), np.ones(2 * n)])
    sol = solve_lp(LinearProgram(cost, E, np.concatenate([x, [1.0]])))
    return sol.value


@dataclass
class MuStarEstimate:
    value: float
    argmin: np.ndarray
    count: int
    provenance: str = "estimated"  # an upper estimate of the infimum


def estimate_mu_star(obj, atoms, f_star, Z_star_basis=None, grid_step=None, samples=None,
                     seed=0, fiber=None):
    """Smallest ``2 (f(Ax) - f*) / dist_1(x, Z*)^2`` over a grid or sample of the simplex.

    ``Z*`` is either ``conv(Z_star_basis)`` or, with ``fiber=(M, t)``, the
    set ``{z in simplex : M z = t}``. Points of ``Z*`` itself are skipped.
    """
    A = _matrix(atoms)
    n = A.shape[1]
    if fiber is not None:
        M, t = np.asarray(fiber[0], dtype=float), np.asarray(fiber[1], dtype=float)
        if M.shape[1] != n:
            raise InputError(f"fiber matrix must have {n} columns")
        dist = lambda x: fiber_distance(x, t, M)
    else:
        if Z_star_basis is None or len(Z_star_basis) == 0:
            raise NoDataError("Z_star_basis is empty")
        Z = np.array([np.asarray(z, dtype=float) for z in Z_star_basis]).T
        if Z.shape[0] != n:
            raise InputError(f"Z_star_basis points must have {n} entries")
        dist = lambda x: _dist_to_hull(x, Z)
    if grid_step is not None:
        points = simplex_grid(n, grid_step)
    else:
        rng = np.random.default_rng(seed)
        points = list(np.eye(n)) + [rng.dirichlet(np.ones(n)) for _ in range(samples or 1000)]
    best, arg, count = math.inf, None, 0
    for x in points:
        d = dist(x)
        if d <= FIBER_ZERO:
            continue
        q = 2.0 * (obj.value(A @ x) - f_star) / d ** 2
        count += 1
        if q < best:
            best, arg = q, x
    if count == 0:
        raise NoDataError("no sample point outside Z*")
    return MuStarEstimate(best, arg, count)
