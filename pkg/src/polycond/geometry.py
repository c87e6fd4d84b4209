"""Geometry of conv(A): diameter, faces, facial distance and its local variant.

Atoms are the columns of ``A``. Faces are reported as sets of atom indices
(every atom lying on the face, duplicates included) together with a linear
functional certifying them.
"""
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DegeneratePolytopeError, InputError, SizeError
from .linalg import sym_eigen, vector_norm
from .lp import LinearProgram, convex_weights, solve_lp
from .objectives import QuadraticObjective
from .solvers import minimize_quadratic

ENUM_CAP = 16
DUP_TOL = 1e-12
FACE_EPS = 1e-9
DIST_GAP = 1e-12


@dataclass(frozen=True)
class AtomMatrix:
    A: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[1] < 1 or A.shape[0] < 1:
            raise InputError(f"atom matrix must be 2-D and non-empty, got {A.shape}")
        if not np.all(np.isfinite(A)):
            raise InputError("atom matrix has non-finite entries")
        if len(unique_columns(A)[0]) < 2:
            raise DegeneratePolytopeError("atom matrix needs at least two distinct columns")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]


def unique_columns(A, tol=DUP_TOL):
    """Representative column indices and, for each, the group of equal columns."""
    reps, groups = [], []
    for j in range(A.shape[1]):
        for g, r in enumerate(reps):
            if np.max(np.abs(A[:, j] - A[:, r])) <= tol:
                groups[g].append(j)
                break
        else:
            reps.append(j)
            groups.append([j])
    return reps, groups


@dataclass(frozen=True)
class FaceCertificate:
    """Atoms ``S`` with ``<c, a_i> = gamma`` on ``S`` and ``>= gamma + eps`` off it."""

    atom_indices: tuple
    c: np.ndarray
    gamma: float
    eps: float

    def verify(self, A, tol=1e-9):
        vals = np.asarray(A, dtype=float).T @ self.c
        S = list(self.atom_indices)
        rest = [j for j in range(vals.size) if j not in set(S)]
        on = np.all(np.abs(vals[S] - self.gamma) <= tol)
        off = np.all(vals[rest] >= self.gamma + self.eps - tol) if rest else True
        return bool(on and off and self.eps > 0 and np.max(np.abs(self.c)) <= 1 + 1e-12)

    def to_dict(self):
        return {"atom_indices": list(self.atom_indices), "c": self.c.tolist(),
                "gamma": self.gamma, "eps": self.eps}


@dataclass(frozen=True)
class LiftedAtoms:
    """Lifted atom matrix ``Abar`` ((m+1) x n) and the vector ``v`` of its quasi-norm."""

    Abar: np.ndarray
    v: np.ndarray
    provenance: str = "user"

    def __post_init__(self):
        Abar = np.array(self.Abar, dtype=float)
        v = np.array(self.v, dtype=float).reshape(-1)
        if Abar.ndim != 2 or Abar.shape[0] != v.size + 1:
            raise InputError(f"Abar shape {Abar.shape} incompatible with v of size {v.size}")
        if len(unique_columns(Abar)[0]) < 2:
            raise DegeneratePolytopeError("lifted atoms need at least two distinct columns")
        object.__setattr__(self, "Abar", Abar)
        object.__setattr__(self, "v", v)

    @classmethod
    def trivial(cls, A):
        A = np.asarray(getattr(A, "A", A), dtype=float)
        return cls(np.vstack([A, np.zeros((1, A.shape[1]))]), np.zeros(A.shape[0]), "trivial")

    @classmethod
    def from_quadratic(cls, obj, A, u_star):
        A = np.asarray(getattr(A, "A", A), dtype=float)
        Abar = np.vstack([obj.sqrtQ @ A, 2.0 * (obj.b @ A)[None, :]])
        v = 2.0 * obj.sqrtQ @ np.asarray(u_star, dtype=float)
        return cls(Abar, v, "quadratic")


@dataclass
class PolytopeDistanceResult:
    distance: float
    witness_y: np.ndarray
    witness_z: np.ndarray
    S: tuple = ()
    T: tuple = ()


@dataclass
class FacialDistance:
    value: float
    face: FaceCertificate
    pair: PolytopeDistanceResult
    face_count: int
    faces: list = field(default_factory=list, repr=False)


def _matrix(atoms):
    return np.asarray(getattr(atoms, "A", atoms), dtype=float)


def diameter(atoms, range_norm="l2"):
    A = _matrix(atoms)
    best = 0.0
    for i, j in combinations(range(A.shape[1]), 2):
        best = max(best, vector_norm(A[:, i] - A[:, j], range_norm))
    return best


def _certify(B, S):
    """Max ``eps`` separating atoms ``S`` (on a hyperplane) from the rest.

    Variables ``c+, c-, s+, s-`` (box ``|c| <= 1``), ``g+, g-``, ``eps``,
    ``eps slack`` and one surplus per off-face atom; returns
    ``(eps, c, gamma)``.
    """
    m, k = B.shape
    Sset = set(S)
    rest = [j for j in range(k) if j not in Sset]
    r = len(rest)
    nv = 4 * m + 2 + 2 + r
    ic, icn, isp, isn = 0, m, 2 * m, 3 * m
    ig, ie = 4 * m, 4 * m + 2
    it = 4 * m + 4
    rows = []
    rhs = []
    for i in S:
        row = np.zeros(nv)
        row[ic:ic + m] = B[:, i]
        row[icn:icn + m] = -B[:, i]
        row[ig], row[ig + 1] = -1.0, 1.0
        rows.append(row)
        rhs.append(0.0)
    for t, j in enumerate(rest):
        row = np.zeros(nv)
        row[ic:ic + m] = B[:, j]
        row[icn:icn + m] = -B[:, j]
        row[ig], row[ig + 1] = -1.0, 1.0
        row[ie] = -1.0
        row[it + t] = -1.0
        rows.append(row)
        rhs.append(0.0)
    for i in range(m):
        for off, soff in ((ic, isp), (icn, isn)):
            row = np.zeros(nv)
            row[off + i] = 1.0
            row[soff + i] = 1.0
            rows.append(row)
            rhs.append(1.0)
    row = np.zeros(nv)
    row[ie] = row[ie + 1] = 1.0
    rows.append(row)
    rhs.append(1.0)
    cost = np.zeros(nv)
    cost[ie] = -1.0
    sol = solve_lp(LinearProgram(cost, np.array(rows), np.array(rhs)))
    if sol.status != "optimal":
        return 0.0, None, None
    x = sol.point
    c = x[ic:ic + m] - x[icn:icn + m]
    return -sol.value, c, x[ig] - x[ig + 1]


def _certificate(A, S, c):
    """Exact certificate numbers for face ``S`` of ``A`` under functional ``c``."""
    vals = A.T @ c
    Sset = set(S)
    gamma = float(np.mean(vals[list(S)]))
    rest = [j for j in range(A.shape[1]) if j not in Sset]
    eps = float(np.min(vals[rest]) - gamma) if rest else math.inf
    return FaceCertificate(tuple(sorted(S)), c, gamma, eps)


def enumerate_proper_faces(atoms, cap=ENUM_CAP):
    """All nonempty proper faces of conv(A), each with a certificate.

    Duplicate columns are merged first. Vertices are found by certifying
    singletons; a face is then determined by its vertex set ``W`` and
    contains exactly the non-vertex atoms lying in ``conv(W)``, so one
    certification LP per vertex subset suffices.
    """
    A = _matrix(atoms)
    n = A.shape[1]
    if n > cap:
        raise SizeError(f"face enumeration capped at n={cap}, got n={n}")
    reps, groups = unique_columns(A)
    B = A[:, reps]
    k = len(reps)
    if k < 2:
        raise DegeneratePolytopeError("need at least two distinct atoms")

    vertices, others = [], []
    found = []
    for i in range(k):
        eps, c, _ = _certify(B, [i])
        if eps > FACE_EPS:
            vertices.append(i)
            found.append(([i], c))
        else:
            others.append(i)

    for size in range(2, len(vertices) + 1):
        for W in combinations(vertices, size):
            S = list(W)
            for j in others:
                if convex_weights(B[:, list(W)], B[:, j]) is not None:
                    S.append(j)
            if len(S) == k:
                continue
            eps, c, _ = _certify(B, S)
            if eps > FACE_EPS:
                found.append((sorted(S), c))

    faces = []
    for S, c in found:
        orig = sorted(j for i in S for j in groups[i])
        faces.append(_certificate(A, orig, c))
    return faces


def polytope_pair_distance(atoms, S, T, range_norm="l2"):
    """Euclidean distance between conv(A_S) and conv(A_T).

    Minimizes ``1/2 ||d||^2`` over the convex hull of pairwise differences
    ``a_i - a_j`` (i in S, j in T), which is exactly ``conv(A_S) - conv(A_T)``.
    """
    if range_norm != "l2":
        raise InputError("only the l2 range norm is supported for polytope distances")
    A = _matrix(atoms)
    S, T = list(S), list(T)
    if not S or not T or set(S) & set(T):
        raise InputError("S and T must be nonempty and disjoint")
    D = (A[:, S][:, :, None] - A[:, T][:, None, :]).reshape(A.shape[0], -1)
    res = minimize_quadratic(QuadraticObjective(np.eye(A.shape[0])), D, tol=DIST_GAP)
    W = res.x.reshape(len(S), len(T))
    y, z = W.sum(axis=1), W.sum(axis=0)
    dist = float(np.linalg.norm(A[:, S] @ y - A[:, T] @ z))
    return PolytopeDistanceResult(dist, y, z, tuple(S), tuple(T))


def facial_distance_details(atoms, range_norm="l2", cap=ENUM_CAP):
    A = _matrix(atoms)
    if len(unique_columns(A)[0]) < 2:
        raise DegeneratePolytopeError("facial distance needs at least two distinct atoms")
    faces = enumerate_proper_faces(A, cap)
    best = None
    n = A.shape[1]
    for face in faces:
        S = list(face.atom_indices)
        T = [j for j in range(n) if j not in set(S)]
        pair = polytope_pair_distance(A, S, T, range_norm)
        if best is None or pair.distance < best[1].distance:
            best = (face, pair)
    return FacialDistance(best[1].distance, best[0], best[1], len(faces), faces)


def facial_distance(atoms, range_norm="l2", cap=ENUM_CAP):
    """Smallest distance between a proper face and the hull of the other atoms."""
    return facial_distance_details(atoms, range_norm, cap).value


def quasi_norm(ubar, v, range_norm="l2"):
    """``sqrt(||u||^2 + |<v, u> + u_{m+1}|)`` for ``ubar = (u, u_{m+1})``."""
    ubar = np.asarray(ubar, dtype=float)
    v = np.asarray(v, dtype=float)
    if ubar.size != v.size + 1:
        raise InputError("ubar must have one more entry than v")
    u = ubar[:-1]
    return math.sqrt(vector_norm(u, range_norm) ** 2 + abs(float(v @ u) + ubar[-1]))


def minimizing_face(lifted, tol=1e-9):
    """Face of conv(Abar) minimizing ``<(v, 1), .>``."""
    Abar, v = lifted.Abar, lifted.v
    w = np.concatenate([v, [1.0]])
    scores = Abar.T @ w
    lo = scores.min()
    S = tuple(int(i) for i in np.flatnonzero(scores <= lo + tol * max(1.0, abs(lo))))
    c = w / max(1.0, np.max(np.abs(w)))
    return _certificate(Abar, S, c)


def _quasi_distance_sq(D, v, tol=DIST_GAP):
    """``min ||d||_v^2`` over ``d`` in conv(D).

    Writes ``|l(d)| = max over s in [-1, 1] of s * l(d)``; the inner problem
    for fixed ``s`` is a convex quadratic, and the outer maximization over
    ``s`` is concave. The two sign cases ``s = +-1`` settle it whenever the
    minimizer lies inside the corresponding half-space; otherwise a
    golden-section search on ``s`` closes the duality gap.
    """
    m = v.size
    H = np.zeros((m + 1, m + 1))
    H[:m, :m] = 2.0 * np.eye(m)
    w = np.concatenate([v, [1.0]])

    def g(d):
        return float(d[:m] @ d[:m]) + abs(float(w @ d))

    def inner(s):
        res = minimize_quadratic(QuadraticObjective(H, s * w), D, tol=tol)
        return res.value, res.u

    best_primal = math.inf
    for s in (1.0, -1.0):
        val, d = inner(s)
        best_primal = min(best_primal, g(d))
        if s * float(w @ d) >= 0.0:
            return g(d)

    lo, hi = -1.0, 1.0
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a = hi - invphi * (hi - lo)
    b = lo + invphi * (hi - lo)
    fa, da = inner(a)
    fb, db = inner(b)
    best_dual = max(fa, fb)
    best_primal = min(best_primal, g(da), g(db))
    for _ in range(80):
        if best_primal - best_dual <= tol * max(1.0, best_primal):
            break
        if fa < fb:
            lo, a, fa = a, b, fb
            b = lo + invphi * (hi - lo)
            fb, db = inner(b)
            best_primal = min(best_primal, g(db))
        else:
            hi, b, fb = b, a, fa
            a = hi - invphi * (hi - lo)
            fa, da = inner(a)
            best_primal = min(best_primal, g(da))
        best_dual = max(best_dual, fa, fb)
    return best_dual


def quasi_pair_distance(Abar, v, S, T):
    Abar = np.asarray(Abar, dtype=float)
    D = (Abar[:, S][:, :, None] - Abar[:, T][:, None, :]).reshape(Abar.shape[0], -1)
    return math.sqrt(max(_quasi_distance_sq(D, np.asarray(v, dtype=float)), 0.0))


def local_facial_distance(lifted, cap=ENUM_CAP):
    """Minimum quasi-norm distance from faces of F(v) to the hull of the other atoms."""
    Abar = lifted.Abar
    n = Abar.shape[1]
    F = set(minimizing_face(lifted).atom_indices)
    best = math.inf
    for face in enumerate_proper_faces(Abar, cap):
        S = list(face.atom_indices)
        if not set(S) <= F:
            continue
        T = [j for j in range(n) if j not in set(S)]
        best = min(best, quasi_pair_distance(Abar, lifted.v, S, T))
    return best


def restricted_operator_norm(atoms, domain_norm="l2", range_norm="l2"):
    """``max ||A w|| / ||w||`` over nonzero ``w`` with ``sum(w) = 0``."""
    A = _matrix(atoms)
    if range_norm != "l2":
        raise InputError("only the l2 range norm is supported")
    if domain_norm == "l1":
        return diameter(A, "l2") / 2.0
    if domain_norm != "l2":
        raise InputError(f"unsupported domain norm {domain_norm!r}")
    n = A.shape[1]
    P = np.eye(n) - np.full((n, n), 1.0 / n)
    AP = A @ P
    M = AP.T @ AP
    lam = sym_eigen(0.5 * (M + M.T)).eigenvalues[0]
    return math.sqrt(max(lam, 0.0))
