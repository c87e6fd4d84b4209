"""Problem files and builtin problem generators.

A problem is one JSON document::

    {
      "name": "example2",
      "atoms": [[1, -1, 0], [0, 0, 1]],
      "objective": {"type": "quadratic", "Q": [[1, 0], [0, 0]], "b": [0, 1]},
      "domain_norm": "l1",
      "range_norm": "l2",
      "f_star": 0.0,
      "u_star": [0, 0],
      "z_star_basis": [[0.5, 0.5, 0]]
    }

Matrices are row-major nested lists; columns of ``atoms`` are the atoms.
``objective`` may also be ``{"type": "builtin", "name": "half_sq_norm"}``
or ``"logsumexp"``.
"""
import json
import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ProblemError
from .linalg import SYMMETRY_TOL
from .objectives import QuadraticObjective, half_sq_norm, logsumexp_objective

BUILTIN_OBJECTIVES = ("half_sq_norm", "logsumexp")


@dataclass
class ProblemSpec:
    A: np.ndarray
    objective_type: str  # quadratic | builtin
    Q: np.ndarray | None = None
    b: np.ndarray | None = None
    builtin: str | None = None
    domain_norm: str = "l1"
    range_norm: str = "l2"
    f_star: float | None = None
    u_star: np.ndarray | None = None
    z_star_basis: list | None = None
    name: str = "problem"

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def is_quadratic(self):
        return self.objective_type == "quadratic" or self.builtin == "half_sq_norm"

    def objective(self):
        if self.objective_type == "quadratic":
            return QuadraticObjective(self.Q, self.b)
        if self.builtin == "half_sq_norm":
            return half_sq_norm(self.m)
        return logsumexp_objective()

    def to_dict(self):
        d = {"name": self.name, "atoms": self.A.tolist()}
        if self.objective_type == "quadratic":
            d["objective"] = {"type": "quadratic", "Q": self.Q.tolist(), "b": self.b.tolist()}
        else:
            d["objective"] = {"type": "builtin", "name": self.builtin}
        d["domain_norm"] = self.domain_norm
        d["range_norm"] = self.range_norm
        if self.f_star is not None:
            d["f_star"] = self.f_star
        if self.u_star is not None:
            d["u_star"] = self.u_star.tolist()
        if self.z_star_basis is not None:
            d["z_star_basis"] = [z.tolist() for z in self.z_star_basis]
        return d

    def scaled(self, lam):
        """The same problem with objective multiplied by ``lam``."""
        if self.objective_type != "quadratic":
            raise ProblemError("objective: only quadratic problems can be rescaled")
        return ProblemSpec(self.A.copy(), "quadratic", lam * self.Q, lam * self.b,
                           domain_norm=self.domain_norm, range_norm=self.range_norm,
                           f_star=None if self.f_star is None else lam * self.f_star,
                           u_star=self.u_star, z_star_basis=self.z_star_basis,
                           name=f"{self.name}*{lam}")


def _array(value, field, ndim):
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ProblemError(f"{field}: not a numeric array") from None
    if arr.ndim != ndim:
        raise ProblemError(f"{field}: expected a {ndim}-D array, got {arr.ndim}-D")
    if arr.size == 0:
        raise ProblemError(f"{field}: empty")
    if not np.all(np.isfinite(arr)):
        raise ProblemError(f"{field}: non-finite entries")
    return arr


def problem_from_dict(d):
    if not isinstance(d, dict):
        raise ProblemError("top level: expected a JSON object")
    if "atoms" not in d:
        raise ProblemError("atoms: missing")
    A = _array(d["atoms"], "atoms", 2)
    m, n = A.shape
    obj = d.get("objective")
    if not isinstance(obj, dict) or "type" not in obj:
        raise ProblemError("objective: expected an object with a 'type'")
    kw = {}
    if obj["type"] == "quadratic":
        if "Q" not in obj:
            raise ProblemError("objective.Q: missing")
        Q = _array(obj["Q"], "objective.Q", 2)
        if Q.shape != (m, m):
            raise ProblemError(f"objective.Q: shape {Q.shape} does not match atoms dimension m={m}")
        if np.linalg.norm(Q - Q.T) > SYMMETRY_TOL * max(1.0, np.linalg.norm(Q)):
            raise ProblemError("objective.Q: not symmetric")
        b = _array(obj.get("b", [0.0] * m), "objective.b", 1)
        if b.shape != (m,):
            raise ProblemError(f"objective.b: length {b.size} does not match m={m}")
        kw.update(objective_type="quadratic", Q=Q, b=b)
    elif obj["type"] == "builtin":
        name = obj.get("name")
        if name not in BUILTIN_OBJECTIVES:
            raise ProblemError(f"objective.name: unknown builtin {name!r}")
        kw.update(objective_type="builtin", builtin=name)
    else:
        raise ProblemError(f"objective.type: unknown type {obj['type']!r}")
    for key, allowed in (("domain_norm", ("l1", "l2")), ("range_norm", ("l2",))):
        if key in d:
            if d[key] not in allowed:
                raise ProblemError(f"{key}: must be one of {allowed}")
            kw[key] = d[key]
    if d.get("f_star") is not None:
        f = d["f_star"]
        if not isinstance(f, (int, float)) or not math.isfinite(f):
            raise ProblemError("f_star: must be a finite number")
        kw["f_star"] = float(f)
    if d.get("u_star") is not None:
        u = _array(d["u_star"], "u_star", 1)
        if u.shape != (m,):
            raise ProblemError(f"u_star: length {u.size} does not match m={m}")
        kw["u_star"] = u
    if d.get("z_star_basis") is not None:
        Z = _array(d["z_star_basis"], "z_star_basis", 2)
        if Z.shape[1] != n:
            raise ProblemError(f"z_star_basis: points must have n={n} entries")
        kw["z_star_basis"] = list(Z)
    return ProblemSpec(A, name=str(d.get("name", "problem")), **kw)


def load_problem(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ProblemError(f"{path}: {exc.strerror}") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path}: JSON parse error at line {exc.lineno}, "
                           f"column {exc.colno}: {exc.msg}") from None
    return problem_from_dict(d)


def write_problem(spec, path):
    with open(path, "w") as fh:
        json.dump(spec.to_dict(), fh, indent=1)
        fh.write("\n")


def random_quadratic(m, n, seed=0, cond=10.0):
    """Random PD quadratic over ``n`` Gaussian atoms in R^m.

    ``Q`` has eigenvalues log-spaced on ``[1, cond]`` in a random basis.
    """
    rng = np.random.default_rng(seed)
    V, _ = np.linalg.qr(rng.normal(size=(m, m)))
    Q = V @ np.diag(np.logspace(0.0, math.log10(cond), m)) @ V.T
    Q = 0.5 * (Q + Q.T)
    b = rng.normal(size=m)
    A = rng.normal(size=(m, n))
    return ProblemSpec(A, "quadratic", Q, b,
                       name=f"random_quadratic({m},{n},{seed},{cond:g})")


def example2():
    return ProblemSpec(np.array([[1.0, -1.0, 0.0], [0.0, 0.0, 1.0]]), "quadratic",
                       np.array([[1.0, 0.0], [0.0, 0.0]]), np.array([0.0, 1.0]),
                       f_star=0.0, u_star=np.zeros(2),
                       z_star_basis=[np.array([0.5, 0.5, 0.0])], name="example2")


_BUILTIN_RE = re.compile(r"^\s*([a-z_0-9]+)\s*(?:\((.*)\))?\s*$")


def builtin_problem(text):
    """Parse ``simplex(m)``, ``l1ball(m)``, ``random_quadratic(m,n,seed,cond)`` or ``example2``.

    ``simplex`` and ``l1ball`` use ``f = 1/2 ||u||^2``.
    """
    match = _BUILTIN_RE.match(text)
    if not match:
        raise ProblemError(f"builtin: cannot parse {text!r}")
    name, args = match.group(1), match.group(2)
    try:
        vals = [float(a) for a in args.split(",")] if args and args.strip() else []
    except ValueError:
        raise ProblemError(f"builtin: bad arguments in {text!r}") from None
    if name == "example2" and not vals:
        return example2()
    if name in ("simplex", "l1ball") and len(vals) == 1 and vals[0] >= 2:
        m = int(vals[0])
        A = np.eye(m) if name == "simplex" else np.hstack([np.eye(m), -np.eye(m)])
        return ProblemSpec(A, "quadratic", np.eye(m), np.zeros(m), name=f"{name}({m})")
    if name == "random_quadratic" and 2 <= len(vals) <= 4:
        m, n = int(vals[0]), int(vals[1])
        seed = int(vals[2]) if len(vals) > 2 else 0
        cond = vals[3] if len(vals) > 3 else 10.0
        return random_quadratic(m, n, seed, cond)
    raise ProblemError(f"builtin: unknown builtin {text!r}")
