"""Objective functions on R^m: convex quadratics and generic value/gradient oracles."""
import numpy as np

from .errors import InputError, ObjectiveError
from .linalg import check_symmetric, matrix_sqrt_psd, sym_eigen

GRAD_CHECK_RTOL = 1e-5


class ObjectiveOracle:
    """A differentiable convex function given by value and gradient callables.

    ``L_f`` and ``mu_f`` are the classical smoothness / strong convexity
    constants with respect to ``norm`` on R^m, when known.
    """

    def __init__(self, value, grad, L_f=None, mu_f=None, norm="l2", name="oracle"):
        self._value = value
        self._grad = grad
        self.L_f = L_f
        self.mu_f = mu_f
        self.norm = norm
        self.name = name

    def value(self, u):
        return float(self._value(np.asarray(u, dtype=float)))

    def grad(self, u):
        g = np.asarray(self._grad(np.asarray(u, dtype=float)), dtype=float)
        if not np.all(np.isfinite(g)):
            raise ObjectiveError(f"non-finite gradient at {u}")
        return g

    def bregman(self, u, w):
        """``f(w) - f(u) - <grad f(u), w - u>``."""
        return self.value(w) - self.value(u) - float(self.grad(u) @ (np.asarray(w) - u))

    def scaled(self, lam):
        lam = float(lam)
        return ObjectiveOracle(
            lambda u: lam * self._value(u),
            lambda u: lam * np.asarray(self._grad(u)),
            None if self.L_f is None else lam * self.L_f,
            None if self.mu_f is None else lam * self.mu_f,
            self.norm,
            f"{lam}*{self.name}",
        )


class QuadraticObjective(ObjectiveOracle):
    """``f(u) = 1/2 <Q u, u> + <b, u>`` with ``Q`` symmetric PSD."""

    def __init__(self, Q, b=None):
        Q = check_symmetric(Q)
        Q = 0.5 * (Q + Q.T)
        m = Q.shape[0]
        b = np.zeros(m) if b is None else np.asarray(b, dtype=float)
        if b.shape != (m,):
            raise InputError(f"b has shape {b.shape}, expected ({m},)")
        if not np.all(np.isfinite(b)):
            raise InputError("b has non-finite entries")
        self.Q = Q
        self.b = b
        self.sqrtQ = matrix_sqrt_psd(Q)
        eig = sym_eigen(Q).eigenvalues
        self.eigenvalues = eig
        super().__init__(self._val, self._grd, float(max(eig[0], 0.0)),
                         float(max(eig[-1], 0.0)), "l2", "quadratic")

    def _val(self, u):
        return 0.5 * u @ (self.Q @ u) + self.b @ u

    def _grd(self, u):
        return self.Q @ u + self.b

    @property
    def dim(self):
        return self.Q.shape[0]

    def is_positive_definite(self, rtol=1e-10):
        return self.eigenvalues[-1] > rtol * max(self.eigenvalues[0], 0.0)

    def curvature(self, d):
        """``<Q d, d>``."""
        return float(d @ (self.Q @ d))

    def bregman(self, u, w):
        # exact for quadratics, avoids cancellation between f values
        r = self.sqrtQ @ (np.asarray(w, dtype=float) - np.asarray(u, dtype=float))
        return 0.5 * float(r @ r)

    def scaled(self, lam):
        return QuadraticObjective(lam * self.Q, lam * self.b)


def half_sq_norm(m):
    return QuadraticObjective(np.eye(m), np.zeros(m))


def logsumexp_objective():
    """``log sum exp(u)``; 1-smooth in l2, not strongly convex."""

    def value(u):
        top = np.max(u)
        return top + np.log(np.sum(np.exp(u - top)))

    def grad(u):
        e = np.exp(u - np.max(u))
        return e / e.sum()

    return ObjectiveOracle(value, grad, L_f=1.0, mu_f=0.0, name="logsumexp")


def check_gradient(obj, points, rtol=GRAD_CHECK_RTOL):
    """Compare the gradient against central finite differences at ``points``.

    Step is ``1e-6 * (1 + ||u||)``. Raises :class:`ObjectiveError` on mismatch.
    """
    for u in points:
        u = np.asarray(u, dtype=float)
        h = 1e-6 * (1.0 + np.linalg.norm(u))
        g = obj.grad(u)
        fd = np.empty_like(u)
        for i in range(u.size):
            e = np.zeros_like(u)
            e[i] = h
            fd[i] = (obj.value(u + e) - obj.value(u - e)) / (2 * h)
        err = np.linalg.norm(fd - g)
        if err > rtol * max(1.0, np.linalg.norm(g)):
            raise ObjectiveError(
                f"gradient mismatch at {u}: finite-difference error {err:.3e}")
    return True
