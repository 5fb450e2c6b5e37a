"""Reference-element numerics: Gauss-Legendre rules, Lagrange bases, dense solves.

Everything lives on the reference interval [0, 1]; an element [t_n, t_n+tau]
is reached through t = t_n + tau * s.
"""

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import ParameterError, SingularMatrixError

MAX_GAUSS_POINTS = 32


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n(self):
        return len(self.nodes)

    def integrate(self, values, a=0.0, b=1.0):
        """Integrate samples taken at the mapped nodes over [a, b] (last axis)."""
        return (b - a) * np.asarray(values) @ self.weights


def _legendre_and_derivative(n, x):
    # three-term recurrence for P_n and P_n'
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """n-point Gauss-Legendre rule on [0, 1].

    Roots of P_n are found by Newton iteration from the Chebyshev-like guesses
    cos(pi (4k - 1) / (4n + 2)); weights follow from P_n' at the roots.
    """
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_GAUSS_POINTS:
        raise ParameterError(f"Gauss point count must be in [1, {MAX_GAUSS_POINTS}], got {n!r}")
    n = int(n)
    if n == 1:
        return QuadratureRule(_frozen([0.5]), _frozen([1.0]))
    k = np.arange(1, n + 1)
    x = np.cos(np.pi * (4 * k - 1) / (4 * n + 2))
    for _ in range(100):
        p, dp = _legendre_and_derivative(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    _, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    nodes = 0.5 * (x[order] + 1.0)
    weights = 0.5 * w[order]
    return QuadratureRule(_frozen(nodes), _frozen(weights))


def equispaced_nodes(degree):
    """Reference nodes used for every Lagrange basis in the package.

    Degree 0 uses the midpoint; higher degrees include both endpoints.
    """
    if degree < 0:
        raise ParameterError("degree must be non-negative")
    if degree == 0:
        return np.array([0.5])
    return np.linspace(0.0, 1.0, degree + 1)


class LagrangeBasis:
    """Lagrange polynomials l_i with l_i(node_j) = delta_ij.

    ``values(s)`` and ``derivatives(s)`` return arrays of shape
    (degree + 1, len(s)).
    """

    def __init__(self, degree, nodes=None):
        if nodes is None:
            nodes = equispaced_nodes(degree)
        nodes = np.asarray(nodes, dtype=float)
        if degree < 0 or len(nodes) != degree + 1:
            raise ParameterError(f"degree {degree} needs {degree + 1} nodes, got {len(nodes)}")
        if np.any(nodes < 0.0) or np.any(nodes > 1.0):
            raise ParameterError("Lagrange nodes must lie in [0, 1]")
        if len(np.unique(nodes)) != len(nodes):
            raise ParameterError("Lagrange nodes must be distinct")
        self.degree = degree
        self.nodes = _frozen(nodes)
        diff = nodes[:, None] - nodes[None, :]
        np.fill_diagonal(diff, 1.0)
        self._denom = np.prod(diff, axis=1)

    def values(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        m = self.degree + 1
        if m == 1:
            return np.ones((1, s.size))
        d = s[None, :] - self.nodes[:, None]
        out = np.empty((m, s.size))
        for i in range(m):
            out[i] = np.prod(np.delete(d, i, axis=0), axis=0) / self._denom[i]
        return out

    def derivatives(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        m = self.degree + 1
        out = np.zeros((m, s.size))
        if m == 1:
            return out
        d = s[None, :] - self.nodes[:, None]
        for i in range(m):
            others = np.delete(d, i, axis=0)
            # product rule: sum over the dropped factor
            for k in range(m - 1):
                out[i] += np.prod(np.delete(others, k, axis=0), axis=0)
            out[i] /= self._denom[i]
        return out


def lagrange_basis(degree, nodes=None):
    return LagrangeBasis(degree, nodes)


def lagrange_on_nodes(nodes, x):
    """Lagrange basis on arbitrary (physical) nodes evaluated at points x.

    Used for lifted test functions, whose nodes are images of the element's
    test nodes under a group element. Returns shape (len(nodes), len(x)).
    """
    nodes = np.asarray(nodes, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m = len(nodes)
    if m == 1:
        return np.ones((1, x.size))
    out = np.empty((m, x.size))
    for i in range(m):
        num = np.ones_like(x)
        den = 1.0
        for j in range(m):
            if j != i:
                num = num * (x - nodes[j])
                den *= nodes[i] - nodes[j]
        out[i] = num / den
    return out


def lu_solve(a, b):
    """Solve a x = b by partial-pivot LU.

    Raises SingularMatrixError when a pivot falls below 1e-14 * ||a||_inf.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] != b.shape[0]:
        raise ParameterError(f"incompatible shapes {a.shape} and {b.shape}")
    norm = np.max(np.sum(np.abs(a), axis=1)) if a.size else 0.0
    if not np.isfinite(norm):
        raise SingularMatrixError("matrix has non-finite entries")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    if norm == 0.0 or np.min(np.abs(np.diag(lu))) < 1e-14 * norm:
        raise SingularMatrixError("pivot below 1e-14 * ||A||_inf")
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)
