"""Lifted weak forms, invariance defects and the two invariantisation routes.

The lift of an element functional under a group element g transforms the
curve (and its derivative) by the prolonged action, the test functions by
moving their nodes to g t_j, and the measure by omega = dt_hat/dt. Pulled
back to the original element this reads

    L_g[U]_ik = int_{I_n} r_i(g Z(t)) phi_k(t_hat(t); g t_0, ..., g t_q) omega(t) dt.

A scheme is invariant when L_g = L_id for every admissible g.

``invariantize_pointwise`` substitutes the moving frame at each quadrature
point; ``integrate_augmented`` instead solves for the group element of each
element together with the nodal values, with the normalisations imposed at
the left endpoint.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import sympy as sp

from .errors import EvaluationError, FrameDomainError, IntegrationFailure, NonConvergence, ParameterError
from .galerkin import (
    DEFAULT_QUAD_POINTS,
    ElementContext,
    NewtonConfig,
    Trajectory,
    WeakForm,
    element_config,
    element_operators,
    newton,
)
from .groups import SL2Base, prolong, solve_frame
from .numerics import LagrangeBasis
from .symbolic import vectorize_exprs


class SmoothCurve:
    """Curve t -> u(t) with derivative, used as input of lifted functionals.

    ``value`` and ``derivative`` map t of shape (p,) to arrays (n, p). The
    derivative is checked against central differences at construction.
    """

    def __init__(self, value, derivative, domain, check=True):
        self.value = value
        self.derivative = derivative
        self.domain = (float(domain[0]), float(domain[1]))
        if not self.domain[0] < self.domain[1]:
            raise ParameterError("curve domain must be a proper interval")
        if check:
            self._check()

    def sample(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.asarray(self.value(t), dtype=float), np.asarray(self.derivative(t), dtype=float)

    @property
    def n(self):
        return self.sample(self.domain[0])[0].shape[0]

    def _check(self):
        a, b = self.domain
        t = a + (b - a) * np.array([0.13, 0.37, 0.61, 0.89])
        h = 1e-6 * max(1.0, b - a)
        fd = (self.sample(t + h)[0] - self.sample(t - h)[0]) / (2 * h)
        d = self.sample(t)[1]
        if np.max(np.abs(fd - d) / (1.0 + np.abs(d))) > 1e-6:
            raise ParameterError("curve derivative does not match finite differences of its value")

    @classmethod
    def from_exprs(cls, exprs, domain, t=None):
        """Curve from sympy expressions in ``t`` (default: the symbol 't')."""
        t = t if t is not None else sp.Symbol("t")
        exprs = [sp.sympify(e) for e in exprs]
        value = vectorize_exprs((t,), exprs)
        deriv = vectorize_exprs((t,), [sp.diff(e, t) for e in exprs])
        return cls(value, deriv, domain)

    @classmethod
    def jet(cls, expr, n, domain, t=None):
        """Components y, y', ..., y^(n-1) of a scalar function: a curve on
        which the auxiliary relations u_j,t = u_{j+1} hold exactly."""
        t = t if t is not None else sp.Symbol("t")
        expr = sp.sympify(expr)
        return cls.from_exprs([sp.diff(expr, t, j) for j in range(n)], domain, t)

    @classmethod
    def from_element(cls, ctx):
        """Polynomial curve of one element (trial degree len(t_nodes) - 1)."""
        t0, tau = ctx.t_start, ctx.tau
        basis = LagrangeBasis(len(ctx.t_nodes) - 1)
        c = np.asarray(ctx.values, dtype=float)
        return cls(lambda t: c @ basis.values((t - t0) / tau),
                   lambda t: c @ basis.derivatives((t - t0) / tau) / tau,
                   (t0, t0 + tau))

    @classmethod
    def from_problem(cls, problem, domain=None):
        """The exact solution of a catalogue problem."""
        domain = domain or (problem.t_start, problem.t_end)
        return cls(lambda t: problem.exact(t)[0], lambda t: problem.exact(t)[1], domain)


@dataclass
class LiftedFunctionalResult:
    residual: np.ndarray
    t_hat_nodes: np.ndarray


def _lagrange_at(nodes, x):
    """Lagrange basis on ``nodes`` (m,) or (m, p) evaluated at x (p,)."""
    nodes = np.asarray(nodes, dtype=float)
    m = nodes.shape[0]
    if nodes.ndim == 1:
        nodes = nodes[:, None]
    out = np.ones((m, x.size))
    for i in range(m):
        for j in range(m):
            if j != i:
                out[i] *= (x - nodes[j]) / (nodes[i] - nodes[j])
    return out


def _element_bounds(element):
    if isinstance(element, ElementContext):
        return element.t_start, element.tau
    t0, t1 = (float(x) for x in element)
    if not t1 > t0:
        raise ParameterError("element must satisfy t0 < t1")
    return t0, t1 - t0


def _lifted(wf, action, g, ops, t0, tau, sample, contact):
    """Core of the lifted functional; ``sample(t)`` returns (U, Ut)."""
    t = ops.times(t0, tau)
    U, Ut = sample(t)
    th, uh, uth, omega = prolong(action, g, t, U, Ut, contact)
    with np.errstate(all="ignore"):
        r = wf.residual(th, uh, uth)
    test_t = t0 + tau * ops.test_nodes
    test_u = sample(test_t)[0]
    tt, ut = action.point(g, test_t, test_u)
    if wf.test_weights is None:
        weights = _lagrange_at(tt, th) if wf.q > 0 else np.ones((1, t.size))
    else:
        weights = wf.test_weights(th, uh, tt, ut)
    return tau * ((r * omega) @ (weights * ops.w).T).ravel()


def lifted_functional(wf, action, g, curve, element, quad=DEFAULT_QUAD_POINTS, contact=False):
    """Element functional of ``wf`` evaluated on the g-transformed curve,
    pulled back to ``element`` = (t0, t1) or an ElementContext."""
    t0, tau = _element_bounds(element)
    ops = element_operators(wf.q, quad)
    res = _lifted(wf, action, g, ops, t0, tau, curve.sample, contact)
    ends = np.array([t0, t0 + tau])
    t_hat, _ = action.point(g, ends, curve.sample(ends)[0])
    return LiftedFunctionalResult(res, np.asarray(t_hat))


@dataclass(frozen=True)
class AugmentedForm:
    """Scheme whose group element is fixed by normalisations at the left
    endpoint of each element; its functional is the lift of ``wf`` at that
    element."""

    wf: WeakForm
    action: object
    cross_section: object
    contact: bool = False

    def frame_at(self, t, u, guess=None):
        return _solve_normalisation(self.action, self.cross_section, t, u, guess)

    def functional(self, curve, element, quad=DEFAULT_QUAD_POINTS, g=None):
        """Functional on ``curve``; with ``g`` the curve is first moved by g."""
        t0, _ = _element_bounds(element)
        u0 = curve.sample(t0)[0][:, 0]
        if g is None:
            h = self.frame_at(t0, u0)
        else:
            # the frame at g z_n, composed with g, acts on the original curve
            th, uh = self.action.point(g, t0, u0)
            h = self.action.compose(self.frame_at(th, uh), g)
        return lifted_functional(self.wf, self.action, h, curve, element, quad, self.contact).residual


def invariance_defect(wf, action, curve, element, g_samples, quad=DEFAULT_QUAD_POINTS, contact=False):
    """max_g || L_g - L_id ||_inf over ``g_samples``.

    ``wf`` may be a WeakForm (lifted directly) or an AugmentedForm (whose
    frozen frame is recomputed on the transformed data).
    """
    if isinstance(wf, AugmentedForm):
        base = wf.functional(curve, element, quad)
        return max(float(np.max(np.abs(wf.functional(curve, element, quad, g) - base))) for g in g_samples)
    base = lifted_functional(wf, action, action.identity(), curve, element, quad, contact).residual
    worst = 0.0
    for g in g_samples:
        lifted = lifted_functional(wf, action, g, curve, element, quad, contact).residual
        worst = max(worst, float(np.max(np.abs(lifted - base))))
    return worst


def admissible_samples(action, rng, count, accept=None, radius=0.5, max_tries=10000):
    """Seeded draws from a box around the identity, rejecting those for which
    ``accept(g)`` is false or raises."""
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > max_tries:
            raise ParameterError("could not draw enough admissible group elements")
        g = action.random_element(rng, radius)
        try:
            if accept is None or accept(g):
                out.append(g)
        except (ArithmeticError, ValueError):
            continue
    return out


def invariantize_pointwise(wf, action, mf, contact=False, name=None):
    """WeakForm whose integrand at each quadrature point is the lifted
    integrand of ``wf`` (omega factor and moved test nodes included)
    evaluated at the frame g = mf(t, U(t))."""
    if wf.test_weights is not None:
        raise ParameterError("pointwise invariantisation expects Lagrange test functions")

    def residual(t, U, Ut):
        G = mf.params(t, U)
        # each point has its own frame, so omega may differ in sign between
        # points of unrelated states; the fold check is left to the lift
        th, uh, uth, omega = prolong(action, G, t, U, Ut, contact, fold_check=False)
        return wf.residual(th, uh, uth) * omega

    test_weights = None
    if wf.q > 0:
        def test_weights(t, U, test_t, test_u):
            G = mf.params(t, U)
            p, m = t.size, test_t.size
            th, _ = action.point_field(G, t, U)
            # image of every test node under the frame of every quadrature point
            GG = np.repeat(G, m, axis=1)
            tt = np.tile(test_t, p)
            uu = np.tile(test_u, (1, p))
            nodes, _ = action.point_field(GG, tt, uu)
            return _lagrange_at(nodes.reshape(p, m).T, th)

    return WeakForm(wf.n_eq, wf.q, residual, test_weights=test_weights,
                    name=name or f"{wf.name}/pointwise", step_halvings=wf.step_halvings)


# ------------------------------------------------------------ augmented solve


def _chart(action):
    """(to_params, from_params, size) for the unknown group coordinates."""
    if isinstance(action, SL2Base):
        def full(x):
            return np.array([x[0], x[1], x[2], (1.0 + x[1] * x[2]) / x[0]])
        return full, lambda g: np.asarray(g, float)[:3].copy(), 3
    return (lambda x: np.asarray(x, float)), (lambda g: np.asarray(g, float).copy()), action.r


def _solve_normalisation(action, cs, t, u, guess=None):
    return solve_frame(action, cs, t, u, guess)


@dataclass
class AugmentedTrajectory(Trajectory):
    """Trajectory plus the group element solved on each element, shape (N, r)."""

    params: Optional[np.ndarray] = field(default=None)


def integrate_augmented(wf, action, cs, mesh, initial, cfg=None, quad=DEFAULT_QUAD_POINTS, contact=False):
    """March the enlarged system: lifted residuals of ``wf`` plus the
    normalisations cs(g z(t_n)) = c, solved jointly for the nodal values and
    the group coordinates of each element."""
    if wf.test_weights is not None:
        raise ParameterError("augmented solve expects Lagrange test functions")
    if cs.r != action.dim:
        raise ParameterError("cross-section length must equal the group dimension")
    cfg = cfg or NewtonConfig()
    initial = np.asarray(initial, dtype=float)
    if initial.shape != (wf.n_eq,):
        raise ParameterError(f"initial values must have length {wf.n_eq}")
    ops = element_operators(wf.q, quad)
    full, coords, k = _chart(action)
    n, m = wf.n_eq, wf.q + 1
    N = mesh.n_elements
    values = np.full((n, N * m + 1), np.nan)
    values[:, 0] = initial
    params = np.full((N, action.r), np.nan)
    g_prev = action.identity()
    basis = LagrangeBasis(wf.q + 1)
    for e in range(N):
        t0 = mesh.nodes[e]
        tau = mesh.nodes[e + 1] - t0
        left = values[:, e * m:e * m + 1]
        z0 = left[:, 0]
        targets = cs.targets(t0, z0)

        def fun(x, t0=t0, tau=tau, left=left, z0=z0, targets=targets):
            coeffs = np.hstack([left, x[:n * m].reshape(n, m)])
            g = full(x[n * m:])

            def sample(t):
                s = (t - t0) / tau
                return coeffs @ basis.values(s), coeffs @ basis.derivatives(s) / tau

            try:
                res = _lifted(wf, action, g, ops, t0, tau, sample, contact)
                th, uh = action.point(g, t0, z0)
            except (ArithmeticError, ValueError) as exc:
                raise EvaluationError(f"augmented residual undefined: {exc}") from exc
            norm = cs.coordinates(th, uh) - targets
            out = np.concatenate([res, norm])
            if not np.all(np.isfinite(out)):
                raise EvaluationError("non-finite augmented residual")
            return out

        # start from the frame of the incoming point, which satisfies the
        # normalisations, and the constant extension of the nodal values
        try:
            g0 = _solve_normalisation(action, cs, t0, z0, g_prev)
        except (NonConvergence, ArithmeticError, ValueError, FrameDomainError):
            g0 = g_prev
        x0 = np.concatenate([np.repeat(left, m, axis=1).ravel(), coords(g0)])
        try:
            x, _ = newton(fun, x0, element_config(cfg, tau), None, max(wf.step_halvings, 5))
        except NonConvergence as exc:
            traj = AugmentedTrajectory(mesh, wf.q, values, n_solved=e, params=params)
            raise IntegrationFailure(e, traj, exc) from exc
        values[:, e * m + 1:(e + 1) * m + 1] = x[:n * m].reshape(n, m)
        g_prev = full(x[n * m:])
        params[e] = g_prev
    return AugmentedTrajectory(mesh, wf.q, values, params=params)
