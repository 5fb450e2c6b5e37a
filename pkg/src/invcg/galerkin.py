"""Continuous Galerkin time stepping for first-order systems.

On every element I_n = (t_n, t_n+1] the trial functions are continuous
polynomials of degree q+1 (q+2 equispaced nodes, the left one inherited from
the previous element) and the test functions are discontinuous polynomials
of degree q. The per-element system

    int_{I_n} r_i(t, U, U_t) w_k(t) dt = 0,   i < n_eq, k <= q

is square in the n_eq (q+1) unknown nodal values and is solved by Newton's
method before marching to the next element.
"""

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import (
    EvaluationError,
    IntegrationFailure,
    NonConvergence,
    ParameterError,
    RangeError,
    SingularMatrixError,
)
from .numerics import LagrangeBasis, equispaced_nodes, gauss_legendre, lu_solve

DEFAULT_QUAD_POINTS = 16


@dataclass(frozen=True)
class TimeMesh:
    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2 or np.any(np.diff(nodes) <= 0):
            raise ParameterError("mesh nodes must be strictly increasing with at least one element")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, t_start, t_end, tau=None, n_elements=None, short_last=False):
        """Uniform partition of [t_start, t_end] by step ``tau`` or element count.

        With ``short_last`` a step that does not divide the interval is allowed
        and the final element is shortened to end at ``t_end``.
        """
        length = t_end - t_start
        if length <= 0:
            raise ParameterError("t_end must exceed t_start")
        if (tau is None) == (n_elements is None):
            raise ParameterError("give exactly one of tau and n_elements")
        if tau is not None:
            if tau <= 0:
                raise ParameterError("tau must be positive")
            n_elements = int(round(length / tau))
            exact = n_elements >= 1 and abs(n_elements * tau - length) <= 1e-9 * max(1.0, abs(length))
            if not exact:
                if not short_last:
                    raise ParameterError(f"tau={tau} does not divide [{t_start}, {t_end}]")
                n_full = int(np.floor(length / tau))
                nodes = np.append(t_start + tau * np.arange(n_full + 1), t_end)
                return cls(nodes)
        else:
            tau = length / n_elements
        nodes = t_start + tau * np.arange(n_elements + 1)
        nodes[-1] = t_end
        return cls(nodes)

    @property
    def t_start(self):
        return float(self.nodes[0])

    @property
    def t_end(self):
        return float(self.nodes[-1])

    @property
    def sizes(self):
        return np.diff(self.nodes)

    @property
    def n_elements(self):
        return self.nodes.size - 1


@dataclass(frozen=True)
class WeakForm:
    """Weak residual of an n_eq-component first-order system.

    ``residual(t, U, Ut)`` maps arrays of shape (n_pts,), (n_eq, n_pts),
    (n_eq, n_pts) to the integrand rows, shape (n_eq, n_pts).

    ``jacobian`` (optional) returns the partials (dr/du, dr/du_t), each of
    shape (n_eq, n_eq, n_pts). It is only used when ``test_weights`` is None.

    ``test_weights(t, U, test_t, test_u)`` (optional) replaces the Lagrange
    test basis by solution-dependent weights of shape (q+1, n_pts).
    ``test_t``/``test_u`` are the element's test nodes and the trial values
    there, so lifted and invariantized weights can depend on them.

    ``step_halvings`` caps how often a Newton step is halved when it leads to
    a non-finite residual (square roots, logarithms).
    """

    n_eq: int
    q: int
    residual: Callable
    jacobian: Optional[Callable] = None
    test_weights: Optional[Callable] = None
    name: str = ""
    step_halvings: int = 0

    def __post_init__(self):
        if self.n_eq < 1 or self.q < 0:
            raise ParameterError("n_eq must be >= 1 and q >= 0")


@dataclass(frozen=True)
class NewtonConfig:
    tolerance: float = 1e-12
    max_iterations: int = 50
    divergence: float = 1e10
    fd_step: float = 1e-7
    # round-off floor: accept when the step is this small relative to x and
    # the residual has stopped decreasing while below floor_residual
    stagnation_step: float = 1e-13
    floor_residual: float = 1e-8

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ParameterError("Newton tolerance must be positive")
        if self.max_iterations < 1:
            raise ParameterError("need at least one Newton iteration")


@dataclass
class ElementContext:
    """Trial data of one element: q+2 node times and nodal values per component."""

    index: int
    t_nodes: np.ndarray
    values: np.ndarray

    @property
    def tau(self):
        return float(self.t_nodes[-1] - self.t_nodes[0])

    @property
    def t_start(self):
        return float(self.t_nodes[0])


class ElementOperators:
    """Trial/test bases tabulated at the quadrature nodes of the reference element."""

    def __init__(self, q, n_quad):
        rule = gauss_legendre(n_quad)
        self.q = q
        self.rule = rule
        self.s = np.asarray(rule.nodes)
        self.w = np.asarray(rule.weights)
        self.trial = LagrangeBasis(q + 1)
        self.test = LagrangeBasis(q)
        self.trial_nodes = np.asarray(self.trial.nodes)
        self.test_nodes = np.asarray(self.test.nodes)
        self.B = self.trial.values(self.s)
        self.dB = self.trial.derivatives(self.s)
        self.W = self.test.values(self.s)
        self.Ww = self.W * self.w
        # trial values at the test nodes (for solution-dependent test weights)
        self.B_test = self.trial.values(self.test_nodes)

    def times(self, t0, tau):
        return t0 + tau * self.s

    def states(self, coeffs, tau):
        return coeffs @ self.B, coeffs @ self.dB / tau


@lru_cache(maxsize=None)
def element_operators(q, n_quad=DEFAULT_QUAD_POINTS):
    return ElementOperators(q, n_quad)


def _check_finite(r, t, u):
    if not np.all(np.isfinite(r)):
        bad = np.nonzero(~np.all(np.isfinite(np.atleast_2d(r)), axis=0))[0][0]
        raise EvaluationError(
            f"non-finite residual at t={t[bad]:.6g}", t=float(t[bad]), u=np.array(u[:, bad])
        )


def element_residual(wf, ops, t0, tau, coeffs):
    """Residual vector (component-major, length n_eq (q+1)) for nodal ``coeffs``."""
    t = ops.times(t0, tau)
    u, ut = ops.states(coeffs, tau)
    with np.errstate(all="ignore"):
        r = wf.residual(t, u, ut)
        _check_finite(r, t, u)
        if wf.test_weights is None:
            weights = ops.Ww
        else:
            test_t = t0 + tau * ops.test_nodes
            test_u = coeffs @ ops.B_test
            weights = wf.test_weights(t, u, test_t, test_u) * ops.w
            _check_finite(weights, t, u)
    return (tau * (r @ weights.T)).ravel()


def element_jacobian(wf, ops, t0, tau, coeffs):
    """Closed-form Jacobian w.r.t. the q+1 free nodal values of each component."""
    t = ops.times(t0, tau)
    u, ut = ops.states(coeffs, tau)
    with np.errstate(all="ignore"):
        dru, drut = wf.jacobian(t, u, ut)
    n, m = wf.n_eq, wf.q + 1
    jac = tau * np.einsum("kp,ijp,lp->ikjl", ops.Ww, dru, ops.B[1:], optimize=False)
    jac += np.einsum("kp,ijp,lp->ikjl", ops.Ww, drut, ops.dB[1:], optimize=False)
    return jac.reshape(n * m, n * m)


def newton(fun, x0, cfg, jac=None, step_halvings=0):
    """Newton's method on fun(x) = 0 with forward-difference fallback Jacobian.

    Converges when ||fun(x)||_inf <= cfg.tolerance, or when the iteration
    has reached the round-off floor of the residual: the Newton correction
    is below cfg.stagnation_step (1 + ||x||_inf), the residual no longer
    decreases and it is below cfg.floor_residual. Scaled residuals such as
    (U_t - V)/V with |V| ~ 1e-5 cannot reach an absolute 1e-12 in double
    precision. Raises NonConvergence on the iteration cap, on residuals
    above cfg.divergence, on non-finite values and on singular Jacobians.
    """
    x = np.array(x0, dtype=float)
    try:
        r = fun(x)
    except EvaluationError as exc:
        raise NonConvergence(f"initial guess not admissible: {exc}", 0) from exc
    for it in range(cfg.max_iterations + 1):
        norm = np.max(np.abs(r))
        if not np.isfinite(norm) or norm > cfg.divergence:
            raise NonConvergence(f"diverged (residual {norm:.3g})", it, norm)
        if norm <= cfg.tolerance:
            return x, it
        if it == cfg.max_iterations:
            break
        if jac is not None:
            J = jac(x)
        else:
            J = np.empty((r.size, x.size))
            for j in range(x.size):
                h = cfg.fd_step * (1.0 + abs(x[j]))
                xh = x.copy()
                xh[j] += h
                try:
                    J[:, j] = (fun(xh) - r) / h
                except EvaluationError as exc:
                    raise NonConvergence(f"Jacobian probe left the domain: {exc}", it, norm) from exc
        try:
            dx = lu_solve(J, -r)
        except SingularMatrixError as exc:
            raise NonConvergence(f"singular Jacobian: {exc}", it, norm) from exc
        for attempt in range(step_halvings + 1):
            trial = x + dx
            try:
                r_new = fun(trial)
            except EvaluationError as exc:
                if attempt == step_halvings:
                    raise NonConvergence(f"iterate left the domain: {exc}", it + 1, norm) from exc
                dx = 0.5 * dx
                continue
            break
        new_norm = np.max(np.abs(r_new))
        x, r = trial, r_new
        if (new_norm <= cfg.floor_residual and new_norm >= 0.5 * norm
                and np.max(np.abs(dx)) <= cfg.stagnation_step * (1.0 + np.max(np.abs(x)))):
            return x, it + 1
    raise NonConvergence(f"no convergence in {cfg.max_iterations} iterations", cfg.max_iterations, norm)


def element_config(cfg, tau):
    """Newton settings for an element of length ``tau``.

    The tolerance applies to the weak residual on the reference element,
    i.e. the element integral divided by tau. It is never looser than the
    configured tolerance on the element integral itself (tau > 1). A
    tolerance on the unscaled integral lets the per-element residuals of
    long fine-mesh runs add up to a visible global error.
    """
    return replace(cfg, tolerance=cfg.tolerance * min(1.0, float(tau)))


def newton_solve_element(wf, ctx, cfg=None, quad=DEFAULT_QUAD_POINTS):
    """Solve one element; ``ctx.values[:, 0]`` is fixed, the rest is the guess.

    Returns a new ElementContext holding the converged nodal values.
    """
    cfg = cfg or NewtonConfig()
    ops = element_operators(wf.q, quad)
    t0, tau = ctx.t_start, ctx.tau
    values = np.array(ctx.values, dtype=float)
    _check_context(wf, ctx)
    left = values[:, :1]
    n, m = wf.n_eq, wf.q + 1

    def coeffs_of(x):
        return np.hstack([left, x.reshape(n, m)])

    def fun(x):
        return element_residual(wf, ops, t0, tau, coeffs_of(x))

    jac = None
    if wf.jacobian is not None and wf.test_weights is None:
        def jac(x):
            return element_jacobian(wf, ops, t0, tau, coeffs_of(x))

    x, _ = newton(fun, values[:, 1:].ravel(), element_config(cfg, tau), jac, wf.step_halvings)
    return ElementContext(ctx.index, np.array(ctx.t_nodes), coeffs_of(x))


def assemble_element_residual(wf, ctx, quad=DEFAULT_QUAD_POINTS):
    _check_context(wf, ctx)
    ops = element_operators(wf.q, quad)
    return element_residual(wf, ops, ctx.t_start, ctx.tau, np.asarray(ctx.values, dtype=float))


def _check_context(wf, ctx):
    if np.shape(ctx.values) != (wf.n_eq, wf.q + 2) or len(ctx.t_nodes) != wf.q + 2:
        raise ParameterError(
            f"context must carry {wf.q + 2} trial nodes for {wf.n_eq} components"
        )


@dataclass
class Trajectory:
    """Continuous piecewise polynomial of degree q+1 on ``mesh``.

    ``values`` has shape (n_eq, N (q+1) + 1); element n owns the columns
    n (q+1) ... (n+1)(q+1), so neighbouring elements share their endpoint.
    ``n_solved`` is smaller than N for a partial (failed) march.
    """

    mesh: TimeMesh
    q: int
    values: np.ndarray
    n_solved: int = field(default=-1)

    def __post_init__(self):
        if self.n_solved < 0:
            self.n_solved = self.mesh.n_elements

    @property
    def n_eq(self):
        return self.values.shape[0]

    def element_values(self, n):
        m = self.q + 1
        return self.values[:, n * m:(n + 1) * m + 1]

    def element_context(self, n):
        t0, t1 = self.mesh.nodes[n], self.mesh.nodes[n + 1]
        return ElementContext(n, t0 + (t1 - t0) * equispaced_nodes(self.q + 1), self.element_values(n))

    def nodal_values(self):
        """Values at the mesh nodes, shape (n_eq, N + 1)."""
        return self.values[:, ::self.q + 1]

    @property
    def solved_nodes(self):
        return self.mesh.nodes[:self.n_solved + 1]

    def evaluate(self, t):
        return evaluate(self, t)


def evaluate(traj, t):
    """Value and one-sided derivative at scalar t.

    Elements are (t_n, t_n+1]: at an interior mesh node the element to its
    left is used; t_0 belongs to the first element.
    """
    nodes = traj.mesh.nodes
    t_hi = nodes[traj.n_solved]
    if not nodes[0] <= t <= t_hi:
        raise RangeError(f"t={t} outside [{nodes[0]}, {t_hi}]")
    n = max(int(np.searchsorted(nodes, t, side="left")) - 1, 0)
    t0, tau = nodes[n], nodes[n + 1] - nodes[n]
    s = (t - t0) / tau
    basis = LagrangeBasis(traj.q + 1)
    coeffs = traj.element_values(n)
    return (coeffs @ basis.values(s))[:, 0], (coeffs @ basis.derivatives(s))[:, 0] / tau


def integrate(wf, mesh, initial, cfg=None, quad=DEFAULT_QUAD_POINTS, guess="constant"):
    """March the scheme element by element from ``initial`` at mesh.t_start.

    ``guess`` selects the Newton starting point on each element: "constant"
    extends the incoming endpoint values, "extrapolate" continues the
    previous element's polynomial. Raises IntegrationFailure (carrying the
    partial trajectory) when an element solve does not converge.
    """
    cfg = cfg or NewtonConfig()
    initial = np.asarray(initial, dtype=float)
    if initial.shape != (wf.n_eq,):
        raise ParameterError(f"initial values must have length {wf.n_eq}")
    if guess not in ("constant", "extrapolate"):
        raise ParameterError(f"unknown initial guess strategy {guess!r}")
    ops = element_operators(wf.q, quad)
    n, m = wf.n_eq, wf.q + 1
    N = mesh.n_elements
    values = np.full((n, N * m + 1), np.nan)
    values[:, 0] = initial
    use_jac = wf.jacobian is not None and wf.test_weights is None
    extrapolation = None
    if guess == "extrapolate":
        # previous element's polynomial at the next element's trial nodes
        extrapolation = ops.trial.values(1.0 + ops.trial_nodes[1:])
    nodes = mesh.nodes
    for e in range(N):
        t0 = nodes[e]
        tau = nodes[e + 1] - t0
        left = values[:, e * m:e * m + 1]

        def coeffs_of(x, left=left):
            return np.hstack([left, x.reshape(n, m)])

        def fun(x, t0=t0, tau=tau, coeffs_of=coeffs_of):
            return element_residual(wf, ops, t0, tau, coeffs_of(x))

        jac = None
        if use_jac:
            def jac(x, t0=t0, tau=tau, coeffs_of=coeffs_of):
                return element_jacobian(wf, ops, t0, tau, coeffs_of(x))

        if extrapolation is not None and e > 0:
            prev = values[:, (e - 1) * m:e * m + 1]
            x0 = (prev @ extrapolation).ravel()
        else:
            x0 = np.repeat(left, m, axis=1).ravel()
        try:
            x, _ = newton(fun, x0, element_config(cfg, tau), jac, wf.step_halvings)
        except NonConvergence as exc:
            raise IntegrationFailure(e, Trajectory(mesh, wf.q, values, n_solved=e), exc) from exc
        values[:, e * m + 1:(e + 1) * m + 1] = x.reshape(n, m)
    return Trajectory(mesh, wf.q, values)
