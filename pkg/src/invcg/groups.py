"""Lie point transformation groups acting on (t, u_0, ..., u_m).

Every action is a point map (t, u) -> (t_hat, u_hat) with closed-form
partial derivatives, vectorised over sample points: ``t`` has shape (p,)
and ``u`` shape (n_u, p). Group elements are parameter vectors.

Composition convention: ``compose(g2, g1)`` is the element that applies
``g1`` first and then ``g2``, so that

    act(compose(g2, g1), z) == act(g2, act(g1, z)).

Prolongation to first derivatives uses the chain rule along a curve,

    dt_hat/dt = dt_hat/dt|_u + sum_j dt_hat/du_j u_j,t,
    u_hat_k,t_hat = (du_hat_k/dt) / (dt_hat/dt),

and dt_hat/dt is the lifted measure omega.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, FoldError, FrameDomainError, NonConvergence, ParameterError
from .numerics import lu_solve


def _arrays(t, u):
    t = np.asarray(t, dtype=float)
    u = np.asarray(u, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if u.ndim == 1 and scalar:
        u = u[:, None]
    return t, u, scalar


class GroupAction:
    """Base class; subclasses provide ``_point`` and ``_partials``."""

    name = ""
    r = 0
    n_u = 0
    param_names: Sequence[str] = ()

    @property
    def dim(self):
        """Group dimension (differs from the parameter count for SL(2))."""
        return self.r

    def identity(self):
        raise NotImplementedError

    def compose(self, g2, g1):
        raise NotImplementedError

    def inverse(self, g):
        raise NotImplementedError

    def validate(self, g):
        g = np.asarray(g, dtype=float)
        if g.shape != (self.r,) or not np.all(np.isfinite(g)):
            raise ParameterError(f"{self.name}: need {self.r} finite parameters, got {g!r}")
        return g

    def point(self, g, t, u):
        """Transformed points; raises DomainError where the map is undefined."""
        g = self.validate(g)
        t, u, scalar = _arrays(t, u)
        with np.errstate(all="ignore"):
            th, uh = self._point(g, t, u)
        th = np.broadcast_to(th, t.shape).astype(float)
        if not (np.all(np.isfinite(th)) and np.all(np.isfinite(uh))):
            raise DomainError(f"{self.name}: point outside the domain of the action")
        if scalar:
            return float(th[0]), uh[:, 0]
        return th, uh

    def partials(self, g, t, u):
        """(dth/dt, dth/du, duh/dt, duh/du) of shapes (p,), (n,p), (n,p), (n,n,p)."""
        g = self.validate(g)
        t, u, _ = _arrays(t, u)
        with np.errstate(all="ignore"):
            out = self._partials(g, t, u)
        p = t.size
        n = self.n_u
        th_t, th_u, uh_t, uh_u = out
        return (
            np.broadcast_to(th_t, (p,)).astype(float),
            np.broadcast_to(th_u, (n, p)).astype(float),
            np.broadcast_to(uh_t, (n, p)).astype(float),
            np.broadcast_to(uh_u, (n, n, p)).astype(float),
        )

    def point_field(self, G, t, u):
        """Point map with one group element per sample, G of shape (r, p)."""
        t, u, _ = _arrays(t, u)
        G = np.asarray(G, dtype=float).reshape(self.r, t.size)
        with np.errstate(all="ignore"):
            th, uh = self._point(G, t, u)
        th = np.broadcast_to(th, t.shape).astype(float)
        uh = np.broadcast_to(uh, u.shape).astype(float)
        if not (np.all(np.isfinite(th)) and np.all(np.isfinite(uh))):
            raise DomainError(f"{self.name}: point outside the domain of the action")
        return th, uh

    def partials_field(self, G, t, u):
        """``partials`` with one group element per sample."""
        t, u, _ = _arrays(t, u)
        G = np.asarray(G, dtype=float).reshape(self.r, t.size)
        with np.errstate(all="ignore"):
            th_t, th_u, uh_t, uh_u = self._partials(G, t, u)
        p, n = t.size, self.n_u
        return (
            np.broadcast_to(th_t, (p,)).astype(float),
            np.broadcast_to(th_u, (n, p)).astype(float),
            np.broadcast_to(uh_t, (n, p)).astype(float),
            np.broadcast_to(uh_u, (n, n, p)).astype(float),
        )

    def equal(self, g1, g2):
        """Parameter distance between two elements (sup norm)."""
        return float(np.max(np.abs(np.asarray(g1, float) - np.asarray(g2, float))))

    def random_element(self, rng, radius=0.5):
        """Element drawn uniformly from a box of ``radius`` around the identity."""
        return self.identity() + rng.uniform(-radius, radius, self.r)


def act_point(action, g, t, u):
    return action.point(g, t, u)


def prolong(action, g, t, U, Ut, contact=False, fold_check=True):
    """Transform a sampled curve and its first derivatives.

    ``g`` is one element (shape (r,)) or one element per sample (r, p).
    ``fold_check`` raises FoldError when omega vanishes or changes sign;
    it is meant for samples along one curve, not for unrelated states.
    Returns (t_hat, U_hat, U_hat_t_hat, omega) at the sample points. With
    ``contact`` the prolongation of u_hat_k (k >= 1) uses u_{j+1} in place
    of the curve derivative u_j,t for j < k, i.e. the jet relations
    u_j,t = u_{j+1} of the underlying scalar ODE are imposed.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    U = np.asarray(U, dtype=float).reshape(action.n_u, t.size)
    Ut = np.asarray(Ut, dtype=float).reshape(action.n_u, t.size)
    if np.ndim(g) == 2:
        # one element per sample point (frames evaluated along the curve)
        th, uh = action.point_field(g, t, U)
        th_t, th_u, uh_t, uh_u = action.partials_field(g, t, U)
    else:
        th, uh = action.point(g, t, U)
        th_t, th_u, uh_t, uh_u = action.partials(g, t, U)
    omega = th_t + np.sum(th_u * Ut, axis=0)
    if not np.all(np.isfinite(omega)):
        raise FoldError(f"{action.name}: dt_hat/dt is not finite")
    if fold_check and (np.any(omega == 0) or (np.any(omega > 0) and np.any(omega < 0))):
        raise FoldError(f"{action.name}: dt_hat/dt vanishes or changes sign along the curve")
    if contact:
        n = action.n_u
        dudt = np.array(uh_t)
        for k in range(n):
            for j in range(n):
                dj = U[j + 1] if (j < k and j + 1 < n) else Ut[j]
                dudt[k] += uh_u[k, j] * dj
    else:
        dudt = uh_t + np.einsum("kjp,jp->kp", uh_u, Ut)
    return th, uh, dudt / omega, omega


def prolong_curve(action, g, curve, contact=False):
    """Parametric map t -> (t_hat, u_hat, u_hat_t_hat) of the transformed curve."""

    def transformed(t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        U, Ut = curve.sample(t_arr)
        th, uh, uth, _ = prolong(action, g, t_arr, U, Ut, contact)
        if np.ndim(t) == 0:
            return float(th[0]), uh[:, 0], uth[:, 0]
        return th, uh, uth

    return transformed


def fd_partials(action, g, t, u, h=1e-6):
    """Central-difference partials, kept for cross-checking the closed forms."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    u = np.asarray(u, dtype=float).reshape(action.n_u, t.size)
    th_p, uh_p = action.point(g, t + h, u)
    th_m, uh_m = action.point(g, t - h, u)
    th_t = (th_p - th_m) / (2 * h)
    uh_t = (uh_p - uh_m) / (2 * h)
    n = action.n_u
    th_u = np.empty((n, t.size))
    uh_u = np.empty((n, n, t.size))
    for j in range(n):
        du = np.zeros_like(u)
        du[j] = h
        a_th, a_uh = action.point(g, t, u + du)
        b_th, b_uh = action.point(g, t, u - du)
        th_u[j] = (a_th - b_th) / (2 * h)
        uh_u[:, j] = (a_uh - b_uh) / (2 * h)
    return th_t, th_u, uh_t, uh_u


# ---------------------------------------------------------------- actions


class ExponentialScaling(GroupAction):
    """t_hat = t, u_hat = e^{at+b} u, v_hat = (a u + v) e^{at+b}.

    The exponents add under composition, so the group is abelian with
    compose((a2, b2), (a1, b1)) = (a1 + a2, b1 + b2).
    """

    name = "exp-scaling"
    r = 2
    n_u = 2
    param_names = ("a", "b")

    def identity(self):
        return np.zeros(2)

    def compose(self, g2, g1):
        return self.validate(g1) + self.validate(g2)

    def inverse(self, g):
        return -self.validate(g)

    def _point(self, g, t, u):
        a, b = g
        e = np.exp(a * t + b)
        return t, np.array([e * u[0], (a * u[0] + u[1]) * e])

    def _partials(self, g, t, u):
        a, b = g
        e = np.exp(a * t + b)
        z = np.zeros_like(t)
        uh_t = np.array([a * e * u[0], a * (a * u[0] + u[1]) * e])
        uh_u = np.array([[e, z], [a * e, e]])
        return np.ones_like(t), np.zeros((2, t.size)), uh_t, uh_u


def _sl2_check(action, g, tol=1e-12):
    g = GroupAction.validate(action, g)
    al, be, ga, de = g
    # products of well-scaled elements lose digits in proportion to |g|^2
    if abs(al * de - be * ga - 1.0) > tol * max(1.0, float(np.max(np.abs(g))) ** 2):
        raise ParameterError(f"{action.name}: alpha delta - beta gamma = {al * de - be * ga!r}, not 1")
    return g


def _sl2_compose(g2, g1):
    m = np.asarray(g2, float).reshape(2, 2) @ np.asarray(g1, float).reshape(2, 2)
    return m.ravel()


def _sl2_inverse(g):
    al, be, ga, de = g
    return np.array([de, -be, -ga, al])


class SL2Base(GroupAction):
    r = 4
    dim = 3
    param_names = ("alpha", "beta", "gamma", "delta")

    def identity(self):
        return np.array([1.0, 0.0, 0.0, 1.0])

    def validate(self, g):
        return _sl2_check(self, g)

    def compose(self, g2, g1):
        # functional composition of Moebius maps is the matrix product M2 M1
        return _sl2_compose(self.validate(g2), self.validate(g1))

    def inverse(self, g):
        return _sl2_inverse(self.validate(g))

    def equal(self, g1, g2):
        # SL(2) double cover: g and -g act identically
        g1, g2 = np.asarray(g1, float), np.asarray(g2, float)
        return float(min(np.max(np.abs(g1 - g2)), np.max(np.abs(g1 + g2))))

    def random_element(self, rng, radius=0.5):
        al, be, ga = 1.0 + rng.uniform(-radius, radius), rng.uniform(-radius, radius), rng.uniform(-radius, radius)
        return np.array([al, be, ga, (1.0 + be * ga) / al])


class MoebiusDependent(SL2Base):
    """Linear fractional action on u with t fixed, prolonged to (u, v, w).

    u_hat = (alpha u + beta)/D, v_hat = v/D^2, w_hat = w/D^2 - 2 gamma v^2/D^3,
    with D = gamma u + delta.
    """

    name = "moebius-u"
    n_u = 3

    def _point(self, g, t, u):
        al, be, ga, de = g
        d = ga * u[0] + de
        if np.any(d == 0):
            raise DomainError("gamma u + delta = 0")
        return t, np.array([(al * u[0] + be) / d, u[1] / d**2, u[2] / d**2 - 2 * ga * u[1] ** 2 / d**3])

    def _partials(self, g, t, u):
        al, be, ga, de = g
        d = ga * u[0] + de
        if np.any(d == 0):
            raise DomainError("gamma u + delta = 0")
        z = np.zeros_like(t)
        det = al * de - be * ga
        uh_u = np.array([
            [det / d**2, z, z],
            [-2 * ga * u[1] / d**3, 1 / d**2, z],
            [-2 * ga * u[2] / d**3 + 6 * ga**2 * u[1] ** 2 / d**4, -4 * ga * u[1] / d**3, 1 / d**2],
        ])
        return np.ones_like(t), np.zeros((3, t.size)), np.zeros((3, t.size)), uh_u


class DilationTranslation(GroupAction):
    """t_hat = e^a t + b with the induced weights on (u, v).

    u_hat = e^{3a} t^2 u / th^2, v_hat = e^{2a} t^2 v / th^2 + 2 e^{2a} b t u / th^3,
    th = e^a t + b. Since t -> e^{a2}(e^{a1} t + b1) + b2, the law is
    compose((a2, b2), (a1, b1)) = (a1 + a2, e^{a2} b1 + b2).
    """

    name = "dilation-translation"
    r = 2
    n_u = 2
    param_names = ("a", "b")

    def identity(self):
        return np.zeros(2)

    def compose(self, g2, g1):
        a1, b1 = self.validate(g1)
        a2, b2 = self.validate(g2)
        return np.array([a1 + a2, np.exp(a2) * b1 + b2])

    def inverse(self, g):
        a, b = self.validate(g)
        return np.array([-a, -np.exp(-a) * b])

    def _point(self, g, t, u):
        a, b = g
        s = np.exp(a)
        th = s * t + b
        if np.any(th == 0):
            raise DomainError("e^a t + b = 0")
        u0 = s**3 * t**2 * u[0] / th**2
        u1 = s**2 * t**2 * u[1] / th**2 + 2 * s**2 * b * t * u[0] / th**3
        return th, np.array([u0, u1])

    def _partials(self, g, t, u):
        a, b = g
        s = np.exp(a)
        th = s * t + b
        if np.any(th == 0):
            raise DomainError("e^a t + b = 0")
        uh_t = np.array([
            2 * s**3 * u[0] * t * b / th**3,
            2 * s**2 * u[1] * t * b / th**3 + 2 * s**2 * b * u[0] * (th - 3 * t * s) / th**4,
        ])
        z = np.zeros_like(t)
        uh_u = np.array([
            [s**3 * t**2 / th**2, z],
            [2 * s**2 * b * t / th**3, s**2 * t**2 / th**2],
        ])
        return np.full_like(t, s), np.zeros((2, t.size)), uh_t, uh_u


class NonProjectable(GroupAction):
    """t_hat = t + alpha u, u_hat = e^beta u.

    Applying (alpha1, beta1) and then (alpha2, beta2) gives
    t + (alpha1 + alpha2 e^{beta1}) u and e^{beta1 + beta2} u.
    """

    name = "non-projectable"
    r = 2
    n_u = 1
    param_names = ("alpha", "beta")

    def identity(self):
        return np.zeros(2)

    def compose(self, g2, g1):
        a1, b1 = self.validate(g1)
        a2, b2 = self.validate(g2)
        return np.array([a1 + a2 * np.exp(b1), b1 + b2])

    def inverse(self, g):
        a, b = self.validate(g)
        return np.array([-a * np.exp(-b), -b])

    def _point(self, g, t, u):
        a, b = g
        return t + a * u[0], np.exp(b) * u

    def _partials(self, g, t, u):
        a, b = g
        return (np.ones_like(t), np.full((1, t.size), a), np.zeros((1, t.size)),
                np.full((1, 1, t.size), np.exp(b)))


class MoebiusTime(SL2Base):
    """t_hat = (alpha t + beta)/D, u_hat = u/D, v_hat = D v - gamma u, D = gamma t + delta."""

    name = "moebius-t"
    n_u = 2

    def _point(self, g, t, u):
        al, be, ga, de = g
        d = ga * t + de
        if np.any(d == 0):
            raise DomainError("gamma t + delta = 0")
        return (al * t + be) / d, np.array([u[0] / d, d * u[1] - ga * u[0]])

    def _partials(self, g, t, u):
        al, be, ga, de = g
        d = ga * t + de
        if np.any(d == 0):
            raise DomainError("gamma t + delta = 0")
        det = al * de - be * ga
        z = np.zeros_like(t)
        uh_t = np.array([-ga * u[0] / d**2, ga * u[1]])
        uh_u = np.array([[1 / d, z], [np.full_like(t, -ga), d]])
        return det / d**2, np.zeros((2, t.size)), uh_t, uh_u


class HomogeneousShift(GroupAction):
    """Superposition action u_hat = u + e1 alpha + e2 gamma, v_hat = v + e1 alpha_t + e2 gamma_t.

    ``alpha`` and ``gamma`` map t to (value, first, second derivative) of two
    homogeneous solutions.
    """

    name = "homogeneous-shift"
    r = 2
    n_u = 2
    param_names = ("eps1", "eps2")

    def __init__(self, alpha, gamma):
        self.alpha = alpha
        self.gamma = gamma

    def identity(self):
        return np.zeros(2)

    def compose(self, g2, g1):
        return self.validate(g1) + self.validate(g2)

    def inverse(self, g):
        return -self.validate(g)

    def _point(self, g, t, u):
        e1, e2 = g
        a, a1, _ = self.alpha(t)
        c, c1, _ = self.gamma(t)
        return t, np.array([u[0] + e1 * a + e2 * c, u[1] + e1 * a1 + e2 * c1])

    def _partials(self, g, t, u):
        e1, e2 = g
        _, a1, a2 = self.alpha(t)
        _, c1, c2 = self.gamma(t)
        uh_t = np.array([e1 * a1 + e2 * c1, e1 * a2 + e2 * c2])
        eye = np.broadcast_to(np.eye(2)[:, :, None], (2, 2, t.size))
        return np.ones_like(t), np.zeros((2, t.size)), uh_t, eye


# ---------------------------------------------------------------- frames


SIGN = "sign"


@dataclass(frozen=True)
class CrossSection:
    """Coordinate cross-section: pairs (index into (t, u_0, ..., u_m), target).

    A target is a constant or ``SIGN``, meaning the sign of the coordinate
    before the transformation.
    """

    entries: tuple

    def __post_init__(self):
        for idx, target in self.entries:
            if idx < 0 or not (target == SIGN or np.isfinite(target)):
                raise ParameterError(f"bad cross-section entry {(idx, target)!r}")

    @property
    def r(self):
        return len(self.entries)

    def targets(self, t, u):
        z = np.concatenate([np.atleast_1d(t), np.atleast_1d(u)])
        return np.array([np.sign(z[i]) if c == SIGN else float(c) for i, c in self.entries])

    def coordinates(self, t, u):
        z = np.concatenate([np.atleast_1d(t), np.atleast_1d(u)])
        return np.array([z[i] for i, _ in self.entries])


@dataclass(frozen=True)
class MovingFrame:
    """Closed-form right moving frame of ``action`` for ``cross_section``.

    ``formula(t, u)`` is vectorised: t of shape (p,), u of shape (n_u, p),
    returning parameters of shape (r, p). ``admissible(t, u)`` returns a
    boolean array.
    """

    action: GroupAction
    cross_section: CrossSection
    formula: Callable
    admissible: Callable
    name: str = ""

    def __post_init__(self):
        if self.cross_section.r != self.action.dim:
            raise ParameterError("cross-section length must equal the group dimension")

    def params(self, t, u):
        """Frame parameters at many points, shape (r, p)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        u = np.asarray(u, dtype=float).reshape(self.action.n_u, t.size)
        ok = np.asarray(self.admissible(t, u))
        if not np.all(ok):
            raise FrameDomainError(f"{self.name}: state outside the frame's domain")
        with np.errstate(all="ignore"):
            g = np.asarray(self.formula(t, u), dtype=float)
        g = np.broadcast_to(g, (self.action.r, t.size))
        if not np.all(np.isfinite(g)):
            raise FrameDomainError(f"{self.name}: frame not finite")
        return g

    def __call__(self, t, u):
        """Frame at a single point (t scalar, u vector)."""
        return self.params(np.array([float(t)]), np.asarray(u, float).reshape(-1, 1))[:, 0]


def frame(mf, t, u):
    return mf(t, u)


def check_cross_section(mf, z):
    """Deviation of act(frame(z), z) from the cross-section targets."""
    t, u = z[0], np.asarray(z[1:], dtype=float)
    g = mf(t, u)
    th, uh = mf.action.point(g, t, u)
    got = mf.cross_section.coordinates(th, uh)
    return float(np.max(np.abs(got - mf.cross_section.targets(t, u))))


def check_equivariance(mf, z, g):
    """|| frame(g z) - frame(z) g^{-1} || (modulo sign for SL(2))."""
    action = mf.action
    t, u = z[0], np.asarray(z[1:], dtype=float)
    th, uh = action.point(g, t, u)
    lhs = mf(th, uh)
    rhs = action.compose(mf(t, u), action.inverse(g))
    return action.equal(lhs, rhs)


def solve_frame(action, cs, t, u, guess=None, tol=1e-13, max_iter=50):
    """Numeric moving frame: Newton on the normalisation equations g z = c.

    Used where no closed form is at hand. SL(2) parameters are solved in
    the chart (alpha, beta, gamma) with delta = (1 + beta gamma)/alpha.
    """
    if cs.r != action.dim:
        raise ParameterError("need one normalisation per group dimension")
    t = float(t)
    u = np.asarray(u, dtype=float)
    targets = cs.targets(t, u)
    sl2 = isinstance(action, SL2Base)
    g0 = action.identity() if guess is None else np.asarray(guess, dtype=float)
    x = g0[:3].copy() if sl2 else g0.copy()

    def full(x):
        if sl2:
            return np.array([x[0], x[1], x[2], (1 + x[1] * x[2]) / x[0]])
        return x

    def fun(x):
        th, uh = action.point(full(x), t, u)
        return cs.coordinates(th, uh) - targets

    for _ in range(max_iter):
        r = fun(x)
        if np.max(np.abs(r)) <= tol:
            return full(x)
        J = np.empty((r.size, x.size))
        for j in range(x.size):
            h = 1e-7 * (1 + abs(x[j]))
            xh = x.copy()
            xh[j] += h
            J[:, j] = (fun(xh) - r) / h
        dx = lu_solve(J, -r)
        # backtrack until the normalisation residual decreases
        norm = np.max(np.abs(r))
        for _ in range(30):
            try:
                if np.max(np.abs(fun(x + dx))) < norm:
                    break
            except DomainError:
                pass
            dx = 0.5 * dx
        x = x + dx
    raise NonConvergence("normalisation equations did not converge", max_iter, float(np.max(np.abs(r))))


def _nonzero(x):
    return np.isfinite(x) & (x != 0)


def exp_scaling_frame(action=None):
    """Cross-section {u = sign u, v = 0}: a = -v/u, b = t v/u - ln|u|."""

    def formula(t, u):
        return np.array([-u[1] / u[0], t * u[1] / u[0] - np.log(np.abs(u[0]))])

    cs = CrossSection(((1, SIGN), (2, 0.0)))
    return MovingFrame(action or ExponentialScaling(), cs, formula,
                       lambda t, u: _nonzero(u[0]), "exp-scaling")


def moebius_u_frame(action=None):
    """Cross-section {u = 0, v = 1, w = 0}, upper-sign branch (v > 0).

    alpha = v^-1/2, beta = -u v^-1/2, gamma = w v^-3/2 / 2,
    delta = v^1/2 - u w v^-3/2 / 2. The factor 1/2 in gamma and delta is
    what the normalisation w_hat = 0 requires.
    """

    def formula(t, u):
        U, V, W = u
        s = np.sqrt(V)
        return np.array([1 / s, -U / s, 0.5 * W / s**3, s - 0.5 * U * W / s**3])

    cs = CrossSection(((1, 0.0), (2, 1.0), (3, 0.0)))
    return MovingFrame(action or MoebiusDependent(), cs, formula,
                       lambda t, u: np.isfinite(u[1]) & (u[1] > 0), "moebius-u")


def dilation_translation_frame(action=None):
    """Cross-section {u = sign u, v = 0}.

    e^a = |u|/(u + t v/2)^2 and b = -|u| t^2 v / (2 (u + t v/2)^3), which
    solve both normalisation equations.
    """

    def formula(t, u):
        U, V = u
        m = U + 0.5 * t * V
        return np.array([np.log(np.abs(U) / m**2), -np.abs(U) * t**2 * V / (2 * m**3)])

    cs = CrossSection(((1, SIGN), (2, 0.0)))
    return MovingFrame(action or DilationTranslation(), cs, formula,
                       lambda t, u: _nonzero(u[0]) & _nonzero(u[0] + 0.5 * t * u[1]),
                       "dilation-translation")


def non_projectable_frame(action=None):
    """Cross-section {t = 0, u = sign u}: alpha = -t/u, beta = -ln|u|."""

    def formula(t, u):
        return np.array([-t / u[0], -np.log(np.abs(u[0]))])

    cs = CrossSection(((0, 0.0), (1, SIGN)))
    return MovingFrame(action or NonProjectable(), cs, formula,
                       lambda t, u: _nonzero(u[0]), "non-projectable")


def moebius_t_frame(action=None):
    """Cross-section {t = 0, u = 1, v = 0}: (1/u, -t/u, v, u - t v)."""

    def formula(t, u):
        U, V = u
        return np.array([1 / U, -t / U, V, U - t * V])

    cs = CrossSection(((0, 0.0), (1, 1.0), (2, 0.0)))
    return MovingFrame(action or MoebiusTime(), cs, formula,
                       lambda t, u: _nonzero(u[0]), "moebius-t")
