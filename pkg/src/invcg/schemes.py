"""Catalogue of model problems with their standard and invariant weak forms.

Each problem is written once in sympy (rows of the first-order system in
t, u_i and u_i,t) and lambdified into vectorised residuals with closed-form
partials, so every scheme gets an exact Newton Jacobian.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Optional

import numpy as np
import sympy as sp

from .errors import ParameterError
from .galerkin import WeakForm, element_operators
from .groups import (
    DilationTranslation,
    ExponentialScaling,
    HomogeneousShift,
    MoebiusDependent,
    MoebiusTime,
    NonProjectable,
    dilation_translation_frame,
    exp_scaling_frame,
    moebius_t_frame,
    moebius_u_frame,
    non_projectable_frame,
)
from .symbolic import rows_and_partials, vectorize_exprs

T = sp.Symbol("t")


def symbols(n):
    return sp.symbols(f"u0:{n}"), sp.symbols(f"ut0:{n}")


@dataclass
class SymbolicSystem:
    """Rows in (t, u, u_t) and their lambdified residual/partials."""

    rows: list
    n_eq: int

    def __post_init__(self):
        u, ut = symbols(self.n_eq)
        self.u, self.ut = u, ut
        self.residual, self.partials = rows_and_partials(T, u, ut, self.rows)

    def form(self, q, name="", step_halvings=0):
        return WeakForm(self.n_eq, q, self.residual, self.partials, name=name, step_halvings=step_halvings)


@dataclass
class ProblemInstance:
    """One model problem.

    ``schemes`` maps a scheme name to a factory q -> WeakForm; ``q_range``
    optionally restricts the admissible degrees per scheme. ``exact(t)``
    returns (u, u_t) of shape (n_eq, p). ``ode`` is the continuous system
    (residual callable) used for consistency and symmetry checks.

    ``exact_degree`` is the polynomial degree a degree-estimating form
    compiler assigns to the exact solution (exp counts as 3, a quotient as
    the sum of the degrees). It selects the quadrature of the "matched" L2
    error, see experiments.l2_points.
    """

    name: str
    n_eq: int
    t_start: float
    t_end: float
    initial: np.ndarray
    schemes: Dict[str, Callable]
    ode: Callable
    exact: Optional[Callable] = None
    action: object = None
    frame: object = None
    admissible: Optional[Callable] = None
    q_range: Dict[str, tuple] = field(default_factory=dict)
    rows: Dict[str, list] = field(default_factory=dict)
    contact: bool = False
    exact_degree: Optional[int] = None
    notes: str = ""

    def form(self, scheme, q):
        if scheme not in self.schemes:
            raise ParameterError(f"problem {self.name!r} has no {scheme!r} scheme "
                                 f"(available: {', '.join(sorted(self.schemes))})")
        allowed = self.q_range.get(scheme)
        if allowed is not None and q not in allowed:
            raise ParameterError(f"{self.name}/{scheme} supports q in {allowed}, got {q}")
        if q < 0:
            raise ParameterError("q must be non-negative")
        return self.schemes[scheme](q)

    @property
    def cross_section(self):
        return None if self.frame is None else self.frame.cross_section


def _exact(exprs):
    """Vectorised exact solution and derivative from sympy expressions in T."""
    vals = vectorize_exprs((T,), exprs)
    ders = vectorize_exprs((T,), [sp.diff(e, T) for e in exprs])

    def exact(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return vals(t), ders(t)

    return exact


def _nonzero(x):
    return np.isfinite(x) & (x != 0)


# ------------------------------------------------------------ working example


@lru_cache(maxsize=None)
def _working_systems():
    (U, V), (Ut, Vt) = symbols(2)
    std = [Vt - V**2 / U, Ut - V]
    inv = [r / U for r in std]
    return SymbolicSystem(std, 2), SymbolicSystem(inv, 2)


def working_example(growth=False):
    """y'' - y'^2/y = 0 as u' = v, v' = v^2/u, with symmetry u -> e^{at+b} u.

    Decay data (1, -1) has u = e^{-t}. The growth data (-1, -1) has
    u = v = -e^{t}; Newton on either scheme struggles for large t because
    the solution grows exponentially, so tau must shrink as T grows.
    """
    std, inv = _working_systems()
    if growth:
        exact = _exact([-sp.exp(T), -sp.exp(T)])
        initial, t_end, name = np.array([-1.0, -1.0]), 10.0, "working-growth"
    else:
        exact = _exact([sp.exp(-T), -sp.exp(-T)])
        initial, t_end, name = np.array([1.0, -1.0]), 10.0, "working"
    action = ExponentialScaling()
    return ProblemInstance(
        name=name,
        n_eq=2,
        t_start=0.0,
        t_end=t_end,
        initial=initial,
        schemes={
            "standard": lambda q: std.form(q, "working/standard"),
            "invariant": lambda q: inv.form(q, "working/invariant"),
        },
        ode=std.residual,
        exact=exact,
        action=action,
        frame=exp_scaling_frame(action),
        admissible=lambda t, u: _nonzero(u[0]),
        rows={"standard": std.rows, "invariant": inv.rows},
        contact=True,
        exact_degree=3,
    )


# ------------------------------------------------------------ Schwarzian


@lru_cache(maxsize=None)
def _schwarzian_systems(F=0):
    (U, V, W), (Ut, Vt, Wt) = symbols(3)
    F = sp.sympify(F)
    std = [Wt / V - sp.Rational(3, 2) * (W / V) ** 2 - F, Ut - V, Vt - W]
    inv = [
        Wt / V - 2 * Vt * W / V**2 + sp.Rational(1, 2) * Ut * W**2 / V**3 - F,
        (Ut - V) / V,
        (Vt - W) / V + W / V**3 * (V**2 - V * Ut),
    ]
    return SymbolicSystem(std, 3), SymbolicSystem(inv, 3)


def schwarzian():
    """y'''/y' - 3/2 (y''/y')^2 = F with F = 0, invariant under Moebius maps of y."""
    std, inv = _schwarzian_systems(0)
    action = MoebiusDependent()
    return ProblemInstance(
        name="schwarzian",
        n_eq=3,
        t_start=0.0,
        t_end=1000.0,
        initial=np.array([1.0, -1.0, 1.0]),
        schemes={
            "standard": lambda q: std.form(q, "schwarzian/standard"),
            "invariant": lambda q: inv.form(q, "schwarzian/invariant"),
        },
        ode=std.residual,
        exact=_exact([4 / (2 + T) - 1, -4 / (2 + T) ** 2, 8 / (2 + T) ** 3]),
        action=action,
        frame=moebius_u_frame(action),
        admissible=lambda t, u: _nonzero(u[1]),
        rows={"standard": std.rows, "invariant": inv.rows},
        exact_degree=3,
    )


# ------------------------------------------------------------ quasi-linear


@lru_cache(maxsize=None)
def _quasilinear_systems():
    (U, V), (Ut, Vt) = symbols(2)
    root = sp.sqrt(2 * T * U + T**2 * Ut)
    std = [T**2 * Vt + 4 * T * Ut + 2 * U - root, Ut - V]
    m = U + T * V / 2
    inv = [
        U / m**4 * (U * (T**2 * Vt + 4 * T * Ut + 2 * U - root) - T**2 * V * (V - Ut)),
        (Ut - V) / U,
    ]
    return SymbolicSystem(std, 2), SymbolicSystem(inv, 2)


def quasi_linear():
    """t^2 y'' + 4 t y' + 2 y = (2 t y + t^2 y')^{1/2} on [1, 1000].

    The first row keeps U_t inside the square root and the 4 t U_t term as
    in the mixed form used for the symmetry computation. Newton steps that
    make the square-root argument negative are halved (up to 10 times).
    """
    std, inv = _quasilinear_systems()
    action = DilationTranslation()
    return ProblemInstance(
        name="quasilinear",
        n_eq=2,
        t_start=1.0,
        t_end=1000.0,
        initial=np.array([1.0, 2.0]),
        schemes={
            "standard": lambda q: std.form(q, "quasilinear/standard", step_halvings=10),
            "invariant": lambda q: inv.form(q, "quasilinear/invariant", step_halvings=10),
        },
        ode=std.residual,
        exact=_exact([(T**3 + 9 * T**2 + 27 * T - 25) / (12 * T**2), (T**3 - 27 * T + 50) / (12 * T**3)]),
        action=action,
        frame=dilation_translation_frame(action),
        admissible=lambda t, u: _nonzero(u[0]) & _nonzero(u[0] + 0.5 * t * u[1]),
        rows={"standard": std.rows, "invariant": inv.rows},
        exact_degree=5,
    )


# ------------------------------------------------------------ non-projectable


@lru_cache(maxsize=None)
def _noproject_systems(C):
    (U,), (Ut,) = symbols(1)
    C = sp.nsimplify(C)
    std = [Ut / (U - T * Ut) - C]
    inv = [(Ut - C * (U - T * Ut)) / U]
    return SymbolicSystem(std, 1), SymbolicSystem(inv, 1)


def frame_lifted_weights(q):
    """Test weights M_i for the non-projectable action at degree q.

    The Lagrange basis on the images t_j + alpha U(t_j) of the test nodes,
    evaluated at t + alpha U(t), with the frame value alpha = -t/U(t). For
    q = 1 these are the printed M_1, M_2; they equal the Lagrange values at
    the element endpoints.
    """
    ops = element_operators(q)

    def weights(t, U, test_t, test_u):
        if q == 0:
            return ops.W
        alpha = -t / U[0]
        nodes = test_t[:, None] + alpha[None, :] * test_u[0][:, None]
        # evaluation point t + alpha U(t), i.e. 0 up to rounding
        x = t + alpha * U[0]
        out = np.ones((q + 1, t.size))
        for i in range(q + 1):
            for j in range(q + 1):
                if j != i:
                    out[i] *= (x - nodes[j]) / (nodes[i] - nodes[j])
        return out

    return weights


def non_projectable(C=1.0, y0=0.5, t_end=100.0):
    """y'/(y - t y') = C with the non-projectable symmetry (t + alpha y, e^beta y).

    Exact solution y0 (C t + 1). The invariant scheme at q >= 1 uses the
    frame-lifted test weights; its integrand (U_t/(U - tU_t) - C)(1 + alpha U_t)
    becomes (U_t - C (U - t U_t))/U once alpha = -t/U(t) is substituted.
    """
    std, inv = _noproject_systems(float(C))

    def invariant(q):
        if q == 0:
            return inv.form(0, "noproject/invariant")
        return WeakForm(1, q, inv.residual, test_weights=frame_lifted_weights(q), name="noproject/invariant")

    action = NonProjectable()
    return ProblemInstance(
        name="noproject",
        n_eq=1,
        t_start=0.0,
        t_end=float(t_end),
        initial=np.array([float(y0)]),
        schemes={"standard": lambda q: std.form(q, "noproject/standard"), "invariant": invariant},
        ode=std.residual,
        exact=_exact([y0 * (C * T + 1)]),
        action=action,
        frame=non_projectable_frame(action),
        admissible=lambda t, u: _nonzero(u[0]),
        rows={"standard": std.rows, "invariant": inv.rows},
    )


# ------------------------------------------------------------ naive example


@lru_cache(maxsize=None)
def _naive_systems():
    (U, V), (Ut, Vt) = symbols(2)
    ode = [Vt - U**-3, Ut - V]
    naive = [Vt - U, Ut - V]
    inv = [Vt * U - U**-2 + V * (V - Ut), (Ut - V) / U]
    return SymbolicSystem(ode, 2), SymbolicSystem(naive, 2), SymbolicSystem(inv, 2)


def naive_linearised(t_end=10.0):
    """y'' = y^-3 with the SL(2) action on t; the naive scheme replaces y^-3 by y.

    The naive rows are deliberately inconsistent; invariantising them with
    the frame (1/U, -t/U, V, U - tV) restores consistency. Only q = 0 is
    provided for the naive and invariant schemes; "standard" is the plain
    discretisation of the consistent system, for reference.
    """
    ode, naive, inv = _naive_systems()
    action = MoebiusTime()
    return ProblemInstance(
        name="naive",
        n_eq=2,
        t_start=0.0,
        t_end=float(t_end),
        initial=np.array([np.sqrt(2.0), 1 / np.sqrt(2.0)]),
        schemes={
            "naive": lambda q: naive.form(q, "naive/naive"),
            "invariant": lambda q: inv.form(q, "naive/invariant"),
            "standard": lambda q: ode.form(q, "naive/standard"),
        },
        ode=ode.residual,
        exact=_exact([sp.sqrt(T**2 + 2 * T + 2), (T + 1) / sp.sqrt(T**2 + 2 * T + 2)]),
        action=action,
        frame=moebius_t_frame(action),
        admissible=lambda t, u: _nonzero(u[0]),
        q_range={"naive": (0,), "invariant": (0,)},
        rows={"naive": naive.rows, "invariant": inv.rows, "standard": ode.rows},
    )


# ------------------------------------------------------------ linear second order


def _function_triple(expr):
    expr = sp.sympify(expr)
    f = vectorize_exprs((T,), [expr, sp.diff(expr, T), sp.diff(expr, T, 2)])

    def triple(t):
        out = f(np.asarray(t, dtype=float))
        return out[0], out[1], out[2]

    return triple


def linear_second_order(p=0, q_coef=0, f=2, alpha=1, gamma=T, initial=(0.0, 0.0), exact=T**2, t_end=1.0):
    """y'' + p y' + q y = f, invariant under adding homogeneous solutions.

    ``alpha`` and ``gamma`` (sympy expressions in t) must solve the
    homogeneous equation; ``exact`` is the solution for ``initial``.
    """
    p, q_coef, f = (sp.sympify(x) for x in (p, q_coef, f))
    alpha, gamma = sp.sympify(alpha), sp.sympify(gamma)
    for h in (alpha, gamma):
        if sp.simplify(sp.diff(h, T, 2) + p * sp.diff(h, T) + q_coef * h) != 0:
            raise ParameterError(f"{h} is not a homogeneous solution")
    (U, V), (Ut, Vt) = symbols(2)
    system = SymbolicSystem([Vt + p * V + q_coef * U - f, Ut - V], 2)
    action = HomogeneousShift(_function_triple(alpha), _function_triple(gamma))
    exact_fn = None
    if exact is not None:
        exact = sp.sympify(exact)
        exact_fn = _exact([exact, sp.diff(exact, T)])
    return ProblemInstance(
        name="linear2",
        n_eq=2,
        t_start=0.0,
        t_end=float(t_end),
        initial=np.asarray(initial, dtype=float),
        schemes={
            "standard": lambda q: system.form(q, "linear2/standard"),
            "invariant": lambda q: system.form(q, "linear2/invariant"),
        },
        ode=system.residual,
        exact=exact_fn,
        action=action,
        rows={"standard": system.rows, "invariant": system.rows},
        notes="the standard scheme is already invariant",
    )


# ------------------------------------------------------------ harmonic oscillator


@lru_cache(maxsize=None)
def _oscillator_system():
    (U, V), (Ut, Vt) = symbols(2)
    return SymbolicSystem([Ut - V, Vt + U], 2)


def harmonic_oscillator(t_end=100.0):
    system = _oscillator_system()
    return ProblemInstance(
        name="oscillator",
        n_eq=2,
        t_start=0.0,
        t_end=float(t_end),
        initial=np.array([1.0, 0.0]),
        schemes={"standard": lambda q: system.form(q, "oscillator/standard")},
        ode=system.residual,
        exact=_exact([sp.cos(T), -sp.sin(T)]),
        rows={"standard": system.rows},
    )


CATALOG = {
    "working": working_example,
    "working-growth": lambda: working_example(growth=True),
    "schwarzian": schwarzian,
    "quasilinear": quasi_linear,
    "noproject": non_projectable,
    "naive": naive_linearised,
    "linear2": linear_second_order,
    "oscillator": harmonic_oscillator,
}


def get_problem(name, **kwargs):
    try:
        factory = CATALOG[name]
    except KeyError:
        raise ParameterError(f"unknown problem {name!r} (known: {', '.join(CATALOG)})") from None
    return factory(**kwargs)
