"""Property suite: structural claims checked numerically on seeded samples.

Each check returns a PropertyResult; ``run_all`` collects them for the CLI
and the acceptance tests.
"""

from dataclasses import dataclass

import numpy as np
import sympy as sp

from .galerkin import ElementContext, WeakForm, newton_solve_element
from .groups import check_cross_section, check_equivariance
from .experiments import RunConfig, convergence_study, energy_drift, quadrature_equivalence, run_trajectory
from .invariance import (
    AugmentedForm,
    SmoothCurve,
    admissible_samples,
    invariance_defect,
    invariantize_pointwise,
)
from .schemes import T, get_problem, linear_second_order
from .symbolic import rows_and_partials

FRAME_PROBLEMS = ("working", "schwarzian", "quasilinear", "noproject", "naive")

# generic curves (u_j,t != u_{j+1}) inside each problem's admissible set
_CURVES = {
    "working": ([2 + sp.sin(T), -1 + T / 2 + T**2], (0.0, 1.0)),
    "schwarzian": ([sp.atan(T), 1 + T / 3 + sp.cos(T) / 4, T**2 - sp.Rational(1, 2)], (0.2, 0.8)),
    "quasilinear": ([1 + T / 3 + sp.sin(T) / 5, 1 - T / 4], (1.0, 1.5)),
    "noproject": ([1 + T / 3 + T**2 / 7], (0.2, 0.7)),
    "naive": ([1 + T / 3 + T**2 / 7, sp.cos(T)], (0.2, 0.7)),
}

def _frame_point(name, rng):
    """A state (t, u...) inside the named problem's frame domain."""
    sign = rng.choice([-1.0, 1.0])
    if name == "working":
        return np.array([rng.uniform(-2, 2), sign * rng.uniform(0.2, 3), rng.uniform(-2, 2)])
    if name == "schwarzian":
        return np.array([rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.3, 3), rng.uniform(-2, 2)])
    if name == "quasilinear":
        return np.array([rng.uniform(1, 5), sign * rng.uniform(0.2, 3), rng.uniform(-2, 2)])
    if name == "noproject":
        return np.array([rng.uniform(-3, 3), sign * rng.uniform(0.2, 3)])
    return np.array([rng.uniform(-1, 1), sign * rng.uniform(0.2, 3), rng.uniform(-2, 2)])


def _well_inside(name, mf, t, u):
    if not mf.admissible(np.atleast_1d(t), np.reshape(u, (-1, 1)))[0]:
        return False
    # the dilation frame divides by u + t v / 2; keep clear of its zero set
    return name != "quasilinear" or abs(u[0] + 0.5 * t * u[1]) > 0.2


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark} {self.name}: {self.value:.3e} (threshold {self.threshold:.1e}) {self.detail}".rstrip()


def generic_curve(name):
    exprs, dom = _CURVES[name]
    return SmoothCurve.from_exprs(exprs, dom, T)


def frame_defects(draws=100, seed=0, radius=0.3):
    """Worst cross-section and equivariance defects over seeded draws."""
    rng = np.random.default_rng(seed)
    worst_cs, worst_eq = 0.0, 0.0
    for name in FRAME_PROBLEMS:
        P = get_problem(name)
        mf = P.frame
        done = 0
        while done < draws:
            z = _frame_point(name, rng)
            g = P.action.random_element(rng, radius)
            th, uh = P.action.point(g, z[0], z[1:])
            if not (_well_inside(name, mf, z[0], z[1:]) and _well_inside(name, mf, th, uh)):
                continue
            eq = check_equivariance(mf, z, g)
            worst_cs = max(worst_cs, check_cross_section(mf, z))
            worst_eq = max(worst_eq, eq)
            done += 1
    return worst_cs, worst_eq


def scheme_defects(samples=20, seed=1):
    """(worst invariant-scheme defect, smallest best-witness of standard schemes)."""
    rng = np.random.default_rng(seed)
    worst_inv, weakest_std = 0.0, np.inf
    for name in FRAME_PROBLEMS:
        P = get_problem(name)
        curve = generic_curve(name)
        gs = admissible_samples(P.action, rng, samples, radius=0.3)
        for scheme in P.schemes:
            for q in (0, 1):
                allowed = P.q_range.get(scheme)
                if allowed is not None and q not in allowed:
                    continue
                d = invariance_defect(P.form(scheme, q), P.action, curve, curve.domain, gs, contact=P.contact)
                if scheme == "invariant":
                    worst_inv = max(worst_inv, d)
                else:
                    weakest_std = min(weakest_std, d)
    return worst_inv, weakest_std


def pointwise_rows(states=100, seed=2):
    """Worst relative mismatch of pointwise invariantisation against the printed rows."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for name in ("working", "schwarzian", "noproject"):
        P = get_problem(name)
        pw = invariantize_pointwise(P.form("standard", 0), P.action, P.frame, P.contact)
        t = rng.uniform(0.0, 10.0, states)
        u = rng.uniform(0.3, 2.0, (P.n_eq, states))
        ut = rng.normal(size=(P.n_eq, states))
        want = P.form("invariant", 0).residual(t, u, ut)
        got = pw.residual(t, u, ut)
        worst = max(worst, float(np.max(np.abs(got - want) / np.abs(want))))
    return worst


def superposition_defect(seed=3, eps_range=10.0):
    """Residual change of the y'' = f scheme under (U, V) -> (U + e1 + e2 t, V + e2)."""
    P = linear_second_order()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for q in (0, 1, 2):
        wf = P.form("standard", q)
        t = rng.uniform(0, 1, 50)
        u, ut = rng.normal(size=(2, 50)), rng.normal(size=(2, 50))
        base = wf.residual(t, u, ut)
        for e1, e2 in rng.uniform(-eps_range, eps_range, (10, 2)):
            g = np.array([e1, e2])
            uh = P.action.point(g, t, u)[1]
            dh = ut + np.array([np.full_like(t, e2), np.zeros_like(t)])
            worst = max(worst, float(np.max(np.abs(wf.residual(t, uh, dh) - base))))
    return worst


def trapezoidal_oracle(lam=-1.0, tau=0.1):
    t, u, ut = sp.Symbol("t"), sp.symbols("u0:1"), sp.symbols("ut0:1")
    res, jac = rows_and_partials(t, u, ut, [ut[0] - lam * u[0]])
    ctx = ElementContext(0, np.array([0.0, tau]), np.array([[1.0, 1.0]]))
    got = newton_solve_element(WeakForm(1, 0, res, jac), ctx).values[0, -1]
    return abs(got - (1 + lam * tau / 2) / (1 - lam * tau / 2))


def augmented_checks(seed=5):
    """(EOC at the finest q=0 level, worst invariance defect on solved elements)."""
    report = convergence_study("working", "augmented", [0], 0.15625, 4, t_end=10.0)
    rate = report.rows[-1].eoc
    P = get_problem("working")
    traj = run_trajectory(RunConfig("working", "augmented", 0, tau=0.1, t_end=10.0))
    aug = AugmentedForm(P.form("standard", 0), P.action, P.frame.cross_section, P.contact)
    gs = admissible_samples(P.action, np.random.default_rng(seed), 10)
    worst = 0.0
    for n in (0, 33, 66, 99):
        ctx = traj.element_context(n)
        worst = max(worst, invariance_defect(aug, P.action, SmoothCurve.from_element(ctx), ctx, gs))
    return rate, worst


def run_all():
    out = []
    cs, eq = frame_defects()
    out.append(PropertyResult("frame cross-section", cs <= 1e-9, cs, 1e-9, "5 frames x 100 draws"))
    out.append(PropertyResult("frame equivariance", eq <= 1e-9, eq, 1e-9, "5 frames x 100 draws"))
    inv, std = scheme_defects()
    out.append(PropertyResult("invariant scheme defect", inv <= 1e-9, inv, 1e-9))
    out.append(PropertyResult("standard scheme defect witnessed", std >= 1e-3, std, 1e-3, "(lower bound)"))
    pw = pointwise_rows()
    out.append(PropertyResult("pointwise invariantisation rows", pw <= 1e-11, pw, 1e-11, "relative"))
    sup = superposition_defect()
    out.append(PropertyResult("linear superposition", sup <= 1e-12, sup, 1e-12))
    drift = max(energy_drift(q, 0.1, 100.0) for q in (0, 1))
    out.append(PropertyResult("oscillator energy drift", drift <= 1e-9, drift, 1e-9, "q=0,1 T=100"))
    qe = max(quadrature_equivalence("working", q, 0.1, 5.0) for q in (0, 1))
    out.append(PropertyResult("quadrature equivalence", qe <= 1e-9, qe, 1e-9, "q+1 points"))
    tr = trapezoidal_oracle()
    out.append(PropertyResult("trapezoidal oracle", tr <= 1e-12, tr, 1e-12))
    rate, aug = augmented_checks()
    out.append(PropertyResult("augmented EOC", abs(rate - 2.0) <= 0.05, abs(rate - 2.0), 0.05, f"eoc={rate:.3f}"))
    out.append(PropertyResult("augmented invariance defect", aug <= 1e-9, aug, 1e-9))
    return out
