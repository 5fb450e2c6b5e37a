"""Error metrics, convergence studies, the solvability sweep and CSV reports.

Errors are measured against the exact solution of the catalogue problem:
the L2 error sqrt(sum_i int (U_i - u_i)^2 dt) by per-element Gauss
quadrature, and the maximal error over the mesh nodes.
"""

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np

from .errors import IntegrationFailure, ParameterError
from .galerkin import DEFAULT_QUAD_POINTS, NewtonConfig, TimeMesh, integrate
from .invariance import integrate_augmented
from .numerics import LagrangeBasis, gauss_legendre
from .schemes import get_problem, harmonic_oscillator, working_example

SCHEMES = ("standard", "invariant", "augmented", "naive")
L2_MATCHED = "matched"


def l2_points(q, exact_degree):
    """Gauss points exact for the squared error of degree 2 max(q+1, d).

    ``d`` is the degree a degree-estimating form compiler assigns to the
    exact solution. The published error tables follow this rule; for
    q = 2 on the working example it means 4 points, which changes the L2
    error by a factor 1.25 against a 16-point rule.
    """
    if exact_degree is None:
        return DEFAULT_QUAD_POINTS
    return int(math.ceil((2 * max(q + 1, exact_degree) + 1) / 2))


def l2_error(traj, exact, quad_pts=DEFAULT_QUAD_POINTS):
    """L2 error over the solved part of ``traj`` against ``exact(t) -> (u, ut)``."""
    rule = gauss_legendre(quad_pts)
    s = np.asarray(rule.nodes)
    w = np.asarray(rule.weights)
    B = LagrangeBasis(traj.q + 1).values(s)
    nodes = traj.mesh.nodes[:traj.n_solved + 1]
    t0, tau = nodes[:-1], np.diff(nodes)
    if tau.size == 0:
        return 0.0
    t = t0[:, None] + tau[:, None] * s[None, :]
    u = np.asarray(exact(t.ravel())[0]).reshape(traj.n_eq, tau.size, s.size)
    m = traj.q + 1
    total = 0.0
    for i in range(traj.n_eq):
        row = traj.values[i, :tau.size * m + 1]
        # element coefficient blocks (N, q+2) via strided indexing
        idx = np.arange(tau.size)[:, None] * m + np.arange(m + 1)[None, :]
        U = row[idx] @ B
        total += np.sum(tau * (((U - u[i]) ** 2) @ w))
    return float(np.sqrt(total))


def max_nodal_error(traj, exact):
    nodes = traj.mesh.nodes[:traj.n_solved + 1]
    err = traj.nodal_values()[:, :nodes.size] - exact(nodes)[0]
    return float(np.max(np.abs(err)))


def eoc(errors, taus):
    """log(e_{k+1}/e_k) / log(tau_{k+1}/tau_k) for consecutive pairs."""
    errors = np.asarray(errors, dtype=float)
    taus = np.asarray(taus, dtype=float)
    if errors.shape != taus.shape or errors.ndim != 1 or errors.size < 2:
        raise ParameterError("need equal-length sequences with at least two entries")
    if np.any(errors <= 0) or np.any(taus <= 0):
        raise ParameterError("errors and step sizes must be positive")
    return np.log(errors[1:] / errors[:-1]) / np.log(taus[1:] / taus[:-1])


@dataclass(frozen=True)
class ErrorMetrics:
    l2_error: float
    max_nodal_error: float


# ------------------------------------------------------------ configuration


@dataclass(frozen=True)
class RunConfig:
    """One experiment cell, or a level list when ``taus`` is given.

    ``l2_quad`` is a point count or "matched" (see l2_points).
    """

    problem: str
    scheme: str = "standard"
    q: int = 0
    tau: Optional[float] = None
    taus: Optional[tuple] = None
    t_end: Optional[float] = None
    t_start: Optional[float] = None
    quad: int = DEFAULT_QUAD_POINTS
    l2_quad: Union[int, str] = DEFAULT_QUAD_POINTS
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    guess: str = "constant"
    seed: int = 0
    out: Optional[str] = None

    def validate(self):
        if self.scheme not in SCHEMES:
            raise ParameterError(f"unknown scheme {self.scheme!r} (choose from {', '.join(SCHEMES)})")
        if self.q < 0:
            raise ParameterError("q must be non-negative")
        if not (self.l2_quad == L2_MATCHED or (isinstance(self.l2_quad, int) and 1 <= self.l2_quad <= 32)):
            raise ParameterError("l2_quad must be 1..32 or 'matched'")
        P = get_problem(self.problem)
        if self.scheme == "augmented":
            if P.frame is None or "standard" not in P.schemes:
                raise ParameterError(f"problem {self.problem!r} has no frame for the augmented solve")
        else:
            P.form(self.scheme, self.q)
        return P


def _mesh(P, cfg, tau):
    t_start = P.t_start if cfg.t_start is None else float(cfg.t_start)
    t_end = P.t_end if cfg.t_end is None else float(cfg.t_end)
    return TimeMesh.uniform(t_start, t_end, tau=tau, short_last=True)


def _l2_pts(P, cfg):
    return l2_points(cfg.q, P.exact_degree) if cfg.l2_quad == L2_MATCHED else int(cfg.l2_quad)


def run_trajectory(cfg, tau=None, P=None):
    """Integrate one cell; raises IntegrationFailure on a failed element."""
    P = P or cfg.validate()
    tau = cfg.tau if tau is None else tau
    if tau is None:
        raise ParameterError("a step size is required")
    mesh = _mesh(P, cfg, tau)
    if cfg.scheme == "augmented":
        wf = P.form("standard", cfg.q)
        return integrate_augmented(wf, P.action, P.frame.cross_section, mesh, P.initial,
                                   cfg.newton, cfg.quad, contact=P.contact)
    wf = P.form(cfg.scheme, cfg.q)
    return integrate(wf, mesh, P.initial, cfg.newton, cfg.quad, cfg.guess)


def run_metrics(cfg, tau=None, P=None):
    P = P or cfg.validate()
    if P.exact is None:
        raise ParameterError(f"problem {P.name!r} has no exact solution")
    traj = run_trajectory(cfg, tau, P)
    return traj, ErrorMetrics(l2_error(traj, P.exact, _l2_pts(P, cfg)), max_nodal_error(traj, P.exact))


# ------------------------------------------------------------ reports


CONVERGENCE_HEADER = ("problem", "scheme", "q", "tau", "n_elements", "max_nodal_error", "l2_error", "eoc")
FAILED = "failed"


@dataclass(frozen=True)
class ReportRow:
    problem: str
    scheme: str
    q: int
    tau: float
    n_elements: int
    max_nodal_error: Optional[float]
    l2_error: Optional[float]
    eoc: Optional[float] = None

    @property
    def failed(self):
        return self.l2_error is None


@dataclass
class ExperimentReport:
    rows: List[ReportRow] = field(default_factory=list)

    def block(self, problem, scheme, q):
        return [r for r in self.rows if (r.problem, r.scheme, r.q) == (problem, scheme, q)]


def _fmt(x, digits=3):
    return "" if x is None else f"{x:.{digits - 1}e}"


def emit_report(report):
    """CSV text; errors in 3 significant figures, EOC to 2 decimals."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CONVERGENCE_HEADER)
    for r in report.rows:
        err = (FAILED, FAILED) if r.failed else (_fmt(r.max_nodal_error), _fmt(r.l2_error))
        w.writerow([r.problem, r.scheme, r.q, repr(float(r.tau)), r.n_elements, *err,
                    "" if r.eoc is None else f"{r.eoc:.2f}"])
    return buf.getvalue()


def parse_report(text):
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader))
    if header != CONVERGENCE_HEADER:
        raise ParameterError(f"unexpected header {header!r}")
    rows = []
    for rec in reader:
        if not rec:
            continue
        problem, scheme, q, tau, n, nodal, l2, rate = rec
        failed = l2 == FAILED
        rows.append(ReportRow(problem, scheme, int(q), float(tau), int(n),
                              None if failed else float(nodal), None if failed else float(l2),
                              float(rate) if rate else None))
    return ExperimentReport(rows)


def rounded(report):
    """The report as it reads back from CSV (3 significant figures)."""
    return parse_report(emit_report(report))


def convergence_study(problem, scheme, qs, tau0, levels, t_end=None, l2_quad=DEFAULT_QUAD_POINTS,
                      quad=DEFAULT_QUAD_POINTS, newton=None, guess="constant", t_start=None):
    """Runs every (q, tau0 / 2^k) cell and fills in the EOC column."""
    if levels < 1 or tau0 <= 0:
        raise ParameterError("need tau0 > 0 and at least one level")
    report = ExperimentReport()
    for q in qs:
        cfg = RunConfig(problem, scheme, q, t_end=t_end, t_start=t_start, quad=quad, l2_quad=l2_quad,
                        newton=newton or NewtonConfig(), guess=guess)
        P = cfg.validate()
        prev = None
        for k in range(levels):
            tau = tau0 / 2**k
            n = _mesh(P, cfg, tau).n_elements
            try:
                _, met = run_metrics(cfg, tau, P)
            except IntegrationFailure:
                report.rows.append(ReportRow(problem, scheme, q, tau, n, None, None))
                prev = None
                continue
            rate = None
            if prev is not None and met.l2_error > 0 and prev[1] > 0:
                rate = float(eoc([prev[1], met.l2_error], [prev[0], tau])[0])
            report.rows.append(ReportRow(problem, scheme, q, tau, n, met.max_nodal_error, met.l2_error, rate))
            prev = (tau, met.l2_error)
    return report


# ------------------------------------------------------------ solvability


SWEEP_HEADER = ("scheme", "tau", "solved")
SWEEP_TAUS = (0.390625, 0.78125, 1.5625, 3.125, 6.25)


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    tau: float
    solved: bool
    failed_element: Optional[int] = None


def solvability_sweep(problem="noproject", schemes=("standard", "invariant"), taus=SWEEP_TAUS,
                      t_end=100.0, q=0, guess="constant", newton=None, **problem_kw):
    """Success iff the whole domain is marched without a Newton failure."""
    P = get_problem(problem, **problem_kw)
    rows = []
    for scheme in schemes:
        wf = P.form(scheme, q)
        for tau in taus:
            mesh = TimeMesh.uniform(P.t_start, t_end, tau=tau, short_last=True)
            try:
                integrate(wf, mesh, P.initial, newton, guess=guess)
                rows.append(SweepRow(scheme, float(tau), True))
            except IntegrationFailure as exc:
                rows.append(SweepRow(scheme, float(tau), False, exc.element))
    return rows


def largest_solvable(rows, scheme):
    """Largest tau solved by ``scheme`` (0 if none)."""
    taus = [r.tau for r in rows if r.scheme == scheme and r.solved]
    return max(taus) if taus else 0.0


def emit_sweep(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow([r.scheme, repr(r.tau), "yes" if r.solved else "no"])
    return buf.getvalue()


def parse_sweep(text):
    reader = csv.reader(io.StringIO(text))
    if tuple(next(reader)) != SWEEP_HEADER:
        raise ParameterError("unexpected sweep header")
    return [SweepRow(s, float(t), v == "yes") for s, t, v in reader if s]


# ------------------------------------------------------------ pointwise series


SERIES_HEADER = ("t", "component", "abs_error")


def pointwise_error_series(traj, exact, samples_per_element=10):
    """Rows (t, component, |U - u|) at the mesh nodes and ``samples_per_element``
    equispaced interior points of every solved element."""
    if samples_per_element < 0:
        raise ParameterError("samples_per_element must be non-negative")
    s = np.arange(1, samples_per_element + 2) / (samples_per_element + 1)
    basis = LagrangeBasis(traj.q + 1)
    B = basis.values(s)
    nodes = traj.mesh.nodes
    ts = [np.array([nodes[0]])]
    us = [traj.values[:, :1]]
    for n in range(traj.n_solved):
        t0, tau = nodes[n], nodes[n + 1] - nodes[n]
        ts.append(t0 + tau * s)
        vals = traj.element_values(n) @ B
        # the last sample is the shared node: take the stored value
        vals[:, -1] = traj.element_values(n)[:, -1]
        us.append(vals)
    t = np.concatenate(ts)
    U = np.hstack(us)
    err = np.abs(U - exact(t)[0])
    return [(float(t[k]), i, float(err[i, k])) for k in range(t.size) for i in range(U.shape[0])]


def emit_series(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SERIES_HEADER)
    for t, i, e in rows:
        w.writerow([repr(t), i, f"{e:.16e}"])
    return buf.getvalue()


def parse_series(text):
    reader = csv.reader(io.StringIO(text))
    if tuple(next(reader)) != SERIES_HEADER:
        raise ParameterError("unexpected series header")
    return [(float(t), int(i), float(e)) for t, i, e in reader]


def growth_series(scheme, q=0, tau=0.25, t_end=10.0, samples_per_element=10):
    """Error series of the exponential-growth working example.

    The solution grows like e^t, so Newton stalls for large ``t_end``
    unless tau shrinks; ``t_end`` caps the run.
    """
    if t_end > 15:
        warnings.warn("growth runs beyond t=15 need a very small tau for Newton to converge", stacklevel=2)
    P = working_example(growth=True)
    traj = integrate(P.form(scheme, q), TimeMesh.uniform(0.0, t_end, tau=tau), P.initial)
    return pointwise_error_series(traj, P.exact, samples_per_element)


# ------------------------------------------------------------ structural checks


def energy_drift(q, tau, t_end):
    """max_n |E(t_n) - E(0)| with E = (U^2 + V^2)/2 for u' = v, v' = -u."""
    P = harmonic_oscillator(t_end)
    traj = integrate(P.form("standard", q), TimeMesh.uniform(0.0, t_end, tau=tau), P.initial)
    u, v = traj.nodal_values()
    return float(np.max(np.abs(0.5 * (u**2 + v**2) - 0.5)))


def quadrature_equivalence(problem="working", q=0, tau=0.1, t_end=5.0, quad=None):
    """Max nodal discrepancy of the standard and invariant trajectories.

    With the default q+1-point quadrature both schemes coincide: the
    invariant rows are the standard rows times a function of (t, U) and
    a (q+1)-point rule only sees the quadrature nodes, where a square
    system forces all rows to vanish.
    """
    P = get_problem(problem)
    quad = q + 1 if quad is None else quad
    mesh = TimeMesh.uniform(P.t_start, t_end, tau=tau)
    a = integrate(P.form("standard", q), mesh, P.initial, quad=quad)
    b = integrate(P.form("invariant", q), mesh, P.initial, quad=quad)
    return float(np.max(np.abs(a.nodal_values() - b.nodal_values())))
