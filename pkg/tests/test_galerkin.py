import numpy as np
import pytest
import sympy as sp

from invcg.errors import EvaluationError, IntegrationFailure, NonConvergence, ParameterError, RangeError
from invcg.galerkin import (
    ElementContext,
    NewtonConfig,
    TimeMesh,
    WeakForm,
    assemble_element_residual,
    element_config,
    element_operators,
    evaluate,
    integrate,
    newton_solve_element,
)
from invcg.symbolic import rows_and_partials


def sym_form(rows_of, n_eq, q, **kw):
    t = sp.Symbol("t")
    u = sp.symbols(f"u0:{n_eq}")
    ut = sp.symbols(f"ut0:{n_eq}")
    res, jac = rows_and_partials(t, u, ut, rows_of(t, u, ut))
    return WeakForm(n_eq, q, res, jac, **kw)


def decay(lam, q, closed=True):
    wf = sym_form(lambda t, u, ut: [ut[0] - lam * u[0]], 1, q)
    if not closed:
        wf = WeakForm(1, q, wf.residual)
    return wf


def oscillator(q):
    return sym_form(lambda t, u, ut: [ut[0] - u[1], ut[1] + u[0]], 2, q)


def test_uniform_mesh():
    mesh = TimeMesh.uniform(0.0, 10.0, tau=0.15625)
    assert mesh.n_elements == 64
    assert np.max(np.abs(mesh.sizes - 0.15625)) <= 1e-12 * 10
    assert TimeMesh.uniform(1.0, 2.0, n_elements=4).nodes[1] == 1.25


@pytest.mark.parametrize("kw", [dict(tau=0.3), dict(tau=-1.0), dict()])
def test_uniform_mesh_rejects(kw):
    with pytest.raises(ParameterError):
        TimeMesh.uniform(0.0, 1.0, **kw)


def test_mesh_must_increase():
    with pytest.raises(ParameterError):
        TimeMesh([0.0, 1.0, 1.0])


def test_newton_config_validation():
    with pytest.raises(ParameterError):
        NewtonConfig(tolerance=0.0)


@pytest.mark.parametrize("closed", [True, False])
def test_trapezoidal_oracle(closed):
    lam, tau = -1.0, 0.1
    wf = decay(lam, 0, closed)
    ctx = ElementContext(0, np.array([0.0, tau]), np.array([[1.0, 1.0]]))
    out = newton_solve_element(wf, ctx)
    expected = (1 + lam * tau / 2) / (1 - lam * tau / 2)
    assert expected == pytest.approx(0.95 / 1.05, abs=1e-15)
    assert abs(out.values[0, -1] - expected) <= 1e-12


def test_trapezoidal_oracle_over_many_steps():
    lam, tau = -2.0, 0.05
    traj = integrate(decay(lam, 0), TimeMesh.uniform(0, 1, tau=tau), [1.0])
    factor = (1 + lam * tau / 2) / (1 - lam * tau / 2)
    expected = factor ** np.arange(21)
    np.testing.assert_allclose(traj.nodal_values()[0], expected, rtol=1e-12)


def test_residual_of_slope_three():
    wf = sym_form(lambda t, u, ut: [ut[0]], 1, 0)
    ctx = ElementContext(0, np.array([0.0, 1.0]), np.array([[0.0, 3.0]]))
    np.testing.assert_allclose(assemble_element_residual(wf, ctx), [3.0], atol=1e-14)


def test_oscillator_residual_is_tau_times_mean():
    wf = oscillator(0)
    tau = 0.1
    ctx = ElementContext(0, np.array([0.0, tau]), np.array([[1.0, 1.0], [0.0, 0.0]]))
    # constant guess: u_t = v_t = 0, integrand rows are (-v, u) = (0, 1)
    np.testing.assert_allclose(assemble_element_residual(wf, ctx), [0.0, tau], atol=1e-15)


def test_residual_vanishes_on_discrete_solution():
    wf = decay(-1.0, 1)
    mesh = TimeMesh.uniform(0, 0.5, tau=0.25)
    traj = integrate(wf, mesh, [1.0])
    for n in range(mesh.n_elements):
        assert np.max(np.abs(assemble_element_residual(wf, traj.element_context(n)))) <= 1e-12


@pytest.mark.parametrize("q", [0, 1, 2, 3])
def test_constant_solution(q):
    wf = sym_form(lambda t, u, ut: [ut[0]], 1, q)
    traj = integrate(wf, TimeMesh.uniform(0, 1, tau=0.25), [2.5])
    assert np.all(traj.values == 2.5)


@pytest.mark.parametrize("q", [0, 1, 2, 3])
def test_linear_reproduction_and_square_system(q):
    wf = sym_form(lambda t, u, ut: [ut[0] - u[1], ut[1]], 2, q)
    ctx = ElementContext(0, np.linspace(0, 0.2, q + 2), np.zeros((2, q + 2)))
    assert assemble_element_residual(wf, ctx).size == 2 * (q + 1)
    mesh = TimeMesh.uniform(0, 1, tau=0.2)
    traj = integrate(wf, mesh, [0.0, 1.0])
    for t in np.random.default_rng(q).uniform(0, 1, 50):
        u, ut = traj.evaluate(t)
        assert abs(u[0] - t) <= 1e-9 and abs(ut[0] - 1) <= 1e-9


@pytest.mark.parametrize("q", [1, 2, 3])
def test_polynomial_exactness(q):
    # u' = (q+1) t^q has the degree q+1 solution t^(q+1)
    wf = sym_form(lambda t, u, ut: [ut[0] - (q + 1) * t**q], 1, q)
    traj = integrate(wf, TimeMesh.uniform(0, 2, tau=0.5), [0.0])
    for t in np.random.default_rng(1).uniform(0, 2, 50):
        assert abs(traj.evaluate(t)[0][0] - t ** (q + 1)) <= 1e-9


def test_continuity_is_exact():
    traj = integrate(oscillator(1), TimeMesh.uniform(0, 1, tau=0.1), [1.0, 0.0])
    for n in range(traj.mesh.n_elements - 1):
        assert np.array_equal(traj.element_values(n)[:, -1], traj.element_values(n + 1)[:, 0])


@pytest.mark.parametrize("q", [0, 1])
def test_energy_conservation(q):
    traj = integrate(oscillator(q), TimeMesh.uniform(0, 10, tau=0.1), [1.0, 0.0])
    u, v = traj.nodal_values()
    assert np.max(np.abs(0.5 * (u**2 + v**2) - 0.5)) <= 1e-10


def test_fd_and_closed_form_jacobians_agree():
    closed = integrate(decay(-1.0, 2), TimeMesh.uniform(0, 1, tau=0.1), [1.0])
    fd = integrate(decay(-1.0, 2, closed=False), TimeMesh.uniform(0, 1, tau=0.1), [1.0])
    np.testing.assert_allclose(closed.values, fd.values, atol=1e-12)


def test_extrapolated_guess_gives_same_solution():
    mesh = TimeMesh.uniform(0, 1, tau=0.1)
    a = integrate(oscillator(1), mesh, [1.0, 0.0])
    b = integrate(oscillator(1), mesh, [1.0, 0.0], guess="extrapolate")
    np.testing.assert_allclose(a.values, b.values, atol=1e-12)


def test_quadrature_insensitivity():
    mesh = TimeMesh.uniform(0, 2, tau=0.25)
    a = integrate(oscillator(1), mesh, [1.0, 0.0], quad=16)
    b = integrate(oscillator(1), mesh, [1.0, 0.0], quad=20)
    assert np.max(np.abs(a.values - b.values)) <= 1e-11


def test_evaluate_conventions():
    wf = sym_form(lambda t, u, ut: [ut[0] - u[1], ut[1]], 2, 0)
    traj = integrate(wf, TimeMesh.uniform(0, 1, tau=0.25), [0.0, 1.0])
    u, ut = evaluate(traj, 0.5)
    assert u[0] == pytest.approx(0.5) and ut[0] == pytest.approx(1.0)
    # shared node: stored coefficient
    assert evaluate(traj, 0.25)[0][0] == traj.nodal_values()[0, 1]
    assert evaluate(traj, 0.0)[0][0] == 0.0
    with pytest.raises(RangeError):
        evaluate(traj, 1.5)


def test_evaluate_constant():
    wf = sym_form(lambda t, u, ut: [ut[0]], 1, 1)
    traj = integrate(wf, TimeMesh.uniform(0, 1, tau=0.5), [3.0])
    u, ut = traj.evaluate(0.7)
    assert u[0] == pytest.approx(3.0) and ut[0] == pytest.approx(0.0)


def test_non_finite_residual_is_evaluation_error():
    wf = sym_form(lambda t, u, ut: [ut[0] - 1 / u[0]], 1, 0)
    ctx = ElementContext(0, np.array([0.0, 0.1]), np.array([[0.0, 0.0]]))
    with pytest.raises(EvaluationError) as info:
        assemble_element_residual(wf, ctx)
    assert info.value.t is not None


def test_blow_up_reports_failure_with_partial_trajectory():
    # u' = u^2 from u=1 blows up at t=1
    wf = sym_form(lambda t, u, ut: [ut[0] - u[0] ** 2], 1, 0)
    with pytest.raises(IntegrationFailure) as info:
        integrate(wf, TimeMesh.uniform(0, 4, tau=0.25), [1.0])
    fail = info.value
    assert 0 < fail.element < 16
    assert fail.trajectory.n_solved == fail.element
    assert isinstance(fail.cause, NonConvergence)
    assert np.all(np.isfinite(fail.trajectory.nodal_values()[:, :fail.element + 1]))


def test_solution_dependent_test_weights_default_equivalent():
    ops = element_operators(1)
    base = oscillator(1)

    def weights(t, u, test_t, test_u):
        return ops.W

    wf = WeakForm(2, 1, base.residual, test_weights=weights)
    mesh = TimeMesh.uniform(0, 1, tau=0.1)
    np.testing.assert_allclose(integrate(wf, mesh, [1.0, 0.0]).values,
                               integrate(base, mesh, [1.0, 0.0]).values, atol=1e-12)


def test_bad_initial_length():
    with pytest.raises(ParameterError):
        integrate(oscillator(0), TimeMesh.uniform(0, 1, tau=0.5), [1.0])


def test_newton_accepts_round_off_floor():
    from invcg.galerkin import newton

    # badly scaled residual with 1e-11 rounding noise: the absolute tolerance
    # is out of reach but the steps shrink to round-off
    def fun(x):
        noise = np.random.default_rng(abs(hash(x.tobytes())) % 2**32).uniform(-1, 1)
        return np.array([1e5 * (x[0] - 1.0) + 1e-11 * (1.0 + noise)])

    x, _ = newton(fun, np.array([0.0]), NewtonConfig(), jac=lambda x: np.array([[1e5]]))
    assert abs(x[0] - 1.0) <= 1e-15


def test_newton_floor_does_not_hide_real_stagnation():
    from invcg.galerkin import newton

    # |x| + 1e-3 has no root; tiny steps do not make it converge
    def fun(x):
        return np.array([x[0] ** 2 + 1e-3])

    with pytest.raises(NonConvergence):
        newton(fun, np.array([1e-20]), NewtonConfig(), jac=lambda x: np.array([[2 * x[0] + 1e-300]]))


def test_uniform_mesh_short_last_element():
    mesh = TimeMesh.uniform(1.0, 1000.0, tau=0.15625, short_last=True)
    assert mesh.n_elements == 6394
    assert mesh.t_end == 1000.0
    assert np.allclose(mesh.sizes[:-1], 0.15625)
    assert 0 < mesh.sizes[-1] < 0.15625
    # dividing steps are unaffected
    assert TimeMesh.uniform(0, 1, tau=0.25, short_last=True).n_elements == 4


def test_element_tolerance_is_on_the_reference_element():
    cfg = NewtonConfig(tolerance=1e-12)
    assert element_config(cfg, 0.25).tolerance == pytest.approx(2.5e-13)
    # never looser than the configured bound on the element integral
    assert element_config(cfg, 6.25).tolerance == 1e-12
    assert element_config(cfg, 0.25).max_iterations == cfg.max_iterations


def test_solved_element_meets_scaled_tolerance():
    t, u, ut = sp.Symbol("t"), sp.symbols("u0:1"), sp.symbols("ut0:1")
    res, jac = rows_and_partials(t, u, ut, [ut[0] + u[0] ** 3])
    wf = WeakForm(1, 1, res, jac)
    ctx = ElementContext(0, np.array([0.0, 0.025, 0.05]), np.ones((1, 3)))
    solved = newton_solve_element(wf, ctx)
    assert np.max(np.abs(assemble_element_residual(wf, solved))) <= 0.05 * 1e-12
