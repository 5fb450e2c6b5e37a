import numpy as np
import pytest
import sympy as sp

from invcg.errors import ParameterError
from invcg.galerkin import TimeMesh, integrate
from invcg.groups import prolong
from invcg.schemes import CATALOG, T, frame_lifted_weights, get_problem, linear_second_order

WITH_EXACT = ["working", "working-growth", "schwarzian", "quasilinear", "noproject", "naive", "linear2", "oscillator"]
CONSISTENT = {
    "working": ["standard", "invariant"],
    "working-growth": ["standard", "invariant"],
    "schwarzian": ["standard", "invariant"],
    "quasilinear": ["standard", "invariant"],
    "noproject": ["standard", "invariant"],
    "naive": ["standard", "invariant"],
    "linear2": ["standard", "invariant"],
    "oscillator": ["standard"],
}


def random_times(P, n=100, seed=0):
    return np.random.default_rng(seed).uniform(P.t_start, P.t_end, n)


@pytest.mark.parametrize("name", WITH_EXACT)
def test_exact_solution_solves_ode(name):
    P = get_problem(name)
    t = random_times(P)
    u, ut = P.exact(t)
    scale = np.maximum(1.0, np.abs(u).max(axis=0))
    assert np.max(np.abs(P.ode(t, u, ut)) / scale) <= 1e-10


@pytest.mark.parametrize("name", WITH_EXACT)
def test_exact_initial_values(name):
    P = get_problem(name)
    u, _ = P.exact(P.t_start)
    np.testing.assert_allclose(u[:, 0], P.initial, atol=1e-14)


@pytest.mark.parametrize("name,scheme", [(n, s) for n, ss in CONSISTENT.items() for s in ss])
def test_consistency_of_scheme_rows(name, scheme):
    P = get_problem(name)
    wf = P.form(scheme, 0)
    t = random_times(P, seed=1)
    u, ut = P.exact(t)
    scale = np.maximum(1.0, np.abs(u).max(axis=0))
    assert np.max(np.abs(wf.residual(t, u, ut)) / scale) <= 1e-10


def test_naive_scheme_is_inconsistent():
    P = get_problem("naive")
    u, ut = P.exact(0.0)
    rows = P.form("naive", 0).residual(np.zeros(1), u, ut)
    assert np.max(np.abs(rows)) >= 0.1


def test_spec_initial_values():
    assert get_problem("working").exact(0.0)[0][:, 0] == pytest.approx([1.0, -1.0])
    assert get_problem("schwarzian").exact(0.0)[0][0, 0] == pytest.approx(1.0)
    assert get_problem("quasilinear").exact(1.0)[0][0, 0] == pytest.approx(1.0)
    assert get_problem("noproject").exact(0.0)[0][0, 0] == pytest.approx(0.5)
    u = get_problem("naive").exact(0.0)[0][:, 0]
    assert u == pytest.approx([np.sqrt(2), 2**-0.5])


def test_working_invariant_rows_are_scaled_standard_rows():
    P = get_problem("working")
    rng = np.random.default_rng(2)
    t = rng.uniform(0, 10, 100)
    u = rng.uniform(0.2, 3, (2, 100)) * rng.choice([-1, 1], (2, 100))
    ut = rng.normal(size=(2, 100))
    std = P.form("standard", 0).residual(t, u, ut)
    inv = P.form("invariant", 0).residual(t, u, ut)
    np.testing.assert_allclose(inv, std / u[0], rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("name,k", [("working", 2), ("schwarzian", 3), ("quasilinear", 2), ("noproject", 1), ("naive", 2)])
def test_closed_form_jacobian_matches_fd(name, k):
    P = get_problem(name)
    rng = np.random.default_rng(3)
    t = rng.uniform(max(P.t_start, 1.0), min(P.t_end, 5.0), 7)
    u, ut = P.exact(t)
    u = u * (1 + 0.01 * rng.normal(size=u.shape))
    for scheme in P.schemes:
        wf = P.form(scheme, 0)
        dru, drut = wf.jacobian(t, u, ut)
        h = 1e-6
        for j in range(k):
            e = np.zeros_like(u)
            e[j] = h
            fd_u = (wf.residual(t, u + e, ut) - wf.residual(t, u - e, ut)) / (2 * h)
            fd_ut = (wf.residual(t, u, ut + e) - wf.residual(t, u, ut - e)) / (2 * h)
            np.testing.assert_allclose(dru[:, j], fd_u, rtol=1e-5, atol=1e-6)
            np.testing.assert_allclose(drut[:, j], fd_ut, rtol=1e-5, atol=1e-6)


@pytest.mark.parametrize("name", ["working", "schwarzian", "quasilinear", "noproject", "naive", "linear2"])
def test_symmetry_maps_exact_solution_to_solutions(name):
    # the transformed exact curve still solves the ODE
    P = get_problem(name)
    rng = np.random.default_rng(4)
    lo = max(P.t_start, 0.5)
    t = np.linspace(lo, min(P.t_end, lo + 5), 40)
    u, ut = P.exact(t)
    for _ in range(10):
        g = P.action.random_element(rng, 0.1)
        th, uh, uth, _ = prolong(P.action, g, t, u, ut, P.contact)
        scale = np.maximum(1.0, np.abs(uh).max())
        assert np.max(np.abs(P.ode(th, uh, uth))) / scale <= 1e-9


def test_frame_lifted_weights_endpoint_values():
    w = frame_lifted_weights(1)
    rng = np.random.default_rng(5)
    for _ in range(20):
        t0, tau = rng.uniform(0, 5), rng.uniform(0.1, 1)
        a, b = rng.uniform(0.5, 2), rng.uniform(-0.5, 0.5)
        test_t = np.array([t0, t0 + tau])
        test_u = np.array([a + b * test_t])
        M = w(test_t, test_u, test_t, test_u)
        np.testing.assert_allclose(M, np.eye(2), atol=1e-12)


@pytest.mark.parametrize("scheme,q", [("standard", 0), ("invariant", 0), ("invariant", 1), ("standard", 1)])
def test_noproject_reproduces_linear_solution(scheme, q):
    P = get_problem("noproject", t_end=3.125)
    mesh = TimeMesh.uniform(0.0, 3.125, tau=0.390625)
    traj = integrate(P.form(scheme, q), mesh, P.initial, guess="extrapolate")
    assert np.max(np.abs(traj.nodal_values() - P.exact(mesh.nodes)[0])) <= 1e-10


def test_linear2_superposition():
    P = linear_second_order()
    wf = P.form("standard", 1)
    rng = np.random.default_rng(6)
    t = rng.uniform(0, 1, 50)
    u, ut = rng.normal(size=(2, 50)), rng.normal(size=(2, 50))
    base = wf.residual(t, u, ut)
    for e1, e2 in rng.uniform(-10, 10, (10, 2)):
        shift = np.array([e1 + e2 * t, np.full_like(t, e2)])
        dshift = np.array([np.full_like(t, e2), np.zeros_like(t)])
        np.testing.assert_allclose(wf.residual(t, u + shift, ut + dshift), base, atol=1e-12)


def test_linear2_constant_and_quadratic():
    P = linear_second_order(f=0, initial=(1.0, 0.0), exact=sp.Integer(1))
    traj = integrate(P.form("standard", 0), TimeMesh.uniform(0, 1, tau=0.1), P.initial)
    assert np.max(np.abs(traj.nodal_values()[0] - 1)) <= 1e-14
    P = linear_second_order()
    mesh = TimeMesh.uniform(0, 1, tau=0.125)
    for q in (1, 2):
        traj = integrate(P.form("standard", q), mesh, P.initial)
        for t in np.random.default_rng(q).uniform(0, 1, 50):
            assert abs(traj.evaluate(t)[0][0] - t**2) <= 1e-9


def test_linear2_rejects_non_homogeneous_shift():
    with pytest.raises(ParameterError):
        linear_second_order(gamma=T**2)


def test_catalog_and_scheme_validation():
    assert {"working", "schwarzian", "quasilinear", "noproject", "naive", "linear2"} <= set(CATALOG)
    with pytest.raises(ParameterError):
        get_problem("nope")
    with pytest.raises(ParameterError):
        get_problem("working").form("naive", 0)
    with pytest.raises(ParameterError):
        get_problem("naive").form("naive", 1)
