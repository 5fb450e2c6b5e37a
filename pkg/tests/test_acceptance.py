"""Acceptance criteria: table reproductions, the solvability sweep, figure
data and the property suite. Each test records one pass/fail line."""

import time

import numpy as np
import pytest

from invcg import experiments as ex
from invcg.properties import run_all

TAU0, LEVELS = 0.15625, 4

# published L2 errors per (problem, scheme) -> q -> levels
PUBLISHED_L2 = {
    ("working", "standard"): {
        0: [1.70e-3, 4.25e-4, 1.06e-4, 2.66e-5],
        1: [2.19e-5, 2.74e-6, 3.43e-7, 4.28e-8],
        2: [1.58e-7, 9.91e-9, 6.20e-10, 3.87e-11],
    },
    ("working", "invariant"): {
        0: [2.23e-3, 5.57e-4, 1.39e-4, 3.48e-5],
        1: [2.19e-5, 2.74e-6, 3.43e-7, 4.28e-8],
        2: [1.58e-7, 9.91e-9, 6.20e-10, 3.87e-11],
    },
    ("schwarzian", "standard"): {
        0: [1.27e-1, 3.17e-2, 7.91e-3, 1.98e-3],
        1: [7.79e-5, 9.81e-6, 1.23e-6, 1.54e-7],
        2: [1.48e-6, 9.38e-8, 5.88e-9, 3.68e-10],
    },
    ("schwarzian", "invariant"): {
        0: [3.60e-3, 9.04e-4, 2.26e-4, 5.66e-5],
        1: [7.77e-5, 9.81e-6, 1.23e-6, 1.54e-7],
        2: [1.48e-6, 9.37e-8, 5.88e-9, 3.79e-10],
    },
    ("quasilinear", "standard"): {
        0: [2.48e-2, 6.30e-3, 1.58e-3, 3.96e-4],
        1: [1.22e-3, 1.58e-4, 2.00e-5, 2.50e-6],
        2: [6.22e-5, 4.11e-6, 2.60e-7, 1.64e-8],
    },
    ("quasilinear", "invariant"): {
        0: [2.33e-2, 6.09e-3, 1.54e-3, 3.87e-4],
        1: [1.26e-3, 1.59e-4, 2.00e-5, 2.50e-6],
        2: [6.24e-5, 4.10e-6, 2.60e-7, 1.67e-8],
    },
}


def study(problem, scheme):
    return ex.convergence_study(problem, scheme, [0, 1, 2], TAU0, LEVELS, l2_quad=ex.L2_MATCHED)


def table_mismatches(report, problem, scheme, eoc_tol, rel=0.10):
    """Human-readable list of every cell outside tolerance."""
    bad = []
    for q, want in PUBLISHED_L2[(problem, scheme)].items():
        block = report.block(problem, scheme, q)
        if len(block) != LEVELS or any(r.failed for r in block):
            bad.append(f"{scheme} q={q}: failed cells")
            continue
        for r, w in zip(block, want):
            if abs(r.l2_error - w) > rel * w:
                bad.append(f"{scheme} q={q} tau={r.tau}: L2 {r.l2_error:.3e} vs {w:.2e}")
        for r in block[1:]:
            if abs(r.eoc - (q + 2)) > eoc_tol:
                bad.append(f"{scheme} q={q} tau={r.tau}: EOC {r.eoc:.3f}")
    return bad


def test_criterion_1_working_standard_table(record_criterion):
    start = time.perf_counter()
    report = study("working", "standard")
    elapsed = time.perf_counter() - start
    bad = table_mismatches(report, "working", "standard", eoc_tol=0.05)
    if elapsed >= 120:
        bad.append(f"runtime {elapsed:.0f}s")
    ok = record_criterion(1, not bad, f"working/standard table, {elapsed:.1f}s {'; '.join(bad)}")
    assert ok, bad


def test_criterion_2_working_invariant_table(record_criterion):
    report = study("working", "invariant")
    bad = table_mismatches(report, "working", "invariant", eoc_tol=0.05)
    worst = max(r.max_nodal_error for r in report.rows if not r.failed)
    if worst > 1e-10:
        bad.append(f"max nodal error {worst:.2e}")
    ok = record_criterion(2, not bad, f"working/invariant table, max nodal {worst:.1e} {'; '.join(bad)}")
    assert ok, bad


@pytest.mark.slow
def test_criterion_3_schwarzian_tables(record_criterion):
    start = time.perf_counter()
    std = study("schwarzian", "standard")
    inv = study("schwarzian", "invariant")
    elapsed = time.perf_counter() - start
    bad = table_mismatches(std, "schwarzian", "standard", eoc_tol=0.1)
    bad += table_mismatches(inv, "schwarzian", "invariant", eoc_tol=0.1)
    e_std = std.block("schwarzian", "standard", 0)[0].l2_error
    e_inv = inv.block("schwarzian", "invariant", 0)[0].l2_error
    ratio = e_std / e_inv
    if ratio < 30:
        bad.append(f"ratio {ratio:.1f}")
    if elapsed >= 600:
        bad.append(f"runtime {elapsed:.0f}s")
    ok = record_criterion(3, not bad, f"Schwarzian tables, q=0 ratio {ratio:.1f}, {elapsed:.0f}s {'; '.join(bad)}")
    assert ok, bad


@pytest.mark.slow
def test_criterion_4_quasilinear_tables(record_criterion):
    start = time.perf_counter()
    std = study("quasilinear", "standard")
    inv = study("quasilinear", "invariant")
    elapsed = time.perf_counter() - start
    bad = table_mismatches(std, "quasilinear", "standard", eoc_tol=0.1)
    bad += table_mismatches(inv, "quasilinear", "invariant", eoc_tol=0.1)
    ok = record_criterion(4, not bad, f"quasi-linear tables, {elapsed:.0f}s {'; '.join(bad)}")
    assert ok, bad


def test_criterion_5_solvability_sweep(record_criterion):
    rows = ex.solvability_sweep(taus=ex.SWEEP_TAUS)
    got = {(r.scheme, r.tau): r.solved for r in rows}
    published = {
        "standard": (True, True, False, False, False),
        "invariant": (True, True, True, True, False),
    }
    exact = all(got[(s, t)] == flag for s, flags in published.items() for t, flag in zip(ex.SWEEP_TAUS, flags))
    # the directional fallback, with the standard scheme probed below the published grid
    finer = ex.solvability_sweep(schemes=("standard",), taus=[0.390625 / 2**k for k in range(1, 7)])
    tau_std = max(ex.largest_solvable(rows, "standard"), ex.largest_solvable(finer, "standard"))
    tau_inv = ex.largest_solvable(rows, "invariant")
    directional = tau_inv > 0 and tau_inv >= 2 * tau_std
    pattern = " ".join(f"{s[:3]}@{t}={'y' if got[(s, t)] else 'n'}" for s in published for t in ex.SWEEP_TAUS)
    ok = record_criterion(5, exact or directional,
                          f"{'published pattern' if exact else 'directional'}: largest solvable "
                          f"standard {tau_std}, invariant {tau_inv} [{pattern}]")
    assert ok


def test_criterion_6_figure_data(record_criterion):
    inv = ex.growth_series("invariant", q=0, tau=0.25, t_end=10.0, samples_per_element=0)
    std = ex.growth_series("standard", q=0, tau=0.25, t_end=10.0, samples_per_element=0)
    inv_err = max(e for _, _, e in inv)
    # nodal error norm per node over the last half of the domain
    t = np.array(sorted({r[0] for r in std}))
    per_node = {}
    for tt, _, e in std:
        per_node[tt] = max(per_node.get(tt, 0.0), e)
    tail = np.array([per_node[tt] for tt in t if tt >= 5.0])
    monotone = bool(np.all(np.diff(tail) > 0))
    cfg = dict(tau=0.01, t_end=10.0)
    _, naive = ex.run_metrics(ex.RunConfig("naive", "naive", 0, **cfg))
    _, invn = ex.run_metrics(ex.RunConfig("naive", "invariant", 0, **cfg))
    ratio = naive.l2_error / invn.l2_error
    ok = inv_err <= 1e-8 and monotone and ratio >= 100
    record_criterion(6, ok, f"growth invariant max nodal {inv_err:.1e}, standard tail monotone={monotone}, "
                            f"naive/invariant L2 ratio {ratio:.0f}")
    assert ok


def test_criterion_7_property_suite(record_criterion):
    results = run_all()
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    ok = record_criterion(7, not failed, f"{len(results) - len(failed)}/{len(results)} properties "
                                         f"{'; '.join(failed)}")
    assert ok, failed
