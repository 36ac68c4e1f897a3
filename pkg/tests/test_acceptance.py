"""Acceptance criteria, one test each, with the stated tolerances and runtimes.

The terminal summary prints one PASS/FAIL line per criterion.
"""
import functools
import time

import numpy as np
import pytest

from h22lab.graph import RootedGraph
from h22lab.integrate import DEFAULT_W_GRID, ChainSpec, monotonicity_scan
from h22lab.probes import convex_bank, joint_bank
from h22lab.suites import SuiteConfig, random_graph, run_all_suites

pytestmark = pytest.mark.slow


def run(request, suites, limit, **cfg):
    start = time.perf_counter()
    rep = run_all_suites(SuiteConfig(suites=tuple(suites), **cfg))
    elapsed = time.perf_counter() - start
    request.node.acceptance_detail = f"{len(rep.checks)} checks, {elapsed:.1f}s"
    for c in rep.failures():
        print(f"FAIL {c.suite}: {c.check} (expected {c.expected}, got {c.got})")
    return rep, elapsed


def assert_report(rep, elapsed, limit, minimum=1):
    assert len(rep.checks) >= minimum
    assert rep.passed, [f"{c.check}: {c.got}" for c in rep.failures()][:5]
    assert elapsed < limit, f"runtime {elapsed:.1f}s over {limit}s"


@pytest.mark.acceptance(1, "exact algebra identities vanish")
def test_ac1_exact_algebra(request):
    rep, elapsed = run(request, ["algebra", "onepoint"], 5)
    assert all(c.got == "0" for c in rep.checks)
    assert_report(rep, elapsed, 5, 20)


@pytest.mark.acceptance(2, "fermionic Gaussian integral equals det exactly")
def test_ac2_fermion_gaussian(request):
    rep, elapsed = run(request, ["fermion-gaussian"], 10, gaussian_instances=100)
    assert_report(rep, elapsed, 10, 100)


@pytest.mark.acceptance(3, "localization is exactly zero on the polynomial bank")
def test_ac3_localization(request):
    rep, elapsed = run(request, ["localization"], 30, localization_bank=50,
                       localization_weights=(0.5, 1, 3))
    assert_report(rep, elapsed, 30, 150)


@pytest.mark.acceptance(4, "Gaussian derivative chain holds exactly, degree <= 6")
def test_ac4_slepian(request):
    rep, elapsed = run(request, ["slepian"], 10, slepian_weights=(0.5, 1, 2))
    assert_report(rep, elapsed, 10, 15)


@pytest.mark.acceptance(5, "matrix-tree: tree sum equals determinant, rel <= 1e-10")
def test_ac5_matrix_tree(request):
    rep, elapsed = run(request, ["matrix-tree"], 20, matrix_tree_instances=200)
    assert_report(rep, elapsed, 20)


@functools.lru_cache(maxsize=None)
def partition_run():
    start = time.perf_counter()
    rep = run_all_suites(SuiteConfig(suites=("partition",), partition_sizes=(1, 2, 3), partition_draws=5,
                                     partition_tol=1e-6))
    return rep, time.perf_counter() - start


@pytest.mark.acceptance(6, "partition function equals 1 within 1e-6")
def test_ac6_partition(request):
    rep, elapsed = partition_run()
    z = [c for c in rep.checks if c.check.startswith("|Z - 1|")]
    request.node.acceptance_detail = f"{len(z)} draws, {elapsed:.1f}s"
    assert len(z) == 15
    assert all(c.passed for c in z), [c.got for c in z if not c.passed]
    assert elapsed < 300


@pytest.mark.acceptance(7, "Ward normalization E[e^t_k] = 1 within 1e-6")
def test_ac7_ward(request):
    rep, elapsed = partition_run()
    ward = [c for c in rep.checks if c.check.startswith("|E e^t")]
    request.node.acceptance_detail = f"{len(ward)} checks, shares run with AC6"
    assert len(ward) == 5 * (1 + 2 + 3)
    assert all(c.passed for c in ward), [c.got for c in ward if not c.passed]
    assert elapsed < 300


def scan_failures(reports):
    return [f"{r.graph} {r.edge} {r.probe}: {r.max_violation:.3g}" for r in reports if not r.passed]


@pytest.mark.acceptance(8, "dK/dW <= 0: quadrature N=1..3, MCMC N=5")
def test_ac8_monotonicity(request):
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    quad = []
    for n in (1, 2, 3):
        graphs = {f"K{n}": RootedGraph.complete(n, 1.0), f"random{n}": random_graph(n, rng, 0.5, 2.0)}
        assert len(convex_bank(n)) >= 5 and len(joint_bank(n)) >= 2
        quad += monotonicity_scan(graphs, w_grid=DEFAULT_W_GRID, tol=1e-8)
    edges_seen = {(r.graph, r.edge) for r in quad}
    assert ("K3", "1-2") in edges_seen and ("K3", "1-d") in edges_seen
    assert len(DEFAULT_W_GRID) >= 5

    g5 = RootedGraph.complete(5, 1.0)
    chain = ChainSpec(seed=0, steps=60_000, burn_in=5_000, chains=16)
    mcmc = monotonicity_scan({"K5": g5}, edges=[(0, 5), (0, 1)], w_grid=DEFAULT_W_GRID, tol=1e-8,
                             backend="mcmc", chain_spec=chain, workers=4)
    elapsed = time.perf_counter() - start
    request.node.acceptance_detail = f"{len(quad)} quad series, {len(mcmc)} MCMC series, {elapsed:.0f}s"
    assert not scan_failures(quad), scan_failures(quad)[:5]
    assert not scan_failures(mcmc), scan_failures(mcmc)[:5]
    assert elapsed < 900


@pytest.mark.acceptance(9, "rerooting residual <= 1e-12 at 1000 points")
def test_ac9_reroot(request):
    rep, elapsed = run(request, ["reroot"], 5, reroot_points=1000)
    assert_report(rep, elapsed, 5)


@pytest.mark.acceptance(10, "Schur reduction and ratio collapse, dW~/dW = 1")
def test_ac10_schur(request):
    rep, elapsed = run(request, ["schur"], 10, schur_instances=200)
    assert_report(rep, elapsed, 10, 3)


@pytest.mark.acceptance(11, "two-point law: beta side equals t side, non-increasing in W")
def test_ac11_twopoint(request):
    rep, elapsed = run(request, ["twopoint"], 120, twopoint_weights=(0.25, 0.5, 1, 2, 4))
    assert_report(rep, elapsed, 120, 30)


@pytest.mark.acceptance(12, "perspective convexity: no midpoint violations, PSD Hessian")
def test_ac12_perspective(request):
    rep, elapsed = run(request, ["perspective"], 30, perspective_samples=100_000)
    assert_report(rep, elapsed, 30, 6)
