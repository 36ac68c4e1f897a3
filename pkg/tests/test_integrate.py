import math

import numpy as np
import pytest
from scipy import integrate

from h22lab.errors import ConfigError, PreconditionError, SizeError
from h22lab.graph import RootedGraph, log_density_root
from h22lab.integrate import (
    ChainSpec,
    QuadratureSpec,
    batch_means,
    dK_dW,
    default_quadrature,
    mcmc_chain,
    mcmc_derivatives,
    monotonicity_scan,
    perspective,
    perspective_convexity_check,
    quad_derivatives,
    quad_expectation,
    tfield_grid,
    twopoint_law_check,
)
from h22lab.probes import (
    LINEAR,
    NONCONVEX_DEMO,
    SQUARE,
    JointProbe,
    check_probe,
    convex_bank,
    joint_bank,
    linear_joint,
    probe_catalog,
    random_quadratic,
    resolve,
)


def e_t(k):
    return lambda t: np.exp(t[..., k])


# --- quadrature ----------------------------------------------------------------------

def test_partition_n1():
    g = RootedGraph.complete(1, 1.0)
    assert quad_expectation(g, spec=QuadratureSpec(12.0, 200)) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("w", [0.5, 1.0, 2.0])
def test_ward_n1(w):
    g = RootedGraph.complete(1, w)
    assert quad_expectation(g, e_t(0)) == pytest.approx(1.0, abs=1e-8)


def test_second_moment_against_adaptive_oracle():
    g = RootedGraph.complete(1, 1.0)
    oracle, _ = integrate.quad(lambda t: math.exp(2 * t + float(log_density_root(g, [t]))), -30, 30,
                               epsabs=1e-13, epsrel=1e-13, limit=400)
    got = quad_expectation(g, lambda t: np.exp(2 * t[..., 0]))
    assert got == pytest.approx(oracle, abs=1e-7)
    assert got == pytest.approx(2.0, abs=1e-8)  # 1 + 1/W


@pytest.mark.parametrize("n", [1, 2])
def test_quadrature_convergence_by_doubling(n):
    rng = np.random.default_rng(n)
    w = rng.uniform(0.5, 2.0, (n + 1, n + 1))
    g = RootedGraph(np.triu(w, 1) + np.triu(w, 1).T)
    spec = default_quadrature(n)
    base = tfield_grid(g, spec)
    fine = tfield_grid(g, spec.doubled())
    for probe in convex_bank(n) + joint_bank(n):
        assert abs(base.expect(probe(base.t)) - fine.expect(probe(fine.t))) <= 1e-8


def test_quadrature_size_limit():
    with pytest.raises(SizeError):
        quad_expectation(RootedGraph.complete(4, 1.0))


def test_spec_validation():
    with pytest.raises(ConfigError):
        QuadratureSpec(12.0, 1)
    with pytest.raises(ConfigError):
        QuadratureSpec(0.0, 10)
    with pytest.raises(ConfigError):
        ChainSpec(scale=0.0)
    with pytest.raises(ConfigError):
        ChainSpec(scale=float("nan"))
    with pytest.raises(ConfigError):
        ChainSpec(steps=100, burn_in=100)


# --- derivative estimators ----------------------------------------------------------

def test_linear_probe_has_zero_derivative():
    rng = np.random.default_rng(4)
    for n in (1, 2):
        g = RootedGraph.complete(n, 1.2)
        for edge in g.edges():
            p = LINEAR.with_p(rng.normal(size=n))
            assert abs(dK_dW(g, edge, p).value) <= 1e-8


@pytest.mark.parametrize("w", [0.5, 1.0, 2.0])
def test_square_probe_strictly_decreasing_n1(w):
    g = RootedGraph.complete(1, w)
    est = dK_dW(g, (0, 1), SQUARE.with_p([1.0]))
    # E[e^{2t}] = 1 + 1/W
    assert est.value == pytest.approx(-1.0 / w ** 2, abs=1e-8)
    fd = dK_dW(g, (0, 1), SQUARE.with_p([1.0]), method="finite_diff")
    assert fd.value == pytest.approx(est.value, abs=1e-6)


def test_score_and_finite_difference_agree_on_random_instances():
    rng = np.random.default_rng(17)
    for n in (1, 2):
        w = rng.uniform(0.5, 2.0, (n + 1, n + 1))
        g = RootedGraph(np.triu(w, 1) + np.triu(w, 1).T)
        bank = convex_bank(n) + joint_bank(n)
        for edge in g.edges():
            _, ds = quad_derivatives(g, edge, bank, method="score")
            _, df = quad_derivatives(g, edge, bank, method="finite_diff")
            assert np.all(np.abs(ds - df) <= 1e-6)


def test_interior_point_required():
    g = RootedGraph.from_edges(2, {(0, 2): 1.0, (1, 2): 1.0})
    with pytest.raises(PreconditionError):
        dK_dW(g, (0, 1), SQUARE.with_p([1.0, 1.0]))


def test_unknown_method_and_backend():
    g = RootedGraph.complete(1, 1.0)
    with pytest.raises(ConfigError):
        dK_dW(g, (0, 1), SQUARE, method="magic")
    with pytest.raises(ConfigError):
        dK_dW(g, (0, 1), SQUARE, backend="gpu")


# --- MCMC ----------------------------------------------------------------------------

def test_mcmc_ward_n1():
    g = RootedGraph.complete(1, 1.0)
    chain = mcmc_chain(g, ChainSpec(seed=3, steps=12000, burn_in=1000))
    vals = np.exp(chain.samples[..., 0])
    mean, se, ess = batch_means(vals)
    assert abs(mean - 1.0) <= 3 * se
    assert ess > 100
    assert 0.2 < chain.acceptance < 0.6


def test_mcmc_matches_quadrature_n3():
    rng = np.random.default_rng(2)
    w = rng.uniform(0.5, 2.0, (4, 4))
    g = RootedGraph(np.triu(w, 1) + np.triu(w, 1).T)
    chain = mcmc_chain(g, ChainSpec(seed=5))
    grid = tfield_grid(g, QuadratureSpec(12.0, 80))
    for probe in convex_bank(3)[:6] + joint_bank(3):
        vals = probe(chain.samples)
        mean, se, _ = batch_means(vals)
        assert abs(mean - grid.expect(probe(grid.t))) <= 3 * se, probe.name


def test_mcmc_determinism():
    g = RootedGraph.complete(2, 1.0)
    spec = ChainSpec(seed=42, steps=3000, burn_in=500, chains=4)
    a, b = mcmc_chain(g, spec), mcmc_chain(g, spec)
    assert np.array_equal(a.samples, b.samples)
    assert a.acceptance == b.acceptance
    c = mcmc_chain(g, ChainSpec(seed=43, steps=3000, burn_in=500, chains=4))
    assert not np.array_equal(a.samples, c.samples)


def test_mcmc_size_limit():
    with pytest.raises(SizeError):
        mcmc_chain(RootedGraph.complete(7, 1.0))


def test_mcmc_estimators_agree():
    g = RootedGraph.complete(2, 1.0)
    chain = mcmc_chain(g, ChainSpec(seed=9, steps=8000, burn_in=1000))
    bank = convex_bank(2)[:4]
    sc = mcmc_derivatives(g, (0, 2), bank, chain, "score")
    fd = mcmc_derivatives(g, (0, 2), bank, chain, "finite_diff")
    for (a, sa_), (b, sb) in zip(sc, fd):
        assert abs(a - b) <= 3 * math.hypot(sa_, sb)


def test_scan_thread_count_does_not_change_results():
    g = RootedGraph.complete(2, 1.0)
    spec = ChainSpec(seed=1, steps=2000, burn_in=200, chains=4)
    kw = dict(probes=convex_bank(2)[:2], edges=[(0, 2)], w_grid=(0.5, 1.0, 2.0), backend="mcmc",
              chain_spec=spec)
    one = monotonicity_scan({"g": g}, workers=1, **kw)
    many = monotonicity_scan({"g": g}, workers=3, **kw)
    assert [r.estimates for r in one] == [r.estimates for r in many]
    assert [r.stderrs for r in one] == [r.stderrs for r in many]


# --- monotonicity scan ---------------------------------------------------------------

def test_scan_n1_boundary_all_pass():
    reps = monotonicity_scan({"K1": RootedGraph.complete(1, 1.0)})
    assert reps and all(r.passed for r in reps)
    assert {r.edge for r in reps} == {"1-d"}


def test_scan_n2_bulk_edge():
    reps = monotonicity_scan({"K2": RootedGraph.complete(2, 1.0)}, edges=[(0, 1)])
    assert all(r.passed for r in reps)
    assert all(max(r.estimates) <= 1e-8 for r in reps)


def test_scan_flags_nonconvex_probe():
    reps = monotonicity_scan({"K1": RootedGraph.complete(1, 1.0)}, probes=[NONCONVEX_DEMO.with_p([1.0])])
    assert not reps[0].passed
    assert min(reps[0].estimates) > 0
    assert reps[0].convex is False


# --- probes --------------------------------------------------------------------------

def test_probe_derivatives_consistent():
    for p in convex_bank(3) + [NONCONVEX_DEMO]:
        assert check_probe(p, lo=0.0, hi=6.0), p.name


def test_probe_bank_sizes_and_names():
    assert len(convex_bank(1)) >= 5
    assert len(joint_bank(3)) >= 2
    names = [p.name for p in probe_catalog(2)]
    assert len(names) == len(set(names))
    assert [p.name for p in resolve(2, ["nonconvex-demo", "u^2"])] == ["-u^2", "u^2"]
    with pytest.raises(KeyError):
        resolve(2, ["no-such-probe"])


def test_joint_probe_gradients():
    rng = np.random.default_rng(0)
    v = rng.uniform(0.1, 3.0, (5, 3))
    for p in joint_bank(3) + [random_quadratic(3, rng), linear_joint(3)]:
        h = 1e-6
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            fd = (p.value(v + e) - p.value(v - e)) / (2 * h)
            assert np.allclose(fd, p.grad(v)[:, k], atol=1e-5), p.name


# --- two-point law -------------------------------------------------------------------

def test_twopoint_examples():
    one = twopoint_law_check(1.0, lambda u: 1.0)
    assert one.beta_side == pytest.approx(1.0, abs=1e-6)
    assert one.residual <= 1e-6
    lin = twopoint_law_check(0.7, lambda u: u)
    assert lin.t_side == pytest.approx(1.0, abs=1e-8)
    assert lin.residual <= 1e-6
    sq = [twopoint_law_check(w, lambda u: u * u).beta_side for w in (0.5, 1.0, 2.0)]
    assert sq == pytest.approx([3.0, 2.0, 1.5], abs=1e-6)
    assert sq[0] > sq[1] > sq[2]


def test_twopoint_shifted_argument():
    r = twopoint_law_check(1.5, lambda u: (u - 0.5) ** 2, p_root=0.3, p_1=0.8)
    assert r.residual <= 1e-6


def test_twopoint_requires_positive_weight():
    with pytest.raises(PreconditionError):
        twopoint_law_check(0.0, lambda u: u)


# --- perspective ---------------------------------------------------------------------

SQ1 = JointProbe("x^2", lambda v: np.sum(v * v, axis=-1), lambda v: 2.0 * v)


def test_perspective_of_square_analytic_hessian():
    x, T = np.array([[0.7]]), np.array([1.3])
    assert perspective(SQ1, x, T)[0] == pytest.approx(0.7 ** 2 / 1.3)
    # Hessian of x^2/T is (2/T) [[1, -x/T], [-x/T, x^2/T^2]]: PSD with zero determinant
    rep = perspective_convexity_check(SQ1, 1, samples=2000, hessian_points=20)
    assert rep.passed
    assert rep.min_eigenvalue == pytest.approx(0.0, abs=1e-6)


def test_perspective_linear_equality():
    rep = perspective_convexity_check(linear_joint(2), 2, samples=5000)
    assert rep.passed
    assert abs(rep.max_excess) <= 1e-12


def test_perspective_detects_nonconvex():
    bad = JointProbe("-x^2", lambda v: -np.sum(v * v, axis=-1), lambda v: -2.0 * v, convex=False)
    rep = perspective_convexity_check(bad, 1, samples=2000, hessian_points=20)
    assert not rep.passed
    assert rep.violations > 0 and rep.min_eigenvalue < 0
