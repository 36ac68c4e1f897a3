"""Numerical engines for the root-pinned t-field.

Deterministic tensor Gauss-Legendre quadrature covers N <= 3; random-walk
Metropolis covers N <= 6.  On top of them sit the derivative estimators for
K(W) = E_W[F], the monotonicity scan, the two-point random-Schroedinger
comparison and the perspective-function convexity check.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate as _sint

from .errors import AccuracyError, ConfigError, PreconditionError, SizeError
from .graph import (
    LOG_2PI,
    Edge,
    RootedGraph,
    dW_log_density,
    full_config,
    log_density_root,
)
from .probes import ConvexProbe, JointProbe, convex_bank, joint_bank

QUAD_MAX_N = 3
MCMC_MAX_N = 6
DEFAULT_W_GRID = (0.5, 0.75, 1.0, 1.5, 2.0)
_CHUNK = 150_000


# --- specs -----------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    """Tensor Gauss-Legendre rule on [-truncation, truncation]^N."""

    truncation: float = 12.0
    nodes: int = 120

    def __post_init__(self):
        if not self.nodes >= 2:
            raise ConfigError(f"quadrature needs at least 2 nodes, got {self.nodes}")
        if not self.truncation > 0:
            raise ConfigError(f"truncation must be positive, got {self.truncation}")

    def doubled(self) -> "QuadratureSpec":
        return QuadratureSpec(self.truncation, 2 * self.nodes)


def default_quadrature(n: int) -> QuadratureSpec:
    """Node counts that hold the partition function to ~1e-10 for W >= 0.2."""
    return QuadratureSpec(12.0, {1: 200, 2: 160, 3: 120}.get(n, 60))


@dataclass(frozen=True)
class ChainSpec:
    seed: int = 0
    steps: int = 20_000
    burn_in: int = 2_000
    scale: float = 0.8
    chains: int = 8
    adapt: bool = True

    def __post_init__(self):
        if not (isinstance(self.steps, int) and isinstance(self.burn_in, int)):
            raise ConfigError("steps and burn_in must be integers")
        if not self.steps > self.burn_in >= 0:
            raise ConfigError(f"need steps > burn_in >= 0, got {self.steps}, {self.burn_in}")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ConfigError(f"degenerate proposal scale {self.scale}")
        if self.chains < 1:
            raise ConfigError("need at least one chain")


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    method: str
    backend: str


# --- quadrature --------------------------------------------------------------------

@dataclass
class TFieldGrid:
    """Quadrature nodes ``t`` (K, N) with masses = rule weight x density."""

    t: np.ndarray
    mass: np.ndarray
    rule: Optional[np.ndarray] = None

    def expect(self, values: np.ndarray) -> float:
        return float(np.dot(self.mass, values))

    def reweighted(self, g: RootedGraph) -> "TFieldGrid":
        """Same nodes, masses recomputed for another graph."""
        return TFieldGrid(self.t, self.rule * np.exp(_chunked(lambda t: log_density_root(g, t), self.t)),
                          self.rule)


def _tensor_rule(n: int, spec: QuadratureSpec) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(spec.nodes)
    x = x * spec.truncation
    w = w * spec.truncation
    grids = np.meshgrid(*([x] * n), indexing="ij")
    pts = np.stack([gr.ravel() for gr in grids], axis=-1)
    wts = np.ones(pts.shape[0])
    for wg in np.meshgrid(*([w] * n), indexing="ij"):
        wts = wts * wg.ravel()
    return pts, wts


def tfield_grid(g: RootedGraph, spec: Optional[QuadratureSpec] = None) -> TFieldGrid:
    if g.n > QUAD_MAX_N:
        raise SizeError(f"quadrature supports N <= {QUAD_MAX_N}, got N = {g.n}")
    spec = spec or default_quadrature(g.n)
    pts, wts = _tensor_rule(g.n, spec)
    mass = wts * np.exp(_chunked(lambda t: log_density_root(g, t), pts))
    # nodes whose mass underflowed contribute nothing; dropping them keeps
    # probes that overflow in the far tail (exp(e^t)) from producing inf * 0
    keep = mass > 0
    return TFieldGrid(pts[keep], mass[keep], wts[keep])


def _chunked(fn: Callable[[np.ndarray], np.ndarray], pts: np.ndarray) -> np.ndarray:
    out = np.empty(pts.shape[0])
    with np.errstate(over="ignore"):
        for lo in range(0, pts.shape[0], _CHUNK):
            out[lo:lo + _CHUNK] = fn(pts[lo:lo + _CHUNK])
    return out


def quad_expectation(g: RootedGraph, F: Optional[Callable] = None,
                     spec: Optional[QuadratureSpec] = None) -> float:
    """Integral of F against the root-pinned t-field (F = 1 gives the partition function)."""
    grid = tfield_grid(g, spec)
    if F is None:
        return float(grid.mass.sum())
    return grid.expect(_chunked(F, grid.t))


def _score_values(g: RootedGraph, edge: Edge, pts: np.ndarray) -> np.ndarray:
    return _chunked(lambda t: dW_log_density(g, full_config(t), g.root, edge), pts)


def fd_step(w: float) -> float:
    return 1e-4 * max(1.0, w)


def quad_derivatives(g: RootedGraph, edge: Edge, probes: Sequence[Callable],
                     spec: Optional[QuadratureSpec] = None, method: str = "score"):
    """(K values, dK/dW values) for several probes sharing one quadrature pass."""
    if method == "score":
        grid = tfield_grid(g, spec)
        score = _score_values(g, edge, grid.t)
        ks, ds = [], []
        for probe in probes:
            f = _chunked(probe, grid.t)
            ks.append(grid.expect(f))
            ds.append(grid.expect(f * score))
        return np.array(ks), np.array(ds)
    if method == "finite_diff":
        w = g.weights[edge]
        h = fd_step(w)
        base = tfield_grid(g, spec)
        # central differences at h and h/2 combined by one Richardson step, so
        # the O(h^2) truncation error does not dominate for steep probes
        shifts = (h, -h, h / 2, -h / 2)
        grids = [base.reweighted(g.with_weight(edge, w + s)) for s in shifts]
        ks, ds = [], []
        for probe in probes:
            f = _chunked(probe, base.t)
            ks.append(base.expect(f))
            k = [gr.expect(f) for gr in grids]
            coarse = (k[0] - k[1]) / (2.0 * h)
            fine = (k[2] - k[3]) / h
            ds.append((4.0 * fine - coarse) / 3.0)
        return np.array(ks), np.array(ds)
    raise ConfigError(f"unknown derivative method {method!r}")


# --- MCMC --------------------------------------------------------------------------

@dataclass
class ChainResult:
    samples: np.ndarray  # (kept steps, chains, N)
    acceptance: float
    scale: float
    spec: ChainSpec

    def flat(self) -> np.ndarray:
        return self.samples.reshape(-1, self.samples.shape[-1])

    def summarize(self, values: np.ndarray, batches: int = 20) -> Tuple[float, float, float]:
        """(mean, stderr, ESS) by batch means; ``values`` has shape (kept, chains)."""
        return batch_means(values, batches)


def batch_means(values: np.ndarray, batches: int = 20) -> Tuple[float, float, float]:
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    steps, chains = values.shape
    size = steps // batches
    if size < 1:
        raise ConfigError("not enough samples for batch means")
    trimmed = values[: size * batches]
    means = trimmed.reshape(batches, size, chains).mean(axis=1)
    grand = float(trimmed.mean())
    var_bm = float(means.var(ddof=1))
    stderr = math.sqrt(var_bm / (batches * chains))
    var = float(trimmed.var(ddof=1))
    ess = float(trimmed.size * var / (size * var_bm)) if var_bm > 0 else float(trimmed.size)
    return grand, stderr, ess


def mcmc_chain(g: RootedGraph, spec: ChainSpec = ChainSpec()) -> ChainResult:
    """Random-walk Metropolis on the bulk coordinates of the root-pinned field.

    Several independent chains advance in lockstep so each step costs a single
    batched density evaluation.  During burn-in the proposal scale is nudged
    every 100 steps toward 30-50% acceptance.
    """
    if g.n > MCMC_MAX_N:
        raise SizeError(f"MCMC supports N <= {MCMC_MAX_N}, got N = {g.n}")
    rng = np.random.default_rng(spec.seed)
    c, n = spec.chains, g.n
    state = np.zeros((c, n))
    logp = log_density_root(g, state)
    scale = spec.scale
    kept = np.empty((spec.steps - spec.burn_in, c, n))
    accepted = 0
    window = 0
    for step in range(spec.steps):
        prop = state + scale * rng.standard_normal((c, n))
        logq = log_density_root(g, prop)
        u = rng.random(c)
        acc = np.log(u) < logq - logp
        state = np.where(acc[:, None], prop, state)
        logp = np.where(acc, logq, logp)
        if step < spec.burn_in:
            window += int(acc.sum())
            if spec.adapt and (step + 1) % 100 == 0:
                rate = window / (100 * c)
                if rate < 0.3:
                    scale *= 0.8
                elif rate > 0.5:
                    scale *= 1.25
                window = 0
        else:
            accepted += int(acc.sum())
            kept[step - spec.burn_in] = state
    rate = accepted / ((spec.steps - spec.burn_in) * c)
    return ChainResult(kept, rate, scale, spec)


def mcmc_derivatives(g: RootedGraph, edge: Edge, probes: Sequence[Callable],
                     chain: ChainResult, method: str = "score", batches: int = 20):
    """MCMC estimates of dK/dW with batch-means standard errors.

    ``score``: E[(F - mean F) * d_W log nu].  ``finite_diff``: central
    difference of K(W +- h) obtained by reweighting the same samples with the
    exact density ratio (both densities are normalized).
    """
    s = chain.samples
    flat = s.reshape(-1, g.n)
    shape = s.shape[:2]
    out = []
    if method == "score":
        score = _score_values(g, edge, flat).reshape(shape)
        for probe in probes:
            f = _chunked(probe, flat).reshape(shape)
            out.append(batch_means((f - f.mean()) * score, batches)[:2])
    elif method == "finite_diff":
        w = g.weights[edge]
        h = fd_step(w)
        base = _chunked(lambda t: log_density_root(g, t), flat)
        ratios = []
        for sgn in (1.0, -1.0):
            gp = g.with_weight(edge, w + sgn * h)
            ratios.append(np.exp(_chunked(lambda t: log_density_root(gp, t), flat) - base))
        diff = ((ratios[0] - ratios[1]) / (2.0 * h)).reshape(shape)
        for probe in probes:
            f = _chunked(probe, flat).reshape(shape)
            out.append(batch_means((f - f.mean()) * diff, batches)[:2])
    else:
        raise ConfigError(f"unknown derivative method {method!r}")
    return out


def dK_dW(g: RootedGraph, edge: Edge, probe: Callable, method: str = "score",
          backend: str = "quad", quad_spec: Optional[QuadratureSpec] = None,
          chain_spec: Optional[ChainSpec] = None, chain: Optional[ChainResult] = None) -> Estimate:
    """Derivative of E[probe] in the weight of ``edge``."""
    a, b = edge
    if g.weights[a, b] <= 0:
        raise PreconditionError("derivatives are taken at interior points W > 0")
    if backend == "quad":
        if g.n > QUAD_MAX_N:
            raise SizeError(f"quadrature backend supports N <= {QUAD_MAX_N}")
        _, d = quad_derivatives(g, edge, [probe], quad_spec, method)
        return Estimate(float(d[0]), 0.0, method, backend)
    if backend == "mcmc":
        if g.n > MCMC_MAX_N:
            raise SizeError(f"MCMC backend supports N <= {MCMC_MAX_N}")
        chain = chain or mcmc_chain(g, chain_spec or ChainSpec())
        (est, se), = mcmc_derivatives(g, edge, [probe], chain, method)
        return Estimate(est, se, method, backend)
    raise ConfigError(f"unknown backend {backend!r}")


# --- monotonicity scan -------------------------------------------------------------

@dataclass
class MonotonicityReport:
    graph: str
    edge: str
    probe: str
    convex: bool
    w_grid: List[float]
    values: List[float]
    estimates: List[float]
    stderrs: List[float]
    method: str
    backend: str
    tolerance: float
    max_violation: float
    passed: bool


def monotonicity_scan(
    graphs: Dict[str, RootedGraph],
    probes: Optional[Sequence[Callable]] = None,
    edges: Optional[Sequence[Edge]] = None,
    w_grid: Sequence[float] = DEFAULT_W_GRID,
    spec: Optional[QuadratureSpec] = None,
    tol: float = 1e-8,
    method: str = "score",
    backend: str = "quad",
    chain_spec: Optional[ChainSpec] = None,
    workers: int = 1,
) -> List[MonotonicityReport]:
    """dK/dW on a W grid for every (graph, edge, probe); failures are recorded.

    With ``probes=None`` each graph gets the univariate convex bank plus the
    jointly convex bank for its size.  For the MCMC backend a grid point
    passes when the estimate is not significantly positive
    (``estimate <= tol + 3 stderr``).
    """
    reports: List[MonotonicityReport] = []
    for gname, g in graphs.items():
        bank = list(probes) if probes is not None else convex_bank(g.n) + joint_bank(g.n)
        edge_list = list(edges) if edges is not None else g.edges()
        units = [(edge, w) for edge in edge_list for w in w_grid]

        def run(unit, _g=g, _bank=bank):
            (edge, w), k = unit
            gw = _g.with_weight(edge, w)
            if backend == "quad":
                vals, ds = quad_derivatives(gw, edge, _bank, spec, method)
                return vals, ds, np.zeros_like(ds)
            if backend == "mcmc":
                cs = chain_spec or ChainSpec()
                seq = np.random.SeedSequence(cs.seed).spawn(len(units))[k]
                cs = ChainSpec(int(seq.generate_state(1)[0]), cs.steps, cs.burn_in, cs.scale, cs.chains, cs.adapt)
                chain = mcmc_chain(gw, cs)
                flat = chain.flat()
                vals = np.array([float(np.mean(_chunked(p, flat))) for p in _bank])
                est = mcmc_derivatives(gw, edge, _bank, chain, method)
                return vals, np.array([e for e, _ in est]), np.array([s for _, s in est])
            raise ConfigError(f"unknown backend {backend!r}")

        indexed = list(zip(units, range(len(units))))
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                results = list(pool.map(run, indexed))
        else:
            results = [run(u) for u in indexed]

        for e_idx, edge in enumerate(edge_list):
            rows = results[e_idx * len(w_grid):(e_idx + 1) * len(w_grid)]
            for p_idx, probe in enumerate(bank):
                vals = [float(r[0][p_idx]) for r in rows]
                est = [float(r[1][p_idx]) for r in rows]
                se = [float(r[2][p_idx]) for r in rows]
                slack = [tol + 3.0 * s for s in se]
                passed = all(e <= sl for e, sl in zip(est, slack))
                reports.append(MonotonicityReport(
                    graph=gname, edge=g.edge_label(edge), probe=probe.name,
                    convex=getattr(probe, "convex", True), w_grid=[float(w) for w in w_grid],
                    values=vals, estimates=est, stderrs=se, method=method, backend=backend,
                    tolerance=tol, max_violation=max(est), passed=passed,
                ))
    return reports


# --- two-point random Schroedinger law ----------------------------------------------

@dataclass(frozen=True)
class TwoPointResult:
    beta_side: float
    t_side: float
    residual: float


def _log_density_2pt_t(w: float, t: float) -> float:
    return -w * (math.cosh(t) - 1.0) + 0.5 * math.log(w) - 0.5 * t - 0.5 * LOG_2PI


def twopoint_t_side(w: float, g: Callable[[float], float], p_root: float, p_1: float,
                    tol: float = 1e-12) -> float:
    lim = 12.0 + max(0.0, -math.log(w))
    val, err = _sint.quad(
        lambda t: g(p_root + p_1 * math.exp(t)) * math.exp(_log_density_2pt_t(w, t)),
        -lim, lim, points=[0.0], epsabs=tol, epsrel=tol, limit=400,
    )
    if err > 1e-8:
        raise AccuracyError(f"t-side quadrature error {err:.2e}")
    return val


def twopoint_beta_side(w: float, g: Callable[[float], float], p_root: float, p_1: float,
                       tol: float = 1e-11) -> float:
    """Integral of g(p_root + p_1 W / (2 beta_1)) against the two-point beta density.

    The admissible set {beta_1 > 0, 4 beta_1 beta_root > W^2} is mapped to
    (beta_1, u) with beta_root = W^2/(4 beta_1) + u^2, u > 0, which removes the
    1/sqrt(det H_beta) singularity.
    """

    def integrand(u, b1):
        # q_density_2pt(w, b1, W^2/(4 b1) + u^2) * 2u, simplified so that no
        # cancellation occurs in det H_beta = 4 b1 u^2 near u = 0
        expo = -(math.sqrt(b1) - w / (2.0 * math.sqrt(b1))) ** 2 - u * u
        return g(p_root + p_1 * w / (2.0 * b1)) * (2.0 / math.pi) * math.exp(expo) / math.sqrt(b1)

    peak = w / 2.0
    total = 0.0
    err_total = 0.0
    for lo, hi in ((0.0, peak), (peak, np.inf)):
        val, err = _sint.dblquad(integrand, lo, hi, 0.0, np.inf, epsabs=tol, epsrel=tol)
        total += val
        err_total += err
    if err_total > 1e-8:
        raise AccuracyError(f"beta-side quadrature error {err_total:.2e}")
    return total


def twopoint_law_check(w: float, g: Callable[[float], float], p_root: float = 0.0,
                       p_1: float = 1.0) -> TwoPointResult:
    """Compare the beta-side and t-side two-point expectations of a test function."""
    if not w > 0:
        raise PreconditionError("edge weight must be positive")
    lhs = twopoint_beta_side(w, g, p_root, p_1)
    rhs = twopoint_t_side(w, g, p_root, p_1)
    return TwoPointResult(lhs, rhs, abs(lhs - rhs))


# --- perspective convexity ---------------------------------------------------------

def perspective(F: JointProbe, x: np.ndarray, T: np.ndarray) -> np.ndarray:
    """P(x, T) = T F(x / T)."""
    return T * F.value(x / T[..., None])


def perspective_grad(F: JointProbe, x: np.ndarray, T: np.ndarray) -> np.ndarray:
    y = x / T[..., None]
    gy = F.grad(y)
    dT = F.value(y) - np.sum(gy * y, axis=-1)
    return np.concatenate([gy, dT[..., None]], axis=-1)


@dataclass
class PerspectiveReport:
    probe: str
    samples: int
    violations: int
    max_excess: float
    theta_residual: float
    min_eigenvalue: float
    passed: bool


def perspective_convexity_check(F: JointProbe, n: int, samples: int = 100_000, seed: int = 0,
                                hessian_points: int = 200, tol: float = 1e-12,
                                eig_tol: float = 1e-8) -> PerspectiveReport:
    """Joint convexity of the perspective of F on R^n x (0, inf).

    (i) the two-point inequality at random (x, T_x), (y, T_y), lambda, also
    checking the theta-interpolation step that proves it; (ii) the smallest
    eigenvalue of a finite-difference Hessian (central differences of the
    analytic gradient) at random points.
    """
    rng = np.random.default_rng(seed)
    x = rng.uniform(-2.0, 2.0, (samples, n))
    y = rng.uniform(-2.0, 2.0, (samples, n))
    tx = rng.uniform(0.2, 3.0, samples)
    ty = rng.uniform(0.2, 3.0, samples)
    lam = rng.uniform(0.0, 1.0, samples)
    mix_t = lam * tx + (1 - lam) * ty
    mix_x = lam[:, None] * x + (1 - lam)[:, None] * y
    lhs = perspective(F, mix_x, mix_t)
    rhs = lam * perspective(F, x, tx) + (1 - lam) * perspective(F, y, ty)
    theta = lam * tx / mix_t
    middle = mix_t * (theta * F.value(x / tx[:, None]) + (1 - theta) * F.value(y / ty[:, None]))
    excess = lhs - rhs
    # rounding scales with the magnitude of the values compared
    violations = int(np.sum(excess > tol * (1.0 + np.abs(rhs))))
    theta_res = float(np.max(np.abs(middle - rhs) / (1.0 + np.abs(rhs))))

    pts_x = rng.uniform(-2.0, 2.0, (hessian_points, n))
    pts_t = rng.uniform(0.5, 2.0, hessian_points)
    min_eig = math.inf
    h = 1e-6
    for px, pt in zip(pts_x, pts_t):
        z = np.append(px, pt)
        hess = np.empty((n + 1, n + 1))
        for k in range(n + 1):
            e = np.zeros(n + 1)
            e[k] = h
            gp = perspective_grad(F, (z + e)[None, :n], np.array([(z + e)[n]]))[0]
            gm = perspective_grad(F, (z - e)[None, :n], np.array([(z - e)[n]]))[0]
            hess[:, k] = (gp - gm) / (2 * h)
        hess = 0.5 * (hess + hess.T)
        min_eig = min(min_eig, float(np.linalg.eigvalsh(hess)[0]))
    passed = violations == 0 and min_eig >= -eig_tol and theta_res <= 1e-12
    return PerspectiveReport(F.name, samples, violations, float(np.max(excess)), theta_res,
                             min_eig, passed)
