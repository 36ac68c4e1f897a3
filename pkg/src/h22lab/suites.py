"""Identity batteries replaying the supersymmetric derivations.

Symbolic suites compare canonical SuperNumbers or exact rationals: a check
passes only on exact equality.  Numeric suites exercise the graph and
integration layers and carry explicit tolerances.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import superalgebra as sa
from .errors import DomainError, PreconditionError
from .graph import (
    RootedGraph,
    d_w_det,
    d_w_trees,
    is_positive_definite,
    ratio_collapse_residual,
    reroot_density_identity,
    schur_reduce,
    build_h_beta,
)
from .integrate import (
    DEFAULT_W_GRID,
    QuadratureSpec,
    default_quadrature,
    monotonicity_scan,
    perspective_convexity_check,
    tfield_grid,
    twopoint_law_check,
    twopoint_beta_side,
)
from .probes import (
    CONSTANT,
    LINEAR,
    SHIFTED_SQUARE,
    SMOOTH_ABS,
    SQUARE,
    _softplus,
    joint_bank,
    linear_joint,
    random_quadratic,
)
from .superalgebra import SuperNumber, Superalgebra


@dataclass
class IdentityCheck:
    suite: str
    check: str
    inputs_digest: str
    expected: str
    got: str
    passed: bool

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "check": self.check,
            "inputs-digest": self.inputs_digest,
            "expected": self.expected,
            "got": self.got,
            "pass": self.passed,
        }


@dataclass
class VerificationReport:
    checks: List[IdentityCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> List[IdentityCheck]:
        return [c for c in self.checks if not c.passed]

    def by_suite(self) -> Dict[str, Tuple[int, int]]:
        out: Dict[str, Tuple[int, int]] = {}
        for c in self.checks:
            ok, total = out.get(c.suite, (0, 0))
            out[c.suite] = (ok + int(c.passed), total + 1)
        return out

    def to_json(self) -> dict:
        return {
            "pass": self.passed,
            "suites": {k: {"passed": v[0], "total": v[1]} for k, v in sorted(self.by_suite().items())},
            "checks": [c.to_json() for c in self.checks],
        }


def digest(*parts) -> str:
    return hashlib.sha256(repr(parts).encode()).hexdigest()[:16]


def exact_zero(suite: str, name: str, residual: SuperNumber, *inputs) -> IdentityCheck:
    return IdentityCheck(suite, name, digest(name, *[str(i) for i in inputs]), "0",
                         sa.dumps(residual), residual.is_zero())


def exact_equal(suite: str, name: str, expected: Fraction, got: Fraction, *inputs) -> IdentityCheck:
    return IdentityCheck(suite, name, digest(name, *[str(i) for i in inputs]), str(expected),
                         str(got), expected == got)


def within(suite: str, name: str, value: float, tol: float, *inputs) -> IdentityCheck:
    return IdentityCheck(suite, name, digest(name, *inputs), f"<= {tol:g}", f"{value:.3e}",
                         bool(value <= tol))


# --- random exact samples ------------------------------------------------------------

def random_fraction(rng: random.Random, span: int = 5, den: int = 4) -> Fraction:
    return Fraction(rng.randint(-span, span), rng.randint(1, den))


def random_polynomial(alg: Superalgebra, rng: random.Random, degree: int, terms: int = 3,
                      with_r: bool = False) -> SuperNumber:
    """Random bosonic element: polynomial in x, y (and optionally r) of bounded degree."""
    out = alg.zero
    for _ in range(terms):
        term = alg.const(random_fraction(rng))
        for _ in range(rng.randint(0, degree)):
            site = rng.randint(1, alg.n)
            kind = rng.choice("xyr" if with_r else "xy")
            term = term * getattr(alg, kind)(site)
        out = out + term
    return out


def random_supernumber(alg: Superalgebra, rng: random.Random, fermion_degree: int = 4,
                       poly_degree: int = 4, terms: int = 4, parity: Optional[int] = None,
                       with_r: bool = False) -> SuperNumber:
    """Random element whose fermion monomials have degree <= fermion_degree."""
    gens = list(range(2 * alg.n))
    out = alg.zero
    for _ in range(terms):
        k = rng.randint(0, min(fermion_degree, len(gens)))
        if parity is not None and k % 2 != parity:
            k = k + 1 if k + 1 <= min(fermion_degree, len(gens)) else k - 1
            if k < 0 or k % 2 != parity:
                continue
        mono = alg.one
        for gen in sorted(rng.sample(gens, k)):
            mono = mono * alg.gen(gen)
        out = out + random_polynomial(alg, rng, poly_degree, 3, with_r) * mono
    return out


def leibniz_det(m: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant by the permutation expansion (independent of any elimination)."""
    n = len(m)
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        prod = Fraction(1)
        for i, j in enumerate(perm):
            prod *= m[i][j]
        total += -prod if inv % 2 else prod
    return total


# --- symbolic identity operations ----------------------------------------------------

def verify_localization(P: SuperNumber, w) -> IdentityCheck:
    """Flat integral of Q(P exp(-w sum H / 2)) must vanish exactly."""
    for c in P.terms.values():
        if c.as_polynomial() is None:
            raise PreconditionError("P must have polynomial coefficients")
    weighted = P * sa.fermionic_weight(P.alg, w)
    value = sa.gaussian_flat_integrate(sa.q_with_weight(weighted, w), w)
    return exact_equal("localization", f"int Q(P e^(-wH/2)) [w={w}]", Fraction(0), value, P, w)


def verify_ibp(f: SuperNumber, g: SuperNumber, w) -> IdentityCheck:
    """int Q(f) g A = -(-1)^|f| int f Q(g A) with A = exp(-w sum H / 2)."""
    par = f.parity
    if par is None:
        raise DomainError("f must have homogeneous parity")
    alg = f.alg
    ef = sa.fermionic_weight(alg, w)
    lhs = sa.gaussian_flat_integrate(sa.apply_q(f) * g * ef, w)
    rhs = -(-1) ** par * sa.gaussian_flat_integrate(f * sa.q_with_weight(g * ef, w), w)
    return exact_equal("ibp", f"Q-integration by parts [|f|={par}, w={w}]", rhs, lhs, f, g, w)


def _poly_eval(alg: Superalgebra, coeffs: Sequence[Fraction], var: SuperNumber) -> SuperNumber:
    out = alg.zero
    power = alg.one
    for c in coeffs:
        if c:
            out = out + power * c
        power = power * var
    return out


def _poly_derivative(coeffs: Sequence[Fraction]) -> List[Fraction]:
    return [k * c for k, c in enumerate(coeffs)][1:]


def normal_expectation(coeffs: Sequence[Fraction], w: Fraction) -> Fraction:
    return sum((c * sa.gaussian_moment(k, w) for k, c in enumerate(coeffs)), Fraction(0))


def normal_expectation_dw(coeffs: Sequence[Fraction], w: Fraction) -> Fraction:
    """d/dw E[f(N)], N ~ normal(0, 1/w), from d/dw (2j-1)!! w^-j."""
    total = Fraction(0)
    for k, c in enumerate(coeffs):
        if k % 2 == 0 and k:
            j = k // 2
            total += c * (-j) * sa.gaussian_moment(k, w) / w
    return total


def verify_slepian_chain(coeffs: Sequence, w) -> List[IdentityCheck]:
    """Every displayed step of the supersymmetric Gaussian convexity argument.

    ``coeffs`` lists the polynomial f by increasing power.  Each step is
    evaluated exactly and compared to the closed-form derivative of E[f(N)].
    """
    w = Fraction(w)
    coeffs = [Fraction(c) for c in coeffs]
    alg = Superalgebra(1)
    x, y, xi, eta = alg.x(1), alg.y(1), alg.xi(1), alg.eta(1)
    ef = sa.fermionic_weight(alg, w)
    lam = sa.build_lambda(alg, 1)
    nu = -(x * y * xi) - y * y * eta
    f = _poly_eval(alg, coeffs, x)
    d1 = _poly_eval(alg, _poly_derivative(coeffs), x)
    d2c = _poly_derivative(_poly_derivative(coeffs))
    d2 = _poly_eval(alg, d2c, x)

    def integral(a: SuperNumber) -> Fraction:
        return sa.gaussian_flat_integrate(a, w)

    half = Fraction(1, 2)
    target = normal_expectation_dw(coeffs, w)
    closed = -normal_expectation(d2c, w) / (2 * w * w)
    ws = (w,)
    y2 = (alg.coeffs.y(1) * alg.coeffs.y(1)).as_polynomial()
    real_form = -half * sa.polynomial_gaussian_integral(d2.body.as_polynomial() * y2, ws) if d2c else Fraction(0)
    steps = [
        ("I = int dmu f e^(-wH/2) equals E[f(N)]", normal_expectation(coeffs, w), integral(f * ef)),
        ("dI/dw = -1/2 int f H e^(-wH/2)", target, -half * integral(f * sa.build_h(alg, 1) * ef)),
        ("= -1/2 int f Q(lambda e^(-wH/2))", target, -half * integral(f * sa.q_with_weight(lam * ef, w))),
        ("= 1/2 int Q(f) lambda e^(-wH/2)", target, half * integral(sa.apply_q(f) * lam * ef)),
        ("= 1/2 int f' xi lambda e^(-wH/2)", target, half * integral(d1 * xi * lam * ef)),
        ("= 1/2 int f' x xi eta e^(-wH/2)", target, half * integral(d1 * x * xi * eta * ef)),
        ("= 1/2 int f' Q(nu) e^(-wH/2)", target, half * integral(d1 * sa.apply_q(nu) * ef)),
        ("= -1/2 int Q(f') nu e^(-wH/2)", target, -half * integral(sa.apply_q(d1) * nu * ef)),
        ("= -1/2 int f'' xi nu e^(-wH/2)", target, -half * integral(d2 * xi * nu * ef)),
        ("= -1/2 int dxdy/2pi f'' y^2 e^(-w(x^2+y^2)/2)", target, real_form),
        ("= -E[f''(N)]/(2 w^2)", target, closed),
    ]
    return [exact_equal("slepian", name, exp, got, coeffs, w) for name, exp, got in steps]


def verify_onepoint_ladder() -> List[IdentityCheck]:
    """Q-exactness identities of the rooted one-point graph, in the full ring."""
    alg = Superalgebra(1)
    x, y, xi, eta = alg.x(1), alg.y(1), alg.xi(1), alg.eta(1)
    z = sa.build_z(alg, 1)
    lam = sa.build_lambda(alg, 1)
    inv = sa.invert_even(alg.one + z)
    lam_t = lam * inv
    nu = -(x * y * xi) - y * y * eta
    nu_t = nu * inv
    q = sa.apply_q
    cases = [
        ("Q(z)", q(z)),
        ("z^2 - (1 + x^2 + y^2 + 2 xi eta)", z * z - (alg.one + x * x + y * y + 2 * xi * eta)),
        ("Q(1/(1+z))", q(inv)),
        ("Q(lambda~) - (z - 1)", q(lam_t) - (z - alg.one)),
        ("Q(nu) - xi lambda", q(nu) - xi * lam),
        ("xi lambda - x xi eta", xi * lam - x * xi * eta),
        ("Q(nu~) - xi lambda~", q(nu_t) - xi * lam_t),
        ("xi nu~ + y^2 xi eta/(1+z)", xi * nu_t + y * y * xi * eta * inv),
    ]
    return [exact_zero("onepoint", name, res) for name, res in cases]


def verify_switching_flat(F: SuperNumber, k: int, i: int, j: int, w) -> IdentityCheck:
    """Both switching identities for a polynomial F(x) under the flat weight.

    int F x_k xi_i eta_j A = -int F x_k y_i y_j A
                           = sum_l int d_l F xi_l eta_k y_i y_j A.
    """
    alg = F.alg
    ef = sa.fermionic_weight(alg, w)

    def integral(a):
        return sa.gaussian_flat_integrate(a * ef, w)

    first = integral(F * alg.x(k) * alg.xi(i) * alg.eta(j))
    second = -integral(F * alg.x(k) * alg.y(i) * alg.y(j))
    third = sum(
        (integral(sa.derive_boson(F, "x", l) * alg.xi(l) * alg.eta(k) * alg.y(i) * alg.y(j))
         for l in alg.sites()),
        Fraction(0),
    )
    got = f"{first} | {second} | {third}"
    return IdentityCheck("switching", f"switching (k,i,j)=({k},{i},{j}) w={w}",
                         digest(str(F), k, i, j, w), str(second), got,
                         first == second == third)


# --- suites --------------------------------------------------------------------------

@dataclass(frozen=True)
class SuiteConfig:
    suites: Tuple[str, ...] = ()
    seed: int = 0
    berezin_order: str = "xi_eta"
    algebra_samples: int = 20
    gaussian_instances: int = 100
    localization_bank: int = 50
    localization_weights: Tuple[Fraction, ...] = (Fraction(1, 2), Fraction(1), Fraction(3))
    slepian_weights: Tuple[Fraction, ...] = (Fraction(1, 2), Fraction(1), Fraction(2))
    switching_max_n: int = 3
    matrix_tree_instances: int = 200
    partition_sizes: Tuple[int, ...] = (1, 2, 3)
    partition_draws: int = 5
    partition_tol: float = 1e-6
    reroot_points: int = 1000
    schur_instances: int = 200
    twopoint_weights: Tuple[float, ...] = (0.25, 0.5, 1.0, 2.0, 4.0)
    perspective_samples: int = 100_000
    monotonicity_sizes: Tuple[int, ...] = (1, 2)
    monotonicity_grid: Tuple[float, ...] = DEFAULT_W_GRID


def suite_algebra(cfg: SuiteConfig) -> List[IdentityCheck]:
    rng = random.Random(cfg.seed)
    out: List[IdentityCheck] = []
    alg = Superalgebra(2)
    gens = [alg.gen(g) for g in range(4)]
    for a, b in itertools.product(range(4), repeat=2):
        ga, gb = gens[a], gens[b]
        if a == b:
            out.append(exact_zero("algebra", f"nilpotent {sa.generator_name(a)}^2", ga * ga))
        else:
            out.append(exact_zero("algebra", f"anticommute {sa.generator_name(a)},{sa.generator_name(b)}",
                                  ga * gb + gb * ga))
    for s in range(cfg.algebra_samples):
        n = 1 + s % 3
        al = Superalgebra(n)
        a, b, c = (random_supernumber(al, rng, 6, 2, with_r=bool(s % 2)) for _ in range(3))
        if s % 3 == 2:
            # bring the denominators s_i, (1 + r_i) into play
            a = a * sa.invert_even(al.one + sa.build_z(al, 1))
        out.append(exact_zero("algebra", f"associativity #{s}", (a * b) * c - a * (b * c), a, b, c))
        out.append(exact_zero("algebra", f"distributivity #{s}", a * (b + c) - (a * b + a * c), a, b, c))
        pf = rng.randint(0, 1)
        f = random_supernumber(al, rng, 3, 2, parity=pf, with_r=bool(s % 2))
        g = random_supernumber(al, rng, 3, 2, with_r=bool(s % 2))
        q = sa.apply_q
        sign = -1 if pf else 1
        out.append(exact_zero("algebra", f"super-Leibniz #{s}", q(f * g) - (q(f) * g + f * q(g) * sign), f, g))
        out.append(exact_zero("algebra", f"Q^2 = rotation #{s}", q(q(a)) - sa.rotation_generator(a), a))
    for i in alg.sites():
        out.append(exact_zero("algebra", f"Q(H_{i})", sa.apply_q(sa.build_h(alg, i))))
        out.append(exact_zero("algebra", f"Q(lambda_{i}) - H_{i}",
                              sa.apply_q(sa.build_lambda(alg, i)) - sa.build_h(alg, i)))
        out.append(exact_zero("algebra", f"Q(z_{i})", sa.apply_q(sa.build_z(alg, i))))
    for i, j in itertools.combinations_with_replacement(alg.sites(), 2):
        out.append(exact_zero("algebra", f"Q(v_{i}.v_{j})", sa.apply_q(sa.inner_product(alg, i, j))))
    for i in alg.sites():
        out.append(exact_zero("algebra", f"v_{i}.v_{i} + 1",
                              sa.inner_product(alg, i, i) + alg.one))
    return out


def suite_fermion_gaussian(cfg: SuiteConfig) -> List[IdentityCheck]:
    rng = random.Random(cfg.seed + 1)
    out = []
    for s in range(cfg.gaussian_instances):
        n = 1 + s % 3
        sigma = [[random_fraction(rng) for _ in range(n)] for _ in range(n)]
        alg = Superalgebra(n)
        top = sa.berezin_integrate(sa.fermionic_gaussian(alg, sigma), cfg.berezin_order)
        out.append(exact_equal("fermion-gaussian", f"det via Berezin #{s} (N={n})",
                               leibniz_det(sigma), top.constant(), sigma))
    return out


def localization_bank(cfg: SuiteConfig) -> List[SuperNumber]:
    rng = random.Random(cfg.seed + 2)
    bank = []
    for s in range(cfg.localization_bank):
        alg = Superalgebra(1 + s % 2)
        bank.append(random_supernumber(alg, rng, 4, 4, 3))
    return bank


def suite_localization(cfg: SuiteConfig) -> List[IdentityCheck]:
    alg = Superalgebra(1)
    out = [verify_localization(sa.build_lambda(alg, 1), 1),
           verify_localization(alg.x(1) * alg.xi(1), 2)]
    for P in localization_bank(cfg):
        for ww in cfg.localization_weights:
            out.append(verify_localization(P, ww))
    return out


def suite_ibp(cfg: SuiteConfig) -> List[IdentityCheck]:
    rng = random.Random(cfg.seed + 3)
    alg = Superalgebra(1)
    out = [verify_ibp(alg.xi(1), alg.x(1), 1), verify_ibp(alg.x(1), alg.y(1) * alg.eta(1), 1),
           verify_ibp(alg.const(3), alg.x(1) * alg.x(1), 2)]
    for s in range(cfg.algebra_samples):
        al = Superalgebra(1 + s % 2)
        f = random_supernumber(al, rng, 3, 3, 2, parity=s % 2)
        g = random_supernumber(al, rng, 3, 3, 2)
        out.append(verify_ibp(f, g, cfg.localization_weights[s % len(cfg.localization_weights)]))
    return out


SLEPIAN_PROBES: Tuple[Tuple[int, ...], ...] = (
    (0, 0, 1),
    (0, 0, 0, 0, 1),
    (5,),
    (1, -2, 3, 0, -1, 2, 1),
    (0, 1, 0, -1, 0, 0, 2),
)


def suite_slepian(cfg: SuiteConfig) -> List[IdentityCheck]:
    out = []
    for coeffs in SLEPIAN_PROBES:
        for w in cfg.slepian_weights:
            out.extend(verify_slepian_chain(coeffs, w))
    return out


def suite_onepoint(cfg: SuiteConfig) -> List[IdentityCheck]:
    return verify_onepoint_ladder()


def suite_switching(cfg: SuiteConfig) -> List[IdentityCheck]:
    rng = random.Random(cfg.seed + 4)
    out = []
    for n in range(1, cfg.switching_max_n + 1):
        alg = Superalgebra(n)
        bank = [alg.one, alg.x(1), alg.x(1) * alg.x(n)]
        bank += [random_polynomial_x(alg, rng, 4) for _ in range(2)]
        weights = tuple(Fraction(1 + s, 2) for s in range(n))
        for F in bank:
            for k, i, j in itertools.product(alg.sites(), repeat=3):
                out.append(verify_switching_flat(F, k, i, j, weights))
        ef = sa.fermionic_weight(alg, weights)
        for i, j in itertools.product(alg.sites(), repeat=2):
            unbalanced = sa.gaussian_flat_integrate(bank[-1] * alg.x(1) * alg.xi(i) * alg.xi(j) * ef, weights)
            out.append(exact_equal("switching", f"unbalanced xi_{i} xi_{j} vanishes (N={n})",
                                   Fraction(0), unbalanced, i, j))
    return out


def random_polynomial_x(alg: Superalgebra, rng: random.Random, degree: int) -> SuperNumber:
    out = alg.zero
    for _ in range(4):
        term = alg.const(random_fraction(rng))
        for _ in range(rng.randint(0, degree)):
            term = term * alg.x(rng.randint(1, alg.n))
        out = out + term
    return out


def random_graph(n: int, rng: np.random.Generator, lo: float = 0.2, hi: float = 3.0) -> RootedGraph:
    w = rng.uniform(lo, hi, (n + 1, n + 1))
    return RootedGraph(np.triu(w, 1) + np.triu(w, 1).T)


def suite_matrix_tree(cfg: SuiteConfig) -> List[IdentityCheck]:
    rng = np.random.default_rng(cfg.seed + 5)
    worst = 0.0
    for s in range(cfg.matrix_tree_instances):
        n = 1 + s % 5
        g = random_graph(n, rng, 0.1, 5.0)
        t = rng.uniform(-3, 3, n)
        trees, det = d_w_trees(g, t), d_w_det(g, t)
        worst = max(worst, abs(trees - det) / abs(trees))
    return [within("matrix-tree", f"tree sum = det, {cfg.matrix_tree_instances} instances (rel)",
                   worst, 1e-10, cfg.seed)]


def suite_partition(cfg: SuiteConfig) -> List[IdentityCheck]:
    rng = np.random.default_rng(cfg.seed + 6)
    out = []
    for n in cfg.partition_sizes:
        for d in range(cfg.partition_draws):
            g = random_graph(n, rng)
            grid = tfield_grid(g, default_quadrature(n))
            z = grid.mass.sum()
            out.append(within("partition", f"|Z - 1| N={n} draw {d}", abs(z - 1), cfg.partition_tol,
                              g.weights.tobytes()))
            for k in range(n):
                ward = grid.expect(np.exp(grid.t[:, k]))
                out.append(within("partition", f"|E e^t_{k + 1} - 1| N={n} draw {d}", abs(ward - 1),
                                  cfg.partition_tol, g.weights.tobytes()))
    return out


def suite_reroot(cfg: SuiteConfig) -> List[IdentityCheck]:
    rng = np.random.default_rng(cfg.seed + 7)
    worst = 0.0
    for s in range(cfg.reroot_points):
        n = 1 + s % 4
        g = random_graph(n, rng, 0.1, 5.0)
        t = np.append(rng.uniform(-3, 3, n), 0.0)
        b = int(rng.integers(0, n + 1))
        worst = max(worst, reroot_density_identity(g, t, b))
    return [within("reroot", f"max rerooting residual, {cfg.reroot_points} points", worst, 1e-12, cfg.seed)]


def random_pd_beta(g: RootedGraph, rng: np.random.Generator) -> np.ndarray:
    """beta making H_beta diagonally dominant, hence positive definite."""
    margin = rng.uniform(0.1, 2.0, g.n + 1)
    return 0.5 * (g.weights.sum(axis=1) + margin)


def suite_schur(cfg: SuiteConfig) -> List[IdentityCheck]:
    rng = np.random.default_rng(cfg.seed + 8)
    worst_ratio = 0.0
    worst_w = 0.0
    worst_fd = 0.0
    for s in range(cfg.schur_instances):
        n = 2 + s % 5
        g = random_graph(n, rng, 0.1, 3.0)
        beta = random_pd_beta(g, rng)
        assert is_positive_definite(build_h_beta(g, beta))
        p = rng.normal(size=n + 1)
        worst_ratio = max(worst_ratio, ratio_collapse_residual(g, beta, p))
        red = schur_reduce(g, beta, p=p)
        # the boundary block of the inverse of H_beta is the inverse Schur complement
        green = np.linalg.inv(build_h_beta(g, beta))
        gb = green[np.ix_(red.boundary, red.boundary)]
        worst_w = max(worst_w, abs(-np.linalg.inv(gb)[0, 1] - red.w_tilde))
        edge = red.boundary
        h = 1e-4
        wn = g.weights[edge]
        up = schur_reduce(g.with_weight(edge, wn + h), beta).w_tilde
        dn = schur_reduce(g.with_weight(edge, wn - h), beta).w_tilde
        worst_fd = max(worst_fd, abs((up - dn) / (2 * h) - 1.0))
    return [
        within("schur", "ratio collapse residual", worst_ratio, 1e-12, cfg.seed),
        within("schur", "W~ = -(G_boundary^-1)_{N,root}", worst_w, 1e-12, cfg.seed),
        within("schur", "|dW~/dW_N,root - 1| (finite difference)", worst_fd, 1e-6, cfg.seed),
    ]


def twopoint_bank():
    return [CONSTANT, LINEAR, SQUARE, _softplus(0.25, 1.0), SMOOTH_ABS]


def suite_twopoint(cfg: SuiteConfig) -> List[IdentityCheck]:
    out = []
    for probe in twopoint_bank():
        g = lambda u, _p=probe: float(_p.f(np.float64(u)))
        betas = []
        for w in cfg.twopoint_weights:
            r = twopoint_law_check(w, g, 0.0, 1.0)
            betas.append(r.beta_side)
            out.append(within("twopoint", f"|beta-side - t-side| {probe.name} W={w}", r.residual, 1e-6,
                              probe.name, w))
        steps = np.diff(betas)
        out.append(within("twopoint", f"beta-side non-increasing in W, {probe.name}",
                          float(max(steps.max(), 0.0)), 1e-6, probe.name))
    return out


def suite_perspective(cfg: SuiteConfig) -> List[IdentityCheck]:
    rng = np.random.default_rng(cfg.seed + 9)
    out = []
    probes = [(random_quadratic(3, rng), 3), (linear_joint(2), 2)] + [(p, 3) for p in joint_bank(3)]
    for probe, n in probes:
        rep = perspective_convexity_check(probe, n, cfg.perspective_samples, cfg.seed)
        out.append(IdentityCheck("perspective", f"midpoint violations, {probe.name}",
                                 digest(probe.name, n, cfg.seed), "0 beyond 1e-12",
                                 str(rep.violations), rep.violations == 0))
        out.append(within("perspective", f"-min Hessian eigenvalue, {probe.name}",
                          max(-rep.min_eigenvalue, 0.0), 1e-8, probe.name))
        out.append(within("perspective", f"theta interpolation identity, {probe.name}",
                          rep.theta_residual, 1e-12, probe.name))
    return out


def suite_monotonicity(cfg: SuiteConfig) -> List[IdentityCheck]:
    rng = np.random.default_rng(cfg.seed + 10)
    graphs = {f"N{n}": random_graph(n, rng, 0.5, 2.0) for n in cfg.monotonicity_sizes}
    out = []
    for rep in monotonicity_scan(graphs, w_grid=cfg.monotonicity_grid):
        out.append(within("monotonicity", f"max dK/dW {rep.graph} {rep.edge} {rep.probe}",
                          rep.max_violation, rep.tolerance, rep.graph, rep.edge, rep.probe))
    return out


SYMBOLIC_SUITES: Dict[str, Callable[[SuiteConfig], List[IdentityCheck]]] = {
    "algebra": suite_algebra,
    "fermion-gaussian": suite_fermion_gaussian,
    "localization": suite_localization,
    "ibp": suite_ibp,
    "slepian": suite_slepian,
    "onepoint": suite_onepoint,
    "switching": suite_switching,
}

NUMERIC_SUITES: Dict[str, Callable[[SuiteConfig], List[IdentityCheck]]] = {
    "matrix-tree": suite_matrix_tree,
    "partition": suite_partition,
    "reroot": suite_reroot,
    "schur": suite_schur,
    "twopoint": suite_twopoint,
    "perspective": suite_perspective,
    "monotonicity": suite_monotonicity,
}

ALL_SUITES = {**SYMBOLIC_SUITES, **NUMERIC_SUITES}


def run_all_suites(config: Optional[SuiteConfig] = None) -> VerificationReport:
    """Run the selected suites in a fixed order.

    ``config=None`` runs everything with defaults; a config with an empty
    ``suites`` tuple yields an empty report.  A failing or crashing check is
    recorded, never raised.
    """
    if config is None:
        config = SuiteConfig(suites=tuple(ALL_SUITES))
    unknown = [s for s in config.suites if s not in ALL_SUITES]
    if unknown:
        raise KeyError(f"unknown suites {unknown}; available: {list(ALL_SUITES)}")
    report = VerificationReport()
    for name in ALL_SUITES:
        if name not in config.suites:
            continue
        try:
            report.checks.extend(ALL_SUITES[name](config))
        except Exception as exc:  # recorded so one broken battery cannot abort the run
            report.checks.append(IdentityCheck(name, "suite crashed", digest(name), "no error",
                                               f"{type(exc).__name__}: {exc}", False))
    return report
