"""Convex test functions applied to the field ``e^{t}``.

Two families:

* :class:`ConvexProbe` - ``f(sum_k p_k e^{t_k})`` for a univariate ``f``;
* :class:`JointProbe` - ``F(e^{t_1}, ..., e^{t_N})`` for a jointly convex ``F``.

Both evaluate on batches ``t`` of shape ``(..., N)``.  Banks are fixed,
versioned lists so reports stay comparable between runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.special import expit, logsumexp

BANK_VERSION = "1"

Array = np.ndarray


@dataclass(frozen=True)
class ConvexProbe:
    name: str
    f: Callable[[Array], Array]
    d1: Callable[[Array], Array]
    d2: Callable[[Array], Array]
    p: Array = field(default=None)
    convex: bool = True

    def argument(self, t: Array) -> Array:
        t = np.asarray(t, dtype=float)
        p = np.ones(t.shape[-1]) if self.p is None else np.asarray(self.p, dtype=float)
        return np.exp(t) @ p

    def __call__(self, t: Array) -> Array:
        return self.f(self.argument(t))

    def with_p(self, p: Sequence[float]) -> "ConvexProbe":
        return ConvexProbe(self.name, self.f, self.d1, self.d2, np.asarray(p, dtype=float), self.convex)


@dataclass(frozen=True)
class JointProbe:
    """A function of ``v = e^t`` with analytic gradient (used for perspectives)."""

    name: str
    value: Callable[[Array], Array]
    grad: Callable[[Array], Array]
    convex: bool = True

    def __call__(self, t: Array) -> Array:
        return self.value(np.exp(np.asarray(t, dtype=float)))


def _softplus(scale: float, shift: float) -> ConvexProbe:
    def f(u):
        return scale * np.logaddexp(0.0, (u - shift) / scale)

    def d1(u):
        return expit((u - shift) / scale)

    def d2(u):
        s = expit((u - shift) / scale)
        return s * (1.0 - s) / scale

    return ConvexProbe(f"softplus(u-{shift:g})", f, d1, d2)


def _exp(rate: float) -> ConvexProbe:
    return ConvexProbe(
        f"exp({rate:g}u)",
        lambda u: np.exp(rate * u),
        lambda u: rate * np.exp(rate * u),
        lambda u: rate * rate * np.exp(rate * u),
    )


SQUARE = ConvexProbe("u^2", lambda u: u * u, lambda u: 2.0 * u, lambda u: np.full_like(u, 2.0))
LINEAR = ConvexProbe("u", lambda u: u, lambda u: np.ones_like(u), lambda u: np.zeros_like(u))
SHIFTED_SQUARE = ConvexProbe(
    "(u-1)^2", lambda u: (u - 1.0) ** 2, lambda u: 2.0 * (u - 1.0), lambda u: np.full_like(u, 2.0)
)
QUARTIC = ConvexProbe("u^4", lambda u: u ** 4, lambda u: 4.0 * u ** 3, lambda u: 12.0 * u ** 2)
SMOOTH_ABS = ConvexProbe(
    "sqrt(1+(u-1)^2)",
    lambda u: np.sqrt(1.0 + (u - 1.0) ** 2),
    lambda u: (u - 1.0) / np.sqrt(1.0 + (u - 1.0) ** 2),
    lambda u: (1.0 + (u - 1.0) ** 2) ** -1.5,
)
NONCONVEX_DEMO = ConvexProbe(
    "-u^2", lambda u: -u * u, lambda u: -2.0 * u, lambda u: np.full_like(u, -2.0), convex=False
)
CONSTANT = ConvexProbe(
    "1", lambda u: np.ones_like(u), lambda u: np.zeros_like(u), lambda u: np.zeros_like(u)
)


def mixed_signs(n: int) -> Array:
    """Deterministic coefficient vector with both signs (when n > 1)."""
    return np.array([1.0 if k % 2 == 0 else -0.5 for k in range(n)])


def convex_bank(n: int) -> List[ConvexProbe]:
    """Univariate convex probes on sum_k p_k e^{t_k}."""
    ones = np.ones(n)
    bank = [
        LINEAR.with_p(ones),
        SQUARE.with_p(ones),
        SHIFTED_SQUARE.with_p(ones),
        _exp(0.1).with_p(ones),
        _softplus(0.25, 1.0).with_p(ones),
        SMOOTH_ABS.with_p(ones),
        QUARTIC.with_p(ones),
    ]
    if n > 1:
        sq = SQUARE.with_p(mixed_signs(n))
        bank.append(ConvexProbe("u^2[mixed p]", sq.f, sq.d1, sq.d2, sq.p))
    return bank


def _quadform_matrix(n: int) -> Array:
    """Fixed PSD matrix B^T B with a deterministic B."""
    k = np.arange(1, n + 1)
    b = np.cos(np.outer(k, k)) + 0.5 * np.eye(n)
    return b.T @ b / n


def joint_bank(n: int) -> List[JointProbe]:
    a = _quadform_matrix(n)
    lin = np.linspace(-1.0, 1.0, n)

    def quad_value(v):
        return np.einsum("...i,ij,...j->...", v, a, v) + v @ lin

    def quad_grad(v):
        return 2.0 * v @ a + lin

    def lse_value(v):
        return logsumexp(v, axis=-1)

    def lse_grad(v):
        return np.exp(v - logsumexp(v, axis=-1)[..., None])

    def norm_value(v):
        return np.sqrt(1.0 + np.sum(v * v, axis=-1))

    def norm_grad(v):
        return v / norm_value(v)[..., None]

    def spread_value(v):
        # sum_{k<l} (v_k - v_l)^2 + v_1^2 / 2
        total = np.sum(v, axis=-1)
        return n * np.sum(v * v, axis=-1) - total ** 2 + 0.5 * v[..., 0] ** 2

    def spread_grad(v):
        out = 2.0 * (n * v - np.sum(v, axis=-1, keepdims=True))
        out[..., 0] += v[..., 0]
        return out

    return [
        JointProbe("quadform", quad_value, quad_grad),
        JointProbe("logsumexp", lse_value, lse_grad),
        JointProbe("softnorm", norm_value, norm_grad),
        JointProbe("spread", spread_value, spread_grad),
    ]


def random_quadratic(n: int, rng: np.random.Generator) -> JointProbe:
    """A random convex quadratic x^T A x + b.x + c with A PSD."""
    b = rng.normal(size=(n, n))
    a = b.T @ b
    lin = rng.normal(size=n)
    c = float(rng.normal())

    return JointProbe(
        "random-quadratic",
        lambda v: np.einsum("...i,ij,...j->...", v, a, v) + v @ lin + c,
        lambda v: 2.0 * v @ a + lin,
    )


def linear_joint(n: int) -> JointProbe:
    lin = np.linspace(-1.0, 2.0, n)
    return JointProbe("linear", lambda v: v @ lin + 0.5, lambda v: np.broadcast_to(lin, v.shape).copy())


def select(bank: Sequence, names: Optional[Sequence[str]]):
    if names is None:
        return list(bank)
    by_name = {p.name: p for p in bank}
    missing = [n for n in names if n not in by_name]
    if missing:
        raise KeyError(f"unknown probes {missing}; available: {sorted(by_name)}")
    return [by_name[n] for n in names]


def check_probe(probe: ConvexProbe, lo: float = -5.0, hi: float = 5.0, samples: int = 201,
                h: float = 1e-5, rtol: float = 1e-5) -> bool:
    """Sample-based sanity check: d2 >= 0 and derivatives match finite differences."""
    u = np.linspace(lo, hi, samples)
    if probe.convex and np.any(probe.d2(u) < 0):
        return False
    fd1 = (probe.f(u + h) - probe.f(u - h)) / (2 * h)
    fd2 = (probe.d1(u + h) - probe.d1(u - h)) / (2 * h)
    scale1 = 1.0 + np.abs(probe.d1(u))
    scale2 = 1.0 + np.abs(probe.d2(u))
    return bool(np.all(np.abs(fd1 - probe.d1(u)) <= rtol * scale1)
                and np.all(np.abs(fd2 - probe.d2(u)) <= rtol * scale2))


PROBE_ALIASES = {"nonconvex-demo": NONCONVEX_DEMO.name}


def probe_catalog(n: int) -> List:
    """Every probe selectable by name for an N-site graph (bank plus the non-convex demo)."""
    return convex_bank(n) + joint_bank(n) + [NONCONVEX_DEMO.with_p(np.ones(n))]


def resolve(n: int, names: Optional[Sequence[str]]):
    if names is None:
        return convex_bank(n) + joint_bank(n)
    return select(probe_catalog(n), [PROBE_ALIASES.get(x, x) for x in names])
