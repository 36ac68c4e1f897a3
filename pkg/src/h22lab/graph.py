"""Rooted weighted graphs and the real-variable t-field of the H^{2|2} model.

Vertices are indexed ``0 .. n-1`` for the bulk and ``n`` for the root
(``delta``).  Configurations come in two shapes:

* ``t`` of length ``n``: bulk values, the root value is implicitly 0;
* ``t_full`` of length ``n + 1``: values on every vertex, used when the
  pinning vertex is not the root.

Densities are handled in log space throughout; the batched helpers accept
arrays with arbitrary leading dimensions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import LinAlgError, PreconditionError, SizeError, StructureError

Edge = Tuple[int, int]
LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class RootedGraph:
    """Symmetric nonnegative weights on ``{0..n-1, root=n}`` with connected support."""

    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 2:
            raise StructureError(f"weights must be a square matrix of size >= 2, got {w.shape}")
        np.fill_diagonal(w, 0.0)
        if not np.all(np.isfinite(w)):
            raise StructureError("weights must be finite")
        if not np.array_equal(w, w.T):
            raise StructureError("weights must be symmetric")
        if np.any(w < 0):
            raise StructureError("weights must be nonnegative")
        if not _connected(w > 0):
            raise StructureError("support of the weights must be connected")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0] - 1

    @property
    def root(self) -> int:
        return self.n

    @classmethod
    def complete(cls, n: int, weight: float = 1.0) -> "RootedGraph":
        w = np.full((n + 1, n + 1), float(weight))
        return cls(w)

    @classmethod
    def from_edges(cls, n: int, edges: Dict[Edge, float]) -> "RootedGraph":
        w = np.zeros((n + 1, n + 1))
        for (a, b), v in edges.items():
            w[a, b] = w[b, a] = v
        return cls(w)

    def with_weight(self, edge: Edge, value: float) -> "RootedGraph":
        a, b = edge
        w = self.weights.copy()
        w[a, b] = w[b, a] = value
        return RootedGraph(w)

    def edges(self) -> List[Edge]:
        """Edges with positive weight, as ``(a, b)`` with ``a < b``."""
        v = self.n + 1
        return [(a, b) for a in range(v) for b in range(a + 1, v) if self.weights[a, b] > 0]

    def label(self, vertex: int) -> str:
        return "d" if vertex == self.root else str(vertex + 1)

    def edge_label(self, edge: Edge) -> str:
        return f"{self.label(edge[0])}-{self.label(edge[1])}"


def _connected(adj: np.ndarray) -> bool:
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for u in np.nonzero(adj[v])[0]:
            if u not in seen:
                seen.add(int(u))
                stack.append(int(u))
    return len(seen) == adj.shape[0]


def full_config(t: Sequence[float]) -> np.ndarray:
    """Append the pinned root value 0 to a bulk configuration."""
    t = np.asarray(t, dtype=float)
    return np.concatenate([t, np.zeros(t.shape[:-1] + (1,))], axis=-1)


# --- spanning trees ------------------------------------------------------------

def enumerate_spanning_trees(n_total: int) -> List[Tuple[Edge, ...]]:
    """All spanning trees of the complete graph on ``n_total`` labelled vertices.

    Decodes every Pruefer sequence, so each tree appears exactly once.
    """
    if not 2 <= n_total <= 8:
        raise SizeError(f"tree enumeration supports 2..8 vertices, got {n_total}")
    if n_total == 2:
        return [((0, 1),)]
    trees = []
    for seq in itertools.product(range(n_total), repeat=n_total - 2):
        degree = [1] * n_total
        for v in seq:
            degree[v] += 1
        edges = []
        for v in seq:
            leaf = degree.index(1)
            edges.append((min(leaf, v), max(leaf, v)))
            degree[leaf] -= 1
            degree[v] -= 1
        u, w = [i for i in range(n_total) if degree[i] == 1]
        edges.append((u, w))
        trees.append(tuple(sorted(edges)))
    return trees


def d_w_trees(g: RootedGraph, t: Sequence[float]) -> float:
    """Spanning-tree polynomial sum_T prod_{(ij) in T} W_ij e^{t_i + t_j}, t_root = 0."""
    tf = full_config(t)
    ew = g.weights * np.exp(tf[:, None] + tf[None, :])
    total = 0.0
    for tree in enumerate_spanning_trees(g.n + 1):
        prod = 1.0
        for a, b in tree:
            prod *= ew[a, b]
            if prod == 0.0:
                break
        total += prod
    return total


# --- Laplacians and determinants -----------------------------------------------

def laplacian(g: RootedGraph, t: Sequence[float]) -> np.ndarray:
    """The n x n M-matrix: -W_ij e^{t_i+t_j} off the diagonal, row sums W_i,root e^{t_i}."""
    return reduced_laplacian(g, full_config(t), g.root)


def reduced_laplacian(g: RootedGraph, t_full: np.ndarray, pin: int) -> np.ndarray:
    """Weighted Laplacian of W_ij e^{t_i+t_j} with row and column ``pin`` removed.

    Batched over leading dimensions of ``t_full``.
    """
    t_full = np.asarray(t_full, dtype=float)
    ew = g.weights * np.exp(t_full[..., :, None] + t_full[..., None, :])
    lap = -ew
    idx = np.arange(g.n + 1)
    lap[..., idx, idx] = ew.sum(axis=-1)
    keep = np.delete(idx, pin)
    return lap[..., keep[:, None], keep[None, :]]


def d_w_det(g: RootedGraph, t: Sequence[float]) -> float:
    return float(np.linalg.det(laplacian(g, t)))


def log_tree_polynomial(g: RootedGraph, t_full: np.ndarray, pin: int) -> np.ndarray:
    sign, logdet = np.linalg.slogdet(reduced_laplacian(g, t_full, pin))
    if np.any(sign <= 0):
        raise LinAlgError("reduced Laplacian is not positive definite")
    return logdet


def _cosh_energy(g: RootedGraph, t_full: np.ndarray) -> np.ndarray:
    """(1/2) sum over ordered pairs W_ij (cosh(t_i - t_j) - 1)."""
    diff = t_full[..., :, None] - t_full[..., None, :]
    return 0.5 * np.sum(g.weights * (np.cosh(diff) - 1.0), axis=(-2, -1))


def effective_action(g: RootedGraph, t: Sequence[float]) -> float:
    tf = full_config(t)
    log_d = log_tree_polynomial(g, tf, g.root)
    return float(_cosh_energy(g, tf) - 0.5 * (log_d - 2.0 * np.sum(tf, axis=-1)))


def _check_pin(t_full: np.ndarray, pin: int):
    if np.any(t_full[..., pin] != 0.0):
        raise PreconditionError(f"configuration must vanish at the pinning vertex {pin}")


def log_mixing_density(g: RootedGraph, t_full, i0: int):
    """Log density of the t-field pinned at ``i0`` (batched).

    -1/2 sum_{i,j} W_ij (cosh(t_i - t_j) - 1) + 1/2 ln D_W(t) - sum_i t_i
    - (|V| - 1)/2 ln(2 pi), with D_W the tree polynomial of the full config.
    """
    t_full = np.asarray(t_full, dtype=float)
    if t_full.shape[-1] != g.n + 1:
        raise StructureError(f"expected configurations of length {g.n + 1}")
    _check_pin(t_full, i0)
    out = (
        -_cosh_energy(g, t_full)
        + 0.5 * log_tree_polynomial(g, t_full, i0)
        - np.sum(t_full, axis=-1)
        - 0.5 * g.n * LOG_2PI
    )
    return float(out) if np.ndim(out) == 0 else out


def log_density_root(g: RootedGraph, t) -> np.ndarray:
    """Log density of the root-pinned field at bulk configurations ``t`` (batched)."""
    return log_mixing_density(g, full_config(t), g.root)


def dW_log_density(g: RootedGraph, t_full, i0: int, edge: Edge):
    """Derivative of :func:`log_mixing_density` in the weight of ``edge`` (batched).

    d/dW_ab ln det L = e^{t_a+t_b} (G_aa + G_bb - 2 G_ab) with G the inverse
    reduced Laplacian, extended by zero on the pinned vertex.
    """
    t_full = np.asarray(t_full, dtype=float)
    _check_pin(t_full, i0)
    a, b = edge
    if a == b:
        raise StructureError("edge endpoints must differ")
    lap = reduced_laplacian(g, t_full, i0)
    green = np.linalg.inv(lap)
    pos = {v: k for k, v in enumerate(v for v in range(g.n + 1) if v != i0)}

    def entry(u, v):
        if u == i0 or v == i0:
            return 0.0
        return green[..., pos[u], pos[v]]

    quad = entry(a, a) + entry(b, b) - 2.0 * entry(a, b)
    ta, tb = t_full[..., a], t_full[..., b]
    out = -(np.cosh(ta - tb) - 1.0) + 0.5 * np.exp(ta + tb) * quad
    return float(out) if np.ndim(out) == 0 else out


def reroot_density_identity(g: RootedGraph, t_full, b: int) -> float:
    """|log(e^{t_b - t_root} nu_root(t)) - log nu_b(t - t_b)| at one configuration."""
    t_full = np.asarray(t_full, dtype=float)
    _check_pin(t_full, g.root)
    lhs = t_full[b] - t_full[g.root] + log_mixing_density(g, t_full, g.root)
    shifted = t_full - t_full[b]
    shifted[b] = 0.0
    rhs = log_mixing_density(g, shifted, b)
    return abs(lhs - rhs)


# --- random Schroedinger representation -----------------------------------------

def build_h_beta(g: RootedGraph, beta: Sequence[float]) -> np.ndarray:
    """H_beta: 2 beta_i on the diagonal, -W_ij off it.  Positivity is not enforced."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (g.n + 1,):
        raise StructureError(f"beta must have length {g.n + 1}")
    h = -np.array(g.weights)
    np.fill_diagonal(h, 2.0 * beta)
    return h


@dataclass(frozen=True)
class SchurReduction:
    """Result of collapsing the bulk block onto a two-vertex boundary."""

    w_tilde: float
    schur: np.ndarray  # 2x2 inverse of the boundary block of G
    m: np.ndarray  # -(H_11)^{-1} H_12, rows = bulk, columns = boundary
    alpha: np.ndarray
    p_tilde: np.ndarray  # (p~_N, p~_root)
    bulk: Tuple[int, ...]
    boundary: Tuple[int, int]


def schur_reduce(
    g: RootedGraph,
    beta: Sequence[float],
    bulk: Optional[Sequence[int]] = None,
    boundary: Optional[Tuple[int, int]] = None,
    p: Optional[Sequence[float]] = None,
) -> SchurReduction:
    """Integrate the bulk block of H_beta out, leaving an effective boundary edge."""
    if boundary is None:
        boundary = (g.n - 1, g.root)
    boundary = tuple(int(v) for v in boundary)
    if bulk is None:
        bulk = [v for v in range(g.n + 1) if v not in boundary]
    bulk = tuple(int(v) for v in bulk)
    if len(set(boundary)) != 2 or sorted(bulk + boundary) != list(range(g.n + 1)):
        raise StructureError("bulk and boundary must partition the vertex set")
    h = build_h_beta(g, beta)
    p = np.zeros(g.n + 1) if p is None else np.asarray(p, dtype=float)
    b1, b2 = list(bulk), list(boundary)
    h22 = h[np.ix_(b2, b2)]
    if not b1:
        m = np.zeros((0, 2))
        schur = h22
        correction = 0.0
    else:
        h11 = h[np.ix_(b1, b1)]
        h12 = h[np.ix_(b1, b2)]
        try:
            m = -np.linalg.solve(h11, h12)
        except np.linalg.LinAlgError as exc:
            raise LinAlgError("bulk block of H_beta is singular") from exc
        schur = h22 + h12.T @ m
        correction = float((h12.T @ np.linalg.solve(h11, h12))[0, 1])
    w_tilde = float(g.weights[b2[0], b2[1]] + correction)
    alpha = p[b1] @ m if b1 else np.zeros(2)
    p_tilde = alpha + p[b2]
    return SchurReduction(w_tilde, schur, m, alpha, p_tilde, bulk, boundary)


def ratio_collapse_residual(g: RootedGraph, beta: Sequence[float], p: Sequence[float]) -> float:
    """|sum_j p_j G(j,root)/G(root,root) - (p~_root + p~_N G2(N,root)/G2(root,root))|."""
    p = np.asarray(p, dtype=float)
    red = schur_reduce(g, beta, p=p)
    green = np.linalg.inv(build_h_beta(g, beta))
    root = g.root
    lhs = float(p @ green[:, root] / green[root, root])
    g2 = np.linalg.inv(red.schur)
    rhs = float(red.p_tilde[1] + red.p_tilde[0] * g2[0, 1] / g2[1, 1])
    return abs(lhs - rhs)


def is_positive_definite(h: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(h)
    except np.linalg.LinAlgError:
        return False
    return True


def q_density_2pt(w: float, beta1, beta_root):
    """Density of (beta_1, beta_root) on the two-point graph; 0 off {H_beta > 0}."""
    beta1 = np.asarray(beta1, dtype=float)
    beta_root = np.asarray(beta_root, dtype=float)
    det = 4.0 * beta1 * beta_root - w * w
    ok = (beta1 > 0) & (det > 0)
    safe = np.where(ok, det, 1.0)
    out = np.where(ok, (2.0 / math.pi) * np.exp(w - beta1 - beta_root) / np.sqrt(safe), 0.0)
    return float(out) if out.ndim == 0 else out
