"""Exact commutative coefficient ring for the superalgebra.

Elements are polynomials in ``x_i, y_i`` and ``r_i = sqrt(1 + x_i^2 + y_i^2)``
with rational scalars, divided by a product of powers of

    s_i = 1 + x_i^2 + y_i^2      (= r_i^2)
    q_i = x_i^2 + y_i^2          (= (r_i - 1)(r_i + 1))

Every element is stored as ``sum_S P_S * prod_{i in S} r_i / D`` where ``S``
runs over subsets of sites, ``P_S`` are polynomials in the ``x, y`` and ``D``
is the monomial ``prod s_i^a_i q_i^b_i``.  Because ``{1, r_i}`` is a free
basis over ``Q[x, y]`` and ``s_i``, ``q_i`` are distinct irreducibles, the
form becomes unique once common factors of ``D`` are cancelled, which
``_make`` does eagerly.  Equality is therefore structural.

Inverses of ``r_i`` and ``1 + r_i`` rationalize into this form:
``1/r = r/s`` and ``1/(1+r) = (r-1)/q``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, Optional, Sequence, Tuple

from sympy import QQ
from sympy.polys.rings import ring as _poly_ring

from .errors import DomainError, StructureError

Subset = FrozenSet[int]
_EMPTY: Subset = frozenset()


def to_qq(value):
    """Convert an int / Fraction / QQ element to a QQ domain element."""
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, int):
        return QQ(value)
    if isinstance(value, float):
        raise TypeError("floats are not allowed in exact coefficients")
    return QQ.convert(value)


def to_fraction(value) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


def _subset_key(subset: Subset):
    return (len(subset), sorted(subset))


class CoefficientRing:
    """The coefficient ring for ``n`` sites."""

    def __init__(self, n: int):
        if n < 1:
            raise StructureError("need at least one site")
        self.n = n
        names = [f"{v}{i}" for i in range(1, n + 1) for v in ("x", "y")]
        self.polys, *gens = _poly_ring(names, QQ)
        self.xs = gens[0::2]
        self.ys = gens[1::2]
        self.s = [1 + x * x + y * y for x, y in zip(self.xs, self.ys)]
        self.q = [x * x + y * y for x, y in zip(self.xs, self.ys)]
        self._unit_den = (0,) * (2 * n)
        self.zero = Coefficient(self, {}, self._unit_den)
        self.one = self.const(1)

    def __repr__(self):
        return f"CoefficientRing(n={self.n})"

    # constructors -------------------------------------------------------
    def const(self, value) -> "Coefficient":
        c = to_qq(value)
        if not c:
            return self.zero
        return Coefficient(self, {_EMPTY: self.polys(c)}, self._unit_den)

    def poly(self, p) -> "Coefficient":
        return _make(self, {_EMPTY: self.polys(p)}, self._unit_den)

    def x(self, site: int) -> "Coefficient":
        return self.poly(self.xs[self._site(site)])

    def y(self, site: int) -> "Coefficient":
        return self.poly(self.ys[self._site(site)])

    def r(self, site: int) -> "Coefficient":
        i = self._site(site)
        return Coefficient(self, {frozenset([i]): self.polys.one}, self._unit_den)

    def _site(self, site: int) -> int:
        if not 1 <= site <= self.n:
            raise StructureError(f"site {site} outside 1..{self.n}")
        return site - 1

    # helpers ------------------------------------------------------------
    @lru_cache(maxsize=None)
    def _den_poly(self, exps: Tuple[int, ...]):
        out = self.polys.one
        for i in range(self.n):
            a, b = exps[2 * i], exps[2 * i + 1]
            if a:
                out = out * self.s[i] ** a
            if b:
                out = out * self.q[i] ** b
        return out


class Coefficient:
    """An element of :class:`CoefficientRing`.  Immutable."""

    __slots__ = ("ring", "num", "den")

    def __init__(self, ring: CoefficientRing, num: Dict[Subset, object], den: Tuple[int, ...]):
        self.ring = ring
        self.num = num
        self.den = den

    # arithmetic ---------------------------------------------------------
    def _check(self, other: "Coefficient"):
        if other.ring is not self.ring:
            raise StructureError("coefficients belong to different rings")

    def __add__(self, other):
        if not isinstance(other, Coefficient):
            other = self.ring.const(other)
        self._check(other)
        if not other.num:
            return self
        if not self.num:
            return other
        ring = self.ring
        if self.den == other.den:
            num = dict(self.num)
            for k, p in other.num.items():
                num[k] = num[k] + p if k in num else p
            return _make(ring, num, self.den)
        den = tuple(max(a, b) for a, b in zip(self.den, other.den))
        fa = ring._den_poly(tuple(d - a for d, a in zip(den, self.den)))
        fb = ring._den_poly(tuple(d - b for d, b in zip(den, other.den)))
        num = {k: p * fa for k, p in self.num.items()}
        for k, p in other.num.items():
            p = p * fb
            num[k] = num[k] + p if k in num else p
        return _make(ring, num, den)

    __radd__ = __add__

    def __neg__(self):
        return Coefficient(self.ring, {k: -p for k, p in self.num.items()}, self.den)

    def __sub__(self, other):
        if not isinstance(other, Coefficient):
            other = self.ring.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Coefficient):
            c = to_qq(other)
            if not c:
                return self.ring.zero
            return Coefficient(self.ring, {k: p * c for k, p in self.num.items()}, self.den)
        self._check(other)
        if not self.num or not other.num:
            return self.ring.zero
        ring = self.ring
        num: Dict[Subset, object] = {}
        for ka, pa in self.num.items():
            for kb, pb in other.num.items():
                prod = pa * pb
                for i in ka & kb:
                    prod = prod * ring.s[i]
                k = ka ^ kb
                num[k] = num[k] + prod if k in num else prod
        den = tuple(a + b for a, b in zip(self.den, other.den))
        return _make(ring, num, den)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Coefficient):
            try:
                other = self.ring.const(other)
            except TypeError:
                return NotImplemented
        return self.ring is other.ring and self.den == other.den and self.num == other.num

    __hash__ = None

    def __bool__(self):
        return bool(self.num)

    # calculus -----------------------------------------------------------
    def diff(self, kind: str, site: int) -> "Coefficient":
        """Partial derivative in ``x_site`` (kind ``'x'``) or ``y_site``."""
        ring = self.ring
        if kind not in ("x", "y"):
            raise StructureError(f"unknown bosonic variable kind {kind!r}")
        i = ring._site(site)
        v = ring.xs[i] if kind == "x" else ring.ys[i]
        if not self.num:
            return self
        a, b = self.den[2 * i], self.den[2 * i + 1]
        has_r = any(i in k for k in self.num)
        sig = 1 if (a or has_r) else 0
        kap = 1 if b else 0
        s_f = ring.s[i] if sig else ring.polys.one
        q_f = ring.q[i] if kap else ring.polys.one
        num: Dict[Subset, object] = {}
        for k, p in self.num.items():
            out = p.diff(v) * s_f * q_f
            if a:
                out = out - 2 * a * v * p * q_f
            if b:
                out = out - 2 * b * v * p * s_f
            if i in k:
                out = out + v * p * q_f
            num[k] = out
        den = list(self.den)
        den[2 * i] += sig
        den[2 * i + 1] += kap
        return _make(ring, num, tuple(den))

    # queries ------------------------------------------------------------
    def as_polynomial(self):
        """The underlying ``x, y`` polynomial, or ``None`` if r's or denominators occur."""
        if any(self.den):
            return None
        if not self.num:
            return self.ring.polys.zero
        if set(self.num) != {_EMPTY}:
            return None
        return self.num[_EMPTY]

    def constant(self) -> Optional[Fraction]:
        p = self.as_polynomial()
        if p is None:
            return None
        if p == 0:
            return Fraction(0)
        if p.is_ground:
            return to_fraction(p.LC)
        return None

    def conj(self, site_index: int) -> "Coefficient":
        """Galois conjugate ``r_i -> -r_i`` (0-based site)."""
        return Coefficient(
            self.ring,
            {k: (-p if site_index in k else p) for k, p in self.num.items()},
            self.den,
        )

    def inverse(self) -> "Coefficient":
        """Exact inverse when the element is a unit of the ring.

        Multiplying by conjugates clears every ``r_i``; the resulting norm must
        be a rational multiple of a monomial in the ``s_i`` and ``q_i``.
        """
        ring = self.ring
        if not self.num:
            raise DomainError("division by zero coefficient")
        cof = ring.one
        v = self
        for i in range(ring.n):
            if any(i in k for k in v.num):
                c = v.conj(i)
                cof = cof * c
                v = v * c
        p = v.num[_EMPTY]
        exps = [0] * (2 * ring.n)
        for i in range(ring.n):
            for j, d in ((2 * i, ring.s[i]), (2 * i + 1, ring.q[i])):
                while True:
                    quo, rem = p.div(d)
                    if rem:
                        break
                    p = quo
                    exps[j] += 1
        if not p.is_ground:
            raise DomainError("coefficient is not a unit of the ring")
        c = p.LC
        # v = c * prod(factors^exps) / den(v); inverse = den(v) / (c * prod(...))
        up = tuple(max(d - e, 0) for d, e in zip(v.den, exps))
        down = tuple(max(e - d, 0) for d, e in zip(v.den, exps))
        inv_norm = _make(ring, {_EMPTY: ring._den_poly(up) * (1 / c)}, down)
        return cof * inv_norm

    def evaluate(self, values: Sequence[float]) -> float:
        """Float value at ``values = (x1, y1, x2, y2, ...)``."""
        ring = self.ring
        r = [math.sqrt(1.0 + values[2 * i] ** 2 + values[2 * i + 1] ** 2) for i in range(ring.n)]
        total = 0.0
        for k, p in self.num.items():
            acc = _eval_poly(p, values)
            for i in k:
                acc *= r[i]
            total += acc
        d = 1.0
        for i in range(ring.n):
            a, b = self.den[2 * i], self.den[2 * i + 1]
            s = 1.0 + values[2 * i] ** 2 + values[2 * i + 1] ** 2
            d *= s ** a * (s - 1.0) ** b
        return total / d

    # formatting ---------------------------------------------------------
    def __str__(self):
        if not self.num:
            return "0"
        parts = []
        for k in sorted(self.num, key=_subset_key):
            p = str(self.num[k])
            if k:
                rs = "*".join(f"r{i + 1}" for i in sorted(k))
                parts.append(f"({p})*{rs}")
            else:
                parts.append(f"({p})")
        text = " + ".join(parts)
        dens = []
        for i in range(self.ring.n):
            for name, e in (("s", self.den[2 * i]), ("q", self.den[2 * i + 1])):
                if e:
                    dens.append(f"{name}{i + 1}^{e}" if e > 1 else f"{name}{i + 1}")
        if dens:
            text = f"[{text}]/({'*'.join(dens)})"
        return text

    def __repr__(self):
        return f"Coefficient({self})"


def _eval_poly(p, values: Sequence[float]) -> float:
    total = 0.0
    for monom, c in p.terms():
        term = float(c)
        for v, e in zip(values, monom):
            if e:
                term *= v ** e
        total += term
    return total


def _make(ring: CoefficientRing, num: Dict[Subset, object], den: Tuple[int, ...]) -> Coefficient:
    num = {k: p for k, p in num.items() if p}
    if not num:
        return ring.zero
    if any(den):
        den = list(den)
        for i in range(ring.n):
            for j, d in ((2 * i, ring.s[i]), (2 * i + 1, ring.q[i])):
                while den[j]:
                    quos = {}
                    for k, p in num.items():
                        quo, rem = p.div(d)
                        if rem:
                            break
                        quos[k] = quo
                    else:
                        num = quos
                        den[j] -= 1
                        continue
                    break
        den = tuple(den)
    return Coefficient(ring, num, den)


def sum_coefficients(ring: CoefficientRing, items: Iterable[Coefficient]) -> Coefficient:
    out = ring.zero
    for c in items:
        out = out + c
    return out
