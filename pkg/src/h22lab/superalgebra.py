"""Exact Grassmann superalgebra over N sites.

Each site ``i`` carries bosonic variables ``x_i, y_i`` (plus the derived
``r_i``) and a pair of Grassmann generators ``xi_i, eta_i``.  Generators are
encoded as integers ``g = 2 * (i - 1) + species`` with ``species = 0`` for xi
and ``1`` for eta, which freezes the order xi_1 < eta_1 < xi_2 < eta_2 < ...;
a fermion monomial is a strictly increasing tuple of such integers.

All signs in this module are relative to that order.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from numbers import Real
from typing import Dict, Iterable, Iterator, Optional, Sequence, Tuple, Union

from .coeffring import Coefficient, CoefficientRing, to_fraction
from .errors import DomainError, PreconditionError, StructureError

Monomial = Tuple[int, ...]
Scalar = Union[int, Fraction]

XI, ETA = 0, 1
SPECIES = {"xi": XI, "eta": ETA}


def generator(site: int, species: str) -> int:
    """Integer code of ``xi_site`` or ``eta_site``."""
    if site < 1:
        raise StructureError(f"site must be >= 1, got {site}")
    return 2 * (site - 1) + SPECIES[species]


def generator_name(g: int) -> str:
    site, species = divmod(g, 2)
    return f"{'eta' if species else 'xi'}{site + 1}"


class Superalgebra:
    """Factory and shared context for SuperNumbers over ``n`` sites."""

    def __init__(self, n: int):
        self.n = n
        self.coeffs = CoefficientRing(n)
        self.zero = SuperNumber(self, {})
        self.one = self.const(1)

    def __repr__(self):
        return f"Superalgebra(n={self.n})"

    def const(self, value: Scalar) -> "SuperNumber":
        return self.from_coefficient(self.coeffs.const(value))

    def from_coefficient(self, c: Coefficient) -> "SuperNumber":
        return SuperNumber(self, {(): c} if c else {})

    def x(self, site: int) -> "SuperNumber":
        return self.from_coefficient(self.coeffs.x(site))

    def y(self, site: int) -> "SuperNumber":
        return self.from_coefficient(self.coeffs.y(site))

    def r(self, site: int) -> "SuperNumber":
        return self.from_coefficient(self.coeffs.r(site))

    def gen(self, g: int) -> "SuperNumber":
        if not 0 <= g < 2 * self.n:
            raise StructureError(f"generator {g} outside the algebra")
        return SuperNumber(self, {(g,): self.coeffs.one})

    def xi(self, site: int) -> "SuperNumber":
        self.coeffs._site(site)
        return self.gen(generator(site, "xi"))

    def eta(self, site: int) -> "SuperNumber":
        self.coeffs._site(site)
        return self.gen(generator(site, "eta"))

    def sites(self) -> range:
        return range(1, self.n + 1)


def _insert_left(m: Monomial, g: int) -> Optional[Tuple[int, Monomial]]:
    """``g * m`` as ``(sign, sorted monomial)``, or None when ``g`` is in ``m``."""
    pos = 0
    for h in m:
        if h == g:
            return None
        if h < g:
            pos += 1
        else:
            break
    return (-1 if pos % 2 else 1), m[:pos] + (g,) + m[pos:]


def _merge(a: Monomial, b: Monomial) -> Optional[Tuple[int, Monomial]]:
    if not a:
        return 1, b
    if not b:
        return 1, a
    if set(a) & set(b):
        return None
    inversions = sum(1 for u in a for v in b if u > v)
    return (-1 if inversions % 2 else 1), tuple(sorted(a + b))


class SuperNumber:
    """Element of the Grassmann algebra with :class:`Coefficient` coefficients.

    Immutable; ``terms`` maps sorted fermion monomials to nonzero coefficients.
    """

    __slots__ = ("alg", "terms")

    def __init__(self, alg: Superalgebra, terms: Dict[Monomial, Coefficient]):
        self.alg = alg
        self.terms = terms

    # structure ----------------------------------------------------------
    def _coerce(self, other) -> "SuperNumber":
        if isinstance(other, SuperNumber):
            if other.alg is not self.alg and other.alg.n != self.alg.n:
                raise StructureError(
                    f"operands over {self.alg.n} and {other.alg.n} sites"
                )
            if other.alg is not self.alg:
                raise StructureError("operands belong to different algebras")
            return other
        if isinstance(other, Coefficient):
            return self.alg.from_coefficient(other)
        return self.alg.const(other)

    @property
    def parity(self) -> Optional[int]:
        """0 (even), 1 (odd) or None for mixed parity; zero counts as even."""
        parities = {len(m) % 2 for m in self.terms}
        if len(parities) > 1:
            return None
        return parities.pop() if parities else 0

    @property
    def body(self) -> Coefficient:
        return self.terms.get((), self.alg.coeffs.zero)

    def coefficient(self, monomial: Iterable[int]) -> Coefficient:
        return self.terms.get(tuple(sorted(monomial)), self.alg.coeffs.zero)

    def is_zero(self) -> bool:
        return not self.terms

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            if m in terms:
                c = terms[m] + c
                if c:
                    terms[m] = c
                else:
                    del terms[m]
            else:
                terms[m] = c
        return SuperNumber(self.alg, terms)

    __radd__ = __add__

    def __neg__(self):
        return SuperNumber(self.alg, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return self.alg.zero
            return SuperNumber(self.alg, {m: c * other for m, c in self.terms.items()})
        other = self._coerce(other)
        out: Dict[Monomial, Coefficient] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                merged = _merge(ma, mb)
                if merged is None:
                    continue
                sign, m = merged
                c = ca * cb
                if sign < 0:
                    c = -c
                if m in out:
                    c = out[m] + c
                    if c:
                        out[m] = c
                    else:
                        del out[m]
                elif c:
                    out[m] = c
        return SuperNumber(self.alg, out)

    def __rmul__(self, other):
        # scalars and coefficients are even, so they commute with everything
        if isinstance(other, (int, Fraction)):
            return self * other
        return self._coerce(other) * self

    def __pow__(self, k: int):
        if k < 0:
            return invert_even(self) ** (-k)
        out = self.alg.one
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except (StructureError, TypeError):
            return NotImplemented
        return self.terms.keys() == other.terms.keys() and all(
            self.terms[m] == other.terms[m] for m in self.terms
        )

    __hash__ = None

    def __str__(self):
        return dumps(self)

    def __repr__(self):
        return f"SuperNumber<{dumps(self)}>"

    def evaluate(self, point: Sequence[float]) -> Dict[Monomial, float]:
        """Numerical coefficients at ``point = (x1, y1, x2, y2, ...)``."""
        return {m: c.evaluate(point) for m, c in self.terms.items()}


def _monomial_key(m: Monomial):
    return (len(m), m)


def dumps(a: SuperNumber) -> str:
    """Canonical text form: one ``monomial: coefficient`` line per term."""
    if not a.terms:
        return "0"
    lines = []
    for m in sorted(a.terms, key=_monomial_key):
        name = "*".join(generator_name(g) for g in m) or "1"
        lines.append(f"{name}: {a.terms[m]}")
    return "\n".join(lines)


# --- operations --------------------------------------------------------------

def sn_add(a: SuperNumber, b: SuperNumber) -> SuperNumber:
    return a + b


def sn_mul(a: SuperNumber, b: SuperNumber) -> SuperNumber:
    return a * b


def derive_left(a: SuperNumber, g: int) -> SuperNumber:
    """Left fermionic derivative in generator ``g``."""
    out: Dict[Monomial, Coefficient] = {}
    for m, c in a.terms.items():
        if g in m:
            pos = m.index(g)
            out[m[:pos] + m[pos + 1:]] = -c if pos % 2 else c
    return SuperNumber(a.alg, out)


def left_multiply_generator(a: SuperNumber, g: int) -> SuperNumber:
    out: Dict[Monomial, Coefficient] = {}
    for m, c in a.terms.items():
        ins = _insert_left(m, g)
        if ins is not None:
            sign, nm = ins
            out[nm] = -c if sign < 0 else c
    return SuperNumber(a.alg, out)


def berezin_pair(a: SuperNumber, site: int, order: str = "xi_eta") -> SuperNumber:
    """Apply the measure symbol ``d_xi d_eta`` of one site.

    ``order='xi_eta'`` is the convention of the flat measure: the eta
    derivative acts first.  ``'eta_xi'`` swaps the two and exists only to
    demonstrate that the checks are sensitive to this sign.
    """
    gx, ge = generator(site, "xi"), generator(site, "eta")
    if order == "xi_eta":
        return derive_left(derive_left(a, ge), gx)
    if order == "eta_xi":
        return derive_left(derive_left(a, gx), ge)
    raise ValueError(f"unknown Berezin order {order!r}")


def berezin_integrate(a: SuperNumber, order: str = "xi_eta") -> Coefficient:
    """Full fermionic integral: the coefficient left after all site pairs."""
    for site in a.alg.sites():
        a = berezin_pair(a, site, order)
    return a.body


def derive_boson(a: SuperNumber, kind: str, site: int) -> SuperNumber:
    """Coefficient-wise partial derivative in ``x_site`` or ``y_site``."""
    out = {}
    for m, c in a.terms.items():
        d = c.diff(kind, site)
        if d:
            out[m] = d
    return SuperNumber(a.alg, out)


def apply_q(a: SuperNumber) -> SuperNumber:
    """The odd derivation sum_i (xi_i d_x + eta_i d_y + x_i d_eta - y_i d_xi)."""
    alg = a.alg
    out = alg.zero
    for site in alg.sites():
        gx, ge = generator(site, "xi"), generator(site, "eta")
        out = out + left_multiply_generator(derive_boson(a, "x", site), gx)
        out = out + left_multiply_generator(derive_boson(a, "y", site), ge)
        out = out + alg.x(site) * derive_left(a, ge)
        out = out - alg.y(site) * derive_left(a, gx)
    return out


def rotation_generator(a: SuperNumber) -> SuperNumber:
    """Even derivation sum_i (x_i d_y - y_i d_x + xi_i d_eta - eta_i d_xi)."""
    alg = a.alg
    out = alg.zero
    for site in alg.sites():
        gx, ge = generator(site, "xi"), generator(site, "eta")
        out = out + alg.x(site) * derive_boson(a, "y", site)
        out = out - alg.y(site) * derive_boson(a, "x", site)
        out = out + left_multiply_generator(derive_left(a, ge), gx)
        out = out - left_multiply_generator(derive_left(a, gx), ge)
    return out


def build_h(alg: Superalgebra, site: int) -> SuperNumber:
    """H_i = x_i^2 + y_i^2 + 2 xi_i eta_i."""
    x, y = alg.x(site), alg.y(site)
    return x * x + y * y + 2 * alg.xi(site) * alg.eta(site)


def build_lambda(alg: Superalgebra, site: int) -> SuperNumber:
    """lambda_i = x_i eta_i - y_i xi_i, with Q(lambda_i) = H_i."""
    return alg.x(site) * alg.eta(site) - alg.y(site) * alg.xi(site)


def build_z(alg: Superalgebra, site: int) -> SuperNumber:
    """z_i = sqrt(1 + x^2 + y^2 + 2 xi eta) = r_i + xi_i eta_i / r_i exactly."""
    r = alg.coeffs.r(site)
    return alg.from_coefficient(r) + alg.from_coefficient(r.inverse()) * alg.xi(site) * alg.eta(site)


def inner_product(alg: Superalgebra, i: int, j: int) -> SuperNumber:
    """v_i . v_j = x_i x_j + y_i y_j - z_i z_j + xi_i eta_j + xi_j eta_i."""
    return (
        alg.x(i) * alg.x(j)
        + alg.y(i) * alg.y(j)
        - build_z(alg, i) * build_z(alg, j)
        + alg.xi(i) * alg.eta(j)
        + alg.xi(j) * alg.eta(i)
    )


def exp_nilpotent(a: SuperNumber) -> SuperNumber:
    """exp(a) for an even element with zero body (the series terminates)."""
    if a.parity != 0:
        raise DomainError("exp_nilpotent needs an even element")
    if a.body:
        raise DomainError("exp_nilpotent needs a nilpotent element (zero body)")
    out = a.alg.one
    power = a.alg.one
    for k in range(1, a.alg.n + 1):
        power = power * a
        if power.is_zero():
            break
        out = out + power * Fraction(1, factorial(k))
    return out


def invert_even(a: SuperNumber) -> SuperNumber:
    """Exact inverse of an even element with invertible body."""
    if a.parity != 0:
        raise DomainError("only even elements are inverted")
    body = a.body
    if not body:
        raise DomainError("body is zero; element is nilpotent")
    b_inv = body.inverse()
    alg = a.alg
    soul = a - alg.from_coefficient(body)
    step = -(alg.from_coefficient(b_inv) * soul)
    out = alg.one
    power = alg.one
    for _ in range(alg.n):
        power = power * step
        if power.is_zero():
            break
        out = out + power
    return alg.from_coefficient(b_inv) * out


def fermionic_gaussian(alg: Superalgebra, sigma: Sequence[Sequence[Scalar]]) -> SuperNumber:
    """exp(-<xi, sigma eta>) as a terminating polynomial."""
    n = alg.n
    if len(sigma) != n or any(len(row) != n for row in sigma):
        raise StructureError(f"sigma must be {n}x{n}")
    quad = alg.zero
    for i in range(n):
        for j in range(n):
            if sigma[i][j]:
                quad = quad + alg.xi(i + 1) * alg.eta(j + 1) * sigma[i][j]
    return exp_nilpotent(-quad)


def fermionic_weight(alg: Superalgebra, w) -> SuperNumber:
    """Grassmann part prod_i (1 - w_i xi_i eta_i) of exp(-sum w_i H_i / 2)."""
    ws = _site_weights(alg, w)
    out = alg.one
    for site in alg.sites():
        out = out * (alg.one - alg.xi(site) * alg.eta(site) * ws[site - 1])
    return out


def _site_weights(alg: Superalgebra, w) -> Tuple[Fraction, ...]:
    # floats convert exactly, so 0.5 and Fraction(1, 2) give identical results
    if isinstance(w, Real):
        ws = (Fraction(w),) * alg.n
    else:
        ws = tuple(Fraction(v) for v in w)
    if len(ws) != alg.n:
        raise StructureError(f"need {alg.n} site weights, got {len(ws)}")
    if any(v <= 0 for v in ws):
        raise PreconditionError("Gaussian weights must be positive")
    return ws


def _double_factorial_odd(k: int) -> int:
    """(2k - 1)!!"""
    out = 1
    for j in range(1, 2 * k, 2):
        out *= j
    return out


def gaussian_moment(power: int, w: Fraction) -> Fraction:
    """E[X^power] for X centered normal with variance 1/w."""
    if power % 2:
        return Fraction(0)
    k = power // 2
    return Fraction(_double_factorial_odd(k)) / Fraction(w) ** k


def polynomial_gaussian_integral(p, ws: Sequence[Fraction]) -> Fraction:
    """(prod 1/2pi dx dy) p(x, y) exp(-sum w_i (x_i^2 + y_i^2)/2), exactly."""
    total = Fraction(0)
    for monom, c in p.terms():
        term = to_fraction(c)
        for i, w in enumerate(ws):
            term *= gaussian_moment(monom[2 * i], w) * gaussian_moment(monom[2 * i + 1], w) / w
            if not term:
                break
        total += term
    return total


def gaussian_flat_integrate(a: SuperNumber, w, order: str = "xi_eta") -> Fraction:
    """Flat Berezin integral of ``a`` against the bosonic weight exp(-sum w (x^2+y^2)/2).

    The Grassmann factor of the Gaussian is *not* included; multiply by
    :func:`fermionic_weight` first when the full exp(-w H / 2) is intended.
    """
    ws = _site_weights(a.alg, w)
    for c in a.terms.values():
        if c.as_polynomial() is None:
            raise PreconditionError("coefficients must be polynomials in x, y")
    top = berezin_integrate(a, order)
    return polynomial_gaussian_integral(top.as_polynomial(), ws)


def q_with_weight(a: SuperNumber, w) -> SuperNumber:
    """X with Q(a * G) = X * G for the bosonic weight G = exp(-sum w (x^2+y^2)/2)."""
    alg = a.alg
    ws = _site_weights(alg, w)
    grad = alg.zero
    for site in alg.sites():
        grad = grad + (alg.x(site) * alg.xi(site) + alg.y(site) * alg.eta(site)) * ws[site - 1]
    return apply_q(a) - grad * a


def iter_generators(alg: Superalgebra) -> Iterator[int]:
    return iter(range(2 * alg.n))
