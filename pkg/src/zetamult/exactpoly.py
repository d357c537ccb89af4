"""Exact-rational polynomial algebra and piecewise polynomials.

Univariate polynomials are stored densely by degree with Fraction
coefficients (always in lowest terms with positive denominator).  Piecewise
polynomials carry an ordered list of closed rational intervals with disjoint
interiors; the value outside the domain is 0 and evaluation at a shared
endpoint uses the left piece.

The one domain-specific operation here is `convolve_basis`: the exact
convolution of two truncated monomials y^i, y^j supported on [-h, h], which
is the building block of the bounded-support optimization model.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

Rational = Fraction  # lowest terms / positive denominator guaranteed by stdlib


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected exact rational, got {type(x).__name__}")


class ExactPoly:
    """Dense univariate polynomial with Fraction coefficients.

    coeffs[k] is the coefficient of x^k; the trailing coefficient is nonzero
    unless the polynomial is zero (empty coefficient list).
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [_as_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def zero(cls) -> "ExactPoly":
        return cls(())

    @classmethod
    def constant(cls, c) -> "ExactPoly":
        return cls((c,))

    @classmethod
    def monomial(cls, k: int, c=Fraction(1)) -> "ExactPoly":
        return cls((Fraction(0),) * k + (c,))

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __eq__(self, other):
        return isinstance(other, ExactPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other: "ExactPoly") -> "ExactPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return ExactPoly([self[k] + other[k] for k in range(n)])

    def __neg__(self) -> "ExactPoly":
        return ExactPoly([-c for c in self.coeffs])

    def __sub__(self, other: "ExactPoly") -> "ExactPoly":
        return self + (-other)

    def __mul__(self, other: "ExactPoly") -> "ExactPoly":
        if self.is_zero() or other.is_zero():
            return ExactPoly.zero()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return ExactPoly(out)

    def scale(self, c) -> "ExactPoly":
        c = _as_fraction(c)
        return ExactPoly([c * a for a in self.coeffs])

    def __call__(self, x) -> Fraction:
        x = _as_fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def shift(self, a) -> "ExactPoly":
        """Taylor shift: returns q with q(x) = p(x + a)."""
        a = _as_fraction(a)
        out = ExactPoly.zero()
        for c in reversed(self.coeffs):
            out = out * ExactPoly((a, Fraction(1))) + ExactPoly.constant(c)
        return out

    def reflect(self) -> "ExactPoly":
        """Returns q with q(x) = p(-x)."""
        return ExactPoly([c if k % 2 == 0 else -c for k, c in enumerate(self.coeffs)])

    def derivative(self) -> "ExactPoly":
        return ExactPoly([k * c for k, c in enumerate(self.coeffs)][1:])

    def divmod(self, other: "ExactPoly") -> tuple["ExactPoly", "ExactPoly"]:
        """Exact polynomial division with remainder."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [Fraction(0)] * max(0, len(rem) - len(other.coeffs) + 1)
        dlead = other.coeffs[-1]
        dn = other.degree
        while len(rem) - 1 >= dn and any(c != 0 for c in rem):
            k = len(rem) - 1 - dn
            f = rem[-1] / dlead
            q[k] = f
            for i, c in enumerate(other.coeffs):
                rem[k + i] -= f * c
            while rem and rem[-1] == 0:
                rem.pop()
        return ExactPoly(q), ExactPoly(rem)

    def antiderivative(self) -> "ExactPoly":
        return ExactPoly([Fraction(0)] + [c / (k + 1) for k, c in enumerate(self.coeffs)])

    def integrate(self, a, b) -> Fraction:
        F = self.antiderivative()
        return F(b) - F(a)

    def __repr__(self):
        if self.is_zero():
            return "ExactPoly(0)"
        terms = [f"{c}*x^{k}" for k, c in enumerate(self.coeffs) if c != 0]
        return "ExactPoly(" + " + ".join(terms) + ")"


def poly_arith(a: ExactPoly, b: ExactPoly, kind: str) -> ExactPoly:
    """Dispatch wrapper over the polynomial ring operations.

    kind is one of 'add', 'sub', 'mul', 'scale' ('scale' treats b as a
    constant polynomial and multiplies by its value).
    """
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "scale":
        if b.degree > 0:
            raise ValueError("scale requires a constant polynomial")
        return a.scale(b[0])
    raise ValueError(f"unknown poly_arith kind: {kind!r}")


@dataclass(frozen=True)
class Piece:
    a: Fraction
    b: Fraction
    poly: ExactPoly


class PiecewisePoly:
    """Piecewise polynomial on a union of closed rational intervals.

    Pieces are sorted with disjoint interiors; adjacent pieces must agree at
    shared endpoints (checked at construction).  The value outside the domain
    is 0; evaluation at a shared endpoint uses the left piece.
    """

    __slots__ = ("pieces",)

    def __init__(self, pieces):
        ps = sorted(
            (Piece(_as_fraction(a), _as_fraction(b), poly) for a, b, poly in pieces),
            key=lambda p: p.a,
        )
        for p in ps:
            if p.a >= p.b:
                raise ValueError(f"degenerate piece interval [{p.a}, {p.b}]")
        for left, right in zip(ps, ps[1:]):
            if left.b > right.a:
                raise ValueError("piece intervals overlap")
            if left.b == right.a and left.poly(left.b) != right.poly(right.a):
                raise ValueError(f"discontinuity at shared endpoint {left.b}")
        self.pieces = tuple(ps)

    def __call__(self, x) -> Fraction:
        x = _as_fraction(x)
        for p in self.pieces:
            if p.a <= x <= p.b:
                return p.poly(x)
        return Fraction(0)

    @property
    def support(self) -> tuple[Fraction, Fraction] | None:
        if not self.pieces:
            return None
        return self.pieces[0].a, self.pieces[-1].b

    def breakpoints(self) -> list[Fraction]:
        pts: list[Fraction] = []
        for p in self.pieces:
            if not pts or pts[-1] != p.a:
                pts.append(p.a)
            pts.append(p.b)
        return pts

    def _piece_on(self, a: Fraction, b: Fraction) -> ExactPoly:
        for p in self.pieces:
            if p.a <= a and b <= p.b:
                return p.poly
        return ExactPoly.zero()

    def __add__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        cuts = sorted(set(self.breakpoints()) | set(other.breakpoints()))
        pieces = []
        for a, b in zip(cuts, cuts[1:]):
            poly = self._piece_on(a, b) + other._piece_on(a, b)
            pieces.append((a, b, poly))
        return PiecewisePoly(pieces)

    def scale(self, c) -> "PiecewisePoly":
        return PiecewisePoly([(p.a, p.b, p.poly.scale(c)) for p in self.pieces])

    def reflect(self) -> "PiecewisePoly":
        return PiecewisePoly([(-p.b, -p.a, p.poly.reflect()) for p in self.pieces])

    def integrate(self, a, b) -> Fraction:
        """Exact integral over [a, b] (which may extend past the support)."""
        a, b = _as_fraction(a), _as_fraction(b)
        if a > b:
            return -self.integrate(b, a)
        total = Fraction(0)
        for p in self.pieces:
            lo, hi = max(a, p.a), min(b, p.b)
            if lo < hi:
                total += p.poly.integrate(lo, hi)
        return total

    def integrate_weighted_x(self, a, b) -> Fraction:
        """Exact integral of x*f(x) over [a, b]."""
        a, b = _as_fraction(a), _as_fraction(b)
        if a > b:
            return -self.integrate_weighted_x(b, a)
        x = ExactPoly.monomial(1)
        total = Fraction(0)
        for p in self.pieces:
            lo, hi = max(a, p.a), min(b, p.b)
            if lo < hi:
                total += (p.poly * x).integrate(lo, hi)
        return total

    def __eq__(self, other):
        return isinstance(other, PiecewisePoly) and self.pieces == other.pieces

    def __repr__(self):
        return f"PiecewisePoly({len(self.pieces)} pieces on {self.support})"


@lru_cache(maxsize=None)
def convolve_basis(i: int, j: int, half_support: Fraction) -> PiecewisePoly:
    """Exact convolution (b_i * b_j~)(x) = int b_i(y) b_j(y - x) dy where
    b_k(y) = y^k on [-h, h] and 0 outside.

    The result is supported on [-2h, 2h] with exactly two polynomial pieces
    (x <= 0 and x >= 0), each of degree i + j + 1.
    """
    if i < 0 or j < 0:
        raise ValueError("basis indices must be nonnegative")
    h = _as_fraction(half_support)
    if h <= 0:
        raise ValueError("half_support must be positive")

    def overlap_integral(lower: ExactPoly, upper: ExactPoly) -> ExactPoly:
        # int_{lower(x)}^{upper(x)} y^i (y-x)^j dy as a polynomial in x,
        # where lower/upper are degree-<=1 polynomials in x.
        out = ExactPoly.zero()
        for l in range(j + 1):
            m = i + j - l + 1
            # C(j,l) (-x)^l * [y^m / m] between the limits
            xmono = ExactPoly.monomial(l, Fraction((-1) ** l * comb(j, l), m))
            upow = _poly_pow(upper, m) - _poly_pow(lower, m)
            out = out + xmono * upow
        return out

    x = ExactPoly.monomial(1)
    hconst = ExactPoly.constant(h)
    # x >= 0: y from x - h to h;  x <= 0: y from -h to x + h
    right = overlap_integral(x - hconst, hconst)
    left = overlap_integral(-hconst, x + hconst)
    return PiecewisePoly([(-2 * h, Fraction(0), left), (Fraction(0), 2 * h, right)])


def _poly_pow(p: ExactPoly, m: int) -> ExactPoly:
    out = ExactPoly.constant(Fraction(1))
    base = p
    while m:
        if m & 1:
            out = out * base
        base = base * base
        m >>= 1
    return out
