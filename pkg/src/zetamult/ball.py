"""Outward-rounded real arithmetic with guaranteed enclosures.

A :class:`BallReal` represents a closed interval ``[mid - rad, mid + rad]``
that is guaranteed to contain the exact real number of interest.  Every
operation returns a ball containing the image of its operand intervals, so
chains of operations never lose rigor, only width.

Internally a ball is stored by its two MPFR endpoints (via gmpy2) and all
endpoint computations use directed rounding; MPFR guarantees correct rounding
for the primitives used here (+, -, *, /, sqrt, exp, erfc, const_pi), which is
what makes the enclosures sound.  The midpoint/radius view required by callers
is derived from the endpoints and is itself outward-safe.
"""

from __future__ import annotations

from decimal import Decimal
from fractions import Fraction
import math

import gmpy2
from gmpy2 import mpfr

DEFAULT_PREC = 256

_RAD_PREC = 64  # precision for derived radii; always rounded up


class PrecisionUnderflow(ArithmeticError):
    """Requested enclosure radius is not achievable at the working precision."""


class BallDomainError(ArithmeticError):
    """Operand interval leaves the domain of the operation (e.g. division by
    an interval containing zero)."""


_CTX_CACHE: dict[tuple[int, int], gmpy2.context] = {}


def _ctx(prec: int, mode) -> gmpy2.context:
    key = (prec, int(mode))
    ctx = _CTX_CACHE.get(key)
    if ctx is None:
        ctx = gmpy2.context(precision=prec, round=mode)
        _CTX_CACHE[key] = ctx
    return ctx


def ctx_down(prec: int) -> gmpy2.context:
    return _ctx(prec, gmpy2.RoundDown)


def ctx_up(prec: int) -> gmpy2.context:
    return _ctx(prec, gmpy2.RoundUp)


def ctx_near(prec: int) -> gmpy2.context:
    return _ctx(prec, gmpy2.RoundToNearest)


def mpfr_to_fraction(x) -> Fraction:
    """Exact rational value of an MPFR number (always a dyadic rational)."""
    if not gmpy2.is_finite(x):
        raise ValueError(f"non-finite mpfr has no rational value: {x}")
    num, den = x.as_integer_ratio()
    return Fraction(int(num), int(den))


def int_to_mpfr_exact(k: int) -> mpfr:
    """Lossless integer-to-mpfr conversion (enough precision for all bits)."""
    return mpfr(k, max(2, k.bit_length() + 1))


def _fraction_to_mpfr(q: Fraction, prec: int, mode) -> mpfr:
    # numerator/denominator are converted exactly; the single division is the
    # only rounding and it is directed.
    c = _ctx(prec, mode)
    return c.div(int_to_mpfr_exact(q.numerator), int_to_mpfr_exact(q.denominator))


class BallReal:
    """Closed interval with outward-rounded arithmetic.

    The public contract is the midpoint/radius view (``mid``, ``rad``); the
    represented set is ``[mid - rad, mid + rad]`` and always contains the
    stored endpoint interval ``[lo, hi]``.
    """

    __slots__ = ("lo", "hi", "prec")

    def __init__(self, lo, hi, prec: int = DEFAULT_PREC):
        if not (gmpy2.is_finite(lo) and gmpy2.is_finite(hi)):
            raise BallDomainError("ball endpoints must be finite")
        if lo > hi:
            raise ValueError(f"inverted ball endpoints: {lo} > {hi}")
        self.lo = lo
        self.hi = hi
        self.prec = prec

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_int(cls, k: int, prec: int = DEFAULT_PREC) -> "BallReal":
        kx = int_to_mpfr_exact(k)
        lo = ctx_down(prec).add(mpfr(0, prec), kx)
        hi = ctx_up(prec).add(mpfr(0, prec), kx)
        return cls(lo, hi, prec)

    @classmethod
    def from_fraction(cls, q, prec: int = DEFAULT_PREC) -> "BallReal":
        q = Fraction(q)
        return cls(
            _fraction_to_mpfr(q, prec, gmpy2.RoundDown),
            _fraction_to_mpfr(q, prec, gmpy2.RoundUp),
            prec,
        )

    @classmethod
    def from_mpfr(cls, x, prec: int = DEFAULT_PREC) -> "BallReal":
        """Exact singleton ball around an MPFR value (kept at its own
        precision, so the representation is lossless)."""
        return cls(x, x, prec)

    @classmethod
    def from_endpoints(cls, lo, hi, prec: int = DEFAULT_PREC) -> "BallReal":
        lo_f = _fraction_to_mpfr(Fraction(lo), prec, gmpy2.RoundDown)
        hi_f = _fraction_to_mpfr(Fraction(hi), prec, gmpy2.RoundUp)
        return cls(lo_f, hi_f, prec)

    @classmethod
    def zero(cls, prec: int = DEFAULT_PREC) -> "BallReal":
        z = mpfr(0, prec)
        return cls(z, z, prec)

    @classmethod
    def one(cls, prec: int = DEFAULT_PREC) -> "BallReal":
        o = mpfr(1, prec)
        return cls(o, o, prec)

    @classmethod
    def pi(cls, prec: int = DEFAULT_PREC) -> "BallReal":
        return cls(ctx_down(prec).const_pi(), ctx_up(prec).const_pi(), prec)

    # -- views --------------------------------------------------------------

    @property
    def mid(self) -> mpfr:
        c = ctx_near(self.prec)
        return c.div(c.add(self.lo, self.hi), mpfr(2))

    @property
    def rad(self) -> mpfr:
        c = ctx_up(_RAD_PREC)
        m = self.mid
        return c.maxnum(c.sub(self.hi, m), c.sub(m, self.lo))

    def lower(self) -> Fraction:
        """Exact rational lower endpoint."""
        return mpfr_to_fraction(self.lo)

    def upper(self) -> Fraction:
        """Exact rational upper endpoint."""
        return mpfr_to_fraction(self.hi)

    def width(self) -> Fraction:
        return self.upper() - self.lower()

    def mag(self) -> Fraction:
        """Supremum of |x| over the ball."""
        return max(abs(self.lower()), abs(self.upper()))

    def mig(self) -> Fraction:
        """Infimum of |x| over the ball (0 if the ball straddles zero)."""
        if self.contains_zero():
            return Fraction(0)
        return min(abs(self.lower()), abs(self.upper()))

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def contains(self, other) -> bool:
        if isinstance(other, BallReal):
            return self.lower() <= other.lower() and other.upper() <= self.upper()
        q = Fraction(other)
        return self.lower() <= q <= self.upper()

    def intersects(self, other: "BallReal") -> bool:
        return not (self.upper() < other.lower() or other.upper() < self.lower())

    def is_positive(self) -> bool:
        return self.lo > 0

    def is_negative(self) -> bool:
        return self.hi < 0

    def is_exact(self) -> bool:
        return self.lo == self.hi

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other, prec: int) -> "BallReal":
        if isinstance(other, BallReal):
            return other
        if isinstance(other, int):
            return BallReal.from_int(other, prec)
        if isinstance(other, Fraction):
            return BallReal.from_fraction(other, prec)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other):
        o = self._coerce(other, self.prec)
        if o is NotImplemented:
            return NotImplemented
        p = max(self.prec, o.prec)
        return BallReal(ctx_down(p).add(self.lo, o.lo), ctx_up(p).add(self.hi, o.hi), p)

    __radd__ = __add__

    def __neg__(self):
        # Unary minus on mpfr rounds through the *default* context, so flip
        # via directed subtraction instead (exact when precisions match,
        # outward-safe otherwise).
        p = self.prec
        zero = mpfr(0, p)
        return BallReal(ctx_down(p).sub(zero, self.hi), ctx_up(p).sub(zero, self.lo), p)

    def __sub__(self, other):
        o = self._coerce(other, self.prec)
        if o is NotImplemented:
            return NotImplemented
        p = max(self.prec, o.prec)
        return BallReal(ctx_down(p).sub(self.lo, o.hi), ctx_up(p).sub(self.hi, o.lo), p)

    def __rsub__(self, other):
        o = self._coerce(other, self.prec)
        if o is NotImplemented:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other, self.prec)
        if o is NotImplemented:
            return NotImplemented
        p = max(self.prec, o.prec)
        dn, up = ctx_down(p), ctx_up(p)
        cands_lo = (
            dn.mul(self.lo, o.lo),
            dn.mul(self.lo, o.hi),
            dn.mul(self.hi, o.lo),
            dn.mul(self.hi, o.hi),
        )
        cands_hi = (
            up.mul(self.lo, o.lo),
            up.mul(self.lo, o.hi),
            up.mul(self.hi, o.lo),
            up.mul(self.hi, o.hi),
        )
        return BallReal(min(cands_lo), max(cands_hi), p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other, self.prec)
        if o is NotImplemented:
            return NotImplemented
        if o.contains_zero():
            raise BallDomainError("division by an interval containing zero")
        p = max(self.prec, o.prec)
        dn, up = ctx_down(p), ctx_up(p)
        cands_lo = (
            dn.div(self.lo, o.lo),
            dn.div(self.lo, o.hi),
            dn.div(self.hi, o.lo),
            dn.div(self.hi, o.hi),
        )
        cands_hi = (
            up.div(self.lo, o.lo),
            up.div(self.lo, o.hi),
            up.div(self.hi, o.lo),
            up.div(self.hi, o.hi),
        )
        return BallReal(min(cands_lo), max(cands_hi), p)

    def __rtruediv__(self, other):
        o = self._coerce(other, self.prec)
        if o is NotImplemented:
            return NotImplemented
        return o / self

    def powi(self, k: int) -> "BallReal":
        """Integer power by repeated squaring (outward at every step)."""
        if k < 0:
            return BallReal.one(self.prec) / self.powi(-k)
        result = BallReal.one(self.prec)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def sqrt(self) -> "BallReal":
        if self.lo < 0:
            raise BallDomainError("sqrt of an interval with negative part")
        p = self.prec
        return BallReal(ctx_down(p).sqrt(self.lo), ctx_up(p).sqrt(self.hi), p)

    def exp(self) -> "BallReal":
        p = self.prec
        return BallReal(ctx_down(p).exp(self.lo), ctx_up(p).exp(self.hi), p)

    def erfc(self) -> "BallReal":
        # erfc is decreasing, so the image endpoints swap.
        p = self.prec
        return BallReal(ctx_down(p).erfc(self.hi), ctx_up(p).erfc(self.lo), p)

    def hull(self, other: "BallReal") -> "BallReal":
        p = max(self.prec, other.prec)
        return BallReal(min(self.lo, other.lo), max(self.hi, other.hi), p)

    def widen(self, slack: Fraction) -> "BallReal":
        s = BallReal.from_fraction(slack, self.prec)
        return BallReal(ctx_down(self.prec).sub(self.lo, s.hi),
                        ctx_up(self.prec).add(self.hi, s.hi), self.prec)

    # -- rendering ----------------------------------------------------------

    def __repr__(self):
        return f"BallReal([{self.lo}, {self.hi}], prec={self.prec})"

    def __str__(self):
        return f"[{decimal_lower(self.lower(), 20)}, {decimal_upper(self.upper(), 20)}]"


def check_precision(ball: BallReal, prec: int) -> BallReal:
    """Raise PrecisionUnderflow unless the ball carries ~prec/4 good bits."""
    target = Fraction(1, 2 ** max(4, prec // 4))
    if ball.width() > 2 * target * (ball.mag() + target):
        raise PrecisionUnderflow(
            f"enclosure width {float(ball.width()):.3e} too wide for {prec}-bit request"
        )
    return ball


# -- exact decimal rendering of rational endpoints ---------------------------


def _decimal_directed(q: Fraction, digits: int, round_up: bool) -> str:
    """Decimal string with `digits` significant digits, rounded toward the
    requested direction so the printed value is a valid one-sided bound."""
    if q == 0:
        return "0"
    sign = "-" if q < 0 else ""
    a = abs(q)
    # exponent e with 10^e <= a < 10^(e+1)
    e = math.floor(math.log10(float(a))) if float(a) > 0 else 0
    while Fraction(10) ** e > a:
        e -= 1
    while Fraction(10) ** (e + 1) <= a:
        e += 1
    scale = Fraction(10) ** (e - digits + 1)
    units = a / scale
    n = int(units)  # floor
    if units != n:
        # outward: up for an upper bound on a positive number, etc.
        if round_up != (q < 0):
            n += 1
    mant = str(n)
    if len(mant) > digits:  # carry overflowed to an extra digit
        e += len(mant) - digits
    body = mant[0] + ("." + mant[1:] if len(mant) > 1 else "")
    return f"{sign}{body}e{e:+03d}"


def decimal_upper(q: Fraction, digits: int = 30) -> str:
    """Decimal string guaranteed >= q."""
    return _decimal_directed(q, digits, round_up=True)


def decimal_lower(q: Fraction, digits: int = 30) -> str:
    """Decimal string guaranteed <= q."""
    return _decimal_directed(q, digits, round_up=False)


def parse_decimal(s: str) -> Fraction:
    """Exact value of a decimal string."""
    return Fraction(Decimal(s))
