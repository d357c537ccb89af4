"""Ball-coefficient polynomials, rigorous Gaussian moments, and the
Fourier-eigenbasis change of basis.

The eigenbasis used throughout is e_k(t) = L_k^{(-1/2)}(2 pi t) (generalized
Laguerre, normalized so e_0 = 1): e_k(x^2) e^{-pi x^2} is a Fourier
eigenfunction with eigenvalue (-1)^k.  The basis-change matrices factor as an
exact rational part times integer powers of 2 pi, so only the pi powers
carry enclosure radii.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .ball import BallReal, DEFAULT_PREC, PrecisionUnderflow, check_precision
from .exactpoly import ExactPoly

INF = float("inf")


class BallPoly:
    """Dense univariate polynomial with BallReal coefficients."""

    __slots__ = ("coeffs", "prec")

    def __init__(self, coeffs, prec: int = DEFAULT_PREC):
        self.coeffs = tuple(coeffs)
        self.prec = prec

    @classmethod
    def from_exact(cls, p: ExactPoly, prec: int = DEFAULT_PREC) -> "BallPoly":
        return cls([BallReal.from_fraction(c, prec) for c in p.coeffs], prec)

    @classmethod
    def from_fractions(cls, cs, prec: int = DEFAULT_PREC) -> "BallPoly":
        return cls([BallReal.from_fraction(c, prec) for c in cs], prec)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int) -> BallReal:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return BallReal.zero(self.prec)

    def __add__(self, other: "BallPoly") -> "BallPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        p = max(self.prec, other.prec)
        return BallPoly([self[k] + other[k] for k in range(n)], p)

    def __sub__(self, other: "BallPoly") -> "BallPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        p = max(self.prec, other.prec)
        return BallPoly([self[k] - other[k] for k in range(n)], p)

    def __neg__(self) -> "BallPoly":
        return BallPoly([-c for c in self.coeffs], self.prec)

    def scale(self, c: BallReal) -> "BallPoly":
        return BallPoly([c * a for a in self.coeffs], self.prec)

    def mul_x(self) -> "BallPoly":
        """Multiply by the variable."""
        return BallPoly([BallReal.zero(self.prec), *self.coeffs], self.prec)

    def __mul__(self, other: "BallPoly") -> "BallPoly":
        p = max(self.prec, other.prec)
        if not self.coeffs or not other.coeffs:
            return BallPoly((), p)
        out = [BallReal.zero(p) for _ in range(len(self.coeffs) + len(other.coeffs) - 1)]
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return BallPoly(out, p)

    def __call__(self, x: BallReal) -> BallReal:
        acc = BallReal.zero(self.prec)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def contains_poly(self, other: "BallPoly") -> bool:
        n = max(len(self.coeffs), len(other.coeffs))
        return all(self[k].contains(other[k]) for k in range(n))

    def __repr__(self):
        return f"BallPoly(deg={self.degree}, prec={self.prec})"


# ---------------------------------------------------------------------------
# Gaussian moments: rigorous enclosures of int_a^b x^m e^{-pi x^2} dx
# ---------------------------------------------------------------------------


def _factorial(n: int) -> int:
    out = 1
    for k in range(2, n + 1):
        out *= k
    return out


def _odd_antiderivative(x: Fraction, m: int, prec: int) -> BallReal:
    # Closed form of int x^m e^{-pi x^2} dx for odd m = 2j+1:
    #   G(x) = -(e^{-pi x^2}/2) * sum_{i=0}^{j} (j!/i!) x^{2i} / pi^{j+1-i}
    # (finite because Gamma((m+1)/2, .) is elementary for integer (m+1)/2).
    j = (m - 1) // 2
    pi = BallReal.pi(prec)
    xb = BallReal.from_fraction(x, prec)
    x2 = xb * xb
    total = BallReal.zero(prec)
    for i in range(j + 1):
        term = BallReal.from_fraction(
            Fraction(_factorial(j), _factorial(i)), prec
        ) * x2.powi(i) / pi.powi(j + 1 - i)
        total = total + term
    egauss = (-(pi * x2)).exp()
    return -(egauss * total) * BallReal.from_fraction(Fraction(1, 2), prec)


def _gamma_half_integer(q: int, prec: int) -> BallReal:
    # Gamma(q + 1/2) = sqrt(pi) (2q-1)!! / 2^q
    pi = BallReal.pi(prec)
    dblfact = 1
    for k in range(1, q + 1):
        dblfact *= 2 * k - 1
    return pi.sqrt() * BallReal.from_fraction(Fraction(dblfact, 2 ** q), prec)


def _lower_gamma_series(q: int, z: BallReal, prec: int) -> BallReal:
    # gamma(s, z) = z^s e^{-z} sum_{n>=0} z^n / (s (s+1) ... (s+n)), s = q+1/2.
    # All terms positive for z > 0; geometric tail bound once z/(s+n+1) <= 1/2.
    s = Fraction(2 * q + 1, 2)
    zs = z.powi(q) * z.sqrt()  # z^{q+1/2}
    pref = zs * (-z).exp()
    term = BallReal.one(prec) / BallReal.from_fraction(s, prec)
    total = term
    n = 0
    zhi = z.upper()
    while True:
        n += 1
        term = term * z / BallReal.from_fraction(s + n, prec)
        total = total + term
        ratio = zhi / (s + n + 1)
        if ratio <= Fraction(1, 2):
            # remaining tail <= term * ratio / (1 - ratio) <= 2 * term * ratio
            tail = term.mag() * 2 * ratio
            if tail <= Fraction(1, 2 ** (2 * prec)) * max(Fraction(1), total.mag()):
                total = total.widen(tail)
                break
        if n > 64 * prec:
            raise PrecisionUnderflow("lower incomplete gamma series failed to converge")
    return pref * total


def _upper_gamma_recurrence(q: int, z: BallReal, prec: int) -> BallReal:
    # Gamma(q + 1/2, z) upward from Gamma(1/2, z) = sqrt(pi) erfc(sqrt(z));
    # Gamma(s+1, z) = s Gamma(s, z) + z^s e^{-z}.  No cancellation: all terms
    # positive.
    pi = BallReal.pi(prec)
    sqz = z.sqrt()
    g = pi.sqrt() * sqz.erfc()
    expz = (-z).exp()
    zpow = sqz  # z^{1/2}
    for k in range(q):
        s = Fraction(2 * k + 1, 2)
        g = BallReal.from_fraction(s, prec) * g + zpow * expz
        zpow = zpow * z
    return g


def _even_cumulative(x: Fraction, m: int, prec: int) -> BallReal:
    # H(x) = int_0^x t^m e^{-pi t^2} dt for even m, x >= 0 (odd extension for
    # x < 0 handled by the caller): H(x) = gamma(s, pi x^2) / (2 pi^s),
    # s = (m+1)/2 = q + 1/2.
    q = m // 2
    if x == 0:
        return BallReal.zero(prec)
    pi = BallReal.pi(prec)
    z = pi * BallReal.from_fraction(x * x, prec)
    if z.upper() <= 32:
        gam_lower = _lower_gamma_series(q, z, prec)
    else:
        gam_lower = _gamma_half_integer(q, prec) - _upper_gamma_recurrence(q, z, prec)
    denom = (pi.powi(q) * pi.sqrt()) * BallReal.from_fraction(Fraction(2), prec)
    return gam_lower / denom


def gaussian_moment(m: int, a, b, prec: int = DEFAULT_PREC) -> BallReal:
    """Rigorous enclosure of int_a^b x^m e^{-pi x^2} dx.

    a and b may be rationals or +/-inf with a < b.  Odd m uses the elementary
    closed-form antiderivative; even m goes through the (half-integer) upper
    incomplete gamma function.  Raises PrecisionUnderflow if the enclosure is
    far wider than the requested precision supports.
    """
    if m < 0:
        raise ValueError("moment order must be nonnegative")
    a_inf = a == -INF or a == INF
    b_inf = b == -INF or b == INF
    if not a_inf:
        a = Fraction(a)
    if not b_inf:
        b = Fraction(b)
    if (a == INF) or (b == -INF) or (not a_inf and not b_inf and a >= b):
        raise ValueError("need a < b")

    if m % 2 == 1:
        lo = BallReal.zero(prec) if a_inf else _odd_antiderivative(a, m, prec)
        hi = BallReal.zero(prec) if b_inf else _odd_antiderivative(b, m, prec)
        return check_precision(hi - lo, prec)

    # even m: cumulative from 0, odd extension
    q = m // 2
    half_total = _gamma_half_integer(q, prec) / (
        (BallReal.pi(prec).powi(q) * BallReal.pi(prec).sqrt())
        * BallReal.from_fraction(Fraction(2), prec)
    )

    def H(x, inf_sign: int) -> BallReal:
        if inf_sign > 0:
            return half_total
        if inf_sign < 0:
            return -half_total
        if x >= 0:
            return _even_cumulative(x, m, prec)
        return -_even_cumulative(-x, m, prec)

    hi = H(None, +1) if b_inf else H(b, 0)
    lo = H(None, -1) if a_inf else H(a, 0)
    return check_precision(hi - lo, prec)


@lru_cache(maxsize=None)
def _exp_moment(j: int, prec: int) -> BallReal:
    # int_0^1 u^j e^{-pi u} du via the odd Gaussian moment closed form.
    # The antiderivative's terms reach j!/pi^{j+1} while the value is
    # ~e^{-pi}/(j+1), so the cancellation eats about log2(j!) bits; work at
    # a precision padded by exactly that much and the result keeps full
    # accuracy at the requested precision.
    pad = _factorial(j).bit_length() + 64
    return gaussian_moment(2 * j + 1, Fraction(0), Fraction(1), prec + pad) * 2


def exp_poly_integral(p: BallPoly, prec: int | None = None) -> BallReal:
    """Rigorous enclosure of int_0^1 p(u) e^{-pi u} du.

    int_0^1 u^j e^{-pi u} du equals twice the odd Gaussian moment
    int_0^1 x^{2j+1} e^{-pi x^2} dx (substitute u = x^2), so this reduces to
    the elementary closed forms.
    """
    prec = prec or p.prec
    total = BallReal.zero(prec)
    for j, c in enumerate(p.coeffs):
        total = total + c * _exp_moment(j, prec)
    return total


# ---------------------------------------------------------------------------
# Laguerre eigenbasis of the Fourier transform (exact rational scaffolding)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _laguerre_coeffs(k: int) -> tuple[Fraction, ...]:
    # L_k^{(-1/2)}(z) by the three-term recurrence
    # (k+1) L_{k+1} = (2k + 1/2 - z) L_k - (k - 1/2) L_{k-1}
    if k == 0:
        return (Fraction(1),)
    if k == 1:
        return (Fraction(1, 2), Fraction(-1))
    lkm1 = ExactPoly(_laguerre_coeffs(k - 2))
    lk = ExactPoly(_laguerre_coeffs(k - 1))
    z = ExactPoly.monomial(1)
    kk = k - 1
    nxt = (
        (ExactPoly.constant(Fraction(4 * kk + 1, 2)) - z) * lk
        - lkm1.scale(Fraction(2 * kk - 1, 2))
    ).scale(Fraction(1, kk + 1))
    return nxt.coeffs


@lru_cache(maxsize=None)
def _monomial_in_laguerre(max_deg: int) -> tuple[tuple[Fraction, ...], ...]:
    # m[j][k] with z^j = sum_k m[j][k] L_k^{(-1/2)}(z); solved by triangular
    # back-substitution against the exact Laguerre coefficient table.
    lag = [_laguerre_coeffs(k) for k in range(max_deg + 1)]
    m: list[list[Fraction]] = []
    for j in range(max_deg + 1):
        row = [Fraction(0)] * (max_deg + 1)
        residual = [Fraction(0)] * (j + 1)
        residual[j] = Fraction(1)
        for k in range(j, -1, -1):
            c = residual[k] / lag[k][k]
            row[k] = c
            for i in range(k + 1):
                residual[i] -= c * lag[k][i]
        assert all(r == 0 for r in residual)
        m.append(row)
    return tuple(tuple(r) for r in m)


@lru_cache(maxsize=None)
def fourier_matrix_exact(size: int) -> tuple[tuple[Fraction, ...], ...]:
    """Exact rational part r of the Fourier operator on coefficient vectors:
    the full matrix is T[i][j] = r[i][j] (2 pi)^(i-j).

    T maps the monomial coefficients of p (in t = x^2) to those of the
    polynomial whose Gaussian-weighted lift is the Fourier transform.
    """
    lag = [_laguerre_coeffs(k) for k in range(size)]
    mono = _monomial_in_laguerre(size - 1)
    out = []
    for i in range(size):
        row = []
        for j in range(size):
            acc = Fraction(0)
            for k in range(i, j + 1):
                lk = lag[k]
                if i < len(lk):
                    acc += (-1) ** k * lk[i] * mono[j][k]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


@lru_cache(maxsize=None)
def _two_pi_powers(max_pow: int, prec: int) -> tuple[BallReal, ...]:
    two_pi = BallReal.pi(prec) * 2
    out = [BallReal.one(prec)]
    for _ in range(max_pow):
        out.append(out[-1] * two_pi)
    return tuple(out)


@lru_cache(maxsize=None)
def eigen_value_at_zero(k: int) -> Fraction:
    """e_k(0) = binom(2k, k) / 4^k (exact)."""
    from math import comb

    return Fraction(comb(2 * k, k), 4 ** k)


@lru_cache(maxsize=None)
def eigen_product_exact(a: int, b: int) -> tuple[Fraction, ...]:
    """Structure constants of the eigenbasis: e_a e_b = sum_k S[k] e_k.

    Exact rationals: the (2 pi)^m grading of the monomial coefficients
    cancels against the inverse grading of the monomial-to-eigen matrix.
    """
    la, lb = _laguerre_coeffs(a), _laguerre_coeffs(b)
    prod = [Fraction(0)] * (a + b + 1)
    for i, ca in enumerate(la):
        if ca == 0:
            continue
        for j, cb in enumerate(lb):
            if cb:
                prod[i + j] += ca * cb
    mono = _monomial_in_laguerre(a + b)
    out = [Fraction(0)] * (a + b + 1)
    for m, cm in enumerate(prod):
        if cm == 0:
            continue
        row = mono[m]
        for k in range(m + 1):
            if row[k]:
                out[k] += cm * row[k]
    return tuple(out)


def eigen_times_t(coeffs: list[Fraction]) -> tuple[list[Fraction], None]:
    """Multiply an eigen-coefficient vector by t, up to the global 1/(2 pi):
    returns rational coefficients g with t * sum s_k e_k = (1/(2 pi)) sum g_k e_k.

    From the three-term recurrence z L_m = -(m+1) L_{m+1} + (2m + 1/2) L_m
    - (m - 1/2) L_{m-1} with z = 2 pi t.
    """
    n = len(coeffs)
    out = [Fraction(0)] * (n + 1)
    for m, sm in enumerate(coeffs):
        if sm == 0:
            continue
        out[m + 1] += -(m + 1) * sm
        out[m] += Fraction(4 * m + 1, 2) * sm
        if m >= 1:
            out[m - 1] += -Fraction(2 * m - 1, 2) * sm
    return out, None


def eigen_basis_ballpoly(k: int, prec: int = DEFAULT_PREC) -> BallPoly:
    """e_k(t) as a monomial-basis ball polynomial."""
    lk = _laguerre_coeffs(k)
    pows = _two_pi_powers(k, prec)
    return BallPoly(
        [BallReal.from_fraction(c, prec) * pows[i] for i, c in enumerate(lk)], prec
    )


def laguerre_convert(p, direction: str, prec: int = DEFAULT_PREC) -> BallPoly:
    """Change of basis between monomials in t and the Fourier eigenbasis
    e_k(t) = L_k^{(-1/2)}(2 pi t).

    direction 'monomial->eigen' returns eigen-coefficients beta with
    p = sum_k beta_k e_k; 'eigen->monomial' inverts.  Round trips enclose the
    identity.
    """
    if isinstance(p, ExactPoly):
        p = BallPoly.from_exact(p, prec)
    n = p.degree + 1
    if n == 0:
        return BallPoly((), prec)
    pows = _two_pi_powers(n, prec)
    if direction == "monomial->eigen":
        mono = _monomial_in_laguerre(n - 1)
        out = []
        for k in range(n):
            acc = BallReal.zero(prec)
            for j in range(k, n):
                c = mono[j][k]
                if c != 0:
                    acc = acc + p[j] * BallReal.from_fraction(c, prec) / pows[j]
            out.append(acc)
        return BallPoly(out, prec)
    if direction == "eigen->monomial":
        out = []
        for i in range(n):
            acc = BallReal.zero(prec)
            for k in range(i, n):
                c = _laguerre_coeffs(k)[i] if i < len(_laguerre_coeffs(k)) else Fraction(0)
                if c != 0:
                    acc = acc + p[k] * BallReal.from_fraction(c, prec)
            out.append(acc * pows[i])
        return BallPoly(out, prec)
    raise ValueError(f"unknown direction: {direction!r}")
