"""Gaussian moments and the Fourier eigenbasis conversions, checked against
mpmath closed forms / quadrature."""

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zetamult.ball import BallReal, PrecisionUnderflow
from zetamult.ballpoly import (
    BallPoly,
    exp_poly_integral,
    fourier_matrix_exact,
    gaussian_moment,
    laguerre_convert,
)
from zetamult.exactpoly import ExactPoly

INF = float("inf")
mpmath.mp.dps = 60


def to_mp(fr: Fraction):
    return mpmath.mpf(fr.numerator) / fr.denominator


def enclosed(ball: BallReal, ref) -> bool:
    # the reference oracle carries mpmath's own roundoff (absolute ~1e-45 at
    # dps 60 for these O(1)-magnitude computations), which can exceed the
    # width of a correct tight enclosure
    tol = mpmath.mpf(10) ** -(mpmath.mp.dps - 15)
    return to_mp(ball.lower()) - tol <= ref <= to_mp(ball.upper()) + tol


def ref_moment(m, a, b):
    def cumulative(x):
        s = mpmath.mpf(m + 1) / 2
        return mpmath.gammainc(s, 0, mpmath.pi * x ** 2) / (2 * mpmath.pi ** s)

    def H(x):
        if x == INF:
            return mpmath.gamma(mpmath.mpf(m + 1) / 2) / (2 * mpmath.pi ** (mpmath.mpf(m + 1) / 2))
        if x == -INF:
            return -H(INF) if m % 2 == 0 else H(INF)
        xv = to_mp(Fraction(x))
        if xv < 0:
            return -cumulative(-xv) if m % 2 == 0 else cumulative(-xv)
        return cumulative(xv)

    return H(b) - H(a)


def test_moment_normalization():
    g = gaussian_moment(0, -INF, INF, 192)
    assert g.contains(1) or enclosed(g, mpmath.mpf(1))
    assert g.width() < Fraction(1, 2 ** 150)


def test_moment_halfline_first():
    g = gaussian_moment(1, 0, INF, 192)
    assert enclosed(g, 1 / (2 * mpmath.pi))


def test_moment_unit_interval_first():
    g = gaussian_moment(1, 0, 1, 192)
    ref_closed = (1 - mpmath.exp(-mpmath.pi)) / (2 * mpmath.pi)
    ref_quad = mpmath.quad(lambda x: x * mpmath.exp(-mpmath.pi * x ** 2), [0, 1])
    assert enclosed(g, ref_closed)
    assert abs(ref_closed - ref_quad) < mpmath.mpf(10) ** -50


@settings(deadline=None, max_examples=20)
@given(
    st.integers(min_value=0, max_value=9),
    st.fractions(min_value=Fraction(-3), max_value=Fraction(3), max_denominator=8),
    st.fractions(min_value=Fraction(-3), max_value=Fraction(3), max_denominator=8),
)
def test_moment_enclosures_random(m, a, b):
    if a >= b:
        return
    g = gaussian_moment(m, a, b, 192)
    assert enclosed(g, ref_moment(m, a, b))


@settings(deadline=None, max_examples=12)
@given(
    st.integers(min_value=0, max_value=7),
    st.fractions(min_value=Fraction(-2), max_value=Fraction(2), max_denominator=6),
)
def test_moment_infinite_endpoints(m, a):
    g = gaussian_moment(m, a, INF, 192)
    assert enclosed(g, ref_moment(m, a, INF))
    g2 = gaussian_moment(m, -INF, a, 192)
    assert enclosed(g2, ref_moment(m, -INF, a))


@settings(deadline=None, max_examples=15)
@given(
    st.integers(min_value=0, max_value=6),
    st.fractions(min_value=Fraction(-2), max_value=Fraction(2), max_denominator=5),
    st.fractions(min_value=Fraction(-2), max_value=Fraction(2), max_denominator=5),
    st.fractions(min_value=Fraction(-2), max_value=Fraction(2), max_denominator=5),
)
def test_moment_additivity(m, a, b, c):
    a, b, c = sorted([a, b, c])
    if a == b or b == c:
        return
    whole = gaussian_moment(m, a, c, 160)
    parts = gaussian_moment(m, a, b, 160) + gaussian_moment(m, b, c, 160)
    assert whole.intersects(parts)


def test_moment_precision_underflow():
    with pytest.raises(PrecisionUnderflow):
        gaussian_moment(41, 0, 1, 16)


def test_moment_invalid_arguments():
    with pytest.raises(ValueError):
        gaussian_moment(2, 1, 1, 64)
    with pytest.raises(ValueError):
        gaussian_moment(2, INF, -INF, 64)
    with pytest.raises(ValueError):
        gaussian_moment(-1, 0, 1, 64)


def test_exp_poly_integral_constant():
    val = exp_poly_integral(BallPoly.from_exact(ExactPoly([1]), 192))
    ref = (1 - mpmath.exp(-mpmath.pi)) / mpmath.pi
    assert enclosed(val, ref)


# -- eigenbasis ----------------------------------------------------------


def test_constant_is_lowest_eigenfunction():
    b = laguerre_convert(ExactPoly([1]), "monomial->eigen", 160)
    assert b[0].contains(1)
    assert all(b[k].contains(0) and b[k].width() == 0 for k in range(1, b.degree + 1))


def test_linear_has_two_eigen_coefficients():
    b = laguerre_convert(ExactPoly([0, 1]), "monomial->eigen", 160)
    assert enclosed(b[0], 1 / (4 * mpmath.pi))
    assert enclosed(b[1], -1 / (2 * mpmath.pi))
    # numerical Fourier oracle: transform of x^2 e^{-pi x^2} at xi
    # must equal (1/(2pi) - xi^2) e^{-pi xi^2}
    for xi in (mpmath.mpf(1) / 3, mpmath.mpf(3) / 4):
        ft = mpmath.quad(
            lambda x: x ** 2 * mpmath.exp(-mpmath.pi * x ** 2) * mpmath.cos(2 * mpmath.pi * x * xi),
            [-8, 8],
        )
        ref = (1 / (2 * mpmath.pi) - xi ** 2) * mpmath.exp(-mpmath.pi * xi ** 2)
        assert abs(ft - ref) < mpmath.mpf(10) ** -30


@settings(deadline=None, max_examples=20)
@given(st.lists(st.fractions(min_value=Fraction(-5), max_value=Fraction(5), max_denominator=9),
                min_size=1, max_size=9))
def test_roundtrip_contains_identity(coeffs):
    p = ExactPoly(coeffs)
    eig = laguerre_convert(p, "monomial->eigen", 160)
    back = laguerre_convert(eig, "eigen->monomial", 160)
    assert back.contains_poly(BallPoly.from_exact(p, 160))


def test_fourier_matrix_is_exact_involution():
    n = 10
    T = fourier_matrix_exact(n)
    for i in range(n):
        for j in range(n):
            acc = sum(T[i][k] * T[k][j] for k in range(n))
            assert acc == (1 if i == j else 0)


def test_unknown_direction_rejected():
    with pytest.raises(ValueError):
        laguerre_convert(ExactPoly([1]), "sideways", 96)
