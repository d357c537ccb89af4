"""Gaussian-cone model: Fourier operator, objective functional, assembly."""

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zetamult.ball import BallReal
from zetamult.ballpoly import BallPoly, gaussian_moment
from zetamult.exactpoly import ExactPoly
from zetamult.gauss_model import (
    SchwartzCandidate,
    assemble_sdp_gauss,
    fourier_op,
    zn_functional,
)
from zetamult.sdp import SolverSettings, solve

mpmath.mp.dps = 50

small_polys = st.lists(
    st.fractions(min_value=Fraction(-4), max_value=Fraction(4), max_denominator=8),
    min_size=1,
    max_size=9,
).map(ExactPoly)


def to_mp(fr):
    return mpmath.mpf(fr.numerator) / fr.denominator


def encloses(ball, ref) -> bool:
    tol = mpmath.mpf(10) ** -(mpmath.mp.dps - 15)
    return to_mp(ball.lower()) - tol <= ref <= to_mp(ball.upper()) + tol


def test_fourier_fixes_gaussian():
    tp = fourier_op(ExactPoly([1]), 160)
    assert tp[0].contains(1)
    assert all(tp[k].contains(0) for k in range(1, tp.degree + 1))


def test_fourier_of_linear():
    tp = fourier_op(ExactPoly([0, 1]), 160)
    assert encloses(tp[0], 1 / (2 * mpmath.pi))
    assert tp[1].contains(-1)


@settings(deadline=None, max_examples=20)
@given(small_polys)
def test_fourier_involution(p):
    pb = BallPoly.from_exact(p, 160)
    twice = fourier_op(fourier_op(pb, 160), 160)
    assert twice.contains_poly(pb)


@settings(deadline=None, max_examples=15)
@given(small_polys)
def test_parseval_at_zero(p):
    # int_R p(x^2) e^{-pi x^2} dx must agree with (Tp)(0)
    prec = 160
    INF = float("inf")
    integral = BallReal.zero(prec)
    for j, c in enumerate(p.coeffs):
        integral = integral + BallReal.from_fraction(c, prec) * gaussian_moment(
            2 * j, -INF, INF, prec
        )
    tp0 = fourier_op(p, prec)[0]
    assert integral.intersects(tp0)


def test_zn_zero_poly():
    assert zn_functional(ExactPoly([]), 3, 128).contains(0)


def test_zn_constant_values():
    z1 = zn_functional(ExactPoly([1]), 1, 192)
    ref = 1 + (1 - mpmath.exp(-mpmath.pi)) / mpmath.pi
    assert encloses(z1, ref)
    # affine dependence on n with identical tail
    z3 = zn_functional(ExactPoly([1]), 3, 192)
    assert (z3 - z1).contains(2)


@settings(deadline=None, max_examples=15)
@given(small_polys, small_polys,
       st.fractions(min_value=Fraction(-3), max_value=Fraction(3), max_denominator=6),
       st.fractions(min_value=Fraction(-3), max_value=Fraction(3), max_denominator=6))
def test_zn_linearity(p, q, alpha, beta):
    prec = 160
    n = 2
    combo = ExactPoly([alpha * p[k] + beta * q[k] for k in range(max(len(p.coeffs), len(q.coeffs)))])
    lhs = zn_functional(combo, n, prec)
    rhs = (
        BallReal.from_fraction(alpha, prec) * zn_functional(p, n, prec)
        + BallReal.from_fraction(beta, prec) * zn_functional(q, n, prec)
    )
    assert lhs.intersects(rhs)


def test_zn_rejects_bad_n():
    with pytest.raises(ValueError):
        zn_functional(ExactPoly([1]), 0, 128)


@pytest.mark.parametrize("basis", ["monomial", "eigen"])
def test_assembly_structure_counts(basis):
    prob = assemble_sdp_gauss(1, 1, 160, basis=basis)
    assert [side for _, side in prob.blocks] == [2, 2, 2, 2]
    assert prob.num_constraints == (2 * 1 + 2) + (2 * 1 + 2) + 1 == 9
    assert prob.num_free == 4


def test_assembly_rejects_degenerate():
    with pytest.raises(ValueError):
        assemble_sdp_gauss(1, 0, 128)
    with pytest.raises(ValueError):
        assemble_sdp_gauss(0, 2, 128)
    with pytest.raises(ValueError):
        assemble_sdp_gauss(1, 2, 128, basis="fourier")


def test_zero_assignment_violates_normalization():
    prob = assemble_sdp_gauss(2, 2, 160)
    row, rhs = prob.equalities[-1]
    # the all-zero assignment leaves the left side at 0 but rhs is 1
    assert rhs == 1
    assert all(k[0] == "b" for k in row)


def test_bases_agree_on_optimum():
    s = SolverSettings(precision=192, gap_tol=1e-14, feas_tol=1e-18, max_iterations=120)
    va = solve(assemble_sdp_gauss(2, 3, 192, basis="monomial"), s)
    vb = solve(assemble_sdp_gauss(2, 3, 192, basis="eigen"), s)
    assert va.status == vb.status == "optimal"
    assert abs(float(va.objective_primal) - float(vb.objective_primal)) < 1e-10


def test_feasibility_transport():
    # solved assignment gives p(t) <= 0 for t >= 1 and (Tp)(t) >= 0 for
    # t >= 0 on a sampled grid (up to enclosure radii)
    prec = 192
    prob = assemble_sdp_gauss(1, 3, prec, basis="eigen")
    sol = solve(prob, SolverSettings(precision=prec, gap_tol=1e-16, feas_tol=1e-20,
                                     max_iterations=120))
    assert sol.status == "optimal"
    from zetamult.certify import certify_gauss

    cert = certify_gauss(sol, 1, 3, prec=prec, basis="eigen")
    from zetamult.certify import _sos_ballpoly_from_eigen_gram

    s1 = _sos_ballpoly_from_eigen_gram(cert.blocks["Q1"], prec)
    s2 = _sos_ballpoly_from_eigen_gram(cert.blocks["Q2"], prec)
    p = (BallPoly((), prec) - s1) + s2 - s2.mul_x()
    tp = fourier_op(p, prec)
    for i in range(0, 1000, 29):  # thinned 1000-point grid
        t = Fraction(1) + Fraction(i, 100)
        tb = BallReal.from_fraction(t, prec)
        assert p(tb).lower() <= Fraction(1, 10 ** 12)
        t2 = Fraction(i, 100)
        assert tp(BallReal.from_fraction(t2, prec)).upper() >= -Fraction(1, 10 ** 12)


def test_schwartz_candidate_evaluation():
    cand = SchwartzCandidate(BallPoly.from_exact(ExactPoly([1]), 160), d=0)
    v = cand.value(Fraction(1, 2), 160)
    assert encloses(v, mpmath.exp(-mpmath.pi / 4))
