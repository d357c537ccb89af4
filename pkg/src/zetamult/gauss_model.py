"""The Gaussian-weighted cone f(x) = p(x^2) e^{-pi x^2}.

Provides the Fourier operator on the polynomial part, pointwise evaluation,
the objective functional Z_n(f) = n f(0) + 2 int_0^1 f(x) x dx, and assembly
of the feasibility problem

    minimize Z_n(f)  over  Q1..Q4 >= 0 (PSD, side d+1)
    subject to  p = -s1 - (t-1) s2,      T p = s3 + t s4,      s3(0) = 1,

where s_i(t) = v(t)' Q_i v(t) with v_k(t) = (t/sigma)^k.  The two polynomial
identities pin the sign of f outside [-1,1] and the nonnegativity of its
Fourier transform; s3(0) = 1 normalizes f_hat(0) = 1.  The coefficients of p
enter the problem as free scalar variables so that both identities appear as
explicit coefficient-matching equalities.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .ball import BallReal, DEFAULT_PREC
from .ballpoly import (
    BallPoly,
    eigen_basis_ballpoly,
    eigen_product_exact,
    eigen_value_at_zero,
    exp_poly_integral,
    fourier_matrix_exact,
    gaussian_moment,
    laguerre_convert,
)
from .exactpoly import ExactPoly
from .sdp import SdpProblem


@dataclass(frozen=True)
class SchwartzCandidate:
    """A function f(x) = p(x^2) e^{-pi x^2} given by the polynomial part p
    (in the variable t = x^2, degree <= 2d)."""

    p: BallPoly
    d: int
    basis_tag: str = "monomial"  # or "eigen"

    def monomial(self, prec: int = DEFAULT_PREC) -> BallPoly:
        if self.basis_tag == "monomial":
            return self.p
        return laguerre_convert(self.p, "eigen->monomial", prec)

    def value(self, x, prec: int = DEFAULT_PREC) -> BallReal:
        """Enclosure of f(x) for rational x."""
        xb = BallReal.from_fraction(Fraction(x), prec)
        t = xb * xb
        pi = BallReal.pi(prec)
        return self.monomial(prec)(t) * (-(pi * t)).exp()


@dataclass(frozen=True)
class LpFeasibilityData:
    """Block handles of one assembled feasibility problem: s_i = v' Q_i v,
    p = -s1 - (t-1) s2, T p = s3 + t s4, s3(0) = 1."""

    q1: str
    q2: str
    q3: str
    q4: str
    d: int
    n: int


def fourier_op(p, prec: int = DEFAULT_PREC) -> BallPoly:
    """The polynomial part of the Fourier transform: returns Tp with
    FT[p(x^2) e^{-pi x^2}] = (Tp)(xi^2) e^{-pi xi^2}.

    Implemented as eigenbasis conversion, sign flip on odd eigenindices, and
    conversion back; the result encloses the exact transform.
    """
    if isinstance(p, ExactPoly):
        p = BallPoly.from_exact(p, prec)
    eig = laguerre_convert(p, "monomial->eigen", prec)
    flipped = BallPoly(
        [(-c if k % 2 else c) for k, c in enumerate(eig.coeffs)], prec
    )
    return laguerre_convert(flipped, "eigen->monomial", prec)


def zn_functional(p, n: int, prec: int = DEFAULT_PREC) -> BallReal:
    """Rigorous enclosure of Z_n(f) = n p(0) + 2 int_0^1 p(x^2) e^{-pi x^2} x dx.

    The substitution u = x^2 turns the tail into int_0^1 p(u) e^{-pi u} du,
    which is evaluated with the elementary odd-moment closed forms.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if isinstance(p, ExactPoly):
        p = BallPoly.from_exact(p, prec)
    return BallReal.from_int(n, prec) * p[0] + exp_poly_integral(p, prec)


def zn_moment_coefficients(deg: int, prec: int = DEFAULT_PREC) -> list[BallReal]:
    """Coefficients I_j = int_0^1 u^j e^{-pi u} du so that
    Z_n(p) = n p_0 + sum_j I_j p_j."""
    return [
        gaussian_moment(2 * j + 1, Fraction(0), Fraction(1), prec) * 2
        for j in range(deg + 1)
    ]


def basis_weights_default(d: int, sigma: Fraction = Fraction(1)) -> list[Fraction]:
    """Per-index scales u_k for the SOS basis v_k(t) = u_k t^k.

    The optimal Gram entries of these problems decay like c^{a+b}/(a! b!)
    along antidiagonals, which no single geometric scale sigma can balance;
    u_k is the nearest power of two to sigma^{-k} sqrt(k!) / c^k (c = 2 pi),
    keeping all scale factors exact dyadic rationals.
    """
    import math

    out = []
    lc = math.log2(2 * math.pi)
    lsig = math.log2(float(sigma))
    lfact = 0.0
    for k in range(d + 1):
        if k > 0:
            lfact += math.log2(k)
        e = round(lfact / 2 - k * lc - k * lsig)
        out.append(Fraction(2) ** e)
    return out


def _sos_coefficient_entries(block: str, k: int, d: int, weights: list[Fraction]):
    """Entries of the linear functional q -> coefficient of t^k in
    v(t)' Q v(t), with v_a(t) = u_a t^a, as (key, Fraction) pairs."""
    out = []
    for a in range(max(0, k - d), k // 2 + 1):
        b = k - a
        if b > d:
            continue
        w = weights[a] * weights[b]
        out.append((("b", block, a, b), (w if a == b else 2 * w)))
    return out


def assemble_sdp_gauss(
    n: int,
    d: int,
    prec: int = DEFAULT_PREC,
    sigma: Fraction = Fraction(1),
    basis_weights: list[Fraction] | None = None,
    basis: str = "eigen",
) -> SdpProblem:
    """Assemble the Gaussian-cone problem for given field degree n and
    polynomial degree parameter d (four PSD blocks of side d+1).

    Constraints, matching polynomial coefficients for k = 0..2d+1:
      * p_k + [s1]_k + [(t-1) s2]_k = 0            (p identity, 2d+2 rows)
      * [T p]_k - [s3]_k - [t s4]_k = 0            (transform identity, 2d+2)
      * s3(0) = 1                                   (normalization, 1 row)
    Objective: Z_n(f) as a linear functional of the p coefficients.

    basis selects the coordinate system in which coefficients are matched
    and in which the Gram vectors live:
      * 'eigen' (default): v_a = e_a and p is carried by its eigenbasis
        coefficients.  The transform identity is then diagonal (+/-1) and
        every quantity is O(1), which is what makes large d tractable.
      * 'monomial': v_a(t) = u_a t^a with u from basis_weights (default
        sigma^{-a}); kept for cross-checks at small d, where it reproduces
        the same optima.
    Inexact coefficients are ball midpoints; their enclosure radii are kept
    in the problem metadata (certification recomputes everything rigorously
    and never consumes solver-side coefficients).
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if d < 1:
        raise ValueError("d must be >= 1 (constant blocks cannot satisfy both identities)")
    if basis not in ("eigen", "monomial"):
        raise ValueError(f"unknown basis {basis!r}")
    sigma = Fraction(sigma)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if basis == "eigen":
        return _assemble_gauss_eigen(n, d, prec)
    if basis_weights is None:
        weights = [sigma ** (-k) for k in range(d + 1)]
    else:
        weights = [Fraction(wk) for wk in basis_weights]
        if len(weights) != d + 1 or any(wk <= 0 for wk in weights):
            raise ValueError("basis_weights must be d+1 positive rationals")

    ncoef = 2 * d + 2  # p has coefficients p_0 .. p_{2d+1}
    blocks = [("Q1", d + 1), ("Q2", d + 1), ("Q3", d + 1), ("Q4", d + 1)]
    free_names = [f"p{j}" for j in range(ncoef)]

    tmat = fourier_matrix_exact(ncoef)
    two_pi = BallReal.pi(prec) * 2
    tp_pows: list[BallReal] = [BallReal.one(prec)]
    for _ in range(ncoef):
        tp_pows.append(tp_pows[-1] * two_pi)

    def tmat_ball(i: int, j: int) -> BallReal:
        r = tmat[i][j]
        if r == 0:
            return BallReal.zero(prec)
        base = BallReal.from_fraction(r, prec)
        return base * tp_pows[i - j] if i >= j else base / tp_pows[j - i]

    equalities = []
    radii = {}

    # p identity rows: p_k + [s1]_k + [s2]_{k-1} - [s2]_k = 0
    for k in range(ncoef):
        row: dict = {("f", k): Fraction(1)}
        for key, c in _sos_coefficient_entries("Q1", k, d, weights):
            row[key] = row.get(key, Fraction(0)) + c
        if k >= 1:
            for key, c in _sos_coefficient_entries("Q2", k - 1, d, weights):
                row[key] = row.get(key, Fraction(0)) + c
        for key, c in _sos_coefficient_entries("Q2", k, d, weights):
            row[key] = row.get(key, Fraction(0)) - c
        equalities.append((row, Fraction(0)))

    # transform identity rows: sum_j T_kj p_j - [s3]_k - [s4]_{k-1} = 0
    for k in range(ncoef):
        row = {}
        for j in range(k, ncoef):
            tb = tmat_ball(k, j)
            if tb.is_exact() and tb.lower() == 0:
                continue
            row[("f", j)] = tb.mid
            radii[(len(equalities), ("f", j))] = tb.rad
        for key, c in _sos_coefficient_entries("Q3", k, d, weights):
            row[key] = row.get(key, Fraction(0)) - c
        if k >= 1:
            for key, c in _sos_coefficient_entries("Q4", k - 1, d, weights):
                row[key] = row.get(key, Fraction(0)) - c
        equalities.append((row, Fraction(0)))

    # normalization s3(0) = 1 (i.e. u_0^2 Q3[0,0] = 1)
    equalities.append(({("b", "Q3", 0, 0): weights[0] ** 2}, Fraction(1)))

    moments = zn_moment_coefficients(ncoef - 1, prec)
    objective = {}
    for j in range(ncoef):
        c = moments[j] + (n if j == 0 else 0)
        objective[("f", j)] = c.mid
        radii[("obj", ("f", j))] = c.rad

    return SdpProblem(
        blocks=blocks,
        free_names=free_names,
        objective=objective,
        equalities=equalities,
        metadata={
            "provenance": "gauss",
            "basis": "monomial",
            "n": n,
            "d": d,
            "sigma": sigma,
            "basis_weights": weights,
            "precision": prec,
            "coefficient_radii": radii,
            "feasibility": LpFeasibilityData("Q1", "Q2", "Q3", "Q4", d, n),
        },
    )


def _assemble_gauss_eigen(n: int, d: int, prec: int) -> SdpProblem:
    """Eigenbasis formulation: free variables are the eigen coefficients
    beta of p, Gram vectors are v_a = e_a, and the transform identity is
    diagonal.  Only the t-multiplication rows and the objective carry a pi
    enclosure; everything else is exact rational."""
    ncoef = 2 * d + 2
    blocks = [("Q1", d + 1), ("Q2", d + 1), ("Q3", d + 1), ("Q4", d + 1)]
    free_names = [f"beta{j}" for j in range(ncoef)]

    inv_two_pi = BallReal.one(prec) / (BallReal.pi(prec) * 2)
    equalities = []
    radii = {}

    def gram_entries(block: str, k: int):
        # [s]^eigen_k as (key, Fraction) pairs over the upper triangle
        out = []
        for a in range(d + 1):
            for b in range(a, d + 1):
                if k > a + b:
                    continue
                s = eigen_product_exact(a, b)[k]
                if s:
                    out.append((("b", block, a, b), (s if a == b else 2 * s)))
        return out

    def add_to(row, key, value):
        row[key] = row.get(key, Fraction(0)) + value

    def t_multiple_entries(block: str, k: int):
        # eigen coefficient k of t * s: (1/(2 pi)) (-k [s]_{k-1}
        # + (2k + 1/2) [s]_k - (k + 1/2) [s]_{k+1}); returns (key, ball) pairs
        combo: dict = {}
        if k >= 1:
            for key, c in gram_entries(block, k - 1):
                combo[key] = combo.get(key, Fraction(0)) - k * c
        for key, c in gram_entries(block, k):
            combo[key] = combo.get(key, Fraction(0)) + Fraction(4 * k + 1, 2) * c
        for key, c in gram_entries(block, k + 1):
            combo[key] = combo.get(key, Fraction(0)) - Fraction(2 * k + 1, 2) * c
        return [
            (key, inv_two_pi * BallReal.from_fraction(c, prec))
            for key, c in combo.items()
            if c
        ]

    # p identity rows: beta_k + [s1]_k + [t s2]_k - [s2]_k = 0
    for k in range(ncoef):
        row: dict = {("f", k): Fraction(1)}
        for key, c in gram_entries("Q1", k):
            add_to(row, key, c)
        for key, c in gram_entries("Q2", k):
            add_to(row, key, -c)
        ball_accum: dict = {}
        for key, bl in t_multiple_entries("Q2", k):
            ball_accum[key] = ball_accum.get(key, BallReal.zero(prec)) + bl
        for key, bl in ball_accum.items():
            base = row.get(key, Fraction(0))
            total = BallReal.from_fraction(base, prec) + bl if base else bl
            row[key] = total.mid
            radii[(len(equalities), key)] = total.rad
        equalities.append((row, Fraction(0)))

    # transform identity rows: (-1)^k beta_k - [s3]_k - [t s4]_k = 0
    for k in range(ncoef):
        row = {("f", k): Fraction((-1) ** k)}
        for key, c in gram_entries("Q3", k):
            add_to(row, key, -c)
        ball_accum = {}
        for key, bl in t_multiple_entries("Q4", k):
            ball_accum[key] = ball_accum.get(key, BallReal.zero(prec)) - bl
        for key, bl in ball_accum.items():
            base = row.get(key, Fraction(0))
            total = BallReal.from_fraction(base, prec) + bl if base else bl
            row[key] = total.mid
            radii[(len(equalities), key)] = total.rad
        equalities.append((row, Fraction(0)))

    # normalization s3(0) = sum (2 - delta) e_a(0) e_b(0) Q3[a,b] = 1
    row = {}
    for a in range(d + 1):
        for b in range(a, d + 1):
            c = eigen_value_at_zero(a) * eigen_value_at_zero(b)
            row[("b", "Q3", a, b)] = c if a == b else 2 * c
    equalities.append((row, Fraction(1)))

    # objective: n p(0) + int_0^1 p(u) e^{-pi u} du over beta coordinates
    objective = {}
    for k in range(ncoef):
        ek = eigen_basis_ballpoly(k, prec)
        c = BallReal.from_fraction(n * eigen_value_at_zero(k), prec) + exp_poly_integral(ek, prec)
        objective[("f", k)] = c.mid
        radii[("obj", ("f", k))] = c.rad

    return SdpProblem(
        blocks=blocks,
        free_names=free_names,
        objective=objective,
        equalities=equalities,
        metadata={
            "provenance": "gauss",
            "basis": "eigen",
            "n": n,
            "d": d,
            "precision": prec,
            "coefficient_radii": radii,
            "feasibility": LpFeasibilityData("Q1", "Q2", "Q3", "Q4", d, n),
        },
    )
