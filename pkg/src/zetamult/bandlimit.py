"""The bounded-support cone: f(x) = sum_ij X_ij (b_i * b_j~)(x) with X PSD
and b_k(y) = y^k on [-h, h].

Such f is supported on [-2h, 2h] and automatically has a nonnegative Fourier
transform (f_hat(xi) = sum over rank-one factors |sum_i v_i b_i_hat(xi)|^2),
so for 2h <= 1 any PSD X is feasible for the underlying sign-constrained
problem after normalizing f_hat(0) = 1.  For larger supports the sign
constraint f <= 0 on [1, 2h] is imposed as an explicit weighted
sum-of-squares identity.

Note on the normalization functional: f_hat(0) = int f = sum_ij X_ij
(int b_i)(int b_j), and int b_k vanishes for odd k, so only entries with
both indices even contribute:

    f_hat(0) = sum_{i, j even} X_ij / ((i+1)(j+1) 2^{i+j})      (h = 1/2).

Dropping the parity restriction (i.e. applying the closed form to all
entries) is a tempting but wrong reading of the displayed formula; the
brute-force integral oracle in the test suite pins the version above.

Internally the solver sees the rescaled variable X' = D X D with
D = diag(h^i) (equivalently the basis (y/h)^k), which keeps all assembly
coefficients O(1); PSD-ness and the modeled function are preserved exactly
under this diagonal congruence and certificates convert back to the plain
monomial basis.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .exactpoly import ExactPoly, PiecewisePoly, convolve_basis
from .sdp import SdpProblem


def _check_matrix(X, d: int):
    if len(X) != d + 1 or any(len(row) != d + 1 for row in X):
        raise ValueError(f"matrix side must be d+1 = {d + 1}")
    for i in range(d + 1):
        for j in range(d + 1):
            if Fraction(X[i][j]) != Fraction(X[j][i]):
                raise ValueError("matrix must be symmetric")


def basis_integral(i: int, h: Fraction) -> Fraction:
    """int_{-h}^{h} y^i dy (vanishes for odd i)."""
    if i % 2 == 1:
        return Fraction(0)
    return 2 * Fraction(h) ** (i + 1) / (i + 1)


def hatf0(X, d: int) -> Fraction:
    """Exact f_hat(0) for half-support 1/2: only even-even entries survive,
    each contributing X_ij / ((i+1)(j+1) 2^{i+j})."""
    _check_matrix(X, d)
    total = Fraction(0)
    for i in range(0, d + 1, 2):
        for j in range(0, d + 1, 2):
            total += Fraction(X[i][j]) / ((i + 1) * (j + 1) * 2 ** (i + j))
    return total


def hatf0_general(X, d: int, h: Fraction) -> Fraction:
    """Exact f_hat(0) = sum_ij X_ij (int b_i)(int b_j) for any half-support."""
    _check_matrix(X, d)
    h = Fraction(h)
    ints = [basis_integral(i, h) for i in range(d + 1)]
    total = Fraction(0)
    for i in range(d + 1):
        if ints[i] == 0:
            continue
        for j in range(d + 1):
            if ints[j] != 0:
                total += Fraction(X[i][j]) * ints[i] * ints[j]
    return total


def f_piecewise(X, d: int, h: Fraction) -> PiecewisePoly:
    """Exact piecewise polynomial of f = sum_ij X_ij (b_i * b_j~)."""
    _check_matrix(X, d)
    h = Fraction(h)
    left = ExactPoly.zero()
    right = ExactPoly.zero()
    for i in range(d + 1):
        for j in range(d + 1):
            c = Fraction(X[i][j])
            if c == 0:
                continue
            conv = convolve_basis(i, j, h)
            left = left + conv.pieces[0].poly.scale(c)
            right = right + conv.pieces[1].poly.scale(c)
    return PiecewisePoly([(-2 * h, Fraction(0), left), (Fraction(0), 2 * h, right)])


@lru_cache(maxsize=None)
def _scaled_conv_right(i: int, j: int, h: Fraction) -> ExactPoly:
    """Right piece (x >= 0) of (b'_i * b'_j~) with b'_k = (y/h)^k."""
    return convolve_basis(i, j, h).pieces[1].poly.scale(Fraction(h) ** (-(i + j)))


@lru_cache(maxsize=None)
def _objective_coefficients(d: int, h: Fraction, n: int):
    """Exact rational coefficients of Z_n(f) on the scaled upper triangle:
    n f(0) + 2 int_0^1 f(x) x dx, using evenness of f."""
    h = Fraction(h)
    x = ExactPoly.monomial(1)
    upto = min(Fraction(1), 2 * h)
    out = {}
    for i in range(d + 1):
        for j in range(i, d + 1):
            # f(0) contribution of the scaled pair basis element
            f0 = Fraction(0)
            if (i + j) % 2 == 0:
                f0 = 2 * h / (i + j + 1)
            tail = 2 * (_scaled_conv_right(i, j, h) * x).integrate(Fraction(0), upto)
            if i != j:
                tail += 2 * (_scaled_conv_right(j, i, h) * x).integrate(Fraction(0), upto)
                f0 *= 2
            out[(i, j)] = n * f0 + tail
    return out


def assemble_sdp_bandlimit(
    n: int,
    d: int,
    support_T: Fraction = Fraction(1),
    sign_margin: Fraction = Fraction(1, 10 ** 9),
) -> SdpProblem:
    """Assemble the bounded-support problem: minimize Z_n(f) over PSD X with
    f_hat(0) = 1, f supported on [-T, T] (half-support h = T/2 for the
    basis).

    For support_T > 1 the extra sign requirement f <= 0 on [1, T] is imposed
    as the exact identity -f(1 + u) - margin (c - u) = u sig0(u)
    + (c - u) sig1(u) on [0, c], c = T - 1, with sig0, sig1 sum-of-squares
    (two extra PSD blocks).  The strictly-interior margin term is what makes
    the rounded solution certifiable: f vanishes identically at the support
    endpoint T, so a margin must vanish there too, and (T - x) is the
    weakest such weight.  It costs an O(margin) weaker bound.

    All coefficients are exact rationals.  The variable block is the
    diagonally rescaled X' = diag(h^i) X diag(h^i); metadata records the
    rescaling so certification can map back exactly.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if d < 0:
        raise ValueError("d must be nonnegative")
    T = Fraction(support_T)
    if T <= 0:
        raise ValueError("support_T must be positive")
    sign_margin = Fraction(sign_margin)
    if sign_margin < 0:
        raise ValueError("sign_margin must be nonnegative")
    h = T / 2

    blocks = [("X", d + 1)]
    equalities = []

    # normalization f_hat(0) = 1 in the scaled basis: int b'_i = 2h/(i+1)
    row = {}
    for i in range(0, d + 1, 2):
        wi = 2 * h / (i + 1)
        for j in range(i % 2, d + 1, 2):
            if j < i:
                continue
            wj = 2 * h / (j + 1)
            row[("b", "X", i, j)] = wi * wj * (1 if i == j else 2)
    equalities.append((row, Fraction(1)))

    objective = {
        ("b", "X", i, j): c
        for (i, j), c in _objective_coefficients(d, h, n).items()
    }

    if T > 1:
        blocks += [("sig0", d + 1), ("sig1", d + 1)]
        c = T - 1
        deg = 2 * d + 2  # degrees 0 .. 2d+1 of the shifted identity
        # -q(1+u) = u sig0(u) + (c - u) sig1(u), with q the x >= 0 piece of f
        shifted = {
            (i, j): _scaled_conv_right(i, j, h).shift(Fraction(1))
            for i in range(d + 1)
            for j in range(d + 1)
        }
        for k in range(deg):
            rowk = {}
            for i in range(d + 1):
                for j in range(i, d + 1):
                    qk = shifted[(i, j)][k]
                    if i != j:
                        qk += shifted[(j, i)][k]
                    if qk != 0:
                        rowk[("b", "X", i, j)] = qk
            # u sig0: coefficient k comes from [sig0]_{k-1}
            if k >= 1:
                for a in range(max(0, k - 1 - d), (k - 1) // 2 + 1):
                    bb = k - 1 - a
                    if bb > d:
                        continue
                    key = ("b", "sig0", a, bb)
                    rowk[key] = rowk.get(key, Fraction(0)) + (1 if a == bb else 2)
            # (c - u) sig1: c [sig1]_k - [sig1]_{k-1}
            for a in range(max(0, k - d), k // 2 + 1):
                bb = k - a
                if bb > d:
                    continue
                key = ("b", "sig1", a, bb)
                rowk[key] = rowk.get(key, Fraction(0)) + c * (1 if a == bb else 2)
            if k >= 1:
                for a in range(max(0, k - 1 - d), (k - 1) // 2 + 1):
                    bb = k - 1 - a
                    if bb > d:
                        continue
                    key = ("b", "sig1", a, bb)
                    rowk[key] = rowk.get(key, Fraction(0)) - (1 if a == bb else 2)
            # margin term margin*(c - u) moves to the right-hand side
            rhs_k = Fraction(0)
            if k == 0:
                rhs_k = -sign_margin * c
            elif k == 1:
                rhs_k = sign_margin
            equalities.append((rowk, rhs_k))

    return SdpProblem(
        blocks=blocks,
        equalities=equalities,
        objective=objective,
        metadata={
            "provenance": "bandlimit",
            "n": n,
            "d": d,
            "half_support": h,
            "support_T": T,
            "sign_margin": sign_margin,
            "scaled_basis": True,
        },
    )


def unscale_solution_matrix(X_scaled, d: int, h: Fraction):
    """Map the solver's scaled block back to the plain monomial basis:
    X = D^{-1} X' D^{-1} with D = diag(h^i)."""
    h = Fraction(h)
    return [
        [Fraction(X_scaled[i][j]) * h ** (-(i + j)) for j in range(d + 1)]
        for i in range(d + 1)
    ]


def zn_exact(X, d: int, h: Fraction, n: int) -> Fraction:
    """Exact Z_n(f) = n f(0) + 2 int_0^1 f(x) x dx for a rational matrix in
    the plain monomial basis."""
    f = f_piecewise(X, d, h)
    return n * f(Fraction(0)) + 2 * f.integrate_weighted_x(Fraction(0), Fraction(1))
