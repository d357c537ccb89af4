"""Rigorous certification of solver output.

A certificate converts an approximate interior-point solution into a
machine-checkable upper bound:

* bounded-support path: the solution matrix is rounded to exact rationals,
  verified positive definite by exact LDL^T pivots (Sylvester), rescaled so
  f_hat(0) = 1 exactly, and the bound is the exact rational Z_n value; for
  supports beyond [-1, 1] the sign identity is re-established exactly by
  folding the rounding residual into the diagonal of the weighted
  sum-of-squares blocks.

* Gaussian path: Q1, Q2 are taken as ground truth, defining
  p = -s1 - (t-1) s2 exactly (so f <= 0 outside [-1,1] holds rigorously once
  Q1, Q2 are verified PSD); the transform of p is computed in ball
  arithmetic, the coefficientwise residual against s3 + t s4 is absorbed
  into verified eigenvalue margins of Q3, Q4 (diagonal-perturbation bound),
  and the certified value is the enclosure of Z_n(f)/f_hat(0).

Certificates serialize to a versioned, self-describing text format
(rationals as num/den, enclosures as directed decimal endpoints) that an
independent checker re-verifies from the bytes alone.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction

from .ball import BallReal, decimal_lower, decimal_upper, mpfr_to_fraction, parse_decimal
from .ballpoly import BallPoly, eigen_basis_ballpoly, exp_poly_integral
from .bandlimit import (
    f_piecewise,
    hatf0_general,
    unscale_solution_matrix,
    zn_exact,
    _scaled_conv_right,
)
from .exactpoly import ExactPoly
from .gauss_model import fourier_op

CERT_FORMAT = "zetamult-certificate"
CERT_VERSION = 1


class CertificationError(Exception):
    pass


class NotPSD(CertificationError):
    """Rounding (or the solver) destroyed positive semidefiniteness."""


class ResidualTooLarge(CertificationError):
    """Eigenvalue margins of the Fourier-side blocks cannot absorb the
    transform residual; re-solve at higher accuracy."""


class ZeroNormalization(CertificationError):
    """The f_hat(0) enclosure contains zero; nothing can be rescaled."""


class CertificateInvalid(CertificationError):
    """Independent re-verification failed."""


# ---------------------------------------------------------------------------
# exact and interval PSD checks
# ---------------------------------------------------------------------------


def ldlt_is_positive_definite(M) -> bool:
    """Exact rational LDL^T: True iff all pivots are > 0 (Sylvester).

    Strict definiteness is what certificates need; semidefinite boundary
    cases are treated as failures and handled by the caller (diagonal shift
    or higher solver accuracy).
    """
    n = len(M)
    A = [[Fraction(M[i][j]) for j in range(n)] for i in range(n)]
    for k in range(n):
        piv = A[k][k]
        if piv <= 0:
            return False
        for i in range(k + 1, n):
            f = A[i][k] / piv
            if f == 0:
                continue
            Ai, Ak = A[i], A[k]
            for j in range(k, n):
                Ai[j] -= f * Ak[j]
    return True


def min_eigenvalue_at_least(M, bound: Fraction) -> bool:
    """Exact check lambda_min(M) >= bound via LDL^T of M - bound*I
    (boundary counts as failure, keeping the check one-sided and safe)."""
    n = len(M)
    shifted = [
        [Fraction(M[i][j]) - (bound if i == j else 0) for j in range(n)]
        for i in range(n)
    ]
    return ldlt_is_positive_definite(shifted)


def interval_cholesky_is_pd(M: list[list[BallReal]]) -> bool | None:
    """Ball Cholesky: True proves every symmetric member matrix is PD;
    None means inconclusive (raise precision), never 'not PSD'."""
    n = len(M)
    L = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = M[i][j]
            for k in range(j):
                s = s - L[i][k] * L[j][k]
            if i == j:
                if not s.is_positive():
                    return None
                L[i][i] = s.sqrt()
            else:
                L[i][j] = s / L[j][j]
    return True


# ---------------------------------------------------------------------------
# rational rounding of solver matrices
# ---------------------------------------------------------------------------


def round_fraction(x: Fraction, den_cap: int) -> Fraction:
    """Best rational approximation with denominator <= den_cap via the
    continued-fraction convergents (stdlib limit_denominator)."""
    return Fraction(x).limit_denominator(den_cap)


def _entry_fraction(x) -> Fraction:
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    return mpfr_to_fraction(x)


def round_matrix(M, den_cap: int | None = 2 ** 64):
    """Symmetrized rational rounding of a solver matrix; den_cap None keeps
    exact values (used by the independent checker on serialized data)."""
    n = len(M)
    out = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            v = _entry_fraction(M[i][j])
            if i != j:
                v = (v + _entry_fraction(M[j][i])) / 2
            if den_cap is not None:
                v = round_fraction(v, den_cap)
            out[i][j] = out[j][i] = v
    return out


# ---------------------------------------------------------------------------
# Certificate container
# ---------------------------------------------------------------------------


@dataclass
class Certificate:
    method: str  # 'gauss' | 'bandlimit'
    n: int
    d: int
    params: dict
    blocks: dict  # name -> rational matrix (list of list of Fraction)
    normalization: BallReal
    bound: BallReal
    bound_exact: Fraction | None
    decomposition: dict  # 'f0', 'tail' -> BallReal
    audit: list = field(default_factory=list)

    def bound_upper_decimal(self, digits: int = 40) -> str:
        return decimal_upper(self.bound.upper(), digits)


# ---------------------------------------------------------------------------
# bounded-support certification
# ---------------------------------------------------------------------------


def _sos_poly_from_gram(Q, weights=None) -> ExactPoly:
    """sum_ab Q[a,b] w_a w_b t^{a+b} as an exact polynomial (w defaults 1)."""
    n = len(Q)
    coeffs = [Fraction(0)] * (2 * n - 1)
    for a in range(n):
        for b in range(n):
            w = Fraction(1) if weights is None else weights[a] * weights[b]
            coeffs[a + b] += Fraction(Q[a][b]) * w
    return ExactPoly(coeffs)


def _sos_ballpoly_from_eigen_gram(Q, prec: int) -> BallPoly:
    """sum_ab Q[a,b] e_a(t) e_b(t) as a monomial-basis ball polynomial."""
    n = len(Q)
    basis = [eigen_basis_ballpoly(a, prec) for a in range(n)]
    out = BallPoly((), prec)
    for a in range(n):
        for b in range(a, n):
            q = Fraction(Q[a][b]) * (1 if a == b else 2)
            if q == 0:
                continue
            out = out + (basis[a] * basis[b]).scale(BallReal.from_fraction(q, prec))
    return out


def certify_bandlimit(
    solution,
    n: int,
    d: int,
    half_support: Fraction = Fraction(1, 2),
    support_T: Fraction = Fraction(1),
    sign_margin: Fraction = Fraction(1, 10 ** 9),
    den_cap: int = 2 ** 64,
    diag_shift: Fraction = Fraction(0),
) -> Certificate:
    """Certify a bounded-support solve: exact rational end to end.

    Valid because the support bound and Fourier nonnegativity hold by
    construction for every PSD matrix; for support_T > 1 the sign of f on
    [1, T] is additionally re-established exactly from the rounded
    sum-of-squares blocks.
    """
    h = Fraction(half_support)
    T = Fraction(support_T)
    audit = []

    Xs = solution.block_values["X"] if hasattr(solution, "block_values") else solution
    X_scaled = round_matrix(Xs, den_cap)
    if diag_shift:
        for i in range(d + 1):
            X_scaled[i][i] += diag_shift
    X = unscale_solution_matrix(X_scaled, d, h)

    if not ldlt_is_positive_definite(X):
        raise NotPSD("rounded matrix is not positive definite")
    audit.append("X-positive-definite: exact LDL^T pivots")

    fhat0 = hatf0_general(X, d, h)
    if fhat0 <= 0:
        raise ZeroNormalization(f"f_hat(0) = {fhat0} is not positive")
    audit.append(f"normalization f_hat(0) = {fhat0} > 0")

    extra_blocks = {}
    if T > 1:
        tau0, tau1 = _certify_sign_on_tail(
            solution, X_scaled, d, h, T, Fraction(sign_margin), den_cap, audit
        )
        extra_blocks = {"tau0": tau0, "tau1": tau1}

    Xn = [[x / fhat0 for x in row] for row in X]
    bound_exact = zn_exact(Xn, d, h, n)
    fp = f_piecewise(Xn, d, h)
    f0 = fp(Fraction(0))
    tail = 2 * fp.integrate_weighted_x(Fraction(0), Fraction(1))
    assert n * f0 + tail == bound_exact
    audit.append(f"bound = Z_n = {bound_exact} (exact rational)")

    prec = 256
    return Certificate(
        method="bandlimit",
        n=n,
        d=d,
        params={"half_support": h, "support_T": T, "den_cap": den_cap},
        blocks={"X": X, **extra_blocks},
        normalization=BallReal.from_fraction(fhat0, prec),
        bound=BallReal.from_fraction(bound_exact, prec),
        bound_exact=bound_exact,
        decomposition={
            "f0": BallReal.from_fraction(f0, prec),
            "tail": BallReal.from_fraction(tail, prec),
            "f0_exact": f0,
            "tail_exact": tail,
        },
        audit=audit,
    )


def _certify_sign_on_tail(solution, X_scaled, d, h, T, sign_margin, den_cap, audit):
    """Re-establish -q(1+u) = u tau0 + (T-1-u) tau1 with tau_i PSD exactly,
    where q is the x >= 0 piece of f; the rounding residual is folded into
    the diagonals (u^{2m+1} sits on tau0's diagonal, u^{2m} splits as
    (u + (c-u))/c times a diagonal square).  The solve left a sign_margin*I
    cushion in the sigma blocks, which is what keeps the folded diagonals
    positive definite at the (degenerate) optimum."""
    c = T - 1
    q = ExactPoly.zero()
    for i in range(d + 1):
        for j in range(d + 1):
            v = Fraction(X_scaled[i][j])
            if v:
                q = q + _scaled_conv_right(i, j, h).scale(v)
    qs = q.shift(Fraction(1))  # q(1 + u) on u in [0, c]

    sig0 = round_matrix(solution.block_values["sig0"], den_cap)
    sig1 = round_matrix(solution.block_values["sig1"], den_cap)
    for m in range(d + 1):
        sig0[m][m] += sign_margin
        sig1[m][m] += sign_margin
    s0 = _sos_poly_from_gram(sig0)
    s1 = _sos_poly_from_gram(sig1)
    u = ExactPoly.monomial(1)
    cc = ExactPoly.constant(c)
    e = (-qs) - (u * s0) - ((cc - u) * s1)

    # fold e into the diagonals: E0[m,m] += e_{2m+1} + e_{2m}/c, E1[m,m] += e_{2m}/c
    if e.degree > 2 * d + 1:
        raise ResidualTooLarge("sign residual has too high degree")
    tau0 = [row[:] for row in sig0]
    tau1 = [row[:] for row in sig1]
    for m in range(d + 1):
        e_odd = e[2 * m + 1]
        e_even = e[2 * m]
        tau0[m][m] += e_odd + e_even / c
        tau1[m][m] += e_even / c
    if not ldlt_is_positive_definite(tau0) or not ldlt_is_positive_definite(tau1):
        raise NotPSD("sign certificate blocks lost definiteness after residual folding")
    audit.append("sign on [1, T]: exact weighted-SOS identity after residual folding")
    return tau0, tau1


# ---------------------------------------------------------------------------
# Gaussian-cone certification
# ---------------------------------------------------------------------------


def _absorb_residual_eigen(r: BallPoly, d: int, prec: int):
    """Enclose the coefficients (delta, eps) of the exact representation
    r(t) = sum_m delta_m e_m(t)^2 + t sum_m eps_m e_m(t)^2 by interval
    back-substitution (the system is triangular by degree and the leading
    coefficients (2 pi)^{2m}/m!^2 are positive)."""
    if r.degree > 2 * d + 1:
        raise ResidualTooLarge("transform residual beyond representable degree")
    squares = []
    for m in range(d + 1):
        em = eigen_basis_ballpoly(m, prec)
        squares.append(em * em)
    rem = [r[k] for k in range(2 * d + 2)]
    delta = [BallReal.zero(prec)] * (d + 1)
    eps = [BallReal.zero(prec)] * (d + 1)
    for j in range(2 * d + 1, -1, -1):
        if j % 2 == 1:
            m = (j - 1) // 2
            c = rem[j] / squares[m][2 * m]
            eps[m] = c
            for i in range(2 * m + 1):  # subtract c * t * e_m^2
                rem[i + 1] = rem[i + 1] - c * squares[m][i]
        else:
            m = j // 2
            c = rem[j] / squares[m][2 * m]
            delta[m] = c
            for i in range(2 * m + 1):
                rem[i] = rem[i] - c * squares[m][i]
    return delta, eps


def certify_gauss(
    solution,
    n: int,
    d: int,
    prec: int = 256,
    sigma: Fraction = Fraction(1),
    basis_weights: list[Fraction] | None = None,
    basis: str = "eigen",
    den_cap: int | None = 2 ** 64,
    diag_shift: Fraction = Fraction(0),
) -> Certificate:
    """Certify a Gaussian-cone solve.

    Q1 and Q2 are ground truth: p := -s1 - (t-1) s2 (so the sign side holds
    rigorously once they are PD, in whichever Gram basis they were solved).
    The Fourier-side residual r = Tp - s3 - t s4 is enclosed coefficientwise
    and absorbed into verified eigenvalue margins of Q3 and Q4 via a
    diagonal perturbation in the same Gram basis.
    """
    if basis not in ("eigen", "monomial"):
        raise CertificationError(f"unknown basis {basis!r}")
    sigma = Fraction(sigma)
    if basis_weights is None:
        weights = [sigma ** (-k) for k in range(d + 1)]
    else:
        weights = [Fraction(wk) for wk in basis_weights]
    audit = []
    blocks = {}
    for name in ("Q1", "Q2", "Q3", "Q4"):
        Q = round_matrix(solution.block_values[name], den_cap)
        if diag_shift:
            for i in range(d + 1):
                Q[i][i] += diag_shift
        blocks[name] = Q

    for name in ("Q1", "Q2"):
        if not ldlt_is_positive_definite(blocks[name]):
            raise NotPSD(f"{name} is not positive definite")
    audit.append("Q1, Q2 positive definite: exact LDL^T pivots")

    if basis == "monomial":
        s1 = _sos_poly_from_gram(blocks["Q1"], weights)
        s2 = _sos_poly_from_gram(blocks["Q2"], weights)
        s3 = _sos_poly_from_gram(blocks["Q3"], weights)
        s4 = _sos_poly_from_gram(blocks["Q4"], weights)
        t_minus_1 = ExactPoly([Fraction(-1), Fraction(1)])
        p_ball = BallPoly.from_exact(-(s1) - (t_minus_1 * s2), prec)
        tp = fourier_op(p_ball, prec)
        r = tp - BallPoly.from_exact(s3, prec) - BallPoly.from_exact(s4, prec).mul_x()
        # margins: t^{2m} = v_m(t)^2 / u_m^2, so residual coefficient r_{2m}
        # perturbs Q3's diagonal entry m by r_{2m}/u_m^2 (odd powers sit on
        # Q4's diagonal through the extra factor t)
        rho3 = Fraction(0)
        rho4 = Fraction(0)
        for k in range(r.degree + 1):
            mag = r[k].mag()
            if mag == 0:
                continue
            m = k // 2 if k % 2 == 0 else (k - 1) // 2
            if m > d:
                raise ResidualTooLarge("residual beyond representable degree")
            if k % 2 == 0:
                rho3 = max(rho3, mag / weights[m] ** 2)
            else:
                rho4 = max(rho4, mag / weights[m] ** 2)
    else:
        s1 = _sos_ballpoly_from_eigen_gram(blocks["Q1"], prec)
        s2 = _sos_ballpoly_from_eigen_gram(blocks["Q2"], prec)
        s3 = _sos_ballpoly_from_eigen_gram(blocks["Q3"], prec)
        s4 = _sos_ballpoly_from_eigen_gram(blocks["Q4"], prec)
        p_ball = (BallPoly((), prec) - s1) + s2 - s2.mul_x()
        tp = fourier_op(p_ball, prec)
        r = tp - s3 - s4.mul_x()
        delta, eps = _absorb_residual_eigen(r, d, prec)
        rho3 = max((b.mag() for b in delta), default=Fraction(0))
        rho4 = max((b.mag() for b in eps), default=Fraction(0))

    if not min_eigenvalue_at_least(blocks["Q3"], rho3):
        raise ResidualTooLarge(
            f"Q3 margin cannot absorb transform residual (needs lambda_min >= {float(rho3):.3e})"
        )
    if not min_eigenvalue_at_least(blocks["Q4"], rho4):
        raise ResidualTooLarge(
            f"Q4 margin cannot absorb transform residual (needs lambda_min >= {float(rho4):.3e})"
        )
    audit.append(
        f"Q3, Q4 margins absorb residual: lambda_min >= {float(rho3):.3e}, {float(rho4):.3e}"
    )

    fhat0 = tp[0]
    if not fhat0.is_positive():
        raise ZeroNormalization("f_hat(0) enclosure does not exclude zero")
    audit.append("normalization (Tp)(0) > 0")

    p0 = p_ball[0]
    tail_raw = exp_poly_integral(p_ball, prec)
    zn_raw = BallReal.from_int(n, prec) * p0 + tail_raw
    bound = zn_raw / fhat0
    audit.append("bound = Z_n(f)/f_hat(0) in ball arithmetic")

    return Certificate(
        method="gauss",
        n=n,
        d=d,
        params={
            "precision": prec,
            "basis": basis,
            "sigma": sigma,
            "den_cap": den_cap,
            "basis_weights": ",".join(_fmt_fraction(wk) for wk in weights),
        },
        blocks=blocks,
        normalization=fhat0,
        bound=bound,
        bound_exact=None,
        decomposition={"f0": p0 / fhat0, "tail": tail_raw / fhat0},
        audit=audit,
    )


# ---------------------------------------------------------------------------
# serialization (versioned, self-describing) and independent verification
# ---------------------------------------------------------------------------


def _fmt_fraction(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _parse_fraction(s: str) -> Fraction:
    num, den = s.split("/")
    return Fraction(int(num), int(den))


def serialize_certificate(cert: Certificate) -> str:
    """Text format, one field per line.  Field order is fixed; a trailing
    sha256 line covers every preceding byte, so any accidental corruption is
    detected before semantic checks run."""
    lines = [f"{CERT_FORMAT} v{CERT_VERSION}"]
    lines.append(f"method {cert.method}")
    lines.append(f"n {cert.n}")
    lines.append(f"d {cert.d}")
    for key in sorted(cert.params):
        val = cert.params[key]
        if isinstance(val, Fraction):
            lines.append(f"param {key} {_fmt_fraction(val)}")
        else:
            lines.append(f"param {key} {val}")
    if cert.bound_exact is not None:
        lines.append(f"bound_exact {_fmt_fraction(cert.bound_exact)}")
    lines.append(f"bound_lower {decimal_lower(cert.bound.lower(), 40)}")
    lines.append(f"bound_upper {decimal_upper(cert.bound.upper(), 40)}")
    for name in sorted(cert.blocks):
        M = cert.blocks[name]
        lines.append(f"block {name} {len(M)}")
        for i in range(len(M)):
            for j in range(i, len(M)):
                if M[i][j] != 0:
                    lines.append(f"e {i} {j} {_fmt_fraction(M[i][j])}")
        lines.append("endblock")
    for entry in cert.audit:
        lines.append(f"audit {entry}")
    body = "\n".join(lines) + "\n"
    digest = hashlib.sha256(body.encode()).hexdigest()
    return body + f"sha256 {digest}\n"


def write_certificate(cert: Certificate, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(serialize_certificate(cert))


def _parse_certificate_text(text: str) -> dict:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(f"{CERT_FORMAT} v"):
        raise CertificateInvalid("missing or unknown certificate header")
    version = lines[0].split("v")[-1]
    if version != str(CERT_VERSION):
        raise CertificateInvalid(f"unsupported certificate version {version!r}")
    if not lines[-1].startswith("sha256 "):
        raise CertificateInvalid("missing integrity line")
    body = "\n".join(lines[:-1]) + "\n"
    want = lines[-1].split()[1]
    got = hashlib.sha256(body.encode()).hexdigest()
    if want != got:
        raise CertificateInvalid("integrity digest mismatch")

    out = {"params": {}, "blocks": {}, "audit": []}
    i = 1
    while i < len(lines) - 1:
        parts = lines[i].split()
        tag = parts[0]
        if tag == "method":
            out["method"] = parts[1]
        elif tag in ("n", "d"):
            out[tag] = int(parts[1])
        elif tag == "param":
            out["params"][parts[1]] = parts[2]
        elif tag == "bound_exact":
            out["bound_exact"] = _parse_fraction(parts[1])
        elif tag == "bound_lower":
            out["bound_lower"] = parse_decimal(parts[1])
        elif tag == "bound_upper":
            out["bound_upper"] = parse_decimal(parts[1])
        elif tag == "block":
            name, side = parts[1], int(parts[2])
            M = [[Fraction(0)] * side for _ in range(side)]
            i += 1
            while lines[i] != "endblock":
                _, r, c, val = lines[i].split()
                r, c = int(r), int(c)
                M[r][c] = M[c][r] = _parse_fraction(val)
                i += 1
            out["blocks"][name] = M
        elif tag == "audit":
            out["audit"].append(lines[i][6:])
        else:
            raise CertificateInvalid(f"unknown field {tag!r} at line {i + 1}")
        i += 1
    for req in ("method", "n", "d"):
        if req not in out:
            raise CertificateInvalid(f"missing required field {req!r}")
    return out


def verify_certificate_text(text: str) -> dict:
    """Independent checker: re-derives the bound from the serialized blocks
    alone and confirms the stored bound matches.  Returns a report dict on
    success; raises CertificateInvalid otherwise."""
    data = _parse_certificate_text(text)
    method = data["method"]
    n, d = data["n"], data["d"]

    try:
        if method == "bandlimit":
            h = _parse_fraction(data["params"]["half_support"])
            T = _parse_fraction(data["params"]["support_T"])
            X = data["blocks"]["X"]
            if len(X) != d + 1:
                raise CertificateInvalid("block side disagrees with d")
            if not ldlt_is_positive_definite(X):
                raise CertificateInvalid("stored matrix is not positive definite")
            if T > 1:
                if "tau0" not in data["blocks"] or "tau1" not in data["blocks"]:
                    raise CertificateInvalid("wide-support certificate lacks tau blocks")
                _reverify_sign_tail(data, d, h, T)
            fhat0 = hatf0_general(X, d, h)
            if fhat0 <= 0:
                raise CertificateInvalid("stored matrix has nonpositive normalization")
            Xn = [[x / fhat0 for x in row] for row in X]
            bound = zn_exact(Xn, d, h, n)
            if data.get("bound_exact") != bound:
                raise CertificateInvalid("recomputed bound mismatch")
            if data["bound_upper"] < bound:
                raise CertificateInvalid("stored decimal upper endpoint below true bound")
            if data["bound_upper"] > bound + Fraction(1, 10**30) * (1 + abs(bound)):
                raise CertificateInvalid("stored decimal upper endpoint inflated")
        elif method == "gauss":
            prec = int(data["params"]["precision"])
            sigma = _parse_fraction(data["params"]["sigma"])
            basis = data["params"].get("basis", "monomial")
            weights = [
                _parse_fraction(w) for w in data["params"]["basis_weights"].split(",")
            ]
            cert = certify_from_blocks_gauss(
                data["blocks"], n, d, prec, sigma, weights, basis
            )
            lo, hi = cert.bound.lower(), cert.bound.upper()
            # the checker recomputes deterministically, so the stored decimal
            # endpoints must match the recomputed ones exactly (this rejects
            # both deflated and inflated bound fields)
            if data["bound_upper"] != parse_decimal(decimal_upper(hi, 40)):
                raise CertificateInvalid("recomputed bound mismatch")
            if data["bound_lower"] != parse_decimal(decimal_lower(lo, 40)):
                raise CertificateInvalid("recomputed bound mismatch (lower)")
        else:
            raise CertificateInvalid(f"unknown method {method!r}")
    except CertificationError as exc:
        if isinstance(exc, CertificateInvalid):
            raise
        raise CertificateInvalid(f"semantic re-check failed: {exc}") from exc

    return {
        "method": method,
        "n": n,
        "d": d,
        "bound_upper": data["bound_upper"],
        "ok": True,
    }


def _reverify_sign_tail(data, d, h, T):
    c = T - 1
    X_scaled = [
        [Fraction(data["blocks"]["X"][i][j]) * h ** (i + j) for j in range(d + 1)]
        for i in range(d + 1)
    ]
    q = ExactPoly.zero()
    for i in range(d + 1):
        for j in range(d + 1):
            v = X_scaled[i][j]
            if v:
                q = q + _scaled_conv_right(i, j, h).scale(v)
    qs = q.shift(Fraction(1))
    tau0 = data["blocks"]["tau0"]
    tau1 = data["blocks"]["tau1"]
    s0 = _sos_poly_from_gram(tau0)
    s1 = _sos_poly_from_gram(tau1)
    u = ExactPoly.monomial(1)
    ident = (u * s0) + ((ExactPoly.constant(c) - u) * s1)
    if (-qs) - ident != ExactPoly.zero():
        raise CertificateInvalid("sign identity does not hold exactly")
    if not ldlt_is_positive_definite(tau0) or not ldlt_is_positive_definite(tau1):
        raise CertificateInvalid("sign blocks are not positive definite")


def certify_from_blocks_gauss(
    blocks, n, d, prec, sigma, basis_weights=None, basis="monomial"
) -> Certificate:
    """Gauss certification from exact rational blocks (the checker path:
    shares all logic with certify_gauss but consumes serialized data)."""

    class _Shim:
        block_values = blocks

    return certify_gauss(
        _Shim(),
        n,
        d,
        prec=prec,
        sigma=sigma,
        basis_weights=basis_weights,
        basis=basis,
        den_cap=None,
    )


def verify_certificate_file(path: str) -> dict:
    with open(path) as fh:
        return verify_certificate_text(fh.read())
