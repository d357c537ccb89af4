"""Certification: exact bounds, failure modes, serialization, and the
independent checker (including randomized attacks)."""

import random
from fractions import Fraction

import pytest

from zetamult.bandlimit import assemble_sdp_bandlimit
from zetamult.certify import (
    Certificate,
    CertificateInvalid,
    NotPSD,
    ResidualTooLarge,
    ZeroNormalization,
    certify_bandlimit,
    certify_gauss,
    interval_cholesky_is_pd,
    ldlt_is_positive_definite,
    min_eigenvalue_at_least,
    round_fraction,
    serialize_certificate,
    verify_certificate_text,
)
from zetamult.ball import BallReal
from zetamult.gauss_model import assemble_sdp_gauss
from zetamult.sdp import SolverSettings, solve

SETTINGS = SolverSettings(precision=192, gap_tol=1e-16, feas_tol=1e-20, max_iterations=150)


class FakeSolution:
    def __init__(self, blocks):
        self.block_values = blocks


# -- PSD checks -----------------------------------------------------------


def test_ldlt_basic():
    assert ldlt_is_positive_definite([[Fraction(2), Fraction(1)], [Fraction(1), Fraction(2)]])
    assert not ldlt_is_positive_definite([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(1)]])
    assert not ldlt_is_positive_definite([[Fraction(0)]])


def test_min_eigenvalue_margin():
    M = [[Fraction(2), Fraction(0)], [Fraction(0), Fraction(3)]]
    assert min_eigenvalue_at_least(M, Fraction(1))
    assert not min_eigenvalue_at_least(M, Fraction(2))  # boundary counts as failure


def test_interval_cholesky():
    M = [
        [BallReal.from_fraction(Fraction(2), 96), BallReal.from_fraction(Fraction(1), 96)],
        [BallReal.from_fraction(Fraction(1), 96), BallReal.from_fraction(Fraction(2), 96)],
    ]
    assert interval_cholesky_is_pd(M) is True
    # inconclusive (not "not PSD") when the interval straddles the boundary
    wide = [[BallReal.from_endpoints(Fraction(-1), Fraction(1), 96)]]
    assert interval_cholesky_is_pd(wide) is None


def test_round_fraction_caps_denominator():
    q = Fraction(355000001, 113000000)
    r = round_fraction(q, 1000)
    assert r.denominator <= 1000
    assert abs(r - q) < Fraction(1, 1000 ** 2) * 10


# -- bandlimit path -------------------------------------------------------


def test_certify_hat_exact():
    sol = FakeSolution({"X": [[Fraction(1)]]})
    cert = certify_bandlimit(sol, 3, 0)
    assert cert.bound_exact == Fraction(10, 3)


def test_certify_bandlimit_montgomery():
    sol = solve(assemble_sdp_bandlimit(1, 1), SETTINGS)
    cert = certify_bandlimit(sol, 1, 1)
    assert Fraction(4, 3) <= cert.bound_exact <= Fraction(4, 3) + Fraction(1, 10 ** 8)


def test_certify_rejects_indefinite():
    bad = [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(-1, 1000)]]
    with pytest.raises(NotPSD):
        certify_bandlimit(FakeSolution({"X": bad}), 1, 1)


def test_certify_zero_normalization():
    # PSD but integrates to zero: the e1 e1^T direction
    e11 = [[Fraction(1, 10 ** 30), Fraction(0)], [Fraction(0), Fraction(1)]]
    with pytest.raises(ZeroNormalization):
        # make f_hat(0) nonpositive by zeroing the only contributing entry
        certify_bandlimit(FakeSolution({"X": [[Fraction(0), Fraction(0)], [Fraction(0), Fraction(1)]]}), 1, 1)


def test_certificate_scaling_is_exact():
    sol = solve(assemble_sdp_bandlimit(2, 2), SETTINGS)
    cert = certify_bandlimit(sol, 2, 2)
    from zetamult.bandlimit import hatf0_general

    X = cert.blocks["X"]
    fhat0 = hatf0_general(X, 2, Fraction(1, 2))
    Xn = [[x / fhat0 for x in row] for row in X]
    assert hatf0_general(Xn, 2, Fraction(1, 2)) == 1


# -- gauss path -----------------------------------------------------------


@pytest.mark.parametrize("basis", ["monomial", "eigen"])
def test_certify_gauss_roundtrip(basis):
    prob = assemble_sdp_gauss(1, 2, 192, basis=basis)
    sol = solve(prob, SETTINGS)
    cert = certify_gauss(sol, 1, 2, prec=192, basis=basis)
    assert cert.bound.upper() >= Fraction(13, 10)  # sanity: above 1.3
    # certified within gap + folding slack of the solver objective
    assert float(cert.bound.upper()) >= float(sol.objective_primal) - 1e-10
    assert float(cert.bound.lower()) <= float(sol.objective_primal) + 1e-8
    text = serialize_certificate(cert)
    assert verify_certificate_text(text)["ok"]


def test_certify_gauss_zero_residual_path():
    # hand-built point: p = 1 - t (Q1 = 0 via tiny, s2 = 1), so Tp has an
    # exactly representable transform; margins are comfortable
    eps = Fraction(1, 10 ** 12)
    q0 = [[eps, Fraction(0)], [Fraction(0), eps]]
    q2 = [[Fraction(1), Fraction(0)], [Fraction(0), eps]]
    # s3 ~ 1 - 1/(2pi) ~ 0.841, s4 = 1
    q3 = [[Fraction(841, 1000), Fraction(0)], [Fraction(0), eps]]
    q4 = [[Fraction(1), Fraction(0)], [Fraction(0), eps]]
    sol = FakeSolution({"Q1": q0, "Q2": q2, "Q3": q3, "Q4": q4})
    cert = certify_gauss(sol, 1, 1, prec=192, basis="monomial")
    # f = (1 - x^2 - eps stuff) e^{-pi x^2}: Z_1/f_hat(0) about 1.45
    assert 1.4 < float(cert.bound.upper()) < 1.5


def test_certify_gauss_residual_too_large():
    eps = Fraction(1, 10 ** 12)
    q0 = [[eps, Fraction(0)], [Fraction(0), eps]]
    q2 = [[Fraction(1), Fraction(0)], [Fraction(0), eps]]
    # corrupt s3 by 1e-2: margin of Q3 cannot absorb the transform residual
    q3 = [[Fraction(841, 1000) - Fraction(1, 100), Fraction(0)], [Fraction(0), eps]]
    q3[0][0] = eps  # push s3(0) far from (Tp)(0): residual >> margin
    q4 = [[Fraction(1), Fraction(0)], [Fraction(0), eps]]
    sol = FakeSolution({"Q1": q0, "Q2": q2, "Q3": q3, "Q4": q4})
    with pytest.raises(ResidualTooLarge):
        certify_gauss(sol, 1, 1, prec=192, basis="monomial")


def test_certify_gauss_not_psd():
    bad = [[Fraction(-1, 1000), Fraction(0)], [Fraction(0), Fraction(1)]]
    ok = [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]
    sol = FakeSolution({"Q1": bad, "Q2": ok, "Q3": ok, "Q4": ok})
    with pytest.raises(NotPSD):
        certify_gauss(sol, 1, 1, prec=192, basis="monomial")


# -- serialization and the independent checker ----------------------------


def make_bandlimit_cert(n=1, d=1):
    sol = solve(assemble_sdp_bandlimit(n, d), SETTINGS)
    return certify_bandlimit(sol, n, d)


def test_serialization_roundtrip():
    cert = make_bandlimit_cert()
    text = serialize_certificate(cert)
    result = verify_certificate_text(text)
    assert result["ok"] and result["n"] == 1 and result["method"] == "bandlimit"


def test_checker_rejects_header_tamper():
    text = serialize_certificate(make_bandlimit_cert())
    with pytest.raises(CertificateInvalid):
        verify_certificate_text(text.replace("v1", "v9", 1))


def _refresh_digest(lines):
    import hashlib

    body = "\n".join(lines[:-1]) + "\n"
    lines[-1] = "sha256 " + hashlib.sha256(body.encode()).hexdigest()
    return "\n".join(lines) + "\n"


def test_checker_rejects_bound_inflation_even_with_valid_digest():
    text = serialize_certificate(make_bandlimit_cert())
    lines = text.splitlines()
    for i, line in enumerate(lines):
        if line.startswith("bound_exact"):
            lines[i] = "bound_exact 133/100"
    with pytest.raises(CertificateInvalid):
        verify_certificate_text(_refresh_digest(lines))


def test_checker_rejects_block_tampering():
    text = serialize_certificate(make_bandlimit_cert())
    lines = text.splitlines()
    for i, line in enumerate(lines):
        if line.startswith("e 0 0 "):
            parts = line.split()
            num, den = parts[3].split("/")
            lines[i] = f"e 0 0 {int(num) + 1}/{den}"
            break
    with pytest.raises(CertificateInvalid):
        verify_certificate_text(_refresh_digest(lines))


def test_checker_rejects_raw_byte_flips():
    text = serialize_certificate(make_bandlimit_cert())
    rng = random.Random(0)
    for _ in range(20):
        pos = rng.randrange(len(text))
        ch = text[pos]
        repl = chr((ord(ch) - 31) % 95 + 32)
        if repl == ch:
            repl = "x" if ch != "x" else "y"
        mutated = text[:pos] + repl + text[pos + 1 :]
        with pytest.raises(CertificateInvalid):
            verify_certificate_text(mutated)
