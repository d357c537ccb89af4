"""Orchestration: compute certified multiplicity constants c_n, the hat
baseline, large-n affine bounds, and distinct-zero proportions.

Pipeline per query: assemble the chosen model, run the interior-point
solver, certify its output rigorously, and package everything (including the
f(0)/tail decomposition used for the affine large-n bound) into a report
with a reproducible settings hash.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .ball import BallReal, decimal_lower, decimal_upper
from .bandlimit import assemble_sdp_bandlimit, f_piecewise, zn_exact
from .certify import Certificate, certify_bandlimit, certify_gauss
from .gauss_model import assemble_sdp_gauss, basis_weights_default
from .sdp import SolverSettings, solve

REPORT_SCHEMA = "zetamult.bound-report/1"


@dataclass(frozen=True)
class BoundQuery:
    n: int
    d: int
    method: str  # 'gauss' | 'bandlimit'
    support_T: Fraction = Fraction(1)
    precision: int = 256
    digits: int = 10
    sigma: Fraction = Fraction(1)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.method not in ("gauss", "bandlimit"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "gauss" and self.d < 1:
            raise ValueError("gauss method needs d >= 1")
        if self.method == "bandlimit" and self.d < 0:
            raise ValueError("bandlimit method needs d >= 0")
        if Fraction(self.support_T) != 1 and self.method == "gauss":
            raise ValueError("support_T only applies to the bandlimit method")

    def settings_hash(self) -> str:
        payload = json.dumps(
            {
                "n": self.n,
                "d": self.d,
                "method": self.method,
                "support_T": str(Fraction(self.support_T)),
                "precision": self.precision,
                "digits": self.digits,
                "sigma": str(Fraction(self.sigma)),
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()


@dataclass
class BoundReport:
    query: BoundQuery
    certified_upper: Fraction
    certified_lower: Fraction
    solver_objective: float
    solver_status: str
    solver_iterations: int
    certificate: Certificate
    f0: BallReal
    tail: BallReal
    wall_time_s: float
    settings_hash: str

    def to_json_dict(self) -> dict:
        # wall time lives under "timing" and is excluded from determinism
        # comparisons and from the settings hash
        return {
            "schema": REPORT_SCHEMA,
            "query": {
                "n": self.query.n,
                "d": self.query.d,
                "method": self.query.method,
                "support_T": str(Fraction(self.query.support_T)),
                "precision": self.query.precision,
                "digits": self.query.digits,
                "sigma": str(Fraction(self.query.sigma)),
            },
            "certified_upper": decimal_upper(self.certified_upper, 40),
            "certified_lower": decimal_lower(self.certified_lower, 40),
            "solver": {
                "objective": repr(self.solver_objective),
                "status": self.solver_status,
                "iterations": self.solver_iterations,
            },
            "decomposition": {
                "f0_lower": decimal_lower(self.f0.lower(), 40),
                "f0_upper": decimal_upper(self.f0.upper(), 40),
                "tail_lower": decimal_lower(self.tail.lower(), 40),
                "tail_upper": decimal_upper(self.tail.upper(), 40),
            },
            "settings_hash": self.settings_hash,
            "timing": {"wall_s": self.wall_time_s},
        }


def _solver_settings(query: BoundQuery) -> SolverSettings:
    return SolverSettings(
        precision=query.precision,
        gap_tol=10.0 ** (-(query.digits + 5)),
        feas_tol=10.0 ** (-(query.digits + 10)),
        max_iterations=400,
    )


def compute_cn(query: BoundQuery, keep_problem: bool = False) -> BoundReport:
    """Assemble, solve, certify; the report's certified upper endpoint is a
    valid multiplicity constant c_n for the queried field degree."""
    t0 = time.time()
    settings = _solver_settings(query)
    if query.method == "gauss":
        problem = assemble_sdp_gauss(
            query.n, query.d, query.precision, sigma=Fraction(query.sigma), basis="eigen"
        )
        solution = solve(problem, settings)
        if solution.status not in ("optimal", "max_iterations"):
            raise RuntimeError(f"solver failed: status={solution.status}")
        cert = certify_gauss(
            solution,
            query.n,
            query.d,
            prec=query.precision,
            basis="eigen",
        )
    else:
        problem = assemble_sdp_bandlimit(query.n, query.d, Fraction(query.support_T))
        solution = solve(problem, settings)
        if solution.status not in ("optimal", "max_iterations"):
            raise RuntimeError(f"solver failed: status={solution.status}")
        cert = certify_bandlimit(
            solution,
            query.n,
            query.d,
            half_support=Fraction(query.support_T) / 2,
            support_T=Fraction(query.support_T),
        )

    report = BoundReport(
        query=query,
        certified_upper=cert.bound.upper(),
        certified_lower=cert.bound.lower(),
        solver_objective=float(solution.objective_primal),
        solver_status=solution.status,
        solver_iterations=solution.iterations,
        certificate=cert,
        f0=cert.decomposition["f0"],
        tail=cert.decomposition["tail"],
        wall_time_s=time.time() - t0,
        settings_hash=query.settings_hash(),
    )
    if keep_problem:
        report.problem = problem  # type: ignore[attr-defined]
        report.solution = solution  # type: ignore[attr-defined]
    return report


def hat_baseline(n: int) -> Fraction:
    """Z_n of the hat function, computed through the piecewise-polynomial
    pipeline (not hard-coded): always n + 1/3."""
    if n < 1:
        raise ValueError("n must be >= 1")
    e00 = [[Fraction(1)]]
    return zn_exact(e00, 0, Fraction(1, 2), n)


def affine_bound_from_reference(report: BoundReport) -> tuple[BallReal, BallReal]:
    """(slope, intercept) = (f(0), Z_n(f) - n f(0)) of the certified
    reference function: for every m >= 1, c_m <= slope * m + intercept,
    because the reference f stays feasible when n changes and Z_m is affine
    in m with these coefficients."""
    if report.f0 is None or report.tail is None:
        raise ValueError("report lacks the f(0)/tail decomposition")
    return report.f0, report.tail


def distinct_zero_bound(c_n, s_n) -> BallReal:
    """Lower bound on the distinct-zero proportion: (5 - c_n + 2 s_n)/6.

    Follows from 2 N_s <= N* - 5 N + 6 N_d (the multiplicity identity with
    (m-2)(m-3) >= 0 termwise) by inserting N* <= c_n N and N_s >= s_n N.
    Negative results are returned as-is; display clamping is the caller's
    concern.
    """
    s_n = Fraction(s_n)
    if not 0 <= s_n <= 1:
        raise ValueError("s_n must lie in [0, 1]")
    if isinstance(c_n, BallReal):
        c = c_n
    else:
        c = BallReal.from_fraction(Fraction(c_n))
    return (5 - c + 2 * BallReal.from_fraction(s_n, c.prec)) / 6


def write_report(report: BoundReport, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
