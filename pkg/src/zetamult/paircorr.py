"""Empirical pair correlation of zero ordinates.

Given a dataset of ordinates gamma, the weighted double sum

    F(x, T) = sum_{0 < gamma, gamma' <= T} cos((gamma - gamma') log x) * w(gamma - gamma')

with w(u) = 4/(4 + u^2) is always nonnegative (w is the Fourier transform of
a positive measure, so the sum is a positive semidefinite quadratic form in
the ordinates' exponentials).  The normalized version

    f_alpha(alpha) = (n T/(2 pi) log T)^{-1} F(T^|alpha|, T)

is compared against the conditional large-T shape
n T^{-2|alpha|} log T + |alpha| (lower-order terms dropped; the comparison
is diagnostic, not a sharp test).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np


class ZeroDataError(Exception):
    pass


class ParseError(ZeroDataError):
    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.line_no = line_no


class NotSorted(ZeroDataError):
    pass


class NonPositive(ZeroDataError):
    pass


class EmptyWindow(ZeroDataError):
    """No ordinate falls in (0, T]."""


@dataclass(frozen=True)
class ZeroDataset:
    ordinates: tuple
    label: str = ""
    source_path: str = ""

    @property
    def count(self) -> int:
        return len(self.ordinates)

    def window(self, T: float) -> np.ndarray:
        arr = np.asarray(self.ordinates, dtype=float)
        return arr[(arr > 0) & (arr <= T)]


def load_zeros(path: str, label: str = "", multiset: bool = False) -> ZeroDataset:
    """Parse a zeros file: one decimal ordinate per line, '#' comments.

    Ordinates must be strictly increasing and positive; with multiset=True
    repeated ordinates are allowed (nondecreasing) and each occurrence
    counts separately.
    """
    ordinates: list[float] = []
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                value = float(line)
            except ValueError:
                raise ParseError(path, line_no, f"not a decimal ordinate: {line!r}")
            if not math.isfinite(value):
                raise ParseError(path, line_no, "ordinate must be finite")
            if value <= 0:
                raise NonPositive(f"{path}:{line_no}: ordinate {value} is not positive")
            if ordinates:
                if multiset:
                    if value < ordinates[-1]:
                        raise NotSorted(
                            f"{path}:{line_no}: ordinates must be nondecreasing"
                        )
                elif value <= ordinates[-1]:
                    raise NotSorted(
                        f"{path}:{line_no}: ordinates must be strictly increasing "
                        "(pass multiset for repeated zeros)"
                    )
            ordinates.append(value)
    return ZeroDataset(tuple(ordinates), label=label or path, source_path=path)


EXACT_PAIR_LIMIT = 20_000
DEFAULT_CUTOFF = 1000.0


def _weight(u: np.ndarray) -> np.ndarray:
    return 4.0 / (4.0 + u * u)


def pair_corr_sum(zeros: ZeroDataset, x: float, T: float, cutoff: float | None = None):
    """The weighted pair-correlation double sum over ordinates in (0, T].

    Row sums are accumulated with exact float summation (math.fsum), so the
    result is permutation-stable.  For windows larger than EXACT_PAIR_LIMIT
    a gap cutoff U (default 1000) drops far pairs; each dropped pair
    contributes at most 4/U^2, giving the rigorous tail bound
    4 m^2 / U^2 returned alongside.

    Returns the sum when no cutoff was applied, else (sum, tail_bound).
    """
    if x < 1:
        raise ValueError("x must be >= 1")
    g = zeros.window(T)
    m = len(g)
    if m == 0:
        raise EmptyWindow(f"no ordinates in (0, {T}]")
    logx = math.log(x)

    auto_cutoff = cutoff
    if auto_cutoff is None and m > EXACT_PAIR_LIMIT:
        auto_cutoff = DEFAULT_CUTOFF

    if auto_cutoff is None:
        row_sums = []
        for i in range(m):
            u = g[i] - g
            row_sums.append(math.fsum(np.cos(u * logx) * _weight(u)))
        return math.fsum(row_sums)

    U = float(auto_cutoff)
    row_sums = []
    for i in range(m):
        lo = np.searchsorted(g, g[i] - U, side="left")
        hi = np.searchsorted(g, g[i] + U, side="right")
        u = g[i] - g[lo:hi]
        row_sums.append(math.fsum(np.cos(u * logx) * _weight(u)))
    tail_bound = 4.0 * m * m / (U * U)
    return math.fsum(row_sums), tail_bound


def _sum_value(result) -> float:
    return result[0] if isinstance(result, tuple) else result


def f_alpha(zeros: ZeroDataset, alpha: float, T: float, n: int) -> float:
    """Normalized empirical pair correlation at scale exponent alpha."""
    if T < 2:
        raise ValueError("T must be >= 2")
    if abs(alpha) > 2:
        raise ValueError("|alpha| must be <= 2")
    if n < 1:
        raise ValueError("n must be >= 1")
    x = T ** abs(alpha)
    total = _sum_value(pair_corr_sum(zeros, x, T))
    norm = n * T / (2 * math.pi) * math.log(T)
    return total / norm


def asymptotic_f(alpha: float, T: float, n: int) -> float:
    """Large-T shape of the pair correlation: n T^{-2|alpha|} log T + |alpha|
    (lower-order terms dropped; diagnostic only)."""
    if T < 2:
        raise ValueError("T must be >= 2")
    return n * T ** (-2 * abs(alpha)) * math.log(T) + abs(alpha)


@dataclass
class PairCorrReport:
    n: int
    T: float
    label: str
    alphas: list
    empirical: list
    asymptotic: list
    window_count: int
    tail_bound: float = 0.0
    meta: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "schema": "zetamult.paircorr-report/1",
            "n": self.n,
            "T": self.T,
            "dataset": self.label,
            "window_count": self.window_count,
            "tail_bound": self.tail_bound,
            "rows": [
                {"alpha": a, "empirical": e, "asymptotic": s}
                for a, e, s in zip(self.alphas, self.empirical, self.asymptotic)
            ],
            "meta": self.meta,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["alpha", "empirical", "asymptotic"])
        for a, e, s in zip(self.alphas, self.empirical, self.asymptotic):
            writer.writerow([repr(a), repr(e), repr(s)])
        return buf.getvalue()


def compare_report(zeros: ZeroDataset, n: int, alphas, T: float) -> PairCorrReport:
    """Aligned empirical/asymptotic table over an alpha grid."""
    alphas = [float(a) for a in alphas]
    g = zeros.window(T)
    if len(g) == 0:
        raise EmptyWindow(f"no ordinates in (0, {T}]")
    emp = [f_alpha(zeros, a, T, n) for a in alphas]
    asy = [asymptotic_f(a, T, n) for a in alphas]
    tail = 0.0
    if len(g) > EXACT_PAIR_LIMIT:
        tail = 4.0 * len(g) ** 2 / DEFAULT_CUTOFF ** 2
    return PairCorrReport(
        n=n,
        T=T,
        label=zeros.label,
        alphas=alphas,
        empirical=emp,
        asymptotic=asy,
        window_count=int(len(g)),
        tail_bound=tail,
        meta={"weight": "4/(4+u^2)", "normalization": "n*T/(2*pi)*log(T)"},
    )


def write_paircorr_report(report: PairCorrReport, path: str, fmt: str = "json") -> None:
    if fmt == "json":
        with open(path, "w") as fh:
            json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    elif fmt == "csv":
        with open(path, "w") as fh:
            fh.write(report.to_csv())
    else:
        raise ValueError(f"unknown format {fmt!r}")
