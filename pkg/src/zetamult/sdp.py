"""Small dense block-diagonal semidefinite programs in configurable-precision
arithmetic.

Problem form (primal):

    minimize    sum_b <C_b, X_b> + c_f . p
    subject to  sum_b <A_i^b, X_b> + (F p)_i = b_i     (i = 1..m)
                X_b positive semidefinite,  p free scalars.

The solver is an infeasible-start primal-dual path-following method with the
HKM search direction and a Mehrotra predictor-corrector step, running on
dense MPFR linear algebra at a configurable precision.  Free variables are
handled through the standard augmented Schur-complement block system.  On a
Schur/Cholesky breakdown the solve is retried at doubled precision up to a
cap.  Everything is deterministic: identical problems and settings produce
bit-identical iterates.

Linear functionals on a block are stored sparsely as {(i, j): c} with i <= j,
meaning sum c * X_ij over the *unordered* entry (so off-diagonal coefficients
act on both mirror entries together).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

from .ball import int_to_mpfr_exact


class SdpError(Exception):
    pass


class _Breakdown(Exception):
    """Internal: numerical breakdown at the current precision."""


# ---------------------------------------------------------------------------
# Problem / settings / solution containers
# ---------------------------------------------------------------------------


class SdpProblem:
    """Block-PSD variables, optional free scalars, linear equalities, linear
    objective.

    Coefficient keys are ('b', block_name, i, j) with i <= j for block
    entries and ('f', k) for free scalars.  Values are Fractions or mpfr
    (solver-side midpoints); enclosure radii of inexact coefficients live in
    metadata and are consumed by certification, never silently dropped.
    """

    def __init__(self, blocks, equalities, objective, free_names=(), metadata=None):
        self.blocks = [(str(name), int(side)) for name, side in blocks]
        self.block_index = {name: k for k, (name, _) in enumerate(self.blocks)}
        if len(self.block_index) != len(self.blocks):
            raise SdpError("duplicate block names")
        self.free_names = list(free_names)
        self.equalities = list(equalities)
        self.objective = dict(objective)
        self.metadata = dict(metadata or {})
        for key in self.objective:
            self._check_key(key)
        for row, _rhs in self.equalities:
            for key in row:
                self._check_key(key)

    def _check_key(self, key):
        kind = key[0]
        if kind == "b":
            _, name, i, j = key
            if name not in self.block_index:
                raise SdpError(f"coefficient references undeclared block {name!r}")
            side = self.blocks[self.block_index[name]][1]
            if not (0 <= i <= j < side):
                raise SdpError(f"entry ({i},{j}) out of range for block {name!r}")
        elif kind == "f":
            if not (0 <= key[1] < len(self.free_names)):
                raise SdpError(f"free variable index {key[1]} out of range")
        else:
            raise SdpError(f"unknown coefficient key kind {kind!r}")

    @property
    def num_constraints(self) -> int:
        return len(self.equalities)

    @property
    def num_free(self) -> int:
        return len(self.free_names)


@dataclass
class SolverSettings:
    """Interior-point settings.  gap_tol is the relative duality-gap target
    (default: ten certified digits plus five guard digits)."""

    precision: int = 128
    max_iterations: int = 300
    gap_tol: float = 1e-15
    feas_tol: float = 1e-20
    step_damping: float = 0.96
    max_precision: int = 1024
    init_scale: float = 100.0  # initial point X = S = init_scale * max(1, data norms) * I

    def __post_init__(self):
        if self.precision < 64:
            raise SdpError("precision must be >= 64 bits")
        if self.gap_tol <= 0 or self.feas_tol <= 0:
            raise SdpError("tolerances must be positive")
        if not (0 < self.step_damping < 1):
            raise SdpError("step damping must lie in (0, 1)")

    def hashable(self) -> str:
        payload = (
            f"{self.precision},{self.max_iterations},{self.gap_tol!r},"
            f"{self.feas_tol!r},{self.step_damping!r},{self.max_precision}"
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class SdpSolution:
    block_values: dict
    free_values: list
    y: list
    dual_blocks: dict
    objective_primal: object
    objective_dual: object
    gap: object
    iterations: int
    status: str
    precision: int
    trace: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Dense MPFR linear algebra (operates under the active gmpy2 context)
# ---------------------------------------------------------------------------


def _f2m(q) -> mpfr:
    if isinstance(q, Fraction):
        return gmpy2.div(int_to_mpfr_exact(q.numerator), int_to_mpfr_exact(q.denominator))
    if isinstance(q, int):
        return mpfr(int_to_mpfr_exact(q))
    return mpfr(q)


def _pow2_reciprocal(x) -> mpfr:
    """Power of two near 1/x (exact scale factor for equilibration)."""
    if x == 0:
        return mpfr(1)
    e = gmpy2.get_exp(x)  # x = mantissa * 2^e with mantissa in [0.5, 1)
    return gmpy2.exp2(1 - e)


def _zeros(n: int):
    z = mpfr(0)
    return [[z] * n for _ in range(n)]


def _identity(n: int, v=None):
    z = mpfr(0)
    v = mpfr(1) if v is None else v
    m = [[z] * n for _ in range(n)]
    for i in range(n):
        m[i][i] = v
    return m


def _mat_add(a, b, sa=None, sb=None):
    n = len(a)
    sa = mpfr(1) if sa is None else sa
    sb = mpfr(1) if sb is None else sb
    return [[sa * a[i][j] + sb * b[i][j] for j in range(n)] for i in range(n)]


def _mat_mul(a, b):
    n = len(a)
    bt = list(zip(*b))
    out = []
    for i in range(n):
        ai = a[i]
        row = []
        for j in range(n):
            bj = bt[j]
            acc = mpfr(0)
            for k in range(n):
                acc += ai[k] * bj[k]
            row.append(acc)
        out.append(row)
    return out


def _symmetrize(a):
    n = len(a)
    half = mpfr("0.5")
    return [[(a[i][j] + a[j][i]) * half for j in range(n)] for i in range(n)]


def _frob(a, b) -> mpfr:
    acc = mpfr(0)
    for ra, rb in zip(a, b):
        for x, y in zip(ra, rb):
            acc += x * y
    return acc


def _cholesky(a):
    """Lower Cholesky factor, or None if a pivot fails (not PD)."""
    n = len(a)
    L = [[mpfr(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = a[i][j]
            Li, Lj = L[i], L[j]
            for k in range(j):
                s -= Li[k] * Lj[k]
            if i == j:
                if not s > 0:
                    return None
                L[i][i] = gmpy2.sqrt(s)
            else:
                L[i][j] = s / Lj[j]
    return L


def _chol_solve_vec(L, rhs):
    n = len(L)
    y = list(rhs)
    for i in range(n):
        s = y[i]
        Li = L[i]
        for k in range(i):
            s -= Li[k] * y[k]
        y[i] = s / Li[i]
    for i in range(n - 1, -1, -1):
        s = y[i]
        for k in range(i + 1, n):
            s -= L[k][i] * y[k]
        y[i] = s / L[i][i]
    return y


def _chol_inverse(L):
    """Inverse of A = L L' from its Cholesky factor."""
    n = len(L)
    inv = []
    e = [mpfr(0)] * n
    for i in range(n):
        e[i] = mpfr(1)
        inv.append(_chol_solve_vec(L, e))
        e[i] = mpfr(0)
    # symmetrize to kill roundoff asymmetry
    return _symmetrize([[inv[j][i] for j in range(n)] for i in range(n)])


def _lu_factor(a):
    """In-place LU with partial pivoting; returns (LU, piv) or raises
    _Breakdown on a vanishing pivot."""
    n = len(a)
    lu = [row[:] for row in a]
    piv = list(range(n))
    for k in range(n):
        pbest, vbest = k, abs(lu[k][k])
        for r in range(k + 1, n):
            v = abs(lu[r][k])
            if v > vbest:
                pbest, vbest = r, v
        if not vbest > 0:
            raise _Breakdown("singular KKT system")
        if pbest != k:
            lu[k], lu[pbest] = lu[pbest], lu[k]
            piv[k], piv[pbest] = piv[pbest], piv[k]
        pivval = lu[k][k]
        for r in range(k + 1, n):
            f = lu[r][k] / pivval
            lu[r][k] = f
            if f != 0:
                lur, luk = lu[r], lu[k]
                for c in range(k + 1, n):
                    lur[c] -= f * luk[c]
    return lu, piv


def _lu_solve(lu, piv, rhs):
    n = len(lu)
    x = [rhs[piv[i]] for i in range(n)]
    for i in range(n):
        s = x[i]
        lui = lu[i]
        for k in range(i):
            s -= lui[k] * x[k]
        x[i] = s
    for i in range(n - 1, -1, -1):
        s = x[i]
        lui = lu[i]
        for k in range(i + 1, n):
            s -= lui[k] * x[k]
        x[i] = s / lui[i]
    return x


# ---------------------------------------------------------------------------
# Interior-point solver
# ---------------------------------------------------------------------------

_STEP_GRID = None


def _step_grid():
    global _STEP_GRID
    if _STEP_GRID is None:
        grid = [1.0, 0.98, 0.95, 0.9, 0.82, 0.72, 0.6, 0.47, 0.35, 0.25,
                0.17, 0.11, 0.07, 0.045, 0.028, 0.017, 0.01]
        v = 0.01
        while v > 1e-14:
            v *= 0.4
            grid.append(v)
        _STEP_GRID = [mpfr(repr(g)) for g in grid]
    return _STEP_GRID


class _Work:
    """Per-solve numeric data at a fixed precision.

    Rows (constraints) and free-variable columns are equilibrated internally
    by powers of two, which is exact in binary floating point; the returned
    y and free values are mapped back to the original scaling.
    """

    def __init__(self, problem: SdpProblem, prec: int):
        self.prec = prec
        self.sides = [side for _, side in problem.blocks]
        self.nblocks = len(self.sides)
        self.m = problem.num_constraints
        self.nf = problem.num_free
        self.total_side = sum(self.sides)

        # sparse symmetric-full entry lists per (constraint, block):
        # entries[(i, bk)] = [(r, c, v), ...] covering both mirror positions
        self.entries: dict = {}
        self.rows_of: dict = {}
        self.F = [[mpfr(0)] * self.nf for _ in range(self.m)]
        self.b = []
        half = mpfr("0.5")
        for i, (row, rhs) in enumerate(problem.equalities):
            self.b.append(_f2m(rhs))
            for key, val in row.items():
                v = _f2m(val)
                if key[0] == "f":
                    self.F[i][key[1]] = v
                else:
                    _, name, r, c = key
                    bk = problem.block_index[name]
                    lst = self.entries.setdefault((i, bk), [])
                    if r == c:
                        lst.append((r, c, v))
                    else:
                        lst.append((r, c, v * half))
                        lst.append((c, r, v * half))

        # row equilibration (exact powers of two)
        self.row_scale = [mpfr(1)] * self.m
        for i in range(self.m):
            mags = [abs(v) for k in range(self.nblocks) for _, _, v in self.entries.get((i, k), [])]
            mags.extend(abs(v) for v in self.F[i] if v != 0)
            if not mags:
                continue
            lam = _pow2_reciprocal(max(mags))
            if lam != 1:
                self.row_scale[i] = lam
                self.b[i] *= lam
                for k in range(self.nblocks):
                    if (i, k) in self.entries:
                        self.entries[(i, k)] = [(r, c, v * lam) for r, c, v in self.entries[(i, k)]]
                self.F[i] = [v * lam for v in self.F[i]]

        # free-column equilibration (exact powers of two)
        self.col_scale = [mpfr(1)] * self.nf
        for k in range(self.nf):
            mags = [abs(self.F[i][k]) for i in range(self.m) if self.F[i][k] != 0]
            if not mags:
                continue
            kap = _pow2_reciprocal(max(mags))
            if kap != 1:
                self.col_scale[k] = kap
                for i in range(self.m):
                    self.F[i][k] *= kap

        for (i, bk), lst in self.entries.items():
            self.rows_of[(i, bk)] = sorted({r for r, _, _ in lst})

        self.C = [_zeros(side) for side in self.sides]
        self.cf = [mpfr(0)] * self.nf
        for key, val in problem.objective.items():
            v = _f2m(val)
            if key[0] == "f":
                self.cf[key[1]] = v * self.col_scale[key[1]]
            else:
                _, name, r, c = key
                bk = problem.block_index[name]
                if r == c:
                    self.C[bk][r][c] = v
                else:
                    self.C[bk][r][c] = v * half
                    self.C[bk][c][r] = v * half

        self.touching = [
            [i for i in range(self.m) if (i, bk) in self.entries]
            for bk in range(self.nblocks)
        ]

    def apply_A(self, X):
        """A(X): vector of <A_i, X> over blocks."""
        out = [mpfr(0)] * self.m
        for (i, bk), lst in self.entries.items():
            Xb = X[bk]
            acc = mpfr(0)
            for r, c, v in lst:
                acc += v * Xb[r][c]
            out[i] += acc
        return out

    def apply_AT(self, y):
        """Adjoint: list of dense blocks sum_i y_i A_i^b."""
        out = [_zeros(side) for side in self.sides]
        for (i, bk), lst in self.entries.items():
            yi = y[i]
            Ob = out[bk]
            for r, c, v in lst:
                Ob[r][c] += yi * v
        return out


def _constraint_gram(w, include_free: bool):
    """Gram matrix G_ij = sum_b <A_i, A_j> (+ F F' when include_free)."""
    m = w.m
    G = [[mpfr(0)] * m for _ in range(m)]
    for bk in range(w.nblocks):
        idxs = w.touching[bk]
        dense = {}
        for i in idxs:
            side = w.sides[bk]
            D = {}
            for r, c, v in w.entries[(i, bk)]:
                D[(r, c)] = D.get((r, c), mpfr(0)) + v
            dense[i] = D
        for ii, i in enumerate(idxs):
            Di = dense[i]
            for j in idxs[: ii + 1]:
                Dj = dense[j]
                small, big = (Di, Dj) if len(Di) <= len(Dj) else (Dj, Di)
                acc = mpfr(0)
                for key, v in small.items():
                    u = big.get(key)
                    if u is not None:
                        acc += v * u
                G[i][j] += acc
                if i != j:
                    G[j][i] += acc
    if include_free and w.nf:
        for i in range(m):
            Fi = w.F[i]
            for j in range(i + 1):
                Fj = w.F[j]
                acc = mpfr(0)
                for k in range(w.nf):
                    acc += Fi[k] * Fj[k]
                if acc != 0:
                    G[i][j] += acc
                    if j != i:
                        G[j][i] += acc
    return G


def _primal_feasible_start(w, rho_p):
    """X = rho I + least-norm correction onto {A(X) + F p = b} when that
    stays safely positive definite; otherwise the plain cold start.  (If the
    correction direction scales with rho itself, growing rho cannot help, so
    there is exactly one attempt per rho and a single x4 escalation.)"""
    for rho in (rho_p, rho_p * 256):
        X = [_identity(side, rho) for side in w.sides]
        p = [mpfr(0)] * w.nf
        G = _constraint_gram(w, include_free=True)
        LG = _cholesky(G)
        if LG is None:
            return X, p  # dependent rows: cold start
        r = [bi - ai for bi, ai in zip(w.b, w.apply_A(X))]
        lamv = _chol_solve_vec(LG, r)
        ok = True
        for bk in range(w.nblocks):
            Xb = X[bk]
            for i in w.touching[bk]:
                li = lamv[i]
                for rr, cc, v in w.entries[(i, bk)]:
                    Xb[rr][cc] += li * v
            # require a healthy margin, not bare positive definiteness
            side = w.sides[bk]
            shifted = [row[:] for row in Xb]
            margin = rho * mpfr("0.01")
            for t in range(side):
                shifted[t][t] -= margin
            if _cholesky(shifted) is None:
                ok = False
                break
        if ok:
            p = [sum((w.F[i][k] * lamv[i] for i in range(w.m)), mpfr(0)) for k in range(w.nf)]
            return X, p
    return [_identity(side, rho_p) for side in w.sides], [mpfr(0)] * w.nf


def _dual_feasible_start(w, rho_d):
    """y solving min ||sum_i y_i A_i - (C - rho I)|| subject to F' y = c_f,
    so S = C - sum y A starts near rho I; falls back to the cold start when
    the corrected S is not comfortably positive definite."""
    m, nf = w.m, w.nf
    cold = [_identity(side, rho_d) for side in w.sides], [mpfr(0)] * m
    G = _constraint_gram(w, include_free=False)
    if nf:
        kkt = [[mpfr(0)] * (m + nf) for _ in range(m + nf)]
        for i in range(m):
            for j in range(m):
                kkt[i][j] = G[i][j]
            for k in range(nf):
                kkt[i][m + k] = w.F[i][k]
                kkt[m + k][i] = w.F[i][k]
        try:
            LU, piv = _lu_factor(kkt)
        except _Breakdown:
            return cold
    else:
        LG = _cholesky(G)
        if LG is None:
            return cold

    for rho in (rho_d, rho_d * 256):
        rhs = []
        for i in range(m):
            acc = mpfr(0)
            for bk in range(w.nblocks):
                if (i, bk) in w.entries:
                    Cb = w.C[bk]
                    for r, c, v in w.entries[(i, bk)]:
                        acc += v * Cb[r][c]
                    for r, c, v in w.entries[(i, bk)]:
                        if r == c:
                            acc -= v * rho
            rhs.append(acc)
        if nf:
            y = _lu_solve(LU, piv, rhs + list(w.cf))[:m]
        else:
            y = _chol_solve_vec(LG, rhs)
        ATy = w.apply_AT(y)
        S = [_mat_add(w.C[bk], ATy[bk], sb=mpfr(-1)) for bk in range(w.nblocks)]
        ok = True
        for bk in range(w.nblocks):
            side = w.sides[bk]
            shifted = [row[:] for row in S[bk]]
            margin = rho * mpfr("0.01")
            for t in range(side):
                shifted[t][t] -= margin
            if _cholesky(shifted) is None:
                ok = False
                break
        if ok:
            return S, y
    return cold


def _ipm(problem: SdpProblem, settings: SolverSettings, prec: int) -> SdpSolution:
    w = _Work(problem, prec)
    m, nf = w.m, w.nf
    N = mpfr(w.total_side)

    binf = max([abs(x) for x in w.b], default=mpfr(0))
    cmax = mpfr(0)
    for Cb in w.C:
        for row in Cb:
            for x in row:
                cmax = max(cmax, abs(x))
    for x in w.cf:
        cmax = max(cmax, abs(x))

    lam = mpfr(repr(settings.init_scale))
    rho_p = lam * max(mpfr(1), binf)
    rho_d = lam * max(mpfr(1), cmax)
    X, p = _primal_feasible_start(w, rho_p)
    S, y = _dual_feasible_start(w, rho_d)

    gap_tol = mpfr(repr(settings.gap_tol))
    feas_tol = mpfr(repr(settings.feas_tol))
    tau0 = mpfr(repr(settings.step_damping))

    trace = []
    status = "max_iterations"
    it = 0
    stalls = 0

    def dots(u, v):
        acc = mpfr(0)
        for a, b in zip(u, v):
            acc += a * b
        return acc

    for it in range(1, settings.max_iterations + 1):
        mu = sum((_frob(X[bk], S[bk]) for bk in range(w.nblocks)), mpfr(0)) / N

        r_p = [bi - ai for bi, ai in zip(w.b, w.apply_A(X))]
        if nf:
            for i in range(m):
                Fi = w.F[i]
                acc = r_p[i]
                for k in range(nf):
                    acc -= Fi[k] * p[k]
                r_p[i] = acc
        ATy = w.apply_AT(y)
        R_d = [_mat_add(w.C[bk], _mat_add(ATy[bk], S[bk]), sb=mpfr(-1)) for bk in range(w.nblocks)]
        r_f = [w.cf[k] - dots([w.F[i][k] for i in range(m)], y) for k in range(nf)]

        pobj = sum((_frob(w.C[bk], X[bk]) for bk in range(w.nblocks)), mpfr(0)) + dots(w.cf, p)
        dobj = dots(w.b, y)
        gap = pobj - dobj
        rel_gap = abs(gap) / (1 + max(abs(pobj), abs(dobj)))
        rp_inf = max([abs(v) for v in r_p], default=mpfr(0))
        rd_inf = mpfr(0)
        for Rb in R_d:
            for row in Rb:
                for v in row:
                    rd_inf = max(rd_inf, abs(v))
        rf_inf = max([abs(v) for v in r_f], default=mpfr(0))

        trace.append(
            {
                "iter": it,
                "mu": mu,
                "gap": gap,
                "rel_gap": rel_gap,
                "primal_obj": pobj,
                "dual_obj": dobj,
                "rp_inf": rp_inf,
                "rd_inf": rd_inf,
                "rf_inf": rf_inf,
                "feasible": bool(
                    rp_inf <= (1 + binf) * mpfr(10) ** (-10)
                    and rd_inf <= (1 + cmax) * mpfr(10) ** (-10)
                ),
            }
        )

        if (
            rel_gap <= gap_tol
            and rp_inf <= feas_tol * (1 + binf)
            and rd_inf <= feas_tol * (1 + cmax)
            and rf_inf <= feas_tol * (1 + cmax)
        ):
            status = "optimal"
            break

        # crude primal-infeasibility flag: dual objective running away while
        # the primal residual refuses to move
        if dobj > mpfr(10) ** 12 * (1 + abs(pobj)) and rp_inf > mpfr(1000) * feas_tol * (1 + binf):
            status = "infeasible"
            break

        # factor S blocks, form S^{-1}
        Sinv = []
        for bk in range(w.nblocks):
            L = _cholesky(S[bk])
            if L is None:
                raise _Breakdown(f"S block {bk} lost positive definiteness")
            Sinv.append(_chol_inverse(L))

        # Schur complement B_ij = sum_b tr(A_i X A_j S^{-1}) via
        # W_i = S^{-1} A_i X per block
        B = [[mpfr(0)] * m for _ in range(m)]
        W_cache: dict = {}
        for bk in range(w.nblocks):
            idxs = w.touching[bk]
            Xb, Vb = X[bk], Sinv[bk]
            side = w.sides[bk]
            for i in idxs:
                lst = w.entries[(i, bk)]
                rows = w.rows_of[(i, bk)]
                AX = {r: [mpfr(0)] * side for r in rows}
                for r, c, v in lst:
                    Xc = Xb[c]
                    AXr = AX[r]
                    for t in range(side):
                        AXr[t] += v * Xc[t]
                W = []
                for u in range(side):
                    Vu = Vb[u]
                    rowW = [mpfr(0)] * side
                    for r in rows:
                        vur = Vu[r]
                        AXr = AX[r]
                        for t in range(side):
                            rowW[t] += vur * AXr[t]
                    W.append(rowW)
                W_cache[(i, bk)] = W
                for j in idxs:
                    if j > i:
                        continue
                    acc = mpfr(0)
                    for r, c, v in w.entries[(j, bk)]:
                        acc += v * W[c][r]
                    B[i][j] += acc
        for i in range(m):
            for j in range(i + 1, m):
                B[i][j] = B[j][i]

        # The augmented system [[B, F], [F', 0]] is what is nonsingular here
        # (B alone may be singular when constraint block-parts are parallel
        # and differ only through free-variable couplings), so factor the
        # whole KKT matrix when free variables are present.
        if nf:
            kkt = [[mpfr(0)] * (m + nf) for _ in range(m + nf)]
            for i in range(m):
                row = kkt[i]
                Bi = B[i]
                for j in range(m):
                    row[j] = Bi[j]
                Fi = w.F[i]
                for k in range(nf):
                    row[m + k] = Fi[k]
                    kkt[m + k][i] = Fi[k]
            LU, piv = _lu_factor(kkt)
        else:
            LB = _cholesky(B)
            if LB is None:
                raise _Breakdown("Schur complement lost positive definiteness")

        def solve_kkt(h):
            if not nf:
                return _chol_solve_vec(LB, h), []
            sol = _lu_solve(LU, piv, list(h) + list(r_f))
            return sol[:m], sol[m:]

        def directions(Rc):
            # h_i = r_p,i - tr(A_i (Rc - X R_d) S^{-1})
            G = []
            for bk in range(w.nblocks):
                G.append(
                    _mat_mul(_mat_add(Rc[bk], _mat_mul(X[bk], R_d[bk]), sb=mpfr(-1)), Sinv[bk])
                )
            h = list(r_p)
            for (i, bk), lst in w.entries.items():
                Gb = G[bk]
                acc = mpfr(0)
                for r, c, v in lst:
                    acc += v * Gb[c][r]
                h[i] -= acc
            dy, dp = solve_kkt(h)
            dS = []
            dX = []
            for bk in range(w.nblocks):
                side = w.sides[bk]
                dSb = [row[:] for row in R_d[bk]]
                for i in w.touching[bk]:
                    yi = dy[i]
                    for r, c, v in w.entries[(i, bk)]:
                        dSb[r][c] -= yi * v
                dS.append(dSb)
                dXb = _mat_mul(_mat_add(Rc[bk], _mat_mul(X[bk], dSb), sb=mpfr(-1)), Sinv[bk])
                dX.append(_symmetrize(dXb))
            return dX, dy, dp, dS

        def maxstep(base, delta):
            for alpha in _step_grid():
                ok = True
                for bk in range(w.nblocks):
                    trial = _mat_add(base[bk], delta[bk], sb=alpha)
                    if _cholesky(trial) is None:
                        ok = False
                        break
                if ok:
                    return alpha
            return mpfr(0)

        # predictor
        Rc_aff = [_mat_mul(X[bk], S[bk]) for bk in range(w.nblocks)]
        for bk in range(w.nblocks):
            Rc_aff[bk] = [[-v for v in row] for row in Rc_aff[bk]]
        dXa, dya, dpa, dSa = directions(Rc_aff)
        ap = maxstep(X, dXa)
        ad = maxstep(S, dSa)
        mu_aff = mpfr(0)
        for bk in range(w.nblocks):
            Xt = _mat_add(X[bk], dXa[bk], sb=ap)
            St = _mat_add(S[bk], dSa[bk], sb=ad)
            mu_aff += _frob(Xt, St)
        mu_aff /= N
        sigma = (mu_aff / mu) ** 3
        sigma = min(max(sigma, mpfr(10) ** (-40)), mpfr(1))
        # keep some centering while the iterate is infeasible: pure Mehrotra
        # greed stalls the residual contraction on ill-scaled instances
        if rp_inf > (1 + binf) * feas_tol * 100 or rd_inf > (1 + cmax) * feas_tol * 100:
            sigma = max(sigma, mpfr("0.2"))

        # corrector
        Rc = []
        smu = sigma * mu
        for bk in range(w.nblocks):
            XSb = _mat_mul(X[bk], S[bk])
            corr = _mat_mul(dXa[bk], dSa[bk])
            side = w.sides[bk]
            Rb = [[-XSb[i][j] - corr[i][j] for j in range(side)] for i in range(side)]
            for i in range(side):
                Rb[i][i] += smu
            Rc.append(Rb)
        dX, dy, dp, dS = directions(Rc)

        tau = tau0 if mu / (1 + abs(pobj)) > mpfr(10) ** (-8) else mpfr("0.995")
        ap = min(mpfr(1), tau * maxstep(X, dX))
        ad = min(mpfr(1), tau * maxstep(S, dS))
        if ap < mpfr(10) ** (-13) and ad < mpfr(10) ** (-13):
            raise _Breakdown("step lengths collapsed")

        # While infeasible, move primal and dual in lockstep; decoupled steps
        # let the primal objective run away along a descent ray long before
        # feasibility is established.
        infeasible_now = rp_inf > (1 + binf) * feas_tol * 100 or rd_inf > (1 + cmax) * feas_tol * 100
        if infeasible_now:
            ap = ad = min(ap, ad)

        # Safeguard: once the iterate is essentially feasible, keep the
        # complementarity trace monotone (during the infeasible phase the
        # method must be free to trade mu for feasibility progress).  A
        # degenerate optimum can pin mu at a floor; stop after repeated
        # failed shrinks instead of burning the iteration budget.
        feas_now = rp_inf <= (1 + binf) * mpfr(10) ** (-10) and rd_inf <= (1 + cmax) * mpfr(10) ** (-10)
        if feas_now:
            shrunk = False
            for _ in range(40):
                mu_new = mpfr(0)
                for bk in range(w.nblocks):
                    Xt = _mat_add(X[bk], dX[bk], sb=ap)
                    St = _mat_add(S[bk], dS[bk], sb=ad)
                    mu_new += _frob(Xt, St)
                mu_new /= N
                if mu_new <= mu:
                    shrunk = True
                    break
                ap *= mpfr("0.7")
                ad *= mpfr("0.7")
            if not shrunk:
                stalls += 1
                if stalls >= 3:
                    status = "max_iterations"
                    break
            else:
                stalls = 0

        for bk in range(w.nblocks):
            X[bk] = _mat_add(X[bk], dX[bk], sb=ap)
            S[bk] = _mat_add(S[bk], dS[bk], sb=ad)
        y = [yi + ad * di for yi, di in zip(y, dy)]
        p = [pi + ap * di for pi, di in zip(p, dp)]
        trace[-1]["alpha_p"] = ap
        trace[-1]["alpha_d"] = ad
        trace[-1]["sigma"] = sigma

    return SdpSolution(
        block_values={name: X[bk] for bk, (name, _) in enumerate(problem.blocks)},
        free_values=[w.col_scale[k] * p[k] for k in range(nf)],
        y=[w.row_scale[i] * y[i] for i in range(m)],
        dual_blocks={name: S[bk] for bk, (name, _) in enumerate(problem.blocks)},
        objective_primal=trace[-1]["primal_obj"] if trace else mpfr(0),
        objective_dual=trace[-1]["dual_obj"] if trace else mpfr(0),
        gap=trace[-1]["gap"] if trace else mpfr(0),
        iterations=it,
        status=status,
        precision=prec,
        trace=trace,
    )


def solve(problem: SdpProblem, settings: SolverSettings | None = None) -> SdpSolution:
    """Solve the problem; deterministic for fixed inputs.

    Raises nothing for MaxIterations/Infeasible (reported via status); on
    numerical breakdown retries at doubled precision up to
    settings.max_precision, then reports status 'numerical_breakdown'.
    """
    settings = settings or SolverSettings()
    if not problem.blocks:
        raise SdpError("problem must declare at least one PSD block")
    if not problem.equalities:
        raise SdpError("problem must have at least one equality")

    prec = settings.precision
    last_err = None
    while prec <= settings.max_precision:
        with gmpy2.context(precision=prec):
            try:
                sol = _ipm(problem, settings, prec)
            except _Breakdown as e:
                last_err = e
                prec *= 2
                continue
        sol.residuals = recompute_residuals(problem, sol)
        return sol
    return SdpSolution(
        block_values={},
        free_values=[],
        y=[],
        dual_blocks={},
        objective_primal=None,
        objective_dual=None,
        gap=None,
        iterations=0,
        status="numerical_breakdown",
        precision=prec // 2,
        trace=[{"error": str(last_err)}],
    )


def recompute_residuals(problem: SdpProblem, solution: SdpSolution) -> dict:
    """Recompute primal/dual equality residuals from the returned matrices
    (never copied from solver internals)."""
    if solution.status == "numerical_breakdown" or not solution.block_values:
        return {"status": solution.status}
    for name, side in problem.blocks:
        if name not in solution.block_values:
            raise SdpError(f"solution missing block {name!r}")
        if len(solution.block_values[name]) != side:
            raise SdpError(f"solution block {name!r} has wrong side")
    if len(solution.free_values) != problem.num_free:
        raise SdpError("solution has wrong number of free values")

    with gmpy2.context(precision=solution.precision):
        per_constraint = []
        for row, rhs in problem.equalities:
            acc = -_f2m(rhs)
            for key, val in row.items():
                v = _f2m(val)
                if key[0] == "f":
                    acc += v * solution.free_values[key[1]]
                else:
                    _, name, r, c = key
                    acc += v * solution.block_values[name][r][c]
            per_constraint.append(acc)
        rp_inf = max([abs(v) for v in per_constraint], default=mpfr(0))
        rp_two = gmpy2.sqrt(sum((v * v for v in per_constraint), mpfr(0)))

        rd_inf = mpfr(0)
        if solution.y and solution.dual_blocks:
            # dual residual: C - sum_i y_i A_i - S per block
            half = mpfr("0.5")
            Cb = {name: [[mpfr(0)] * side for _ in range(side)] for name, side in problem.blocks}
            for key, val in problem.objective.items():
                if key[0] == "b":
                    _, name, r, c = key
                    v = _f2m(val)
                    if r == c:
                        Cb[name][r][c] += v
                    else:
                        Cb[name][r][c] += v * half
                        Cb[name][c][r] += v * half
            for i, (row, _rhs) in enumerate(problem.equalities):
                yi = solution.y[i]
                for key, val in row.items():
                    if key[0] == "b":
                        _, name, r, c = key
                        v = _f2m(val)
                        if r == c:
                            Cb[name][r][c] -= yi * v
                        else:
                            Cb[name][r][c] -= yi * v * half
                            Cb[name][c][r] -= yi * v * half
            for name, side in problem.blocks:
                Sb = solution.dual_blocks[name]
                for r in range(side):
                    for c in range(side):
                        rd_inf = max(rd_inf, abs(Cb[name][r][c] - Sb[r][c]))

        return {
            "primal_constraint_residuals": per_constraint,
            "primal_inf_norm": rp_inf,
            "primal_two_norm": rp_two,
            "dual_inf_norm": rd_inf,
            "status": solution.status,
        }


# ---------------------------------------------------------------------------
# SDPA sparse export
# ---------------------------------------------------------------------------


def write_sdpa_sparse(problem: SdpProblem, path: str) -> None:
    """Write the problem in SDPA sparse format (.dat-s) for use with external
    high-precision solvers as an oracle.

    Layout (one constraint per stanza of triplet lines):
      line 1: m (number of constraints)
      line 2: nblocks
      line 3: block sides
      line 4: right-hand sides b_i
      then lines '<matno> <block> <i> <j> <value>' with 1-based indices and
      i <= j; matno 0 carries F0 = -C (so the SDPA dual objective equals the
      negated minimum of this problem), matno i carries A_i.

    Free scalar variables are not representable in this format; problems
    carrying them are refused rather than encoded incorrectly.
    """
    if problem.num_free:
        raise SdpError("SDPA sparse format cannot express free scalar variables")
    lines = []
    lines.append(f"{problem.num_constraints}")
    lines.append(f"{len(problem.blocks)}")
    lines.append(" ".join(str(side) for _, side in problem.blocks))
    lines.append(" ".join(_coef_str(rhs) for _, rhs in problem.equalities))

    def emit(matno, row):
        out = []
        for key, val in sorted(row.items(), key=lambda kv: (kv[0][1], kv[0][2], kv[0][3])):
            _, name, i, j = key
            bk = problem.block_index[name] + 1
            out.append(f"{matno} {bk} {i + 1} {j + 1} {_coef_str(val)}")
        return out

    obj_row = {}
    for key, val in problem.objective.items():
        obj_row[key] = -_to_fraction_or_float(val)
    lines.extend(emit(0, obj_row))
    for i, (row, _rhs) in enumerate(problem.equalities, start=1):
        lines.extend(emit(i, row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _to_fraction_or_float(v):
    if isinstance(v, (Fraction, int)):
        return Fraction(v)
    return v


def _coef_str(v) -> str:
    if isinstance(v, (Fraction, int)):
        return repr(float(Fraction(v)))
    return repr(float(v))
