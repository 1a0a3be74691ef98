"""Small dense linear algebra: p-adic elimination and exact rational elimination.

The rational routine works on an integer coefficient matrix and returns a
left inverse as Fractions, so it can be applied to right-hand sides of any
ring-like type (PadicNumber, symbolic polynomials).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from .padic import PadicError, PadicNumber


class SingularSystemError(PadicError):
    pass


def padic_solve(A: Sequence[Sequence[PadicNumber]], b: Sequence[PadicNumber]) -> list[PadicNumber]:
    """Solve a square p-adic system by elimination with minimal-valuation pivots.

    Entries are scaled to integers mod p^K for the forward sweep; back
    substitution runs in PadicNumber so divisions by pivots are charged.
    """
    n = len(A)
    if any(len(row) != n for row in A) or len(b) != n:
        raise ValueError("padic_solve needs a square system")
    entries = [x for row in A for x in row] + list(b)
    p = entries[0].p
    nz = [x for x in entries if not x.is_zero]
    if not nz:
        raise SingularSystemError("zero system")
    shift = -min(x.valuation for x in nz)
    prec_in = min(x.precision for x in entries) + shift
    if prec_in <= 0:
        raise SingularSystemError("no precision left in the system")
    K = prec_in + 8
    mod = p**K

    def enc(x: PadicNumber) -> int:
        return 0 if x.is_zero else x.unit * p ** (x.valuation + shift) % mod

    M = [[enc(x) for x in row] + [enc(bi)] for row, bi in zip(A, b)]
    # per-entry absolute precision of the scaled entries
    P = [[x.precision + shift for x in row] + [bi.precision + shift] for row, bi in zip(A, b)]
    for col in range(n):
        piv, pv = None, K
        for r in range(col, n):
            v = min(_vp(M[r][col], p, K), P[r][col])
            if v < pv and v < P[r][col]:
                piv, pv = r, v
        if piv is None:
            raise SingularSystemError(f"singular at column {col} to working precision")
        M[col], M[piv] = M[piv], M[col]
        P[col], P[piv] = P[piv], P[col]
        pk = p**pv
        u_inv = pow(M[col][col] // pk, -1, mod)
        prow, pprec = M[col], P[col]
        vy = [_vp(y, p, K) for y in prow]
        for r in range(col + 1, n):
            if M[r][col] == 0 and P[r][col] >= K:
                continue
            f = (M[r][col] // pk) * u_inv % mod
            vf = _vp(f, p, K)
            # f = a / pivot: error from a and from the pivot digits
            pf = min(P[r][col], pprec[col] + _vp(M[r][col], p, K) - pv) - pv
            M[r] = [(x - f * y) % mod for x, y in zip(M[r], prow)]
            P[r] = [min(pr, pf + vyc, pp + vf) for pr, vyc, pp in zip(P[r], vy, pprec)]
            P[r][col] = K
            M[r][col] = 0
    # back substitution in PadicNumber; the common scaling cancels
    dec = [[PadicNumber.from_scaled(p, x, 0, min(pr, K)) for x, pr in zip(row, prow)]
           for row, prow in zip(M, P)]
    out: list[PadicNumber] = [None] * n  # type: ignore[list-item]
    for i in range(n - 1, -1, -1):
        acc = dec[i][n]
        for j in range(i + 1, n):
            acc = acc - dec[i][j] * out[j]
        out[i] = acc / dec[i][i]
    return out


def _vp(x: int, p: int, cap: int) -> int:
    if x == 0:
        return cap
    v = 0
    while x % p == 0 and v < cap:
        x //= p
        v += 1
    return v


@dataclass
class RationalSolver:
    """Exact elimination of an integer system ``M x = b`` with arbitrary-typed b.

    ``solution_rows[j]`` expresses unknown j as a rational combination of the
    right-hand sides; ``consistency_rows`` are combinations that must vanish.
    """

    n_unknowns: int
    rank: int
    pivots: list[int]
    solution_rows: list[list[Fraction]]
    consistency_rows: list[list[Fraction]]

    @classmethod
    def build(cls, M: Sequence[Sequence[int]]) -> "RationalSolver":
        rows = len(M)
        cols = len(M[0]) if rows else 0
        aug = [[Fraction(x) for x in M[r]] + [Fraction(int(r == i)) for i in range(rows)]
               for r in range(rows)]
        pivots = []
        r = 0
        for c in range(cols):
            piv = next((i for i in range(r, rows) if aug[i][c] != 0), None)
            if piv is None:
                continue
            aug[r], aug[piv] = aug[piv], aug[r]
            inv = 1 / aug[r][c]
            aug[r] = [x * inv for x in aug[r]]
            for i in range(rows):
                if i != r and aug[i][c] != 0:
                    f = aug[i][c]
                    aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
            pivots.append(c)
            r += 1
            if r == rows:
                break
        sol = [[Fraction(0)] * rows for _ in range(cols)]
        for i, c in enumerate(pivots):
            sol[c] = aug[i][cols:]
        cons = [aug[i][cols:] for i in range(len(pivots), rows)]
        return cls(cols, len(pivots), pivots, sol, cons)

    @property
    def unique(self) -> bool:
        return self.rank == self.n_unknowns

    def free_unknowns(self) -> list[int]:
        piv = set(self.pivots)
        return [j for j in range(self.n_unknowns) if j not in piv]

    def apply(self, b: Sequence[Any], zero) -> list[Any]:
        return [_combine(row, b, zero) for row in self.solution_rows]

    def residuals(self, b: Sequence[Any], zero) -> list[Any]:
        return [_combine(row, b, zero) for row in self.consistency_rows]


def _combine(row: Sequence[Fraction], b: Sequence[Any], zero):
    acc = zero
    for c, x in zip(row, b):
        if c:
            acc = acc + x * c
    return acc
