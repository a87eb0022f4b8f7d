"""Finite truncations of the analytic-rigidity operator, in exact arithmetic.

The operator acts on the even endpoint Taylor data of a candidate analytic
profile; row h and column k = 2j carry the integer C(k, 2h) - C(k, 2h-1).
The truncations are upper triangular with diagonal 1 - 2h, hence injective,
which is the finite shadow of the rigidity statement.  Injectivity of every
truncation does not by itself reprove the infinite-dimensional theorem; the
module checks exactly the finite claims and nothing more.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

MAX_N = 256


@dataclass(frozen=True)
class RigidityMatrix:
    """Truncated operator: rows h = 1..N, columns k = 2, 4, ..., 2N."""

    n: int
    entries: tuple  # entries[h-1][j-1] = C(2j, 2h) - C(2j, 2h-1), exact ints

    def entry(self, h: int, k: int) -> int:
        if k % 2 != 0:
            raise ValueError("column index k must be even")
        return self.entries[h - 1][k // 2 - 1]

    def row(self, h: int) -> tuple:
        return self.entries[h - 1]


def rigidity_matrix(N: int) -> RigidityMatrix:
    if not 1 <= N <= MAX_N:
        raise ValueError(f"N must be in [1, {MAX_N}]")
    rows = []
    for h in range(1, N + 1):
        rows.append(tuple(math.comb(2 * j, 2 * h) - math.comb(2 * j, 2 * h - 1)
                          for j in range(1, N + 1)))
    return RigidityMatrix(N, tuple(rows))


@dataclass
class StructureReport:
    n: int
    upper_triangular: bool
    diagonal_ok: bool           # entry(h, 2h) == 1 - 2h
    kernel_trivial: bool
    kernel_vector: Optional[List[Fraction]]  # a nonzero kernel element, if any

    @property
    def passed(self) -> bool:
        return self.upper_triangular and self.diagonal_ok and self.kernel_trivial


def check_structure(m: RigidityMatrix) -> StructureReport:
    """Verify triangularity, the diagonal, and kernel triviality exactly."""
    upper = all(m.entries[h - 1][j - 1] == 0
                for h in range(1, m.n + 1) for j in range(1, h))
    diag = all(m.entries[h - 1][h - 1] == 1 - 2 * h for h in range(1, m.n + 1))

    zero_diag = [h for h in range(1, m.n + 1) if m.entries[h - 1][h - 1] == 0]
    if upper and not zero_diag:
        # back-substitution of Mx = 0 over the rationals gives x = 0
        x = [Fraction(0)] * m.n
        for h in range(m.n, 0, -1):
            s = sum((Fraction(m.entries[h - 1][j - 1]) * x[j - 1]
                     for j in range(h + 1, m.n + 1)), Fraction(0))
            x[h - 1] = -s / Fraction(m.entries[h - 1][h - 1])
        trivial = all(v == 0 for v in x)
        return StructureReport(m.n, upper, diag, trivial, None)

    if upper and zero_diag:
        # free variable at the first zero pivot yields a nonzero kernel vector
        j0 = zero_diag[0]
        x = [Fraction(0)] * m.n
        x[j0 - 1] = Fraction(1)
        for h in range(j0 - 1, 0, -1):
            s = sum((Fraction(m.entries[h - 1][j - 1]) * x[j - 1]
                     for j in range(h + 1, m.n + 1)), Fraction(0))
            x[h - 1] = -s / Fraction(m.entries[h - 1][h - 1])
        residual = [sum(Fraction(m.entries[h - 1][j - 1]) * x[j - 1]
                        for j in range(1, m.n + 1)) for h in range(1, m.n + 1)]
        ok = all(r == 0 for r in residual)
        return StructureReport(m.n, upper, diag, not ok, x if ok else None)

    return StructureReport(m.n, upper, diag, False, None)


def with_zeroed_diagonal(m: RigidityMatrix, h: int) -> RigidityMatrix:
    """Copy of m with the (h, 2h) entry zeroed; constructed counterexample."""
    rows = [list(r) for r in m.entries]
    rows[h - 1][h - 1] = 0
    return RigidityMatrix(m.n, tuple(tuple(r) for r in rows))


def truncated_coefficients(f_profile, N: int) -> List[Fraction]:
    """Vector a_k = f^(k)(1)/(2 k!) for k = 2, 4, ..., 2N from endpoint jets.

    Values come from float jets; entries below rounding scale are snapped to
    exact zero so the all-zero consistency check stays meaningful.
    """
    from .jets import MAX_ORDER, eval_jet
    order = min(2 * N, MAX_ORDER)
    jet = eval_jet(f_profile.fn, 1.0, order)
    out = []
    for k in range(2, order + 1, 2):
        val = jet.coeffs[k] / (2.0 * math.factorial(k))
        out.append(Fraction(0) if abs(val) < 1e-12 else Fraction(val))
    return out


def apply_matrix(m: RigidityMatrix, vector: List[Fraction]) -> List[Fraction]:
    if len(vector) != m.n:
        raise ValueError(f"vector length {len(vector)} != {m.n}")
    return [sum(Fraction(m.entries[h - 1][j - 1]) * vector[j - 1]
                for j in range(1, m.n + 1)) for h in range(1, m.n + 1)]


def export_csv(m: RigidityMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["h"] + [str(2 * j) for j in range(1, m.n + 1)])
        for h in range(1, m.n + 1):
            w.writerow([h] + [str(v) for v in m.entries[h - 1]])
