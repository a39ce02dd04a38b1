"""Exact phase-1 simplex over the rationals with Bland's anti-cycling rule.

Solves feasibility of A x = b, x >= 0 in Fraction arithmetic.  On success it
returns a basic feasible point; on failure it returns the Farkas dual read
off the optimal phase-1 tableau, a vector y with yT A <= 0 entrywise and
yT b > 0, which is an exact certificate that no feasible x exists.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .linalg import as_fraction


@dataclass(frozen=True)
class Phase1Result:
    """Outcome of the feasibility run.

    Exactly one of solution / dual is set: solution when feasible, the
    Farkas certificate when not.  objective is the final phase-1 value
    (the minimal total artificial mass), zero precisely in the feasible
    case.
    """

    feasible: bool
    solution: tuple[Fraction, ...] | None
    dual: tuple[Fraction, ...] | None
    objective: Fraction


def solve_equalities(rows: Sequence[Sequence], rhs: Sequence) -> Phase1Result:
    """Find x >= 0 with A x = b, or a Farkas dual proving there is none."""
    k = len(rows)
    if k == 0:
        raise ValueError("no constraints")
    a = [[as_fraction(x) for x in row] for row in rows]
    n = len(a[0])
    if any(len(row) != n for row in a):
        raise ValueError("ragged constraint matrix")
    b = [as_fraction(x) for x in rhs]
    if len(b) != k:
        raise ValueError("rhs length does not match constraint count")

    flipped = [False] * k
    for i in range(k):
        if b[i] < 0:
            a[i] = [-x for x in a[i]]
            b[i] = -b[i]
            flipped[i] = True

    zero, one = Fraction(0), Fraction(1)
    # columns: n real, k artificial, then the rhs
    tab = [a[i] + [one if j == i else zero for j in range(k)] + [b[i]]
           for i in range(k)]
    basis = list(range(n, n + k))
    total = n + k
    retired = [False] * k          # artificials may not re-enter once out

    while True:
        cost_rows = [r for r in range(k) if basis[r] >= n]
        entering = -1
        for j in range(total):
            if j >= n and (retired[j - n] or j in basis):
                continue
            if j < n and j in basis:
                continue
            rc = (one if j >= n else zero) - sum(tab[r][j] for r in cost_rows)
            if rc < 0:
                entering = j       # Bland: lowest index wins
                break
        if entering < 0:
            break
        leaving = -1
        best = None
        for r in range(k):
            t = tab[r][entering]
            if t > 0:
                ratio = tab[r][total] / t
                if best is None or ratio < best or (
                        ratio == best and basis[r] < basis[leaving]):
                    best, leaving = ratio, r
        if leaving < 0:
            raise ArithmeticError("phase-1 objective unbounded; inconsistent tableau")
        if basis[leaving] >= n:
            retired[basis[leaving] - n] = True
        _pivot(tab, leaving, entering)
        basis[leaving] = entering

    cost_rows = [r for r in range(k) if basis[r] >= n]
    objective = sum((tab[r][total] for r in cost_rows), zero)
    if objective == 0:
        x = [zero] * n
        for r in range(k):
            if basis[r] < n:
                x[basis[r]] = tab[r][total]
        return Phase1Result(True, tuple(x), None, objective)
    dual = []
    for i in range(k):
        y_i = sum((tab[r][n + i] for r in cost_rows), zero)
        dual.append(-y_i if flipped[i] else y_i)
    return Phase1Result(False, None, tuple(dual), objective)


def _pivot(tab: list[list[Fraction]], row: int, col: int):
    piv = tab[row][col]
    tab[row] = [x / piv for x in tab[row]]
    prow = tab[row]
    for r, other in enumerate(tab):
        if r == row:
            continue
        f = other[col]
        if f:
            tab[r] = [x - f * y for x, y in zip(other, prow)]
            tab[r][col] = Fraction(0)
