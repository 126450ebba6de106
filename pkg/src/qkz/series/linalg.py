"""Exact rational linear solves for coefficient matching."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class InconsistentSystem(ValueError):
    """No exact solution matches every supplied equation."""


class UnderdeterminedSystem(ValueError):
    """The equations do not pin down every unknown."""


@dataclass(frozen=True)
class SolveResult:
    solution: tuple
    rank: int
    surplus: int  # equations beyond the rank, all verified


def solve_linear(equations, n_unknowns, allow_free=False):
    """Solve ``sum_j row[j] x_j = rhs`` for a stream of ``(row, rhs)`` pairs.

    Gauss-Jordan elimination over the rationals, one equation at a time.
    Redundant equations are checked and counted in ``surplus``.  If
    ``allow_free`` is set, free unknowns are set to zero instead of raising.
    """
    pivots = {}  # column -> (row, rhs), row has 1 at column and 0 at other pivot columns
    surplus = 0
    for row, rhs in equations:
        row = [Fraction(c) for c in row]
        if len(row) != n_unknowns:
            raise ValueError("row length does not match number of unknowns")
        rhs = Fraction(rhs)
        for col, (prow, prhs) in pivots.items():
            c = row[col]
            if c:
                row = [a - c * b for a, b in zip(row, prow)]
                rhs -= c * prhs
        lead = next((j for j, c in enumerate(row) if c), None)
        if lead is None:
            if rhs:
                raise InconsistentSystem("equations are inconsistent")
            surplus += 1
            continue
        inv = 1 / row[lead]
        row = [c * inv for c in row]
        rhs *= inv
        for col, (prow, prhs) in list(pivots.items()):
            c = prow[lead]
            if c:
                pivots[col] = ([a - c * b for a, b in zip(prow, row)], prhs - c * rhs)
        pivots[lead] = (row, rhs)
    rank = len(pivots)
    if rank < n_unknowns and not allow_free:
        raise UnderdeterminedSystem(f"rank {rank} < {n_unknowns} unknowns")
    x = [Fraction(0)] * n_unknowns
    for col, (_, rhs) in pivots.items():
        x[col] = rhs
    return SolveResult(tuple(x), rank, surplus)


def nullspace(rows, n_unknowns):
    """Basis of the rational nullspace of the given rows."""
    pivots = {}
    for row in rows:
        row = [Fraction(c) for c in row]
        for col, prow in pivots.items():
            c = row[col]
            if c:
                row = [a - c * b for a, b in zip(row, prow)]
        lead = next((j for j, c in enumerate(row) if c), None)
        if lead is None:
            continue
        inv = 1 / row[lead]
        row = [c * inv for c in row]
        for col, prow in list(pivots.items()):
            c = prow[lead]
            if c:
                pivots[col] = [a - c * b for a, b in zip(prow, row)]
        pivots[lead] = row
    free = [j for j in range(n_unknowns) if j not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n_unknowns
        v[f] = Fraction(1)
        for col, prow in pivots.items():
            v[col] = -prow[f]
        basis.append(tuple(v))
    return basis


def solve_many(matrix, rhs_rows, n_unknowns):
    """Solve ``matrix @ X = rhs`` for several right-hand sides at once.

    ``rhs_rows[i]`` lists the right-hand sides of equation ``i``.  Returns
    ``X`` as a list of rows (one per unknown).  Raises on inconsistency or
    rank deficiency.
    """
    width = len(rhs_rows[0]) if rhs_rows else 0
    pivots = {}
    for row, rhs in zip(matrix, rhs_rows):
        aug = [Fraction(c) for c in row] + [Fraction(c) for c in rhs]
        for col, prow in pivots.items():
            c = aug[col]
            if c:
                aug = [a - c * b for a, b in zip(aug, prow)]
        lead = next((j for j in range(n_unknowns) if aug[j]), None)
        if lead is None:
            if any(aug[n_unknowns:]):
                raise InconsistentSystem("equations are inconsistent")
            continue
        inv = 1 / aug[lead]
        aug = [c * inv for c in aug]
        for col, prow in list(pivots.items()):
            c = prow[lead]
            if c:
                pivots[col] = [a - c * b for a, b in zip(prow, aug)]
        pivots[lead] = aug
    if len(pivots) < n_unknowns:
        raise UnderdeterminedSystem(f"rank {len(pivots)} < {n_unknowns} unknowns")
    return [pivots[j][n_unknowns:n_unknowns + width] for j in range(n_unknowns)]
