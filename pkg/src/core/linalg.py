"""
Exact symbolic linear algebra over the expression field.

Generic rank is computed by fraction-free (Bareiss) elimination with full
pivoting. Pivots are chosen deterministically: nonzero rational literals
first, then the smallest expression, then the lowest (row, col).
"""

import random
from typing import Dict, List, Optional, Sequence

import sympy as sp

from . import kernel
from .exceptions import SingularSubmatrix
from .models import RankCertificate, SymMatrix
from ..utils.logger import get_logger

logger = get_logger(__name__)


def _pivot_key(entry: sp.Expr, row: int, col: int):
    literal = 0 if entry.is_Rational and entry != 0 else 1
    return (literal, sp.count_ops(entry), row, col)


def generic_rank(m: SymMatrix) -> RankCertificate:
    """Rank over the expression field with the pivots it relied on."""
    work = [[kernel.normalize(e) for e in row] for row in m.to_rows()]
    active_rows = list(range(m.rows))
    active_cols = list(range(m.cols))
    previous = sp.S.One
    pivot_rows: List[int] = []
    pivot_cols: List[int] = []
    side_conditions: List[sp.Expr] = []

    while active_rows and active_cols:
        candidates = [
            (_pivot_key(work[r][c], r, c), r, c)
            for r in active_rows for c in active_cols
            if work[r][c] != 0
        ]
        if not candidates:
            break
        _, r, c = min(candidates)
        pivot = work[r][c]
        if not pivot.is_Rational:
            side_conditions.extend(kernel.nonzero_factors(pivot))
        pivot_rows.append(r)
        pivot_cols.append(c)
        active_rows.remove(r)
        active_cols.remove(c)
        for i in active_rows:
            for j in active_cols:
                work[i][j] = kernel.normalize((pivot * work[i][j] - work[i][c] * work[r][j]) / previous)
        previous = pivot

    logger.debug(f"generic_rank {m.rows}x{m.cols}: rank={len(pivot_rows)} pivots={list(zip(pivot_rows, pivot_cols))}")
    return RankCertificate(
        rank=len(pivot_rows),
        pivot_rows=pivot_rows,
        pivot_cols=pivot_cols,
        side_conditions=_unique(side_conditions),
    )


def _unique(expressions: Sequence[sp.Expr]) -> List[sp.Expr]:
    seen = {}
    for e in expressions:
        seen.setdefault(kernel.print_expression(e), e)
    return list(seen.values())


def invert_submatrix(m: SymMatrix, rows: Sequence[int], cols: Sequence[int]) -> SymMatrix:
    """
    Inverse of the square submatrix selected by ``rows`` and ``cols``.

    The result is indexed by (position in cols, position in rows).
    """
    if len(rows) != len(cols):
        raise SingularSubmatrix("Selected submatrix is not square")
    size = len(rows)
    if size == 0:
        return SymMatrix(rows=0, cols=0, entries=[])
    sub = sp.Matrix(size, size, lambda i, j: m[rows[i], cols[j]])
    det = kernel.normalize(sub.det(method="bareiss"))
    if det == 0:
        raise SingularSubmatrix()
    adjugate = sub.adjugate()
    inverse = [[kernel.normalize(adjugate[i, j] / det) for j in range(size)] for i in range(size)]
    return SymMatrix.from_rows(inverse)


def null_space_basis(m: SymMatrix, cert: RankCertificate) -> List[List[sp.Expr]]:
    """
    Right null vectors, one per non-pivot column mu.

    Component mu is 1, other non-pivot components are 0 and pivot components
    are completed through the inverse pivot block.
    """
    free_cols = [c for c in range(m.cols) if c not in cert.pivot_cols]
    inverse = invert_submatrix(m, cert.pivot_rows, cert.pivot_cols) if cert.rank else None
    basis = []
    for mu in free_cols:
        vector = [sp.S.Zero] * m.cols
        vector[mu] = sp.S.One
        for i, col in enumerate(cert.pivot_cols):
            total = sum(
                (inverse[i, j] * m[row, mu] for j, row in enumerate(cert.pivot_rows)),
                sp.S.Zero,
            )
            vector[col] = kernel.normalize(-total)
        basis.append(vector)
    return basis


def left_null_space_basis(m: SymMatrix, cert: RankCertificate) -> List[List[sp.Expr]]:
    """Vectors b with b.m = 0, one per non-pivot row."""
    return null_space_basis(m.transpose(), cert.transposed())


def matrix_product(a: SymMatrix, b: SymMatrix) -> SymMatrix:
    rows = [
        [kernel.normalize(sum((a[i, k] * b[k, j] for k in range(a.cols)), sp.S.Zero)) for j in range(b.cols)]
        for i in range(a.rows)
    ]
    return SymMatrix.from_rows(rows, cols=b.cols)


def submatrix(m: SymMatrix, rows: Sequence[int], cols: Sequence[int]) -> SymMatrix:
    return SymMatrix.from_rows([[m[r, c] for c in cols] for r in rows], cols=len(cols))


def evaluate_matrix(m: SymMatrix, point: Dict[sp.Basic, sp.Expr], digits: int = 50) -> sp.Matrix:
    return sp.Matrix(m.rows, m.cols, lambda i, j: kernel.evaluate(m[i, j], point, digits))


def numeric_rank(
    m: SymMatrix,
    point: Dict[sp.Basic, sp.Expr],
    digits: int = 50,
    tolerance: float = 1e-30,
) -> int:
    """Rank of m evaluated at a point; exact for rational values."""
    if m.rows == 0 or m.cols == 0:
        return 0
    values = evaluate_matrix(m, point, digits)
    return values.rank(iszerofunc=lambda x: kernel.numerically_zero(sp.sympify(x), tolerance=tolerance))


def sample_rank_agreement(
    m: SymMatrix,
    cert: RankCertificate,
    samples: int,
    rng: Optional[random.Random] = None,
) -> bool:
    """True when the numeric rank at random points off the side-condition zero set equals cert.rank."""
    rng = rng or random.Random(0)
    symbols = set()
    atoms = set()
    for e in m.entries:
        symbols |= sp.sympify(e).free_symbols
        atoms |= set(kernel.opaque_atoms(e))
    checked = 0
    attempts = 0
    while checked < samples and attempts < samples * 20:
        attempts += 1
        point = kernel.sample_point(symbols, rng, sorted(atoms, key=sp.default_sort_key))
        if any(kernel.numerically_zero(kernel.evaluate(c, point)) for c in cert.side_conditions):
            continue
        if numeric_rank(m, point) != cert.rank:
            return False
        checked += 1
    return True
