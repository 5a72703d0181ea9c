"""Dense exact linear algebra: Bareiss determinant and solve, exact rank."""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple, Union

from ..errors import DimensionMismatch, NotSquare, Rejection


@dataclass(frozen=True)
class RatMatrix:
    """
    Dense row-major matrix of exact rationals.

    Entries may be ``int`` or ``Fraction``; both are exact. Integer entries are kept as
    ints so 0/1 structure matrices stay cheap to eliminate.
    """

    rows: int
    cols: int
    entries: Tuple[Union[int, Fraction], ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise DimensionMismatch(
                f"{len(self.entries)} entries for a {self.rows}x{self.cols} matrix"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]):
        rows = [tuple(r) for r in rows]
        n_cols = len(rows[0]) if rows else 0
        if any(len(r) != n_cols for r in rows):
            raise DimensionMismatch("ragged rows")
        return cls(len(rows), n_cols, tuple(v for r in rows for v in r))

    @classmethod
    def identity(cls, n):
        return cls(n, n, tuple(int(i == j) for i in range(n) for j in range(n)))

    def __getitem__(self, index):
        i, j = index
        return self.entries[i * self.cols + j]

    def row(self, i):
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self):
        return [list(self.row(i)) for i in range(self.rows)]

    def column_sums(self):
        return [sum(self[i, j] for i in range(self.rows)) for j in range(self.cols)]


def _integer_rows(matrix, rhs=None):
    """Scale every row (and its right-hand side) by the lcm of its denominators."""
    scaled, scales = [], []
    for i in range(matrix.rows):
        row = matrix.row(i)
        denominators = [v.denominator for v in row]
        if rhs is not None:
            denominators.append(Fraction(rhs[i]).denominator)
        scale = math.lcm(*denominators)
        int_row = [int(v * scale) for v in row]
        if rhs is not None:
            int_row.append(int(Fraction(rhs[i]) * scale))
        scaled.append(int_row)
        scales.append(scale)
    return scaled, scales


def _bareiss_forward(a, n):
    """
    Fraction-free forward elimination of the leading n x n block of ``a`` in place.

    Columns beyond n (an augmented right-hand side) are carried along. Returns the sign
    of the row permutation, or 0 when the block is singular.
    """
    sign, previous = 1, 1
    width = len(a[0])
    for k in range(n):
        if a[k][k] == 0:
            for swap in range(k + 1, n):
                if a[swap][k] != 0:
                    a[k], a[swap] = a[swap], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        row_k = a[k]
        for i in range(k + 1, n):
            row_i = a[i]
            factor = row_i[k]
            for j in range(k + 1, width):
                row_i[j] = (row_i[j] * pivot - factor * row_k[j]) // previous
            row_i[k] = 0
        previous = pivot
    return sign


def determinant(matrix: RatMatrix) -> Fraction:
    """
    Exact determinant by Bareiss elimination.

    Raises
    ------
    NotSquare
        If the matrix is not square.
    """
    if matrix.rows != matrix.cols:
        raise NotSquare(f"determinant of a {matrix.rows}x{matrix.cols} matrix")
    n = matrix.rows
    if n == 0:
        return Fraction(1)
    a, scales = _integer_rows(matrix)
    sign = _bareiss_forward(a, n)
    if sign == 0:
        return Fraction(0)
    return Fraction(sign * a[n - 1][n - 1], math.prod(scales))


def solve_linear(matrix: RatMatrix, rhs):
    """
    Solve ``matrix @ x = rhs`` exactly.

    Args:
        matrix (RatMatrix): Square coefficient matrix.
        rhs (sequence): Exact right-hand side of length ``matrix.rows``.
    Returns:
        list[Fraction] | Rejection: The unique solution, or ``Rejection.SINGULAR``
        when the determinant is zero.
    Raises:
        NotSquare: If the matrix is not square.
        DimensionMismatch: If ``rhs`` has the wrong length.
    """
    if matrix.rows != matrix.cols:
        raise NotSquare(f"cannot solve with a {matrix.rows}x{matrix.cols} matrix")
    if len(rhs) != matrix.rows:
        raise DimensionMismatch(
            f"right-hand side has {len(rhs)} entries, matrix has {matrix.rows} rows"
        )
    n = matrix.rows
    a, _ = _integer_rows(matrix, rhs)
    if _bareiss_forward(a, n) == 0:
        return Rejection.SINGULAR

    # back substitution on the fraction-free upper triangle
    x = [Fraction(0)] * n
    for k in range(n - 1, -1, -1):
        row = a[k]
        acc = Fraction(row[n])
        for j in range(k + 1, n):
            if row[j]:
                acc -= row[j] * x[j]
        x[k] = acc / row[k]
    return x


def rank(matrix: RatMatrix) -> int:
    """Exact rank of a rectangular rational matrix (row echelon over Fraction)."""
    m = [[Fraction(v) for v in matrix.row(i)] for i in range(matrix.rows)]
    pivot_row = 0
    for col in range(matrix.cols):
        for i in range(pivot_row, matrix.rows):
            if m[i][col] != 0:
                break
        else:
            continue
        m[pivot_row], m[i] = m[i], m[pivot_row]
        pivot = m[pivot_row][col]
        for r in range(pivot_row + 1, matrix.rows):
            factor = m[r][col]
            if factor == 0:
                continue
            ratio = factor / pivot
            for c in range(col, matrix.cols):
                m[r][c] -= m[pivot_row][c] * ratio
        pivot_row += 1
        if pivot_row == matrix.rows:
            break
    return pivot_row
