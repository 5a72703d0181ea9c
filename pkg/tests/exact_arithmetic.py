import itertools
import unittest
from fractions import Fraction

import numpy as np

from mec.errors import DimensionMismatch, MalformedNumber, NotSquare, Rejection
from mec.exact import (
    RatMatrix,
    as_rational,
    determinant,
    format_fraction,
    rank,
    rat_from_decimal,
    solve_linear,
    to_decimal_string,
)


def leibniz_determinant(rows):
    """Permutation expansion, used as an independent reference."""
    n = len(rows)
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        inversions = sum(perm[i] > perm[j] for i in range(n) for j in range(i + 1, n))
        term = Fraction(-1 if inversions % 2 else 1)
        for i, j in enumerate(perm):
            term *= rows[i][j]
        total += term
    return total


class TestRationalParsing(unittest.TestCase):

    def test_decimal_is_exact(self):
        """Decimal literals become exact fractions, never rounded."""
        self.assertEqual(rat_from_decimal("0.50"), Fraction(1, 2))
        self.assertEqual(rat_from_decimal("0.333333"), Fraction(333333, 1000000))
        self.assertNotEqual(rat_from_decimal("0.333333"), Fraction(1, 3))

    def test_fraction_and_decimal_agree(self):
        """Fraction and decimal spellings of the same number are equal and hash alike."""
        self.assertEqual(rat_from_decimal("7/20"), rat_from_decimal("0.35"))
        self.assertEqual(hash(rat_from_decimal("7/20")), hash(rat_from_decimal("0.35")))
        self.assertEqual(rat_from_decimal(" -3/6 "), Fraction(-1, 2))

    def test_malformed_literals(self):
        """Scientific notation, bare dots, zero denominators and junk are refused."""
        for text in ["1e-3", ".5", "1/0", "abc", "", "1/2/3", "0.5.1"]:
            with self.subTest(text=text):
                with self.assertRaises(MalformedNumber):
                    rat_from_decimal(text)

    def test_as_rational_refuses_floats(self):
        """Floats and booleans are not accepted as exact inputs."""
        self.assertEqual(as_rational(3), Fraction(3))
        self.assertEqual(as_rational("1/4"), Fraction(1, 4))
        with self.assertRaises(MalformedNumber):
            as_rational(0.25)
        with self.assertRaises(MalformedNumber):
            as_rational(True)

    def test_decimal_strings(self):
        """Terminating values print as decimals, others as fractions; both parse back."""
        cases = {
            Fraction(7, 20): "0.35",
            Fraction(1, 2): "0.5",
            Fraction(-3, 8): "-0.375",
            Fraction(5): "5",
            Fraction(0): "0",
            Fraction(1, 3): "1/3",
            Fraction(1, 1000000): "0.000001",
        }
        for value, text in cases.items():
            with self.subTest(value=value):
                self.assertEqual(to_decimal_string(value), text)
                self.assertEqual(rat_from_decimal(text), value)
        self.assertEqual(format_fraction(Fraction(3, 10)), "3/10")


class TestRatMatrix(unittest.TestCase):

    def test_entry_count_checked(self):
        """A matrix must have exactly rows * cols entries."""
        with self.assertRaises(DimensionMismatch):
            RatMatrix(2, 2, (1, 2, 3))
        with self.assertRaises(DimensionMismatch):
            RatMatrix.from_rows([[1, 2], [3]])

    def test_indexing(self):
        """Entries are addressed row-major with 0-based (i, j)."""
        m = RatMatrix.from_rows([[1, 2, 3], [4, 5, 6]])
        self.assertEqual(m[1, 0], 4)
        self.assertEqual(m.row(0), (1, 2, 3))
        self.assertEqual(m.column_sums(), [5, 7, 9])


class TestDeterminant(unittest.TestCase):

    def test_small_cases(self):
        """Identity, a swap-like matrix and a structure matrix."""
        self.assertEqual(determinant(RatMatrix.identity(3)), 1)
        self.assertEqual(determinant(RatMatrix.from_rows([[1, 1], [1, 0]])), -1)
        self.assertEqual(determinant(RatMatrix.from_rows([[1, 1, 0], [1, 1, 1], [1, 0, 1]])), 1)

    def test_rational_entries(self):
        """Fractional rows are scaled to integers and the scale is undone."""
        m = RatMatrix.from_rows([[Fraction(1, 2), Fraction(1, 3)], [Fraction(1, 4), Fraction(1, 5)]])
        self.assertEqual(determinant(m), Fraction(1, 10) - Fraction(1, 12))

    def test_agrees_with_permutation_expansion(self):
        """Random integer and rational matrices match the Leibniz formula."""
        rng = np.random.default_rng(7)
        for n in range(1, 6):
            for _ in range(10):
                rows = [
                    [Fraction(int(a), int(b)) for a, b in zip(rng.integers(-4, 5, n), rng.integers(1, 4, n))]
                    for _ in range(n)
                ]
                with self.subTest(n=n):
                    self.assertEqual(determinant(RatMatrix.from_rows(rows)), leibniz_determinant(rows))

    def test_not_square(self):
        """Rectangular matrices have no determinant."""
        with self.assertRaises(NotSquare):
            determinant(RatMatrix.from_rows([[1, 2, 3], [4, 5, 6]]))


class TestSolveLinear(unittest.TestCase):

    def test_identity(self):
        """The identity returns the right-hand side."""
        y = [Fraction(1, 2), Fraction(1, 3)]
        self.assertEqual(solve_linear(RatMatrix.identity(2), y), y)

    def test_structure_system(self):
        """Solving the 2 x 2 tree system recovers the coupling values."""
        m = RatMatrix.from_rows([[1, 1, 0], [1, 1, 1], [1, 0, 1]])
        x = solve_linear(m, [Fraction(3, 5), Fraction(1), Fraction(7, 10)])
        self.assertEqual(x, [Fraction(3, 10), Fraction(3, 10), Fraction(2, 5)])

    def test_singular(self):
        """Rank-deficient matrices are reported, not raised."""
        m = RatMatrix.from_rows([[1, 1], [2, 2]])
        self.assertIs(solve_linear(m, [1, 2]), Rejection.SINGULAR)
        self.assertIs(solve_linear(m, [Fraction(1, 3), 5]), Rejection.SINGULAR)

    def test_solution_satisfies_system(self):
        """Random nonsingular systems are solved exactly."""
        rng = np.random.default_rng(11)
        for n in range(1, 7):
            rows = [[Fraction(int(v)) for v in rng.integers(-3, 4, n)] for _ in range(n)]
            if leibniz_determinant(rows) == 0:
                continue
            rhs = [Fraction(int(a), int(b)) for a, b in zip(rng.integers(-5, 6, n), rng.integers(1, 7, n))]
            x = solve_linear(RatMatrix.from_rows(rows), rhs)
            for row, y in zip(rows, rhs):
                self.assertEqual(sum(a * b for a, b in zip(row, x)), y)

    def test_shape_errors(self):
        """Non-square matrices and wrong-length right-hand sides raise."""
        with self.assertRaises(NotSquare):
            solve_linear(RatMatrix.from_rows([[1, 2]]), [1])
        with self.assertRaises(DimensionMismatch):
            solve_linear(RatMatrix.identity(2), [1, 2, 3])


class TestRank(unittest.TestCase):

    def test_rank(self):
        """Exact rank of rectangular matrices."""
        self.assertEqual(rank(RatMatrix.from_rows([[1, 2], [2, 4]])), 1)
        self.assertEqual(rank(RatMatrix.from_rows([[1, 0, 1], [0, 1, 1], [1, 1, 2]])), 2)
        self.assertEqual(rank(RatMatrix.identity(4)), 4)
        self.assertEqual(rank(RatMatrix.from_rows([[0, 0, 0]])), 0)
        self.assertEqual(rank(RatMatrix.from_rows([[1, 2, 3], [4, 5, 6]])), 2)


if __name__ == "__main__":
    unittest.main()
