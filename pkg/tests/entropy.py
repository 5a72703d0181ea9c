import math
import unittest
import warnings
from fractions import Fraction

import numpy as np

from mec.couplings import Coupling, marginals_of, validate_distribution
from mec.entropy import (
    check_phi_h,
    evaluate,
    from_name,
    marginal_entropies,
    min_entropy,
    phi_h,
    renyi,
    shannon,
    tsallis,
)
from mec.errors import AlphaIsOne, EmptySet, MecError, NonFiniteResult

ALPHAS = (0.1, 0.5, 0.9, 1.1, 1.5, 2.0)

# two distinct minimizers with the same cell values, so one table serves both
NONUNIQUE_1 = [
    ["0.35", "0", "0.15", "0", "0"],
    ["0", "0.25", "0.05", "0", "0"],
    ["0", "0", "0", "0.08", "0"],
    ["0", "0", "0", "0.06", "0.01"],
    ["0", "0", "0", "0", "0.05"],
]
NONUNIQUE_2 = [
    ["0.40", "0", "0.15", "0", "0"],
    ["0", "0.30", "0.05", "0", "0"],
    ["0", "0", "0", "0.05", "0"],
    ["0", "0", "0", "0", "0.03"],
    ["0", "0", "0", "0.01", "0.01"],
]
BLOCKED = [
    ["0.28", "0", "0.12", "0", "0"],
    ["0", "0.27", "0", "0", "0.03"],
    ["0", "0", "0", "0.15", "0"],
    ["0", "0", "0.09", "0.01", "0"],
    ["0", "0", "0", "0", "0.05"],
]
COLLISION = [
    ["0", "0.27", "0.13", "0", "0"],
    ["0.28", "0", "0.01", "0.01", "0"],
    ["0", "0", "0", "0.15", "0"],
    ["0", "0", "0.02", "0", "0.08"],
    ["0", "0", "0.05", "0", "0"],
]


def coupling(rows):
    return Coupling(rows, tuple(validate_distribution(w) for w in marginals_of(rows)))


class TestShannon(unittest.TestCase):

    def test_three_by_three_minimizers(self):
        """Base-2 entropies of the two 3 x 3 minimizers."""
        a = coupling([["0.50", "0", "0"], ["0", "0.20", "0.20"], ["0.10", "0", "0"]])
        b = coupling([["0.38", "0", "0.02"], ["0", "0.34", "0.01"], ["0", "0", "0.25"]])
        self.assertAlmostEqual(shannon()(a), 1.760964, delta=1e-6)
        self.assertAlmostEqual(shannon()(b), 1.738942, delta=1e-6)

    def test_base(self):
        """Changing the base rescales the value."""
        x = ["1/4", "1/4", "1/4", "1/4"]
        self.assertAlmostEqual(evaluate(shannon(2), x), 2.0)
        self.assertAlmostEqual(evaluate(shannon(math.e), x), math.log(4))
        self.assertAlmostEqual(evaluate(shannon(4), x), 1.0)

    def test_zero_cells(self):
        """Zero cells contribute nothing."""
        self.assertEqual(evaluate(shannon(), ["1", "0", "0"]), 0.0)

    def test_mixed_literals(self):
        """Decimal and fraction strings are read exactly, next to Fractions and floats."""
        x = ["0.25", "1/4", Fraction(1, 4), 0.25]
        self.assertAlmostEqual(evaluate(shannon(), x), 2.0, places=12)
        self.assertAlmostEqual(evaluate(renyi(2), [["0.5", "1/4"], ["0.25", 0]]), math.log2(8 / 3))
        with self.assertRaises(MecError):
            evaluate(shannon(), ["a quarter", "0.75"])


class TestRenyiTsallis(unittest.TestCase):

    def check_table(self, rows, functional, expected, atol=1e-4):
        c = coupling(rows)
        observed = [functional(alpha)(c) for alpha in ALPHAS[: len(expected)]]
        np.testing.assert_allclose(observed, expected, rtol=0, atol=atol)

    def test_nonunique_case_one(self):
        self.check_table(NONUNIQUE_1, renyi, (2.935792, 2.705417, 2.515795, 2.435067, 2.298609, 2.167475))
        self.check_table(NONUNIQUE_1, tsallis, (5.825428, 3.107823, 1.905098, 1.553103, 1.098315, 0.7774))

    def test_nonunique_case_two(self):
        self.check_table(NONUNIQUE_2, renyi, (2.891993, 2.511479, 2.232101, 2.127567, 1.971572, 1.843733))
        self.check_table(NONUNIQUE_2, tsallis, (5.638465, 2.77579, 1.673281, 1.371132, 0.9900989, 0.7214))

    def test_blocked_counterexample(self):
        self.check_table(BLOCKED, renyi, (2.93921, 2.733940, 2.580667, 2.519114, 2.418465))
        self.check_table(BLOCKED, tsallis, (5.840234, 3.158572, 1.958751, 1.602169, 1.135003))

    def test_collision_entropy(self):
        """At alpha = 2 a different coupling wins; its values are exact sums of squares."""
        c = coupling(COLLISION)
        self.assertAlmostEqual(renyi(2)(c), 2.320486, delta=1e-6)
        self.assertAlmostEqual(tsallis(2)(c), 0.7998, delta=1e-9)
        self.assertLess(renyi(2)(c), renyi(2)(coupling(BLOCKED)))
        self.assertGreater(renyi(1.5)(c), renyi(1.5)(coupling(BLOCKED)))

    def test_shannon_limit(self):
        """Both families approach Shannon entropy as alpha tends to 1."""
        c = coupling(NONUNIQUE_1)
        h2 = shannon()(c)
        h_nat = shannon(math.e)(c)
        for eps in (1e-4, -1e-4):
            self.assertAlmostEqual(renyi(1 + eps)(c), h2, delta=1e-3)
            self.assertAlmostEqual(tsallis(1 + eps)(c), h_nat, delta=1e-3)

    def test_alpha_is_one(self):
        """alpha = 1 must be requested as Shannon."""
        with self.assertRaises(AlphaIsOne):
            renyi(1)
        with self.assertRaises(AlphaIsOne):
            tsallis(1.0)
        with self.assertRaises(MecError):
            renyi(-0.5)
        with self.assertRaises(MecError):
            shannon(1)

    def test_from_name(self):
        """Names used in problem files map to the constructors."""
        self.assertEqual(from_name("Renyi", alpha=2), renyi(2))
        self.assertEqual(from_name("tsallis", alpha=0.5).label, "tsallis(alpha=0.5)")
        with self.assertRaises(MecError):
            from_name("hartley")


class TestPhiH(unittest.TestCase):

    def test_builtins_rewrite(self):
        """Each built-in agrees with its (phi, h) form and passes the sampled checks."""
        c = coupling(NONUNIQUE_2)
        for f in (shannon(), renyi(0.5), renyi(2), tsallis(0.5), tsallis(2)):
            with self.subTest(f=f.label):
                g = f.as_phi_h()
                self.assertAlmostEqual(g(c), f(c), places=9)
                with warnings.catch_warnings():
                    warnings.simplefilter("error")
                    self.assertEqual(check_phi_h(g.phi, g.h), [])

    def test_builtins_pass_for_many_orders(self):
        """Sums that coincide up to rounding do not trip the phi monotonicity check."""
        for f in [renyi(a) for a in (0.1, 0.5, 2, 3, 5)] + [tsallis(a) for a in (0.1, 0.5, 2, 3, 5)]:
            with self.subTest(f=f.label):
                g = f.as_phi_h()
                with warnings.catch_warnings():
                    warnings.simplefilter("error")
                    self.assertEqual(check_phi_h(g.phi, g.h), [])

    def test_scalar_h(self):
        """A scalar-only h is applied cell by cell."""
        f = phi_h(lambda s: s, lambda x: 0.0 if x == 0 else -x * math.log2(x))
        self.assertAlmostEqual(f(coupling(NONUNIQUE_1)), shannon()(coupling(NONUNIQUE_1)), places=9)

    def test_bad_h_warns(self):
        """A convex h violates the conditions and warns instead of raising."""
        with self.assertWarns(UserWarning):
            failed = check_phi_h(lambda s: s, lambda x: np.square(x))
        self.assertIn("phi_h_c_increasing", failed)
        with self.assertWarns(UserWarning):
            phi_h(lambda s: s, np.square)

    def test_non_finite(self):
        """NaN and infinite values are reported."""
        f = phi_h(lambda s: math.inf, lambda x: np.zeros_like(np.asarray(x, dtype=float)), check=False)
        with self.assertRaises(NonFiniteResult):
            f(["1/2", "1/2"])


class TestMinEntropy(unittest.TestCase):

    def test_ties(self):
        """All points within the tolerance are reported, with the exact profile flag."""
        p = validate_distribution(["1/2", "1/2"])
        diag = Coupling([["1/2", "0"], ["0", "1/2"]], (p, p))
        anti = Coupling([["0", "1/2"], ["1/2", "0"]], (p, p))
        report = min_entropy(shannon(), [diag, anti])
        self.assertEqual(len(report), 2)
        self.assertEqual(report.minimizer_indices, [0, 1])
        self.assertTrue(report.exact_profile_tie)
        self.assertAlmostEqual(report.minimum, 1.0)

    def test_unique(self):
        """A strictly smaller value wins alone."""
        p, q = validate_distribution(["0.6", "0.4"]), validate_distribution(["0.7", "0.3"])
        a = Coupling([["0.6", "0"], ["0.1", "0.3"]], (p, q))
        b = Coupling([["0.3", "0.3"], ["0.4", "0"]], (p, q))
        report = min_entropy(shannon(), [b, a])
        self.assertEqual(report.minimizers, [a])
        self.assertEqual(report.minimizer_indices, [1])
        self.assertEqual(len(report.values), 2)

    def test_tolerance_without_profile_tie(self):
        """Distinct profiles can tie under a loose tolerance; the flag tells them apart."""
        p, q = validate_distribution(["0.6", "0.4"]), validate_distribution(["0.7", "0.3"])
        a = Coupling([["0.6", "0"], ["0.1", "0.3"]], (p, q))
        b = Coupling([["0.3", "0.3"], ["0.4", "0"]], (p, q))
        report = min_entropy(shannon(), [a, b], tie_tol=1.0)
        self.assertEqual(len(report), 2)
        self.assertFalse(report.exact_profile_tie)

    def test_empty(self):
        with self.assertRaises(EmptySet):
            min_entropy(shannon(), [])

    def test_marginal_entropies(self):
        """Each marginal is evaluated on its own."""
        values = marginal_entropies(shannon(), [validate_distribution(["1/2", "1/2"]), validate_distribution(["1/4"] * 4)])
        self.assertEqual(len(values), 2)
        self.assertAlmostEqual(values[0], 1.0)
        self.assertAlmostEqual(values[1], 2.0)


if __name__ == "__main__":
    unittest.main()
