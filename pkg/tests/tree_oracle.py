import itertools
import math
import os
import unittest
from fractions import Fraction

import numpy as np

from mec.couplings import Coupling, Distribution, validate_distribution
from mec.errors import LengthMismatch, NotATree, NotForest, NotTwoMarginal, Rejection, ShapeMismatch
from mec.extreme_enumeration import candidate_from_subset
from mec.subset_logic import candidate_subset
from mec.support_graph import SupportSet, classify
from mec.tree_oracle import PeelState, peel_coupling, peel_forest

F = Fraction

MATRIX_DIMS = [(2, 2), (2, 3), (3, 3), (2, 4), (3, 4)]
TENSOR_DIMS = [(2, 2, 2), (2, 2, 3), (2, 2, 4)]
# one marginal draw per seed; the full sweep takes a few minutes
ORACLE_SEEDS = 100 if os.environ.get("MEC_RUN_SLOW") == "1" else 5


def dist(*literals):
    return validate_distribution([str(v) for v in literals])


def random_distribution(rng, m):
    weights = rng.integers(1, 12, size=m)
    return Distribution(tuple(F(int(w), int(weights.sum())) for w in weights))


def trees_of(dims):
    s = sum(dims) - (len(dims) - 1)
    for rank in range(1, math.comb(math.prod(dims), s) + 1):
        candidate = candidate_subset(rank, dims)
        support = SupportSet(dims, frozenset(candidate.cells))
        if classify(support).is_tree:
            yield candidate, support


class TestPeelState(unittest.TestCase):

    def test_peel_updates_residuals(self):
        """Peeling a cell subtracts its value from every hyperplane through it."""
        state = PeelState.start([(1, 1), (1, 2), (2, 1)], (2, 2), [["0.6", "0.4"], ["0.7", "0.3"]])
        self.assertEqual(state.peelable(), {(1, 2): 1, (2, 1): 0})
        self.assertEqual(state.peel((2, 1), 0), F(2, 5))
        self.assertEqual(state.residual, [[F(3, 5), F(0)], [F(3, 10), F(3, 10)]])
        self.assertFalse(state.closed())
        self.assertTrue(state.closed([(0, 2)]))


class TestPeelCoupling(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.marginals = (dist("0.6", "0.4"), dist("0.7", "0.3"))

    def test_feasible_tree(self):
        """The three-cell tree carries [[0.3, 0.3], [0.4, 0]]."""
        tree = SupportSet((2, 2), frozenset({(1, 1), (1, 2), (2, 1)}))
        self.assertEqual(
            peel_coupling(tree, self.marginals),
            Coupling([["0.3", "0.3"], ["0.4", "0"]], self.marginals),
        )

    def test_infeasible_tree(self):
        """A negative residual stops the peeling."""
        tree = SupportSet((2, 2), frozenset({(1, 2), (2, 1), (2, 2)}))
        self.assertIs(peel_coupling(tree, self.marginals), Rejection.INFEASIBLE)

    def test_not_a_tree(self):
        """Forests, circuits and wrong sizes are refused."""
        forest = SupportSet((2, 2), frozenset({(1, 1), (2, 2)}))
        with self.assertRaises(NotATree):
            peel_coupling(forest, self.marginals)
        square = SupportSet((2, 2), frozenset({(1, 1), (1, 2), (2, 1), (2, 2)}))
        with self.assertRaises(NotATree):
            peel_coupling(square, self.marginals)
        with self.assertRaises(ShapeMismatch):
            peel_coupling(SupportSet((2, 3), frozenset({(1, 1)})), self.marginals)

    def test_order_does_not_matter(self):
        """Largest-first peeling reproduces smallest-first peeling."""
        rng = np.random.default_rng(17)
        for dims in [(3, 3), (2, 4)]:
            marginals = tuple(random_distribution(rng, m) for m in dims)
            for _, tree in trees_of(dims):
                self.assertEqual(
                    peel_coupling(tree, marginals, choose=max),
                    peel_coupling(tree, marginals),
                )

    def test_bad_choice(self):
        """The chooser must return one of the offered cells."""
        tree = SupportSet((2, 2), frozenset({(1, 1), (1, 2), (2, 1)}))
        with self.assertRaises(ValueError):
            peel_coupling(tree, self.marginals, choose=lambda cells: (1, 1))


class TestOracleEquivalence(unittest.TestCase):
    """Peeling against the linear solve on every tree, for many marginal draws."""

    @classmethod
    def setUpClass(cls):
        cls.trees = {dims: list(trees_of(dims)) for dims in MATRIX_DIMS + TENSOR_DIMS}

    def check(self, dims):
        for seed in range(ORACLE_SEEDS):
            rng = np.random.default_rng(seed)
            marginals = tuple(random_distribution(rng, m) for m in dims)
            for candidate, tree in self.trees[dims]:
                with self.subTest(dims=dims, seed=seed, cells=candidate.cells):
                    self.assertEqual(peel_coupling(tree, marginals), candidate_from_subset(candidate, marginals))

    def test_matrices(self):
        """On every tree, peeling and the linear solve agree, feasible or not."""
        for dims in MATRIX_DIMS:
            self.assertTrue(self.trees[dims])
            self.check(dims)

    def test_tensors(self):
        """Three-axis trees peel without stalling and give the solver's coupling."""
        for dims in TENSOR_DIMS:
            self.assertTrue(self.trees[dims])
            self.check(dims)


class TestPeelForest(unittest.TestCase):

    def test_blocks(self):
        """Each block is peeled against its own lines."""
        support = SupportSet((3, 3), frozenset({(1, 1), (3, 1), (2, 2), (2, 3)}))
        values = peel_forest(support, (["0.5", "0.4", "0.1"], ["0.6", "0.2", "0.2"]))
        expected = np.array(
            [[F("0.5"), 0, 0], [0, F("0.2"), F("0.2")], [F("0.1"), 0, 0]], dtype=object
        )
        self.assertTrue(np.array_equal(values, expected))

    def test_masses_need_not_be_distributions(self):
        """Row and column masses of any total, with zero on uncovered lines."""
        support = SupportSet((2, 3), frozenset({(1, 1), (1, 2)}))
        values = peel_forest(support, (["3", "0"], ["1", "2", "0"]))
        self.assertEqual(values.tolist(), [[1, 2, 0], [0, 0, 0]])
        self.assertIs(peel_forest(support, (["3", "1"], ["1", "2", "1"])), Rejection.INFEASIBLE)

    def test_block_mismatch(self):
        """A block whose row and column totals differ cannot close."""
        support = SupportSet((2, 2), frozenset({(1, 1), (2, 2)}))
        self.assertIs(peel_forest(support, (["0.6", "0.4"], ["0.5", "0.5"])), Rejection.INFEASIBLE)

    def test_errors(self):
        """Only circuit-free matrix supports with matching mass lengths."""
        with self.assertRaises(NotForest):
            peel_forest(
                SupportSet((2, 2), frozenset(itertools.product((1, 2), (1, 2)))),
                (["1", "1"], ["1", "1"]),
            )
        with self.assertRaises(NotTwoMarginal):
            peel_forest(SupportSet((2, 2, 2), frozenset({(1, 1, 1)})), (["1", "0"], ["1", "0"]))
        with self.assertRaises(LengthMismatch):
            peel_forest(SupportSet((2, 2), frozenset({(1, 1)})), (["1"], ["1", "0"]))


if __name__ == "__main__":
    unittest.main()
