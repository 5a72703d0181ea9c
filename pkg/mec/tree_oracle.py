"""
Reconstruction of the coupling consistent with a tree by peeling.

A cell that is the only remaining cell of some hyperplane (a row or column when d = 2)
must carry that hyperplane's residual mass. Assigning it and subtracting the value from
every other hyperplane through the cell leaves a smaller tree, so repeating the step fixes
every value. This is an independent route to the result of ``candidate_from_subset``.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Sequence, Set

import numpy as np

from .couplings import Coupling, Distribution, validate_distribution
from .errors import LengthMismatch, NotATree, NotForest, NotTwoMarginal, Rejection, ShapeMismatch
from .exact import as_rational
from .support_graph import Cell, SupportSet, block_structure, classify, has_circuit


@dataclass
class PeelState:
    """
    Cells still to be valued, residual hyperplane masses and the values fixed so far.

    ``residual[t][z - 1]`` is the mass of hyperplane (t, z) minus the values already
    assigned on it.
    """

    dims: tuple
    remaining: Set[Cell]
    residual: List[List[Fraction]]
    assigned: Dict[Cell, Fraction] = field(default_factory=dict)

    @classmethod
    def start(cls, cells, dims, masses):
        return cls(
            dims=tuple(dims),
            remaining=set(cells),
            residual=[[as_rational(v) for v in axis_masses] for axis_masses in masses],
        )

    def peelable(self):
        """Map each peelable cell to the first axis on which it is alone in its hyperplane."""
        counts = [dict() for _ in self.dims]
        for cell in self.remaining:
            for axis, z in enumerate(cell):
                counts[axis][z] = counts[axis].get(z, 0) + 1
        options = {}
        for cell in self.remaining:
            for axis, z in enumerate(cell):
                if counts[axis][z] == 1:
                    options[cell] = axis
                    break
        return options

    def peel(self, cell, axis):
        value = self.residual[axis][cell[axis] - 1]
        self.assigned[cell] = value
        self.remaining.discard(cell)
        for t, z in enumerate(cell):
            self.residual[t][z - 1] -= value
        return value

    def closed(self, lines=None):
        """True when the residual of every listed (axis, z) hyperplane (default: all) is 0."""
        if lines is None:
            lines = [(t, z) for t, m in enumerate(self.dims) for z in range(1, m + 1)]
        return all(self.residual[t][z - 1] == 0 for t, z in lines)


def _run(state: PeelState, choose):
    while state.remaining:
        options = state.peelable()
        if not options:
            raise NotATree(f"peeling stalled with {len(state.remaining)} cells left")
        cell = choose(sorted(options))
        if cell not in options:
            raise ValueError(f"choose returned {cell}, which is not peelable")
        if state.peel(cell, options[cell]) < 0:
            return Rejection.INFEASIBLE
    return None


def peel_coupling(tree: SupportSet, marginals: Sequence, choose: Callable = min):
    """
    The unique coupling supported inside ``tree``, rebuilt by peeling.

    Parameters
    ----------
    tree : SupportSet
        A spanning tree with sum(m_t) - (d - 1) cells.
    marginals : sequence
        Distributions (raw vectors are validated).
    choose : callable
        Picks one cell from the sorted list of peelable cells; ``min`` peels the
        lexicographically smallest. The result does not depend on this choice.

    Returns
    -------
    Coupling or Rejection
        ``Rejection.INFEASIBLE`` as soon as an assignment is negative, or when residual
        masses fail to close at zero.

    Raises
    ------
    NotATree
        If ``tree`` is not a spanning tree of the grid, or peeling stalls.
    """
    marginals = tuple(
        w if isinstance(w, Distribution) else validate_distribution(w, name=t)
        for t, w in enumerate(marginals, start=1)
    )
    dims = tuple(len(w) for w in marginals)
    if tree.dims != dims:
        raise ShapeMismatch(f"tree lives on {tree.dims}, marginals have lengths {dims}")
    if len(tree) != tree.basis_size():
        raise NotATree(f"{len(tree)} cells given, a spanning tree of {dims} has {tree.basis_size()}")
    if not classify(tree).is_tree:
        raise NotATree(f"the {len(tree)} cells do not form a tree")

    state = PeelState.start(tree.cells, dims, [w.weights for w in marginals])
    if _run(state, choose) is Rejection.INFEASIBLE or not state.closed():
        return Rejection.INFEASIBLE

    values = np.full(dims, Fraction(0), dtype=object)
    for cell, v in state.assigned.items():
        values[tuple(c - 1 for c in cell)] = v
    return Coupling(values, marginals)


def peel_forest(support: SupportSet, masses, choose: Callable = min):
    """
    Peel every block of a matrix forest against its own row and column masses.

    ``masses`` is a pair (row masses, column masses) of exact nonnegative vectors; they
    need not be distributions. Rows and columns outside the support must have zero mass.
    Returns the value matrix (object array of Fractions) or ``Rejection.INFEASIBLE``.
    """
    if support.ndim != 2:
        raise NotTwoMarginal(f"forest peeling needs a matrix, got {support.ndim} axes")
    if has_circuit(support):
        raise NotForest(f"support of {len(support)} cells contains a circuit")
    rows, cols = ([as_rational(v) for v in axis_masses] for axis_masses in masses)
    if (len(rows), len(cols)) != support.dims:
        raise LengthMismatch(
            f"masses of lengths {(len(rows), len(cols))} for a {support.dims[0]}x{support.dims[1]} support"
        )

    values = np.full(support.dims, Fraction(0), dtype=object)
    covered_rows, covered_cols = set(), set()
    for block_rows, block_cols in block_structure(support).blocks:
        cells = [cell for cell in support.cells if cell[0] in block_rows]
        state = PeelState.start(cells, support.dims, (rows, cols))
        lines = [(0, i) for i in block_rows] + [(1, j) for j in block_cols]
        if _run(state, choose) is Rejection.INFEASIBLE or not state.closed(lines):
            return Rejection.INFEASIBLE
        for (i, j), v in state.assigned.items():
            values[i - 1, j - 1] = v
        covered_rows.update(block_rows)
        covered_cols.update(block_cols)

    uncovered = [w for i, w in enumerate(rows, start=1) if i not in covered_rows]
    uncovered += [w for j, w in enumerate(cols, start=1) if j not in covered_cols]
    if any(w != 0 for w in uncovered):
        return Rejection.INFEASIBLE
    return values
