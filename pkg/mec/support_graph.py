"""
Cell graph of a coupling's support.

Two cells are adjacent when they agree on every coordinate but one (they share a row or
a column when d = 2). Cells are 1-based multi-indices throughout this module.
"""

import itertools
from collections import defaultdict
from dataclasses import dataclass
from typing import FrozenSet, List, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .couplings import Coupling
from .errors import NotForest, NotTwoMarginal, OutOfBounds
from .exact import RatMatrix, as_rational, rank

Cell = Tuple[int, ...]


@dataclass(frozen=True)
class SupportSet:
    dims: Tuple[int, ...]
    cells: FrozenSet[Cell]

    def __post_init__(self):
        dims = tuple(int(m) for m in self.dims)
        cells = frozenset(tuple(int(c) for c in cell) for cell in self.cells)
        for cell in cells:
            if len(cell) != len(dims) or any(not 1 <= c <= m for c, m in zip(cell, dims)):
                raise OutOfBounds(f"cell {cell} is outside the grid {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "cells", cells)

    @classmethod
    def of(cls, coupling: Coupling):
        return cls(coupling.dims, frozenset(coupling.support_cells()))

    @classmethod
    def from_values(cls, values):
        arr = np.asarray(values, dtype=object)
        cells = [tuple(i + 1 for i in index) for index, v in np.ndenumerate(arr) if as_rational(v) != 0]
        return cls(arr.shape, frozenset(cells))

    @property
    def ndim(self):
        return len(self.dims)

    def __len__(self):
        return len(self.cells)

    def __iter__(self):
        return iter(sorted(self.cells))

    def __contains__(self, cell):
        return tuple(cell) in self.cells

    def basis_size(self):
        """Sum of m_t minus (d - 1): the size of a spanning tree of the grid."""
        return sum(self.dims) - (self.ndim - 1)


@dataclass(frozen=True)
class Classification:
    is_forest: bool
    is_tree: bool
    is_complete: bool
    component_count: int


@dataclass(frozen=True)
class VertexPartition:
    """Isolated, passable (row / column) and turning cells of a matrix support."""

    isolated: FrozenSet[Cell]
    row_passable: FrozenSet[Cell]
    column_passable: FrozenSet[Cell]
    turning: FrozenSet[Cell]

    @property
    def passable(self):
        return self.row_passable | self.column_passable


@dataclass(frozen=True)
class BlockStructure:
    """Row/column orders that make a forest-supported matrix block diagonal."""

    row_order: Tuple[int, ...]
    col_order: Tuple[int, ...]
    blocks: Tuple[Tuple[Tuple[int, ...], Tuple[int, ...]], ...]


def adjacent(u: Cell, v: Cell) -> bool:
    return sum(a != b for a, b in zip(u, v)) == 1


def incidence_matrix(cells, dims) -> RatMatrix:
    """0/1 matrix with one row per (axis, coordinate) and one column per cell."""
    offsets = [0, *itertools.accumulate(dims)][:-1]
    cells = list(cells)
    rows = [[0] * len(cells) for _ in range(sum(dims))]
    for k, cell in enumerate(cells):
        for offset, c in zip(offsets, cell):
            rows[offset + c - 1][k] = 1
    return RatMatrix(sum(dims), len(cells), tuple(v for r in rows for v in r))


def _bipartite_cycle(cells, m):
    """Union-find cycle test on the row/column graph: one edge per cell."""
    parent = {}
    for i, j in cells:
        a, b = i - 1, m + j - 1
        while parent.get(a, a) != a:
            a = parent[a]
        while parent.get(b, b) != b:
            b = parent[b]
        if a == b:
            return True
        parent[a] = b
    return False


def has_circuit(support: SupportSet) -> bool:
    """
    True when the support contains a circuit.

    For matrices this is the cycle test on the bipartite row/column graph, which is
    equivalent to a closed path of cells without three consecutive collinear ones. For
    d >= 3 a circuit means a linear dependence among the cells' incidence vectors.
    """
    if support.ndim == 2:
        return _bipartite_cycle(sorted(support.cells), support.dims[0])
    if not support.cells:
        return False
    return rank(incidence_matrix(sorted(support.cells), support.dims)) < len(support)


def is_complete(support: SupportSet) -> bool:
    """Every coordinate value of every axis carries a support cell."""
    return all(
        len({cell[axis] for cell in support.cells}) == m
        for axis, m in enumerate(support.dims)
    )


def components(support: SupportSet) -> List[SupportSet]:
    """Connected components, ordered by their smallest cell."""
    cells = sorted(support.cells)
    if not cells:
        return []
    position = {cell: k for k, cell in enumerate(cells)}

    # cells on a common line form a clique; chaining them keeps connectivity
    heads, tails = [], []
    for axis in range(support.ndim):
        lines = defaultdict(list)
        for cell in cells:
            lines[cell[:axis] + cell[axis + 1:]].append(position[cell])
        for members in lines.values():
            heads.extend(members[:-1])
            tails.extend(members[1:])

    heads = np.array(heads, dtype=np.int64)
    tails = np.array(tails, dtype=np.int64)
    graph = coo_matrix((np.ones(len(heads)), (heads, tails)), shape=(len(cells), len(cells)))
    _, labels = connected_components(graph, directed=False)

    groups = defaultdict(list)
    for cell, label in zip(cells, labels):
        groups[label].append(cell)
    ordered = sorted(groups.values(), key=lambda group: group[0])
    return [SupportSet(support.dims, frozenset(group)) for group in ordered]


def classify(support: SupportSet) -> Classification:
    count = len(components(support))
    forest = not has_circuit(support)
    return Classification(
        is_forest=forest,
        is_tree=forest and count == 1,
        is_complete=is_complete(support),
        component_count=count,
    )


def forest_cardinality_check(support: SupportSet) -> bool:
    """
    Completeness of a forest agrees with |V| = sum(m_t) - d - k + 2.

    Raises
    ------
    NotForest
        If the support has a circuit.
    """
    if has_circuit(support):
        raise NotForest(f"support of {len(support)} cells contains a circuit")
    k = len(components(support))
    expected = sum(support.dims) - support.ndim - k + 2
    return is_complete(support) == (len(support) == expected)


def passes_prefilter(cells, dims) -> bool:
    """
    Cheap necessary condition for a candidate subset to be a spanning tree.

    Checks completeness, and for matrices also the absence of a circuit.
    """
    for axis, m in enumerate(dims):
        if len({cell[axis] for cell in cells}) != m:
            return False
    if len(dims) == 2:
        return not _bipartite_cycle(cells, dims[0])
    return True


def _as_matrix(values):
    if isinstance(values, Coupling):
        values = values.values
    arr = np.asarray(values, dtype=object)
    if arr.ndim != 2:
        raise NotTwoMarginal(f"expected a matrix, got a {arr.ndim}-way tensor")
    out = np.empty(arr.shape, dtype=object)
    for index, v in np.ndenumerate(arr):
        out[index] = as_rational(v)
    return out


def vertex_partition(values) -> VertexPartition:
    """
    Split the support of a matrix into isolated, passable and turning cells.

    A positive cell is isolated when it carries its whole row and its whole column,
    row-passable when it carries only its whole row, column-passable when it carries only
    its whole column, and turning otherwise.
    """
    matrix = _as_matrix(values)
    row_sums = matrix.sum(axis=1)
    col_sums = matrix.sum(axis=0)
    groups = {"isolated": set(), "row": set(), "column": set(), "turning": set()}
    for (i, j), v in np.ndenumerate(matrix):
        if v <= 0:
            continue
        whole_row, whole_col = row_sums[i] == v, col_sums[j] == v
        if whole_row and whole_col:
            key = "isolated"
        elif whole_row:
            key = "row"
        elif whole_col:
            key = "column"
        else:
            key = "turning"
        groups[key].add((i + 1, j + 1))
    return VertexPartition(
        isolated=frozenset(groups["isolated"]),
        row_passable=frozenset(groups["row"]),
        column_passable=frozenset(groups["column"]),
        turning=frozenset(groups["turning"]),
    )


def block_structure(support: SupportSet) -> BlockStructure:
    """Group rows and columns by connected component (matrices only)."""
    if support.ndim != 2:
        raise NotTwoMarginal(f"block structure needs a matrix, got {support.ndim} axes")
    blocks = []
    for component in components(support):
        rows = tuple(sorted({i for i, _ in component.cells}))
        cols = tuple(sorted({j for _, j in component.cells}))
        blocks.append((rows, cols))
    m, n = support.dims
    row_order = [i for rows, _ in blocks for i in rows]
    col_order = [j for _, cols in blocks for j in cols]
    row_order += [i for i in range(1, m + 1) if i not in row_order]
    col_order += [j for j in range(1, n + 1) if j not in col_order]
    return BlockStructure(tuple(row_order), tuple(col_order), tuple(blocks))


def extend_to_basis(support: SupportSet) -> SupportSet:
    """
    Grow an independent support to sum(m_t) - (d - 1) cells, adding cells in
    linear-index order whenever they keep the set independent.
    """
    if has_circuit(support):
        raise NotForest("only a circuit-free support can be extended to a basis")
    cells = set(support.cells)
    target = support.basis_size()
    for cell in itertools.product(*(range(1, m + 1) for m in support.dims)):
        if len(cells) == target:
            break
        if cell in cells:
            continue
        trial = SupportSet(support.dims, frozenset(cells | {cell}))
        if not has_circuit(trial):
            cells.add(cell)
    return SupportSet(support.dims, frozenset(cells))
