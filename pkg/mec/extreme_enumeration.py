import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .couplings import Coupling, Distribution, validate_distribution
from .errors import BudgetExceeded, Rejection, ShapeMismatch, SizeMismatch
from .exact import RatMatrix, solve_linear
from .subset_logic import CandidateSubset, all_cells, iter_subsets, rank_ranges, subset_count
from .support_graph import passes_prefilter

DEFAULT_BUDGET = 10**8
RANKS_PER_CHUNK = 50_000


def _row_offsets(dims):
    """First structure-matrix row of each axis; axis 1 is followed by the total row."""
    offsets = [0, dims[0]]
    for m in dims[1:-1]:
        offsets.append(offsets[-1] + m - 1)
    return offsets


def _cell_rows(cell, dims, offsets):
    rows = []
    if cell[0] < dims[0]:
        rows.append(cell[0] - 1)
    rows.append(dims[0] - 1)
    for axis in range(1, len(dims)):
        if cell[axis] < dims[axis]:
            rows.append(offsets[axis] + cell[axis] - 1)
    return rows


def structure_row_labels(dims):
    """
    Row layout of the structure matrix: ('axis', t, z) for the first m_t - 1 coordinates
    of each axis (1-based), with ('total',) after axis 1.
    """
    labels = [("axis", 1, z) for z in range(1, dims[0])] + [("total",)]
    for axis in range(1, len(dims)):
        labels += [("axis", axis + 1, z) for z in range(1, dims[axis])]
    return labels


def build_structure_matrix(subset: CandidateSubset, dims) -> RatMatrix:
    """
    Square 0/1 matrix whose column k marks the constraints covering cell k of the subset.

    Raises
    ------
    SizeMismatch
        If the subset does not have sum(m_t) - (d - 1) cells.
    """
    dims = tuple(dims)
    order = sum(dims) - (len(dims) - 1)
    cells = subset.cells if subset.cells is not None else tuple(
        all_cells(dims)[i - 1] for i in subset.indices
    )
    if len(cells) != order:
        raise SizeMismatch(f"{len(cells)} cells given, the structure matrix of {dims} needs {order}")
    offsets = _row_offsets(dims)
    rows = [[0] * order for _ in range(order)]
    for k, cell in enumerate(cells):
        for r in _cell_rows(cell, dims, offsets):
            rows[r][k] = 1
    return RatMatrix(order, order, tuple(v for r in rows for v in r))


def structure_rhs(marginals: Sequence[Distribution]) -> List[Fraction]:
    """(p^1_1, ..., p^1_{m_1 - 1}, 1, p^2_1, ..., p^d_{m_d - 1})."""
    rhs = list(marginals[0].weights[:-1]) + [Fraction(1)]
    for dist in marginals[1:]:
        rhs += list(dist.weights[:-1])
    return rhs


def _solve_subset(subset, dims, rhs):
    x = solve_linear(build_structure_matrix(subset, dims), rhs)
    if x is Rejection.SINGULAR:
        return x
    if any(v < 0 for v in x):
        return Rejection.INFEASIBLE
    return x


def candidate_from_subset(subset: CandidateSubset, marginals: Sequence[Distribution]):
    """
    The coupling consistent with a candidate subset, if there is one.

    Parameters
    ----------
    subset : CandidateSubset
        sum(m_t) - (d - 1) cells (or indices) of the grid.
    marginals : sequence of Distribution

    Returns
    -------
    Coupling or Rejection
        The coupling with the solved values on the subset and zero elsewhere, or
        ``Rejection.SINGULAR`` / ``Rejection.INFEASIBLE``.
    """
    marginals = tuple(marginals)
    dims = tuple(len(w) for w in marginals)
    x = _solve_subset(subset, dims, structure_rhs(marginals))
    if isinstance(x, Rejection):
        return x
    cells = subset.cells if subset.cells is not None else tuple(
        all_cells(dims)[i - 1] for i in subset.indices
    )
    values = np.full(dims, Fraction(0), dtype=object)
    for cell, v in zip(cells, x):
        values[tuple(c - 1 for c in cell)] = v
    return Coupling(values, marginals, witness_ranks=(subset.rank,))


@dataclass
class ScanChunk:
    start: int
    stop: int
    accepted: List[Tuple[int, Tuple[Fraction, ...]]]
    counts: Counter


def scan_rank_range(start, stop, marginals, prefilter=True) -> ScanChunk:
    """
    Solve every candidate subset with rank in [start, stop].

    Module-level so it can run in a worker process; depends only on its arguments.
    """
    dims = tuple(len(w) for w in marginals)
    size = math.prod(dims)
    order = sum(dims) - (len(dims) - 1)
    cells = all_cells(dims)
    rhs = structure_rhs(marginals)
    accepted, counts = [], Counter()
    for rank, indices in iter_subsets(start, stop, size, order):
        subset_cells = tuple(cells[i - 1] for i in indices)
        counts["scanned"] += 1
        if prefilter and not passes_prefilter(subset_cells, dims):
            counts["prefiltered"] += 1
            continue
        x = _solve_subset(CandidateSubset(rank, tuple(indices), subset_cells), dims, rhs)
        if x is Rejection.SINGULAR:
            continue
        counts["nonsingular"] += 1
        if x is Rejection.INFEASIBLE:
            continue
        counts["feasible"] += 1
        key = [Fraction(0)] * size
        for i, v in zip(indices, x):
            key[i - 1] = v
        accepted.append((rank, tuple(key)))
    return ScanChunk(start, stop, accepted, counts)


@dataclass
class ExtremePointSet:
    """
    Deduplicated extreme points, ordered by their first witness rank.

    Counts cover the whole scan: ``scanned`` candidate ranks, of which ``prefiltered``
    were skipped without a solve, ``nonsingular`` had an invertible structure matrix and
    ``feasible`` gave a nonnegative solution (duplicates included).
    """

    dims: Tuple[int, ...]
    marginals: Tuple[Distribution, ...]
    points: List[Coupling] = field(default_factory=list)
    scanned: int = 0
    prefiltered: int = 0
    nonsingular: int = 0
    feasible: int = 0

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, coupling):
        return any(coupling == point for point in self.points)

    def index(self, coupling):
        for k, point in enumerate(self.points):
            if point == coupling:
                return k
        raise ValueError("coupling is not an extreme point of this set")

    def keys(self):
        return {point.key() for point in self.points}


def _validated(marginals):
    validated = tuple(
        w if isinstance(w, Distribution) else validate_distribution(w, name=t)
        for t, w in enumerate(marginals, start=1)
    )
    if len(validated) < 2:
        raise ShapeMismatch(f"{len(validated)} marginal given; a coupling needs at least 2")
    return validated


def enumerate_extremes(
    marginals,
    prefilter: bool = True,
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
    progress: bool = False,
) -> ExtremePointSet:
    """
    All extreme points of the couplings of ``marginals``.

    Every (sum(m_t) - (d - 1))-subset of the grid is a candidate; each invertible,
    nonnegative candidate yields an extreme point, and equal value tensors are merged.

    Parameters
    ----------
    marginals : sequence
        Distributions, or raw vectors that are validated here.
    prefilter : bool
        Skip candidates that are incomplete (or contain a circuit, for matrices) without
        solving them. The result is the same either way.
    budget : int
        Largest number of candidate subsets allowed.
    threads : int
        Worker processes. Chunks are merged in rank order, so the output does not depend
        on this value.
    progress : bool
        Show a tqdm bar over chunks.

    Returns
    -------
    ExtremePointSet

    Raises
    ------
    BudgetExceeded
        If C(prod(m_t), sum(m_t) - (d - 1)) exceeds ``budget``.
    """
    marginals = _validated(marginals)
    dims = tuple(len(w) for w in marginals)
    size = math.prod(dims)
    order = sum(dims) - (len(dims) - 1)
    total = subset_count(size, order)
    if total > budget:
        raise BudgetExceeded(total, budget)

    n_chunks = max(threads * 8 if threads > 1 else 1, math.ceil(total / RANKS_PER_CHUNK))
    ranges = rank_ranges(total, n_chunks)

    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as executor:
            futures = [
                executor.submit(scan_rank_range, lo, hi, marginals, prefilter)
                for lo, hi in ranges
            ]
            chunks = [
                future.result()
                for future in tqdm(futures, desc="Scanning subsets", leave=False, disable=not progress)
            ]
    else:
        chunks = [
            scan_rank_range(lo, hi, marginals, prefilter)
            for lo, hi in tqdm(ranges, desc="Scanning subsets", leave=False, disable=not progress)
        ]

    witnesses: Dict[Tuple[Fraction, ...], List[int]] = {}
    counts = Counter()
    for chunk in chunks:
        counts.update(chunk.counts)
        for rank, key in chunk.accepted:
            witnesses.setdefault(key, []).append(rank)

    points = [
        Coupling(np.array(key, dtype=object).reshape(dims), marginals, witness_ranks=tuple(ranks))
        for key, ranks in witnesses.items()
    ]
    return ExtremePointSet(
        dims=dims,
        marginals=marginals,
        points=points,
        scanned=counts["scanned"],
        prefiltered=counts["prefiltered"],
        nonsingular=counts["nonsingular"],
        feasible=counts["feasible"],
    )
