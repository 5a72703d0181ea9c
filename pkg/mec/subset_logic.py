import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import OutOfBounds, RankOutOfRange


@dataclass(frozen=True)
class CandidateSubset:
    """
    The rank-th s-subset of [N] in lexicographic order (1-based rank and indices),
    with the cells the indices stand for when the grid is known.
    """

    rank: int
    indices: Tuple[int, ...]
    cells: Optional[Tuple[Tuple[int, ...], ...]] = None

    def __len__(self):
        return len(self.indices)


def linearize(cell, dims):
    """
    1-based row-major index of a 1-based cell; i = (t-1)n + r for a matrix.

    Args:
        cell (sequence of int): Coordinates, each in [1, m_t].
        dims (sequence of int): Axis sizes.
    Returns:
        int: Index in [1, prod(dims)].
    Raises:
        OutOfBounds: If the cell does not lie in the grid.
    """
    cell, dims = tuple(cell), tuple(dims)
    if len(cell) != len(dims) or any(not 1 <= c <= m for c, m in zip(cell, dims)):
        raise OutOfBounds(f"cell {cell} is outside the grid {dims}")
    return int(np.ravel_multi_index(tuple(c - 1 for c in cell), dims)) + 1


def delinearize(index, dims):
    """Inverse of ``linearize``."""
    dims = tuple(dims)
    size = math.prod(dims)
    if not 1 <= index <= size:
        raise OutOfBounds(f"linear index {index} is outside [1, {size}]")
    return tuple(int(c) + 1 for c in np.unravel_index(index - 1, dims))


def all_cells(dims):
    """Every cell of the grid, in linear-index order."""
    return [delinearize(i, dims) for i in range(1, math.prod(dims) + 1)]


def subset_count(N, s):
    return math.comb(N, s)


def unrank_subset(rank, N, s, dims=None):
    """
    Lexicographic unranking of s-subsets of [N].

    Args:
        rank (int): 1-based position, 1 <= rank <= C(N, s).
        N (int): Ground set size.
        s (int): Subset size.
        dims (sequence of int, optional): Grid whose cells the indices denote.
    Returns:
        CandidateSubset: Indices i_1 < ... < i_s (and cells when ``dims`` is given).
    Raises:
        RankOutOfRange: If the rank is not in [1, C(N, s)].
    """
    total = subset_count(N, s)
    if not 1 <= rank <= total:
        raise RankOutOfRange(f"rank {rank} is outside [1, {total}] for {s}-subsets of [{N}]")
    remainder = rank - 1
    indices = []
    x = 1
    for position in range(1, s + 1):
        # skip every subset whose next element is x
        while math.comb(N - x, s - position) <= remainder:
            remainder -= math.comb(N - x, s - position)
            x += 1
        indices.append(x)
        x += 1
    return _candidate(rank, tuple(indices), dims)


def rank_subset(indices, N):
    """1-based lexicographic rank of a strictly increasing index tuple drawn from [N]."""
    indices = tuple(indices)
    s = len(indices)
    if any(b <= a for a, b in zip(indices, indices[1:])) or (
        indices and not (1 <= indices[0] and indices[-1] <= N)
    ):
        raise RankOutOfRange(f"{indices} is not an increasing subset of [{N}]")
    rank = 1
    previous = 0
    for position, value in enumerate(indices, start=1):
        for skipped in range(previous + 1, value):
            rank += math.comb(N - skipped, s - position)
        previous = value
    return rank


def iter_subsets(start, stop, N, s):
    """
    Yield ``(rank, indices)`` for ranks start..stop (inclusive) in lexicographic order.

    Only the first subset is unranked; the rest follow by the successor rule.
    """
    if start > stop:
        return
    current = list(unrank_subset(start, N, s).indices)
    rank = start
    while True:
        yield rank, tuple(current)
        if rank == stop:
            return
        # rightmost position that can still grow
        i = s - 1
        while current[i] == N - s + i + 1:
            i -= 1
        current[i] += 1
        for j in range(i + 1, s):
            current[j] = current[j - 1] + 1
        rank += 1


def _candidate(rank, indices, dims):
    cells = tuple(delinearize(i, dims) for i in indices) if dims is not None else None
    return CandidateSubset(rank, indices, cells)


def candidate_subset(rank, dims):
    """Unrank directly on a grid: N = prod(dims), s = sum(m_t) - (d - 1)."""
    dims = tuple(dims)
    return unrank_subset(rank, math.prod(dims), sum(dims) - (len(dims) - 1), dims)


def rank_ranges(total, n_chunks):
    """Split [1, total] into at most n_chunks contiguous, nearly equal (start, stop) ranges."""
    n_chunks = max(1, min(n_chunks, total))
    edges = [total * k // n_chunks for k in range(n_chunks + 1)]
    return [(lo + 1, hi) for lo, hi in zip(edges, edges[1:]) if hi > lo]
