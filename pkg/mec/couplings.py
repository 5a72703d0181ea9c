import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import reduce
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import (
    LengthMismatch,
    NonPositiveEntry,
    ShapeMismatch,
    SumMismatch,
    SumNotOne,
    TooLarge,
)
from .exact import as_rational, format_fraction

DEFAULT_KAPPA_BUDGET = math.factorial(8) ** 2


@dataclass(frozen=True)
class Distribution:
    """A strictly positive exact probability vector."""

    weights: Tuple[Fraction, ...]

    def __len__(self):
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)

    def __getitem__(self, index):
        return self.weights[index]

    def cumulative(self):
        """Prefix sums F(1), ..., F(m); the last one is always 1."""
        return list(itertools.accumulate(self.weights))

    def permuted(self, order):
        """The distribution (w[order[0]], w[order[1]], ...) for a 0-based order."""
        return Distribution(tuple(self.weights[i] for i in order))

    def to_float(self):
        return np.array([float(w) for w in self.weights])

    def __str__(self):
        return "(" + ", ".join(format_fraction(w) for w in self.weights) + ")"


def validate_distribution(raw: Sequence, name: Optional[int] = None) -> Distribution:
    """
    Check that ``raw`` is an element of the strictly positive simplex.

    Parameters
    ----------
    raw : sequence
        Exact entries (Fractions, ints or decimal/fraction strings).
    name : int, optional
        1-based position of the marginal, used in error messages.

    Returns
    -------
    Distribution

    Raises
    ------
    ShapeMismatch
        Fewer than two entries.
    NonPositiveEntry
        Some entry is zero or negative.
    SumNotOne
        The entries do not add up to exactly 1; the message starts with the exact
        deficit (or excess).
    """
    where = f" in marginal {name}" if name is not None else ""
    weights = tuple(as_rational(v) for v in raw)
    if len(weights) < 2:
        raise ShapeMismatch(f"{len(weights)} entries{where}; at least 2 are required")
    for index, w in enumerate(weights, start=1):
        if w <= 0:
            raise NonPositiveEntry(
                f"entry {index} is {format_fraction(w)}{where}; marginals must be strictly positive"
            )
    total = sum(weights)
    if total != 1:
        gap = 1 - total
        word = "deficit" if gap > 0 else "excess"
        raise SumNotOne(
            f"{word} {format_fraction(abs(gap))}{where}: entries sum to {format_fraction(total)}"
        )
    return Distribution(weights)


def _as_fraction_array(values):
    arr = np.array(values, dtype=object)
    if arr.ndim == 0:
        raise ShapeMismatch("a coupling needs at least one axis")
    out = np.empty(arr.shape, dtype=object)
    for index, v in np.ndenumerate(arr):
        out[index] = as_rational(v)
    return out


def marginals_of(values, dims=None):
    """
    Hyperplane sums of a rational tensor, one vector per axis.

    Raises
    ------
    ShapeMismatch
        When ``dims`` is given and differs from the tensor's shape.
    """
    arr = _as_fraction_array(values)
    if dims is not None and tuple(dims) != arr.shape:
        raise ShapeMismatch(f"tensor of shape {arr.shape} does not match dims {tuple(dims)}")
    sums = []
    for axis in range(arr.ndim):
        reduced = arr
        for other in sorted((a for a in range(arr.ndim) if a != axis), reverse=True):
            reduced = reduced.sum(axis=other)
        sums.append([Fraction(v) for v in reduced])
    return sums


@dataclass(frozen=True, eq=False)
class Coupling:
    """
    Dense exact coupling over [m_1] x ... x [m_d].

    ``values`` is an object-dtype numpy array of Fractions (read-only). Equality and hashing
    use the exact value tensor only; ``witness_ranks`` records which candidate subsets
    produced the coupling during enumeration and is ignored by comparisons.
    """

    values: np.ndarray
    marginals: Tuple[Distribution, ...]
    witness_ranks: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        values = _as_fraction_array(self.values)
        marginals = tuple(self.marginals)
        if len(marginals) != values.ndim or any(
            len(w) != m for w, m in zip(marginals, values.shape)
        ):
            raise ShapeMismatch(
                f"tensor of shape {values.shape} does not match marginal lengths "
                f"{tuple(len(w) for w in marginals)}"
            )
        for index, v in np.ndenumerate(values):
            if v < 0:
                cell = tuple(i + 1 for i in index)
                raise NonPositiveEntry(f"cell {cell} is {format_fraction(v)}; coupling values must be nonnegative")
        for axis, (observed, expected) in enumerate(zip(marginals_of(values), marginals)):
            for z, (s, w) in enumerate(zip(observed, expected), start=1):
                if s != w:
                    raise SumMismatch(
                        f"axis {axis + 1} coordinate {z}: hyperplane sums to {format_fraction(s)}, "
                        f"marginal is {format_fraction(w)} (deficit {format_fraction(w - s)})"
                    )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "marginals", marginals)
        object.__setattr__(self, "witness_ranks", tuple(self.witness_ranks))

    @property
    def dims(self):
        return self.values.shape

    @property
    def ndim(self):
        return self.values.ndim

    def key(self):
        """The exact value tensor as a flat tuple, the deduplication key."""
        return tuple(self.values.flat)

    def flat(self):
        return list(self.values.flat)

    def to_float(self):
        return np.array([float(v) for v in self.values.flat]).reshape(self.dims)

    def support_cells(self):
        """Sorted 1-based cells with a positive value."""
        return tuple(
            tuple(i + 1 for i in index) for index, v in np.ndenumerate(self.values) if v > 0
        )

    def __getitem__(self, cell):
        """Value at a 1-based cell."""
        return self.values[tuple(c - 1 for c in cell)]

    def __eq__(self, other):
        if not isinstance(other, Coupling):
            return NotImplemented
        return self.dims == other.dims and self.key() == other.key()

    def __hash__(self):
        return hash((self.dims, self.key()))

    def __repr__(self):
        return f"Coupling(dims={self.dims}, support={len(self.support_cells())} cells)"


def product_coupling(marginals: Sequence[Distribution]) -> Coupling:
    """The independent coupling p^1 (x) ... (x) p^d."""
    factors = [np.array(list(w), dtype=object) for w in marginals]
    return Coupling(reduce(np.multiply.outer, factors), tuple(marginals))


def marginal_coupling(coupling: Coupling, axes: Sequence[int]) -> Coupling:
    """
    Project a coupling onto a subset of its axes (0-based axis positions, kept in order).

    For a three-marginal coupling, ``axes=(0, 1)`` gives the joint law of the first two
    coordinates.
    """
    keep = sorted(set(axes))
    if not keep or keep[0] < 0 or keep[-1] >= coupling.ndim:
        raise ShapeMismatch(f"axes {tuple(axes)} are not axes of a {coupling.ndim}-way coupling")
    reduced = coupling.values
    for axis in sorted((a for a in range(coupling.ndim) if a not in keep), reverse=True):
        reduced = reduced.sum(axis=axis)
    return Coupling(reduced, tuple(coupling.marginals[a] for a in keep))


@dataclass(frozen=True)
class KappaWitness:
    """Structure constant with one permutation pair attaining it (1-based orders)."""

    kappa: int
    sigma: Tuple[int, ...]
    pi: Tuple[int, ...]
    common: Tuple[Fraction, ...]


def _prefix_classes(dist, common=None):
    classes = {}
    for order in itertools.permutations(range(len(dist))):
        prefix = frozenset(itertools.accumulate(dist[i] for i in order[:-1]))
        if common is not None:
            prefix &= common
        classes.setdefault(prefix, order)
    return classes


def kappa_witness(p: Distribution, q: Distribution, budget: int = DEFAULT_KAPPA_BUDGET) -> KappaWitness:
    """
    Structure constant of a pair by exhaustive search over permutation pairs.

    Orders are grouped by the set of proper prefix sums they produce, so each distinct
    prefix set is compared once. Ties keep the lexicographically first orders.

    Raises
    ------
    TooLarge
        If m! * n! exceeds ``budget``.
    """
    m, n = len(p), len(q)
    pairs = math.factorial(m) * math.factorial(n)
    if pairs > budget:
        raise TooLarge(f"{m}! * {n}! = {pairs} permutation pairs exceed the budget of {budget}")

    common = frozenset().union(*_prefix_classes(p)) & frozenset().union(*_prefix_classes(q))
    p_classes = _prefix_classes(p, common)
    q_classes = _prefix_classes(q, common)

    best = (0, next(iter(p_classes.values())), next(iter(q_classes.values())), frozenset())
    for p_prefix, sigma in p_classes.items():
        for q_prefix, pi in q_classes.items():
            shared = p_prefix & q_prefix
            if len(shared) > best[0]:
                best = (len(shared), sigma, pi, shared)
    count, sigma, pi, shared = best
    return KappaWitness(
        kappa=1 + count,
        sigma=tuple(i + 1 for i in sigma),
        pi=tuple(j + 1 for j in pi),
        common=tuple(sorted(shared)),
    )


def kappa(p: Distribution, q: Distribution, budget: int = DEFAULT_KAPPA_BUDGET) -> int:
    """Structure constant: 1 + the most prefix sums two rearrangements of p and q share."""
    return kappa_witness(p, q, budget).kappa


class MajorizationOrder(Enum):
    EQUAL = "Equal"
    STRICTLY_BELOW = "StrictlyBelow"
    STRICTLY_ABOVE = "StrictlyAbove"
    INCOMPARABLE = "Incomparable"


def _flatten(x):
    return [as_rational(v) for v in np.asarray(x, dtype=object).ravel()]


def majorizes(x, y) -> MajorizationOrder:
    """
    Compare two vectors (or tensors, flattened) in the majorization order.

    STRICTLY_BELOW means x is strictly majorized by y: every sorted-descending prefix sum
    of x is at most the matching one of y and the sorted vectors differ.

    Raises
    ------
    LengthMismatch
        Different numbers of entries.
    SumMismatch
        Different totals.
    """
    xs, ys = _flatten(x), _flatten(y)
    if len(xs) != len(ys):
        raise LengthMismatch(f"{len(xs)} entries against {len(ys)}")
    if sum(xs) != sum(ys):
        raise SumMismatch(f"totals differ: {format_fraction(sum(xs))} against {format_fraction(sum(ys))}")
    xs.sort(reverse=True)
    ys.sort(reverse=True)
    if xs == ys:
        return MajorizationOrder.EQUAL
    fx = list(itertools.accumulate(xs))
    fy = list(itertools.accumulate(ys))
    if all(a <= b for a, b in zip(fx, fy)):
        return MajorizationOrder.STRICTLY_BELOW
    if all(a >= b for a, b in zip(fx, fy)):
        return MajorizationOrder.STRICTLY_ABOVE
    return MajorizationOrder.INCOMPARABLE
