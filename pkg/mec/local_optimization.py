"""
Entropy-decreasing local moves on two-marginal couplings.

Each move rewrites a 2 x 2 or 2 x n submatrix so that row and column sums stay exact
while mass concentrates on fewer cells. ``local_optimize`` applies them until none is
strict, and ``verify_local_optimal`` checks the structural conditions such a fixed point
satisfies.
"""

import itertools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.special import entr

from .couplings import Coupling, Distribution, kappa as structure_constant
from .errors import NotTwoMarginal, StepLimitExceeded, TooLarge
from .exact import as_rational
from .support_graph import SupportSet, classify

DEFAULT_MAX_STEPS = 10**4
STRICT_DECREASE = 1e-12


def _swap_rows(a):
    return a[::-1, :]


def _swap_columns(a):
    return a[:, ::-1]


def _swap_both(a):
    return a[::-1, ::-1]


def _transpose(a):
    return a.T


# name -> (forward, inverse) on 2 x 2 arrays
RELABELINGS: Dict[str, Tuple[Callable, Callable]] = {
    "identity": (lambda a: a, lambda a: a),
    "swap_rows_and_columns": (_swap_both, _swap_both),
    "transpose": (_transpose, _transpose),
    "transpose_swap_rows_and_columns": (
        lambda a: _swap_both(a.T),
        lambda a: _swap_both(a).T,
    ),
    "swap_rows": (_swap_rows, _swap_rows),
    "swap_columns": (_swap_columns, _swap_columns),
    "transpose_swap_rows": (lambda a: _swap_rows(a.T), lambda a: _swap_rows(a).T),
    "transpose_swap_columns": (lambda a: _swap_columns(a.T), lambda a: _swap_columns(a).T),
}
LEMMA1_ORDER = ("identity", "swap_columns")
LEMMA2_ORDER = tuple(RELABELINGS)


@dataclass(frozen=True)
class Move:
    """A transformed submatrix, the mass ``b`` moved and the relabelling used."""

    values: np.ndarray
    b: Fraction
    relabel: str


@dataclass(frozen=True)
class TransformStep:
    """One applied move: kind, 1-based rows and columns of the submatrix, mass moved."""

    kind: str
    rows: Tuple[int, ...]
    cols: Tuple[int, ...]
    b: Fraction
    relabel: str = "identity"


def _as_exact(matrix):
    arr = np.array(matrix, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for index, v in np.ndenumerate(arr):
        out[index] = as_rational(v)
    return out


def _concentrate(a):
    """Move b = a12 ^ a21 from the off-diagonal onto the diagonal."""
    b = min(a[0, 1], a[1, 0])
    out = a.copy()
    out[0, 0] += b
    out[1, 1] += b
    out[0, 1] -= b
    out[1, 0] -= b
    return out, b


def lemma1_transform(matrix) -> Optional[Move]:
    """
    Diagonal concentration of a 2 x 2 block whose larger diagonal entry dominates both
    off-diagonal entries. Tries the block as given, then with its columns swapped; on a
    tie between the two labellings the one moving b > 0 wins. Returns None when neither
    labelling qualifies.
    """
    a = _as_exact(matrix)
    fallback = None
    for name in LEMMA1_ORDER:
        forward, inverse = RELABELINGS[name]
        r = forward(a)
        if max(r[0, 0], r[1, 1]) >= max(r[0, 1], r[1, 0]):
            out, b = _concentrate(r)
            move = Move(inverse(out).copy(), b, name)
            if b > 0:
                return move
            fallback = fallback or move
    return fallback


def lemma2_transform(matrix) -> Optional[Move]:
    """
    Diagonal concentration of a 2 x 2 block under some relabelling with
    row 1 >= row 2, column 1 >= column 2 and row 1 >= column 1 (sums).
    """
    a = _as_exact(matrix)
    for name in LEMMA2_ORDER:
        forward, inverse = RELABELINGS[name]
        r = forward(a)
        rows, cols = r.sum(axis=1), r.sum(axis=0)
        if rows[0] >= rows[1] and cols[0] >= cols[1] and rows[0] >= cols[0]:
            out, b = _concentrate(r)
            return Move(inverse(out).copy(), b, name)
    return None


def lemma_2xn_transform(matrix) -> Optional[Move]:
    """
    Merge a 2 x n block in which one row has a single positive entry.

    With that row's entry a at column c and the other row's entries x_c (column c) and
    x_K (the remaining columns), the move applies when sum(x_K) <= a <= x_c + sum(x_K):
    the other row collects everything in column c, and the single-entry row takes over
    x_K while keeping a - sum(x_K) in column c.
    """
    a = _as_exact(matrix)
    if a.ndim != 2 or a.shape[0] != 2 or a.shape[1] < 2:
        return None
    for r in (1, 0):
        positive = [k for k in range(a.shape[1]) if a[r, k] > 0]
        if len(positive) != 1:
            continue
        c, other = positive[0], 1 - r
        rest = sum((a[other, k] for k in range(a.shape[1]) if k != c), Fraction(0))
        if rest <= a[r, c] <= a[other, c] + rest:
            out = a.copy()
            out[other, c] = a[other, c] + rest
            out[r, c] = a[r, c] - rest
            for k in range(a.shape[1]):
                if k != c:
                    out[r, k] = a[other, k]
                    out[other, k] = Fraction(0)
            return Move(out, rest, "identity" if r == 1 else "swap_rows")
    return None


def _shannon_nats(values):
    return float(entr(np.array([float(v) for v in np.ravel(values)])).sum())


def _decreases(before, after):
    return _shannon_nats(before) - _shannon_nats(after) > STRICT_DECREASE


def _pairs(n):
    return itertools.combinations(range(n), 2)


def _find_2x2(a, transform, strict):
    for (i, k), (j, l) in itertools.product(_pairs(a.shape[0]), _pairs(a.shape[1])):
        block = a[np.ix_([i, k], [j, l])]
        move = transform(block)
        if move is not None and strict(block, move):
            return (i, k), (j, l), move
    return None


def _find_2xn(a):
    m, n = a.shape
    for i, k in _pairs(m):
        for r, other in ((i, k), (k, i)):
            for c in range(n):
                if a[r, c] <= 0:
                    continue
                # columns where only the other row has mass
                free = [j for j in range(n) if j != c and a[r, j] == 0 and a[other, j] > 0]
                for size in range(1, len(free) + 1):
                    for subset in itertools.combinations(free, size):
                        cols = (c, *subset)
                        block = a[np.ix_([i, k], list(cols))]
                        move = lemma_2xn_transform(block)
                        if move is not None and _decreases(block, move.values):
                            return (i, k), cols, move
    return None


def _scan(a):
    """First strict move in scan order, as (kind, rows, cols, move, transposed)."""
    for transposed in (False, True):
        view = a.T if transposed else a
        found = _find_2x2(view, lemma1_transform, lambda block, move: move.b > 0)
        if found:
            return ("lemma1", *found, transposed)
    for transposed in (False, True):
        view = a.T if transposed else a
        found = _find_2x2(view, lemma2_transform, lambda block, move: _decreases(block, move.values))
        if found:
            return ("lemma2", *found, transposed)
    for transposed in (False, True):
        found = _find_2xn(a.T if transposed else a)
        if found:
            return ("lemma2xn", *found, transposed)
    return None


def _matrix_of(coupling):
    if coupling.ndim != 2:
        raise NotTwoMarginal(f"local moves need a matrix, got a {coupling.ndim}-way coupling")
    return np.array(coupling.values, dtype=object)


def local_optimize(coupling: Coupling, max_steps: int = DEFAULT_MAX_STEPS):
    """
    Apply strict local moves until none is left.

    Moves are searched in a fixed order: diagonal concentration under a dominant
    diagonal, then under the row/column sum conditions, then 2 x n merges over every
    admissible column subset; each family is tried on the matrix and then on its
    transpose. A diagonal concentration counts as strict when it moves b > 0, the others
    when Shannon entropy drops.

    Returns
    -------
    (Coupling, list of TransformStep)

    Raises
    ------
    StepLimitExceeded
        After ``max_steps`` moves.
    """
    a = _matrix_of(coupling)
    steps: List[TransformStep] = []
    while True:
        found = _scan(a)
        if found is None:
            break
        if len(steps) >= max_steps:
            raise StepLimitExceeded(f"{max_steps} local moves applied without reaching a fixed point")
        kind, rows, cols, move, transposed = found
        target = a.T if transposed else a
        target[np.ix_(list(rows), list(cols))] = move.values
        if transposed:
            rows, cols = cols, rows
        steps.append(
            TransformStep(
                kind=kind,
                rows=tuple(i + 1 for i in rows),
                cols=tuple(j + 1 for j in cols),
                b=move.b,
                relabel=f"transpose+{move.relabel}" if transposed else move.relabel,
            )
        )
    return Coupling(a, coupling.marginals), steps


def greedy_coupling(p: Distribution, q: Distribution) -> Coupling:
    """
    Match the largest remaining row mass with the largest remaining column mass until
    all mass is placed. Ties go to the smallest index.
    """
    rows, cols = list(p.weights), list(q.weights)
    values = np.full((len(rows), len(cols)), Fraction(0), dtype=object)
    while any(rows):
        i = max(range(len(rows)), key=lambda k: (rows[k], -k))
        j = max(range(len(cols)), key=lambda k: (cols[k], -k))
        v = min(rows[i], cols[j])
        values[i, j] += v
        rows[i] -= v
        cols[j] -= v
    return Coupling(values, (p, q))


@dataclass
class LocalOptimalityReport:
    """Per-check outcome of ``verify_local_optimal``; witnesses use 1-based indices."""

    complete_forest: bool
    is_tree: bool
    tree_required: bool
    row_dichotomy: bool
    row_witnesses: List[dict] = field(default_factory=list)
    column_dichotomy: bool = True
    column_witnesses: List[dict] = field(default_factory=list)
    support_size: int = 0
    support_bounds: Optional[Tuple[int, int]] = None
    support_size_ok: Optional[bool] = None
    kappa: Optional[int] = None

    @property
    def structure_ok(self):
        return self.complete_forest and (self.is_tree or not self.tree_required)

    @property
    def passed(self):
        return (
            self.structure_ok
            and self.row_dichotomy
            and self.column_dichotomy
            and self.support_size_ok is not False
        )


def _dichotomy_failures(a):
    """
    Row pairs (x, y) sharing a positive column c that a 2 x 2 merge could improve.

    For each column k where only row x has mass, the block on columns {c, k} is fine when
    a[y, c] absorbs all of row x there, or when a[x, k] dominates a[x, c] + a[y, c].
    Wider blocks are not checked: a block can fail both conditions while every one of its
    two-column blocks passes and no local move applies.
    """
    m, n = a.shape
    witnesses = []
    for x, y in itertools.permutations(range(m), 2):
        for c in range(n):
            if a[x, c] <= 0 or a[y, c] <= 0:
                continue
            for k in range(n):
                if k == c or a[x, k] <= 0 or a[y, k] != 0:
                    continue
                if a[y, c] >= a[x, c] + a[x, k] or a[x, k] >= a[x, c] + a[y, c]:
                    continue
                witnesses.append({"rows": (x + 1, y + 1), "columns": tuple(sorted((c + 1, k + 1)))})
    return witnesses


def verify_local_optimal(coupling: Coupling, kappa: Optional[int] = None) -> LocalOptimalityReport:
    """
    Check the structure of a local optimal coupling.

    1. The support is a complete forest, and a tree when kappa = 1.
    2. No two-column block of a row pair admits an improving 2 x 2 merge (see ``_dichotomy_failures``).
    3. The same for column pairs.
    4. m + n - kappa <= |V| <= m + n - 1.

    When ``kappa`` is not given it is computed; if that exceeds the permutation budget a
    warning is issued and check 4 is skipped (``support_size_ok`` stays None).
    """
    a = _matrix_of(coupling)
    m, n = a.shape
    support = SupportSet.of(coupling)
    classification = classify(support)
    if kappa is None:
        p, q = coupling.marginals
        try:
            kappa = structure_constant(p, q)
        except TooLarge as err:
            warnings.warn(f"support-size check skipped: {err}", UserWarning)

    row_witnesses = _dichotomy_failures(a)
    column_witnesses = [
        {"rows": w["columns"], "columns": w["rows"]} for w in _dichotomy_failures(a.T)
    ]
    report = LocalOptimalityReport(
        complete_forest=classification.is_forest and classification.is_complete,
        is_tree=classification.is_tree,
        tree_required=kappa == 1,
        row_dichotomy=not row_witnesses,
        row_witnesses=row_witnesses,
        column_dichotomy=not column_witnesses,
        column_witnesses=column_witnesses,
        support_size=len(support),
        kappa=kappa,
    )
    if kappa is not None:
        report.support_bounds = (m + n - kappa, m + n - 1)
        report.support_size_ok = m + n - kappa <= len(support) <= m + n - 1
    return report
