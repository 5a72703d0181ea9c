"""Entropy functionals evaluated in floating point, and minimizer selection."""

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.special import entr

from .couplings import Coupling
from .errors import AlphaIsOne, EmptySet, MecError, NonFiniteResult
from .exact import as_rational

DEFAULT_BASE = 2.0
DEFAULT_TIE_TOL = 1e-9
GRID_RTOL = 1e-12
KINDS = ("shannon", "renyi", "tsallis", "phi_h")


@dataclass(frozen=True)
class EntropyFunctional:
    """
    A Schur-concave entropy: Shannon, Renyi, Tsallis or a generic (phi, h) pair.

    Use the ``shannon``, ``renyi``, ``tsallis`` and ``phi_h`` constructors rather than
    building instances directly.
    """

    kind: str
    base: Optional[float] = None
    alpha: Optional[float] = None
    phi: Optional[Callable] = field(default=None, compare=False)
    h: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MecError(f"unknown entropy kind {self.kind!r}; expected one of {KINDS}")
        if self.kind in ("renyi", "tsallis"):
            if self.alpha is None:
                raise MecError(f"{self.kind} entropy needs an alpha")
            if self.alpha == 1:
                raise AlphaIsOne(f"alpha = 1 is the Shannon limit of {self.kind} entropy; use shannon")
            if self.alpha < 0:
                raise MecError(f"alpha = {self.alpha} is negative")
        if self.base is not None and self.base <= 1:
            raise MecError(f"logarithm base {self.base} must exceed 1")
        if self.kind == "phi_h" and (self.phi is None or self.h is None):
            raise MecError("a (phi, h) entropy needs both functions")

    @property
    def label(self):
        if self.kind == "shannon":
            return f"shannon(base={self.base:g})"
        if self.kind == "renyi":
            return f"renyi(alpha={self.alpha:g}, base={self.base:g})"
        if self.kind == "tsallis":
            return f"tsallis(alpha={self.alpha:g})"
        return "phi_h"

    def params(self):
        return {"kind": self.kind, "alpha": self.alpha, "base": self.base}

    def __call__(self, values):
        return evaluate(self, values)

    def as_phi_h(self):
        """The same functional written as H(p) = phi(sum_i h(p_i))."""
        if self.kind == "phi_h":
            return self
        if self.kind == "shannon":
            scale = math.log(self.base)
            return phi_h(lambda s: s / scale, entr, check=False)
        alpha = self.alpha

        def power(x):
            x = np.asarray(x, dtype=float)
            out = np.zeros_like(x)
            np.power(x, alpha, out=out, where=x > 0)
            return out

        if self.kind == "renyi":
            scale = (1 - alpha) * math.log(self.base)
            return phi_h(lambda s: math.log(s) / scale, power, check=False)
        return phi_h(lambda s: (s - 1) / (1 - alpha), power, check=False)


def shannon(base: float = DEFAULT_BASE) -> EntropyFunctional:
    return EntropyFunctional("shannon", base=float(base))


def renyi(alpha: float, base: float = DEFAULT_BASE) -> EntropyFunctional:
    return EntropyFunctional("renyi", base=float(base), alpha=float(alpha))


def tsallis(alpha: float) -> EntropyFunctional:
    return EntropyFunctional("tsallis", alpha=float(alpha))


def phi_h(phi: Callable, h: Callable, check: bool = True) -> EntropyFunctional:
    """
    Generic entropy H(p) = phi(sum_i h(p_i)).

    With ``check`` the monotonicity conditions are spot-checked (see ``check_phi_h``);
    failures only warn.
    """
    if check:
        check_phi_h(phi, h)
    return EntropyFunctional("phi_h", phi=phi, h=h)


def from_name(kind: str, alpha=None, base=DEFAULT_BASE) -> EntropyFunctional:
    """Built-in functional by name, as used in problem files and on the command line."""
    kind = kind.lower()
    if kind == "shannon":
        return shannon(base)
    if kind == "renyi":
        return renyi(alpha, base)
    if kind == "tsallis":
        return tsallis(alpha)
    raise MecError(f"unknown entropy kind {kind!r}; expected shannon, renyi or tsallis")


def _h_sum(h, x):
    try:
        terms = np.asarray(h(x), dtype=float)
    except (TypeError, ValueError):
        # scalar-only h
        return float(sum(h(float(v)) for v in x))
    if terms.shape == x.shape:
        return float(terms.sum())
    return float(sum(h(float(v)) for v in x))


def check_phi_h(phi: Callable, h: Callable, n_c: int = 10, n_x: int = 100) -> List[str]:
    """
    Sample the monotonicity conditions of a (phi, h) entropy.

    For c on an even grid of (0, 1] and x on [0, c/2) (endpoint excluded), with
    h_c(x) = h(x) + h(c - x), the checks are:

    * ``phi_monotone``: phi strictly monotone over the sampled sums,
    * ``h_c_monotone``: h_c strictly monotone in x,
    * ``phi_h_c_increasing``: phi(h_c(x)) strictly increasing in x.

    Returns the names of the failed checks; each failure also issues a warning.
    """
    failed = []
    sums_seen = []
    for c in np.linspace(1.0 / n_c, 1.0, n_c):
        x = np.linspace(0.0, c / 2, n_x + 1)[:-1]
        h_c = np.array([_h_sum(h, np.array([v, c - v])) for v in x])
        sums_seen.append(h_c)
        steps = np.diff(h_c)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            failed.append("h_c_monotone")
        composed = np.diff([phi(s) for s in h_c])
        if not np.all(composed > 0):
            failed.append("phi_h_c_increasing")

    grid = np.unique(np.concatenate(sums_seen))
    grid = grid[np.isfinite(grid)]
    # sums that differ only by rounding are one point
    if grid.size > 1:
        distinct = np.diff(grid) > GRID_RTOL * np.maximum(1.0, np.abs(grid[1:]))
        grid = grid[np.concatenate(([True], distinct))]
    phi_steps = np.diff([phi(s) for s in grid])
    if grid.size > 1 and not (np.all(phi_steps > 0) or np.all(phi_steps < 0)):
        failed.append("phi_monotone")

    failed = sorted(set(failed), key=failed.index)
    for name in failed:
        warnings.warn(f"(phi, h) entropy fails the sampled {name} condition", UserWarning)
    return failed


def _as_float(v):
    # literal strings ("1/4", "0.35") go through the exact parser
    if isinstance(v, (float, np.floating)):
        return float(v)
    return float(as_rational(v))


def _as_floats(values):
    if isinstance(values, Coupling):
        return values.to_float().ravel()
    return np.array([_as_float(v) for v in np.asarray(values, dtype=object).ravel()])


def evaluate(f: EntropyFunctional, values) -> float:
    """
    Entropy of a coupling (or any nonnegative array, not necessarily normalised).

    Exact values are converted to floats here and nowhere earlier. Zero cells contribute
    nothing: 0 log 0 = 0 and 0^alpha = 0.

    Raises
    ------
    NonFiniteResult
        If the value is NaN or infinite.
    """
    x = _as_floats(values)
    positive = x[x > 0]
    if f.kind == "shannon":
        result = entr(x).sum() / math.log(f.base)
    elif f.kind == "renyi":
        with np.errstate(divide="ignore"):
            result = np.log(np.power(positive, f.alpha).sum()) / ((1 - f.alpha) * math.log(f.base))
    elif f.kind == "tsallis":
        result = (np.power(positive, f.alpha).sum() - x.sum()) / (1 - f.alpha)
    else:
        result = f.phi(_h_sum(f.h, x))
    result = float(result)
    if not math.isfinite(result):
        raise NonFiniteResult(f"{f.label} evaluates to {result}")
    return result


@dataclass
class MinimizationReport:
    """
    Result of minimising an entropy over a set of extreme points.

    ``values[k]`` is the entropy of the k-th point; ``minimizers`` are the points within
    the tie tolerance of ``minimum``, in the order of the input set. ``exact_profile_tie``
    is True when all minimizers have the same multiset of exact cell values (so their
    entropies agree for every functional).
    """

    functional: EntropyFunctional
    minimum: float
    minimizers: List[Coupling]
    minimizer_indices: List[int]
    values: List[float]
    tie_tol: float
    exact_profile_tie: bool

    def __len__(self):
        return len(self.minimizers)


def _profile(coupling):
    return sorted(v for v in coupling.values.flat if v != 0)


def min_entropy(f: EntropyFunctional, points: Sequence[Coupling], tie_tol: float = DEFAULT_TIE_TOL) -> MinimizationReport:
    """
    Evaluate ``f`` on every extreme point and return all points attaining the minimum.

    Raises
    ------
    EmptySet
        If ``points`` is empty.
    """
    points = list(points)
    if not points:
        raise EmptySet("no extreme points to minimise over")
    values = [evaluate(f, point) for point in points]
    minimum = min(values)
    indices = [k for k, v in enumerate(values) if v - minimum <= tie_tol]
    minimizers = [points[k] for k in indices]
    first = _profile(minimizers[0])
    return MinimizationReport(
        functional=f,
        minimum=minimum,
        minimizers=minimizers,
        minimizer_indices=indices,
        values=values,
        tie_tol=tie_tol,
        exact_profile_tie=all(_profile(m) == first for m in minimizers[1:]),
    )


def marginal_entropies(f: EntropyFunctional, marginals) -> List[float]:
    """Entropy of each marginal; the joint minimum is never below the largest of these."""
    return [evaluate(f, list(w)) for w in marginals]
