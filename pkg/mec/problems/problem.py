import json
import os
import sys
from typing import Optional, Sequence, Union

from sklearn.utils import Bunch

from mec.couplings import DEFAULT_KAPPA_BUDGET, kappa_witness, validate_distribution
from mec.entropy import DEFAULT_BASE, DEFAULT_TIE_TOL, from_name, marginal_entropies, min_entropy
from mec.errors import InvalidOption, MecError, NotTwoMarginal, ShapeMismatch
from mec.extreme_enumeration import DEFAULT_BUDGET, enumerate_extremes
from mec.preprocessing import load_data


def _real_option(name, value):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise InvalidOption(f"{name} must be a number, got {value!r}") from None


def _count_option(name, value):
    """Whole-number options; 100000000, "1e8" and 1e8 are accepted, 2.5 is not."""
    if isinstance(value, bool):
        raise InvalidOption(f"{name} must be a whole number, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        try:
            return int(value)
        except ValueError:
            pass
    number = _real_option(name, value)
    if not number.is_integer():
        raise InvalidOption(f"{name} must be a whole number, got {value!r}")
    return int(number)


class Problem:
    """
    A minimum-entropy coupling problem: marginals, entropy functional and run options.
    """

    def __init__(
        self,
        config_path: Optional[str] = None,
        marginals: Union[str, Sequence[Sequence], None] = None,
        entropy: str = "shannon",
        alpha: Optional[float] = None,
        base: float = DEFAULT_BASE,
        tie_tol: float = DEFAULT_TIE_TOL,
        prefilter: bool = True,
        budget: int = DEFAULT_BUDGET,
        threads: int = 1,
        kappa_budget: int = DEFAULT_KAPPA_BUDGET,
        output_prefix: Optional[str] = None,
    ):
        if config_path is None and marginals is None:
            raise ValueError("Either config_path or marginals must be provided.")
        if config_path is not None:
            settings = self.parse_config(config_path)
            marginals = settings["marginals"]
            entropy = settings.get("entropy", entropy)
            alpha = settings.get("alpha", alpha)
            base = settings.get("base", base)
            tie_tol = settings.get("tie_tol", tie_tol)
            prefilter = settings.get("prefilter", prefilter)
            budget = settings.get("budget", budget)
            threads = settings.get("threads", threads)
            kappa_budget = settings.get("kappa_budget", kappa_budget)
            output_prefix = settings.get("output_prefix", output_prefix)

        # ─── Store raw inputs ───────────────────────────────────────────
        self._marginals_input = marginals
        self._entropy_input = entropy
        self._alpha_input = alpha
        self._base_input = base
        self._tie_tol_input = tie_tol
        self._prefilter_input = prefilter
        self._budget_input = budget
        self._threads_input = threads
        self._kappa_budget_input = kappa_budget
        self._output_prefix_input = output_prefix

        # ─── Run options ────────────────────────────────────────────────
        self.tie_tol = _real_option("tie_tol", tie_tol)
        self.prefilter = bool(prefilter)
        self.budget = _count_option("budget", budget)
        self.threads = max(1, _count_option("threads", threads))
        self.kappa_budget = _count_option("kappa_budget", kappa_budget)
        self.output_prefix = output_prefix

        # ─── Entropy functional (validated eagerly) ─────────────────────
        self.functional = from_name(
            entropy,
            alpha=None if alpha is None else _real_option("alpha", alpha),
            base=_real_option("base", base),
        )

        # ─── Loaded state ───────────────────────────────────────────────
        self.marginals = None

    @classmethod
    def from_file(cls, path, **overrides):
        """
        Build a problem from a JSON problem file (or a table of marginals).

        ``overrides`` take precedence over the file; pass only the values actually set.
        """
        document = load_data(path)
        if "marginals" not in document:
            raise ShapeMismatch(f"{path} has no marginals")
        entropy = document.get("entropy") or {}
        options = document.get("options") or {}
        kwargs = {"marginals": document["marginals"]}
        if "kind" in entropy:
            kwargs["entropy"] = entropy["kind"]
        for key in ("alpha", "base"):
            if entropy.get(key) is not None:
                kwargs[key] = entropy[key]
        for key in ("tie_tol", "prefilter", "budget", "threads"):
            if options.get(key) is not None:
                kwargs[key] = options[key]
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kwargs)

    def load_data(self):
        """Validate the marginals into exact distributions."""
        raw = load_data(self._marginals_input)
        if isinstance(raw, dict):
            raw = raw["marginals"]
        if len(raw) < 2:
            raise ShapeMismatch(f"{len(raw)} marginal given; a coupling needs at least 2")
        self.marginals = tuple(
            validate_distribution(w, name=t) for t, w in enumerate(raw, start=1)
        )
        return self.marginals

    @property
    def dims(self):
        if self.marginals is None:
            self.load_data()
        return tuple(len(w) for w in self.marginals)

    @property
    def params(self):
        return {
            "marginals": self.marginals,
            "prefilter": self.prefilter,
            "budget": self.budget,
            "threads": self.threads,
        }

    def extremes(self, progress=False):
        if self.marginals is None:
            self.load_data()
        return enumerate_extremes(**self.params, progress=progress)

    def kappa(self):
        """Structure constant with a witness; two-marginal problems only."""
        if self.marginals is None:
            self.load_data()
        if len(self.marginals) != 2:
            raise NotTwoMarginal(f"the structure constant needs 2 marginals, got {len(self.marginals)}")
        return kappa_witness(*self.marginals, budget=self.kappa_budget)

    def solve(self, progress=False):
        """
        Enumerate extreme points and minimise the entropy over them.

        Returns:
        - results: sklearn.Bunch with ``extremes``, ``report`` (MinimizationReport) and
          ``marginal_entropies``.
        """
        extremes = self.extremes(progress=progress)
        report = min_entropy(self.functional, extremes, tie_tol=self.tie_tol)
        return Bunch(
            extremes=extremes,
            report=report,
            marginal_entropies=marginal_entropies(self.functional, self.marginals),
        )

    def save_config(self):
        marginals = self._marginals_input
        if not isinstance(marginals, str):
            marginals = [[str(v) for v in w] for w in marginals]
        input_params = {
            "marginals": marginals,
            "entropy": self._entropy_input,
            "alpha": self._alpha_input,
            "base": self._base_input,
            "tie_tol": self._tie_tol_input,
            "prefilter": self._prefilter_input,
            "budget": self._budget_input,
            "threads": self._threads_input,
            "kappa_budget": self._kappa_budget_input,
            "output_prefix": self._output_prefix_input,
            "cmd": " ".join(sys.argv),
        }

        if self.output_prefix is None:
            output_prefix = f"{os.getcwd()}/mec"
        else:
            output_prefix = self.output_prefix

        config_path = f"{output_prefix}_config.json"
        with open(config_path, "w") as f:
            json.dump(input_params, f, indent=4, default=str)
        return config_path

    @staticmethod
    def parse_config(config_path: str):
        """Read a saved configuration back into keyword arguments."""
        with open(config_path, "r") as f:
            params = json.load(f, parse_float=str)
        params.pop("cmd", None)
        if "marginals" not in params:
            raise MecError(f"{config_path} has no marginals")
        return params
