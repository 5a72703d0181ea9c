import json
import os
import re
import sys

import numpy as np
import pandas as pd

from .couplings import Coupling
from .errors import MecError, ShapeMismatch
from .exact import format_fraction

SEPARATORS = {".csv": ",", ".tsv": "\t", ".txt": r"\s+"}


def _read_table(path, sep):
    """One marginal per line; lines may have different lengths."""
    with open(path, "r") as f:
        width = max(len(re.split(sep, line.strip())) for line in f if line.strip())
    frame = pd.read_csv(
        path,
        sep=sep,
        header=None,
        names=range(width),
        dtype=str,
        engine="python",
        skip_blank_lines=True,
    )
    return [
        [v.strip() for v in row if isinstance(v, str) and v.strip()]
        for row in frame.itertuples(index=False)
    ]


def load_data(input):
    """
    Load a problem, coupling or result file.

    Parameters:
    - input: str path, or already-loaded data (returned unchanged)

    Returns:
    - data: dict. JSON numbers keep their literal text so decimals stay exact;
      table files give ``{"marginals": [[...], ...]}`` with one marginal per line.
    """
    if not isinstance(input, str):
        return input

    if input.endswith(".json"):
        with open(input, "r") as f:
            data = json.load(f, parse_float=str, parse_int=str)

    elif input.endswith(tuple(SEPARATORS)):
        data = {"marginals": _read_table(input, SEPARATORS[os.path.splitext(input)[1]])}

    else:
        raise MecError(
            "Unsupported file format. Please provide a .json, .csv, .tsv or .txt file."
        )

    return data


def _flat_values(values, dims):
    arr = np.array(values, dtype=object)
    if arr.ndim > 1:
        if tuple(arr.shape) != tuple(dims):
            raise ShapeMismatch(f"values of shape {arr.shape} do not match dims {tuple(dims)}")
        return arr
    if arr.size != int(np.prod(dims)):
        raise ShapeMismatch(f"{arr.size} values given for dims {tuple(dims)}")
    return arr.reshape(tuple(dims))


def read_couplings(document):
    """
    Coupling tensors stored in a coupling file or a result file.

    A coupling file holds ``dims``, ``values`` (row-major, flat or nested) and optionally
    ``marginals``. A result file holds ``dims``, ``marginals`` and ``minimizers``.

    Returns:
    - list of (label, values, marginals or None); values is an object array of the raw
      entries, still to be parsed exactly.
    """
    document = load_data(document)
    if "minimizers" in document:
        dims = [int(m) for m in document["dims"]]
        return [
            (f"minimizer {k}", _flat_values(record["values"], dims), document.get("marginals"))
            for k, record in enumerate(document["minimizers"], start=1)
        ]
    values = document["values"]
    if "dims" in document:
        dims = [int(m) for m in document["dims"]]
    else:
        dims = list(np.array(values, dtype=object).shape)
    return [("coupling", _flat_values(values, dims), document.get("marginals"))]


def coupling_record(coupling: Coupling, entropy=None):
    """JSON-ready description of a coupling: 1-based support, exact and float values."""
    record = {
        "support": [list(cell) for cell in coupling.support_cells()],
        "values": [format_fraction(v) for v in coupling.values.flat],
        "float_values": [float(v) for v in coupling.values.flat],
    }
    if entropy is not None:
        record["entropy"] = entropy
    if coupling.witness_ranks:
        record["witness_rank"] = coupling.witness_ranks[0]
        record["witness_count"] = len(coupling.witness_ranks)
    return record


def marginals_record(marginals):
    return [[format_fraction(w) for w in dist] for dist in marginals]


class ResultSaver:
    """Write JSON documents to stdout or to a file."""

    def __init__(self, out=None, indent=2):
        self.out = out
        self.indent = indent
        if self.out:
            out_dir = os.path.dirname(out) or "."
            os.makedirs(out_dir, exist_ok=True)

    def dumps(self, document):
        return json.dumps(document, indent=self.indent) + "\n"

    def save_results(self, document):
        text = self.dumps(document)
        if self.out is None:
            sys.stdout.write(text)
            sys.stdout.flush()
            return None
        with open(self.out, "w") as f:
            f.write(text)
        return self.out
