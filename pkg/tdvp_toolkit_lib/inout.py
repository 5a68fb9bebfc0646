"""I/O functions."""

import csv
import gzip
import json
from pathlib import Path
from typing import List, Union

import numpy as np

from tdvp_toolkit_lib import config
from tdvp_toolkit_lib import lindblad
from tdvp_toolkit_lib import misc
from tdvp_toolkit_lib import polynomial


OUTPUT_FORMATS = ("csv", "json-lines")


def load_json(path: Union[str, Path], keys_to_int=False):
    """Loads content of a JSON file.

    :param path: Path to the JSON file. If ".json.gz" extension, opens with gzip.
    :return: Content of the loaded JSON file.
    """
    path = Path(path)
    assert path.as_posix().endswith((".json", ".json.gz")), f"{path} should end with .json or .json.gz extension"

    # Keys to integers.
    def convert_keys_to_int(x):
        return {int(k) if k.lstrip("-").isdigit() else k: v for k, v in x.items()}

    if path.as_posix().endswith(".json.gz"):
        f = gzip.open(path, "rt", encoding="utf8")
    else:
        f = open(path, "r")
    if keys_to_int:
        content = json.load(f, object_hook=lambda x: convert_keys_to_int(x))
    else:
        content = json.load(f)
    f.close()
    return content


def save_json(path: Union[str, Path], content, verbose=False):
    """Saves the provided content to a JSON file (keys sorted, one entry per line).

    :param path: Path to the output JSON file.
    :param content: Dictionary/list to save.
    """
    path = Path(path)
    assert path.as_posix().endswith(".json"), f"{path} should end with .json extension"

    with open(path, "w") as f:
        if isinstance(content, dict):
            f.write("{\n")
            content_sorted = sorted(content.items(), key=lambda x: x[0])
            for elem_id, (k, v) in enumerate(content_sorted):
                f.write('  "{}": {}'.format(k, json.dumps(v, sort_keys=True)))
                if elem_id != len(content) - 1:
                    f.write(",")
                f.write("\n")
            f.write("}")
        elif isinstance(content, list):
            f.write("[\n")
            for elem_id, elem in enumerate(content):
                f.write("  {}".format(json.dumps(elem, sort_keys=True)))
                if elem_id != len(content) - 1:
                    f.write(",")
                f.write("\n")
            f.write("]")
        else:
            json.dump(content, f, sort_keys=True)
    if verbose:
        misc.log(f"Saved {path}")


def format_float(x, digits=None):
    if digits is None:
        digits = config.csv_significant_digits
    return "{:.{}g}".format(float(x), digits)


class TrajectoryWriter:
    """Writes trajectory rows to a CSV (with header) or JSON-lines file.

    :param path: Output path.
    :param columns: Column names, in output order.
    :param fmt: 'csv' or 'json-lines'.
    """

    def __init__(self, path: Union[str, Path], columns: List[str], fmt=None):
        if fmt is None:
            fmt = config.default_output_format
        if fmt not in OUTPUT_FORMATS:
            raise ValueError("Unknown output format: {}".format(fmt))
        self.path = Path(path)
        self.columns = list(columns)
        self.fmt = fmt
        self.n_rows = 0
        self._f = open(self.path, "w", newline="")
        if fmt == "csv":
            self._writer = csv.writer(self._f, lineterminator="\n")
            self._writer.writerow(self.columns)

    def write_row(self, row: dict):
        missing = [c for c in self.columns if c not in row]
        if missing:
            raise ValueError("Row misses columns: {}".format(missing))
        if self.fmt == "csv":
            self._writer.writerow([format_float(row[c]) for c in self.columns])
        else:
            self._f.write(json.dumps({c: float(row[c]) for c in self.columns}) + "\n")
        self.n_rows += 1

    def close(self):
        self._f.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        self.close()


def load_trajectory(path: Union[str, Path]):
    """Loads a trajectory file written by TrajectoryWriter.

    :param path: Path to a .csv or .jsonl file.
    :return: Dict {column: 1D ndarray}.
    """
    path = Path(path)
    rows = []
    if path.suffix == ".csv":
        with open(path, "r", newline="") as f:
            reader = csv.DictReader(f)
            for r in reader:
                rows.append({k: float(v) for k, v in r.items()})
    else:
        with open(path, "r") as f:
            for line in f:
                if line.strip():
                    rows.append(json.loads(line))
    if not rows:
        return {}
    return {k: np.array([r[k] for r in rows]) for k in rows[0]}


def trajectory_extension(fmt):
    return ".csv" if fmt == "csv" else ".jsonl"


def _parse_terms(entries, n_modes, where):
    """Second-quantized terms from their JSON form.

    Each entry is {"coef": x or [re, im], "ops": [[mode, "+" or "-"], ...]}.
    """
    terms = []
    for i, e in enumerate(entries):
        try:
            coef = e["coef"]
            if isinstance(coef, list):
                coef = complex(coef[0], coef[1])
            ops = []
            for m, kind in e["ops"]:
                if kind not in ("+", "-"):
                    raise ValueError("operator kind must be '+' or '-', got {!r}".format(kind))
                ops.append((int(m), kind == "+"))
        except (KeyError, TypeError, ValueError, IndexError) as ex:
            raise misc.ConfigError("{} term {}: {}".format(where, i, ex))
        terms.append((coef, ops))
    try:
        return polynomial.to_majorana_polynomial(terms, n_modes)
    except ValueError as ex:
        raise misc.ConfigError("{}: {}".format(where, ex))


def load_spec_file(path: Union[str, Path]):
    """Loads a generic LindbladSpec from a JSON file.

    Format: {"n_modes": N, "hamiltonian": [term, ...],
    "jumps": [{"rate": kappa, "terms": [term, ...]}, ...],
    "initial_occupied": [mode, ...]} with terms as in _parse_terms.
    "initial_occupied" (optional) selects the initial Fock basis state.

    :param path: Path to the JSON file.
    :return: Tuple (LindbladSpec, list of initially occupied modes or None).
    """
    content = load_json(path)
    try:
        n_modes = int(content["n_modes"])
    except (KeyError, TypeError, ValueError):
        raise misc.ConfigError("{}: missing or invalid 'n_modes'".format(path))
    unknown = set(content) - {"n_modes", "hamiltonian", "jumps", "initial_occupied"}
    if unknown:
        raise misc.ConfigError("{}: unknown keys {}".format(path, sorted(unknown)))

    H = _parse_terms(content.get("hamiltonian", []), n_modes, "hamiltonian")
    jumps = []
    for i, j in enumerate(content.get("jumps", [])):
        if "rate" not in j or "terms" not in j:
            raise misc.ConfigError("jump {}: expected 'rate' and 'terms'".format(i))
        jumps.append(lindblad.Jump(_parse_terms(j["terms"], n_modes, "jump {}".format(i)), float(j["rate"])))
    try:
        spec = lindblad.LindbladSpec(H, jumps)
    except ValueError as ex:
        raise misc.ConfigError("{}: {}".format(path, ex))
    occupied = None
    if "initial_occupied" in content:
        occupied = [int(m) for m in content["initial_occupied"]]
    return spec, occupied
