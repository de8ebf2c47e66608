"""JSON readers and writers shared by the command line tools."""

from __future__ import annotations

import json
import math
import sys

import numpy as np

from .matrix_core import MAX_DIM, BlockPartition
from .semigroup import AdditiveSemigroup

SCHEMA_VERSION = "1.0"


class InputError(Exception):
    """Malformed or unreadable input file."""


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _real_array(obj, shape, what):
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{what} is not an array of numbers") from exc
    if arr.shape != shape:
        raise InputError(f"{what} has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{what} has non-finite entries")
    return arr


def parse_family(data, source="family"):
    """{"n": int, "generators": [n x n matrices], "labels": [str]?} -> (matrices, labels)."""
    if not isinstance(data, dict) or "generators" not in data:
        raise InputError(f"{source}: expected an object with a 'generators' list")
    gens = data["generators"]
    if not isinstance(gens, list) or not gens:
        raise InputError(f"{source}: 'generators' must be a nonempty list")
    try:
        n = int(data.get("n", len(gens[0])))
    except (TypeError, ValueError) as exc:
        raise InputError(f"{source}: bad dimension n") from exc
    if not 1 <= n <= MAX_DIM:
        raise InputError(f"{source}: dimension {n} outside 1..{MAX_DIM}")
    mats = [_real_array(g, (n, n), f"{source}: generator {k}") for k, g in enumerate(gens)]
    labels = data.get("labels") or [f"A{k + 1}" for k in range(len(mats))]
    if len(labels) != len(mats):
        raise InputError(f"{source}: {len(labels)} labels for {len(mats)} generators")
    return mats, [str(x) for x in labels]


def load_family(path):
    return parse_family(read_json(path), str(path))


def family_to_dict(mats, labels=None):
    mats = [np.asarray(a, dtype=float) for a in mats]
    return {
        "schema_version": SCHEMA_VERSION,
        "n": int(mats[0].shape[0]),
        "generators": [a.tolist() for a in mats],
        "labels": list(labels) if labels else [f"A{k + 1}" for k in range(len(mats))],
    }


def parse_partition(data):
    try:
        return BlockPartition.from_dict(data)
    except (AttributeError, TypeError, ValueError) as exc:
        raise InputError(f"bad partition: {exc}") from exc


def load_semigroup(path):
    """An AdditiveSemigroup, either standalone or the g2_v0 field of an analysis report."""
    data = read_json(path)
    if isinstance(data, dict) and isinstance(data.get("g2_v0"), dict):
        data = data["g2_v0"]
    if not isinstance(data, dict) or "n" not in data:
        raise InputError(f"{path}: expected an object with 'n', 'nat_generators', 'lattice_generators'")
    try:
        n = int(data["n"])
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: bad dimension n") from exc
    if not 1 <= n <= MAX_DIM:
        raise InputError(f"{path}: dimension {n} outside 1..{MAX_DIM}")
    nat = [_real_array(u, (n,), f"{path}: nat generator {k}") for k, u in enumerate(data.get("nat_generators", []))]
    lat = [
        _real_array(w, (n,), f"{path}: lattice generator {k}")
        for k, w in enumerate(data.get("lattice_generators", []))
    ]
    return AdditiveSemigroup(nat, lat, n)


def _default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (set, tuple)):
        return list(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _clean(obj):
    # JSON has no inf/nan; map them to null so output stays strict
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(obj):
    """Canonical JSON: sorted keys, fixed indentation, repr floats."""
    obj = json.loads(json.dumps(obj, default=_default))
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(obj, path=None):
    text = dumps(obj)
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
