"""
Writers for run artifacts. Output is deterministic: sorted keys, repr-exact floats, no timestamps.
"""

import csv
import json
import math
from dataclasses import fields, is_dataclass
from pathlib import Path

import numpy as np
import scipy
from django.conf import settings

from spectral.fields import FourierField
from spectral.serializers import FourierFieldSerializer


def versions() -> dict:
    return {"fractional_lab": settings.LAB_VERSION, "numpy": np.__version__, "scipy": scipy.__version__}


def to_jsonable(value):
    """
    Plain JSON values for reports: dataclasses become dicts, numpy scalars become Python numbers,
    and non-finite floats become the strings "inf", "-inf" and "nan".
    """
    if isinstance(value, FourierField):
        return FourierFieldSerializer(value).data
    if is_dataclass(value) and not isinstance(value, type):
        return {item.name: to_jsonable(getattr(value, item.name)) for item in fields(value)}
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isfinite(value):
            return value
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, complex):
        return {"re": to_jsonable(value.real), "im": to_jsonable(value.imag)}
    return value


class ArtifactWriter:
    """
    Writes the files of one run into its output directory. Every JSON artifact carries the
    config hash, the seed and the library versions.
    """

    def __init__(self, output_dir, config_hash: str, seed: int):
        self.root = Path(output_dir)
        self.config_hash = config_hash
        self.seed = seed
        self.written = []

    def path(self, name: str) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        return self.root / name

    def write_json(self, name: str, payload) -> Path:
        document = {
            "config_hash": self.config_hash,
            "seed": self.seed,
            "versions": versions(),
            "data": to_jsonable(payload),
        }
        target = self.path(name)
        with open(target, "w") as handle:
            json.dump(document, handle, sort_keys=True, indent=2, allow_nan=False)
            handle.write("\n")
        self.written.append(name)
        return target

    def write_csv(self, name: str, header, rows) -> Path:
        target = self.path(name)
        with open(target, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow([f"# config_hash={self.config_hash} seed={self.seed}"])
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(item) for item in row])
        self.written.append(name)
        return target

    def write_field(self, name: str, u: FourierField) -> Path:
        return self.write_json(name, {"field": FourierFieldSerializer(u).data})


def _cell(item):
    if isinstance(item, (float, np.floating)):
        return repr(float(item))
    if isinstance(item, (bool, np.bool_)):
        return "true" if item else "false"
    return item


def read_json(path) -> dict:
    with open(path) as handle:
        return json.load(handle)


def read_csv(path) -> list:
    """
    Rows after the provenance line, header included.
    """
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    return rows[1:]
