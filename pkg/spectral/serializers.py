"""
JSON and CSV representations of spectral fields.
"""

import csv
import itertools

import numpy as np
from rest_framework import serializers

from core.exceptions import LabError
from spectral.fields import FourierField, GridField
from spectral.params import KAPPA_EXPLICIT, KAPPA_MODES, ProblemParams


class FourierEntrySerializer(serializers.Serializer):
    k = serializers.ListField(child=serializers.IntegerField(), allow_empty=False)
    re = serializers.FloatField()
    im = serializers.FloatField()


class FourierFieldSerializer(serializers.Serializer):
    """
    Sparse form of a FourierField: parameters plus the nonzero entries sorted by k.
    """

    N = serializers.IntegerField(min_value=1)
    T = serializers.FloatField()
    s = serializers.FloatField()
    m = serializers.FloatField(min_value=0.0)
    K = serializers.IntegerField(min_value=1)
    M = serializers.IntegerField(min_value=4)
    kappa_mode = serializers.ChoiceField(choices=KAPPA_MODES, default=KAPPA_EXPLICIT)
    real = serializers.BooleanField(default=True)
    entries = FourierEntrySerializer(many=True)

    def to_representation(self, instance: FourierField):
        params = instance.params
        return {
            "N": params.dim,
            "T": params.period,
            "s": params.order,
            "m": params.mass,
            "K": params.cutoff,
            "M": params.grid,
            "kappa_mode": params.kappa_mode,
            "real": instance.real,
            "entries": [{"k": list(k), "re": c.real, "im": c.imag} for k, c in instance.entries()],
        }

    def validate(self, attrs):
        try:
            attrs["params"] = ProblemParams(
                dim=attrs["N"],
                period=attrs["T"],
                order=attrs["s"],
                mass=attrs["m"],
                cutoff=attrs["K"],
                grid=attrs["M"],
                kappa_mode=attrs["kappa_mode"],
            )
        except LabError as exc:
            raise serializers.ValidationError(str(exc)) from exc

        for entry in attrs["entries"]:
            k = entry["k"]
            if len(k) != attrs["N"]:
                raise serializers.ValidationError({"entries": f"index {k} does not have {attrs['N']} components"})
            if max(abs(i) for i in k) > attrs["K"]:
                raise serializers.ValidationError({"entries": f"index {k} exceeds the cutoff {attrs['K']}"})
        return attrs

    def create(self, validated_data) -> FourierField:
        params = validated_data["params"]
        coeffs = np.zeros(params.shape, dtype=np.complex128)
        for entry in validated_data["entries"]:
            index = tuple(i + params.cutoff for i in entry["k"])
            coeffs[index] = complex(entry["re"], entry["im"])
        return FourierField(params, coeffs, real=validated_data["real"])


def write_grid_csv(g: GridField, path) -> None:
    """
    One row per grid point: the index tuple, then the value (repr keeps every bit).
    """
    dim = g.params.dim
    header = [f"j{axis + 1}" for axis in range(dim)] + ["value"]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for index in itertools.product(range(g.params.grid), repeat=dim):
            writer.writerow([*index, repr(float(g.values[index]))])


def read_grid_csv(path, params: ProblemParams) -> GridField:
    values = np.zeros((params.grid,) * params.dim)
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        next(reader)
        for row in reader:
            index = tuple(int(i) for i in row[:-1])
            values[index] = float(row[-1])
    return GridField(params, values)
