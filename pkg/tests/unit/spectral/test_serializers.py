"""
Unit tests for the field JSON/CSV formats.
"""

import numpy as np

from spectral.serializers import FourierFieldSerializer, read_grid_csv, write_grid_csv
from spectral.services import product_sine, random_field, to_grid
from tests.factories.spectral import ProblemParamsFactory


class TestFourierFieldSerializer:
    def test_sparse_representation(self, params):
        data = FourierFieldSerializer(product_sine(params)).data

        assert data["N"] == 1
        assert data["K"] == params.cutoff
        assert [entry["k"] for entry in data["entries"]] == [[-1], [1]]

    def test_load_rebuilds_the_field(self, params, rng):
        u = random_field(params, rng)
        serializer = FourierFieldSerializer(data=FourierFieldSerializer(u).data)

        assert serializer.is_valid(), serializer.errors
        loaded = serializer.save()

        assert loaded.params == params
        np.testing.assert_array_equal(loaded.coeffs, u.coeffs)

    def test_index_beyond_cutoff_rejected(self, params):
        data = FourierFieldSerializer(product_sine(params)).data
        data["entries"] = [{"k": [params.cutoff + 1], "re": 1.0, "im": 0.0}]

        serializer = FourierFieldSerializer(data=data)

        assert not serializer.is_valid()
        assert "entries" in serializer.errors

    def test_invalid_params_rejected(self, params):
        data = dict(FourierFieldSerializer(product_sine(params)).data)
        data["s"] = 1.2

        assert not FourierFieldSerializer(data=data).is_valid()


def test_grid_csv_keeps_every_bit(params, rng, tmp_path):
    grid = to_grid(random_field(params, rng))
    path = tmp_path / "u.csv"

    write_grid_csv(grid, path)
    loaded = read_grid_csv(path, params)

    np.testing.assert_array_equal(loaded.values, grid.values)
    assert path.read_text().splitlines()[0] == "j1,value"


def test_grid_csv_header_in_two_dimensions(rng, tmp_path):
    params = ProblemParamsFactory(planar=True)
    write_grid_csv(to_grid(random_field(params, rng)), tmp_path / "u.csv")

    assert (tmp_path / "u.csv").read_text().splitlines()[0] == "j1,j2,value"
