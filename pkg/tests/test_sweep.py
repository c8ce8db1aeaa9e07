import numpy as np
import pytest

from lplr.compressor import CompressionConfig, compress
from lplr.sweep import Budget, sweep


class TestSweep:
    def test_single_cell_equals_direct_call(self, rng):
        A = rng.standard_normal((40, 50))
        res = sweep(A, ["lplr"], [Budget(8, 8, 2)], seeds=[3])
        m = (2 * 40 * 50) // (8 * 40 + 8 * 50)
        _, report = compress(A, CompressionConfig(sketch_size=m, bits=8, seed=3))
        assert len(res.rows) == 1
        assert res.rows[0]["relative_error"] == report.relative_error
        assert res.summary[0]["width"] == m

    def test_deterministic_algorithm_zero_std(self, rng):
        A = rng.standard_normal((30, 30))
        res = sweep(A, ["dsvd"], [(8, 8, 2)], seeds=range(4),
                    options={"dsvd": {"rounding": "nearest"}})
        assert res.summary[0]["std_error"] == 0.0
        assert res.summary[0]["seeds"] == 4

    def test_grid_shape(self, rng):
        A = rng.random((30, 40))
        res = sweep(A, ["lplr", "lsvd", "dsvd", "nq"], [(8, 8, 1), (16, 16, 2)], seeds=[0, 1],
                    options={"lsvd": {"lsvd_rotation": True}})
        assert len(res.rows) == 16 and len(res.summary) == 8
        nq = [s for s in res.summary if s["label"] == "nq"]
        assert all(s["width"] is None for s in nq)
        assert all(r["wall_time"] > 0 for r in res.rows)

    def test_unknown_algorithm(self, rng):
        with pytest.raises(ValueError):
            sweep(rng.random((5, 5)), ["pca"], [(8, 8, 1)])

    def test_table_ordering_on_phantom(self):
        from lplr.phantom import shepp_logan
        A = shepp_logan(256)
        res = sweep(A, ["lsvd", "lplr", "nq"], [(8, 8, 1)], seeds=[0],
                    options={"lsvd": {"lsvd_rotation": True}, "nq": {"naive_rounding": "nearest"}})
        err = {s["label"]: s["mean_error"] for s in res.summary}
        assert err["lsvd"] < err["lplr"] < err["nq"]
