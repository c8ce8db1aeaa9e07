import numpy as np
import pytest

from lplr.verify import (
    equalization_bound,
    sandwich_instance,
    verify_equalization,
    verify_maxnorm,
    verify_sketched_ls,
    verify_wishart_trace,
    wishart_trace_theory,
)


class TestWishart:
    def test_theory_arithmetic(self):
        assert wishart_trace_theory(2, 5) == 2.0
        assert wishart_trace_theory(4, 20) == pytest.approx(16 / 15)

    @pytest.mark.parametrize("m,d", [(4, 20), (1, 10)])
    def test_monte_carlo(self, m, d):
        res = verify_wishart_trace(m, d, trials=5000, seed=1)
        assert res.passed(0.05)
        assert res.resampled == 0

    def test_guard(self):
        with pytest.raises(ValueError):
            verify_wishart_trace(5, 6)

    def test_reproducible(self):
        a = verify_wishart_trace(3, 12, trials=50, seed=4)
        assert a == verify_wishart_trace(3, 12, trials=50, seed=4)


class TestEqualization:
    def test_bound_value(self):
        assert equalization_bound(4, 1.0) == pytest.approx(1 / 225 + np.sqrt(2) / np.sqrt(np.pi * np.e))
        assert equalization_bound(4, 1.0) == pytest.approx(0.489, abs=1e-3)

    def test_b4(self):
        assert verify_equalization(256, 32, 4, 1.0, trials=2000, seed=0).passed

    def test_high_bits_is_clipping_only(self):
        res = verify_equalization(256, 32, 16, 1.0, trials=500, seed=0)
        assert res.quantization_term < 1e-8
        assert res.passed

    def test_zero_vector(self):
        res = verify_equalization(64, 8, 6, 1.0, trials=100, seed=0, x=np.zeros(64))
        t = 1.0 / np.sqrt(8)
        delta = 2 * t / 63
        assert res.mc_error <= delta**2 * 8 / 4

    def test_x_norm_checked(self):
        with pytest.raises(ValueError):
            verify_equalization(4, 2, 3, 1.0, trials=1, x=np.ones(4))


class TestSketchedLeastSquares:
    def test_default_instance(self):
        res = verify_sketched_ls(m=10, B=4, trials=200, seed=0)
        assert res.lower_ok and res.upper_ok
        assert res.optimum < res.mc_mean < res.upper

    def test_instance_shape(self):
        Phi, Y = sandwich_instance()
        assert Phi.shape == (60, 40) and Y.shape == (60, 30)
        assert np.linalg.matrix_rank(Phi) == 4

    def test_guard(self):
        Phi, Y = sandwich_instance()
        with pytest.raises(ValueError):
            verify_sketched_ls(Phi, Y, m=5)


class TestMaxNorm:
    def test_rarely_exceeded(self, rng):
        A = rng.standard_normal((80, 300)) / 20
        assert verify_maxnorm(A, 10, 0.1, trials=100).passed
