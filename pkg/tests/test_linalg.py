import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lplr.linalg import (
    AspectRatioError,
    as_matrix,
    best_rank_k,
    condition_number,
    lstsq,
    pinv,
    singular_values,
    spectrum_stats,
    svd,
)

from conftest import low_rank


class TestInput:
    def test_vector_becomes_row(self):
        assert as_matrix([1.0, 2.0]).shape == (1, 2)

    @pytest.mark.parametrize("bad", [np.array([[np.nan]]), np.array([[1.0, np.inf]]),
                                     np.zeros((0, 3)), np.zeros((2, 2, 2))])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            as_matrix(bad)


class TestSvd:
    def test_invariants(self, rng):
        A = rng.standard_normal((30, 20))
        res = svd(A)
        assert res.rank == 20
        np.testing.assert_allclose(res.U.T @ res.U, np.eye(20), atol=1e-8)
        np.testing.assert_allclose(res.V.T @ res.V, np.eye(20), atol=1e-8)
        assert np.all(np.diff(res.s) <= 0)
        err = np.linalg.norm((res.U * res.s) @ res.V.T - A)
        assert err <= 1e-8 * np.linalg.norm(A)

    def test_numerical_rank(self, rng):
        A = low_rank(rng, 40, 30, 6)
        assert svd(A).rank == 6

    def test_zero_matrix(self):
        res = svd(np.zeros((4, 3)))
        assert res.rank == 0 and res.U.shape == (4, 0)

    def test_tolerance_range(self):
        with pytest.raises(ValueError):
            svd(np.eye(2), rank_tolerance=0.0)

    def test_singular_values_include_zeros(self):
        s = singular_values(np.diag([3.0, 0.0, 1.0]))
        np.testing.assert_allclose(s, [3, 1, 0])


class TestTruncation:
    def test_tail_energy(self, rng):
        A = rng.standard_normal((15, 12))
        s = np.linalg.svd(A, compute_uv=False)
        Ak, tail = best_rank_k(A, 4)
        assert np.linalg.matrix_rank(Ak) == 4
        assert tail == pytest.approx(np.sum(s[4:] ** 2))
        assert np.linalg.norm(Ak - A) ** 2 == pytest.approx(tail)

    def test_bad_k(self):
        with pytest.raises(ValueError):
            best_rank_k(np.eye(3), 4)


class TestLeastSquares:
    def test_pinv_matches_numpy(self, rng):
        A = low_rank(rng, 12, 9, 4)
        np.testing.assert_allclose(pinv(A), np.linalg.pinv(A), atol=1e-10)

    def test_closed_form_full_rank(self, rng):
        Phi = rng.standard_normal((50, 8))
        Y = rng.standard_normal((50, 3))
        X = lstsq(Phi, Y)
        np.testing.assert_allclose(X, np.linalg.lstsq(Phi, Y, rcond=None)[0], atol=1e-10)

    def test_min_norm_when_rank_deficient(self, rng):
        Phi = low_rank(rng, 20, 10, 3)
        Y = rng.standard_normal((20, 2))
        X = lstsq(Phi, Y)
        np.testing.assert_allclose(X, np.linalg.pinv(Phi) @ Y, atol=1e-9)

    def test_cg_agrees_with_closed_form(self, rng):
        Phi = rng.standard_normal((60, 10))
        Y = rng.standard_normal((60, 7))
        X, info = lstsq(Phi, Y, method="conjugate_gradient", tol=1e-12, return_info=True)
        assert info.converged
        np.testing.assert_allclose(X, lstsq(Phi, Y), atol=1e-8)

    def test_cg_rank_deficient_min_norm(self, rng):
        Phi = low_rank(rng, 30, 10, 4)
        Y = rng.standard_normal((30, 3))
        X = lstsq(Phi, Y, method="conjugate_gradient", tol=1e-12)
        np.testing.assert_allclose(X, np.linalg.pinv(Phi) @ Y, atol=1e-6)

    def test_cg_iteration_cap(self, rng):
        Phi = rng.standard_normal((40, 12)) @ np.diag(np.geomspace(1, 1e4, 12))
        Y = rng.standard_normal((40, 2))
        X, info = lstsq(Phi, Y, method="conjugate_gradient", max_iter=1, return_info=True)
        assert not info.converged and info.iterations == 1
        assert np.all(np.isfinite(X))

    def test_vector_rhs(self, rng):
        Phi = rng.standard_normal((10, 3))
        y = rng.standard_normal(10)
        assert lstsq(Phi, y).shape == (3,)

    def test_errors(self, rng):
        with pytest.raises(ValueError):
            lstsq(np.eye(3), np.ones((4, 1)))
        with pytest.raises(ValueError):
            lstsq(np.eye(3), np.ones((3, 1)), method="qr")

    # subnormal designs have pseudo-inverses beyond float64 range
    @given(arrays(np.float64, (12, 4), elements=st.floats(-10, 10).map(lambda v: v if abs(v) > 1e-6 else 0.0)),
           arrays(np.float64, (12, 2), elements=st.floats(-10, 10)))
    def test_residual_orthogonal_to_range(self, Phi, Y):
        X = lstsq(Phi, Y)
        r = Phi @ X - Y
        scale = (np.linalg.norm(Phi) + 1) * (np.linalg.norm(Y) + 1)
        assert np.linalg.norm(Phi.T @ r) <= 1e-8 * scale


class TestSpectrum:
    def test_condition_number(self):
        assert condition_number(np.diag([4.0, 2.0, 0.5])) == 8.0

    def test_stats_invariants(self, rng):
        A = rng.standard_normal((50, 400))
        st_ = spectrum_stats(A, k=5, m=10, eps=0.1)
        assert st_.gamma == 40.0
        assert st_.kappa_A >= st_.kappa_Ak >= 1
        assert st_.row_norm_bound >= np.max(np.abs(A))
        assert st_.margin > 0
        assert st_.kappa <= st_.kappa_A

    def test_aspect_ratio_guard(self, rng):
        with pytest.raises(AspectRatioError):
            spectrum_stats(rng.standard_normal((20, 30)), k=2, m=20, eps=0.1)

    def test_rank_guard(self, rng):
        with pytest.raises(ValueError):
            spectrum_stats(low_rank(rng, 20, 400, 3), k=5, m=10, eps=0.1)

    def test_exact_rank_k_uses_kappa_ak(self, rng):
        A = low_rank(rng, 30, 500, 4)
        st_ = spectrum_stats(A, k=4, m=10, eps=0.1)
        assert st_.kappa == pytest.approx(st_.kappa_Ak)
        assert st_.sigma_at(5) == 0.0
