import numpy as np
import pytest

from lplr.phantom import MODIFIED_SHEPP_LOGAN, pixel_coordinates, shepp_logan


def covers(e, x, y):
    """Point-in-rotated-ellipse test written out independently."""
    _, a, b, x0, y0, ang = e
    t = np.radians(ang)
    u = (x - x0) * np.cos(t) + (y - y0) * np.sin(t)
    v = -(x - x0) * np.sin(t) + (y - y0) * np.cos(t)
    return (u / a) ** 2 + (v / b) ** 2 <= 1


class TestPhantom:
    def test_range_and_shape(self):
        P = shepp_logan(64)
        assert P.shape == (64, 64)
        assert P.min() >= 0 and P.max() <= 1

    def test_corner_is_zero(self):
        P = shepp_logan(128)
        assert P[0, 0] == P[0, -1] == P[-1, 0] == P[-1, -1] == 0

    def test_center_pixel(self):
        P = shepp_logan(65)
        expected = sum(e[0] for e in MODIFIED_SHEPP_LOGAN if covers(e, 0.0, 0.0))
        assert P[32, 32] == pytest.approx(expected)
        assert expected == pytest.approx(0.2)

    def test_matches_pointwise_oracle(self):
        N = 40
        P = shepp_logan(N)
        xs, ys = pixel_coordinates(N)
        for i in range(0, N, 3):
            for j in range(0, N, 3):
                v = sum(e[0] for e in MODIFIED_SHEPP_LOGAN if covers(e, xs[j], ys[i]))
                assert P[i, j] == pytest.approx(min(max(v, 0), 1))

    def test_mirror_symmetry_outside_asymmetric_ellipses(self):
        N = 256
        P = shepp_logan(N)
        xs, ys = pixel_coordinates(N)
        X, Y = np.meshgrid(xs, ys)
        mask = np.zeros_like(P, dtype=bool)
        for idx in (2, 3, 7, 9):
            e = MODIFIED_SHEPP_LOGAN[idx]
            mask |= covers(e, X, Y) | covers(e, -X, Y)
        diff = P - P[:, ::-1]
        assert np.all(diff[~mask] == 0)
        assert np.any(diff[mask] != 0)

    def test_deterministic(self):
        np.testing.assert_array_equal(shepp_logan(32), shepp_logan(32))

    def test_min_size(self):
        with pytest.raises(ValueError):
            shepp_logan(8)
