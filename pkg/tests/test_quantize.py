import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lplr import _random
from lplr.quantize import (
    MAX_BITS,
    QuantizedMatrix,
    QuantizerSpec,
    SaturationError,
    check_saturation,
    decode,
    dequantize,
    encode,
    quantize_clipped,
    quantize_matrix,
    quantize_scalar,
)


def scalar_reference(x, R, B, u):
    """Per-entry rounding written directly from the grid definition."""
    M = 2**B
    delta = 2 * R / (M - 1)
    grid = [-R + c * delta for c in range(M)] if B <= 12 else None
    k = int(np.floor((x + R) / delta))
    k = min(max(k, 0), M - 2)
    lower = -R + k * delta
    p_up = (x - lower) / delta
    code = k + 1 if u < p_up else k
    if grid is not None:
        assert abs(grid[k] - lower) < 1e-12 * max(R, 1)
    return code


class TestSpec:
    def test_grid_endpoints_exact(self):
        for B in (1, 2, 7, 16, 31, 32):
            spec = QuantizerSpec(2.5, B)
            ends = decode([0, spec.levels - 1], spec)
            assert ends[0] == -2.5 and ends[1] == 2.5

    def test_resolution(self):
        spec = QuantizerSpec(1.0, 3)
        assert spec.levels == 8
        assert spec.resolution == pytest.approx(2 / 7)
        np.testing.assert_allclose(np.diff(spec.grid()), 2 / 7)

    @pytest.mark.parametrize("B", [0, MAX_BITS + 1, -3])
    def test_bad_bits(self, B):
        with pytest.raises(ValueError):
            QuantizerSpec(1.0, B)

    @pytest.mark.parametrize("R", [-1.0, np.inf, np.nan])
    def test_bad_range(self, R):
        with pytest.raises(ValueError):
            QuantizerSpec(R, 4)

    def test_zero_range_decodes_to_zero(self):
        spec = QuantizerSpec(0.0, 4)
        Q = quantize_matrix(np.zeros((3, 2)), spec, seed=1)
        np.testing.assert_array_equal(dequantize(Q), 0.0)


class TestEncode:
    def test_grid_points_are_fixed(self):
        spec = QuantizerSpec(3.0, 5)
        g = spec.grid()
        u = np.random.default_rng(0).random(g.size)
        for mode in ("dithered", "nearest"):
            np.testing.assert_array_equal(encode(g, spec, u, mode), np.arange(g.size))

    def test_matches_scalar_reference(self, rng):
        for _ in range(200):
            B = int(rng.integers(1, 10))
            R = float(rng.uniform(0.1, 5))
            x = float(rng.uniform(-R, R))
            u = float(rng.random())
            spec = QuantizerSpec(R, B)
            assert encode(np.array([x]), spec, np.array([u]))[0] == scalar_reference(x, R, B, u)

    def test_nearest_rounds_to_closest(self):
        spec = QuantizerSpec(1.0, 2)  # grid -1, -1/3, 1/3, 1
        x = np.array([-0.9, -0.5, 0.1, 0.6, 0.99])
        np.testing.assert_array_equal(encode(x, spec, rounding="nearest"), [0, 1, 2, 2, 3])

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            encode(np.zeros(2), QuantizerSpec(1, 2), np.zeros(2), "stochastic")

    @given(st.floats(-1, 1), st.integers(1, 20), st.floats(0, 1, exclude_max=True))
    def test_output_brackets_input(self, x, B, u):
        spec = QuantizerSpec(1.0, B)
        c = int(encode(np.array([x]), spec, np.array([u]))[0])
        assert 0 <= c < spec.levels
        y = float(decode(c, spec))
        assert abs(y - x) <= spec.resolution * (1 + 1e-9)

    def test_unbiased_and_variance(self, rng):
        spec = QuantizerSpec(1.0, 3)
        x = 0.123
        n = 200_000
        y = decode(encode(np.full(n, x), spec, rng.random(n)), spec)
        se = spec.resolution / 2 / np.sqrt(n)
        assert abs(y.mean() - x) < 4 * se
        assert y.var() <= spec.resolution**2 / 4 * 1.01

    def test_32_bit_codes(self):
        spec = QuantizerSpec(1.0, 32)
        Q = quantize_matrix(np.array([[1.0, -1.0, 0.25]]), spec, seed=0)
        assert Q.codes[0, 0] == 2**32 - 1 and Q.codes[0, 1] == 0
        assert abs(dequantize(Q)[0, 2] - 0.25) <= spec.resolution


class TestMatrix:
    def test_saturation_names_entry(self):
        X = np.array([[0.1, 0.2], [3.0, 0.0]])
        with pytest.raises(SaturationError) as info:
            quantize_matrix(X, QuantizerSpec(1.0, 4), seed=0)
        assert info.value.index == (1, 0)
        assert info.value.value == 3.0

    def test_check_saturation(self):
        assert check_saturation(np.array([0.5, -2.0]), 1.0) == (2.0, True)
        assert check_saturation(np.array([0.5, -1.0]), 1.0) == (1.0, False)

    def test_deterministic_in_seed(self, rng):
        X = rng.uniform(-1, 1, (20, 30))
        spec = QuantizerSpec(1.0, 3)
        a = quantize_matrix(X, spec, seed=7)
        assert a == quantize_matrix(X, spec, seed=7)
        assert a != quantize_matrix(X, spec, seed=8)

    def test_dither_layout_is_row_major_counter(self, rng):
        X = rng.uniform(-1, 1, (4, 5))
        spec = QuantizerSpec(1.0, 2)
        Q = quantize_matrix(X, spec, seed=3, stream=_random.DITHER)
        u = _random.uniforms(_random.stream_key(3, _random.DITHER), 20)
        expected = [scalar_reference(x, 1.0, 2, ui) for x, ui in zip(X.ravel(), u)]
        np.testing.assert_array_equal(Q.codes.ravel(), expected)

    def test_code_range_validated(self):
        with pytest.raises(ValueError):
            QuantizedMatrix(np.array([[4]]), QuantizerSpec(1.0, 2))

    def test_payload_bits(self):
        Q = quantize_matrix(np.zeros((3, 7)), QuantizerSpec(1.0, 5), seed=0)
        assert Q.payload_bits == 5 * 21


class TestScalarAndClipped:
    def test_scalar_saturates(self):
        with pytest.raises(SaturationError):
            quantize_scalar(1.5, QuantizerSpec(1.0, 4), np.random.default_rng(0))

    def test_scalar_on_grid(self):
        spec = QuantizerSpec(1.0, 1)
        assert quantize_scalar(1.0, spec, np.random.default_rng(0)) == 1

    def test_clipped_snaps_ends(self):
        spec = QuantizerSpec(0.5, 4)
        codes = quantize_clipped(np.array([-3.0, 3.0, 0.5]), spec, np.random.default_rng(0))
        np.testing.assert_array_equal(codes, [0, 15, 15])

    def test_clipped_scalar_returns_int(self):
        c = quantize_clipped(10.0, QuantizerSpec(1.0, 3), np.random.default_rng(0))
        assert c == 7 and isinstance(c, int)
