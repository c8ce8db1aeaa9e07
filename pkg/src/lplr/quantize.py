"""Uniformly dithered scalar quantizer.

A quantizer with dynamic range ``R`` and ``B`` bits places ``M = 2**B`` points
evenly on ``[-R, R]`` with spacing ``delta = 2R / (M - 1)``. An input in the
cell ``[q_k, q_{k+1})`` is rounded up with probability ``(x - q_k) / delta``
and down otherwise, which makes the output unbiased with error variance at
most ``delta**2 / 4``.

Codes are integer grid indices: code ``c`` stands for ``-R + c * delta``.
"""

from dataclasses import dataclass

import numpy as np

from . import _random

MAX_BITS = 32
ROUNDING_MODES = ("dithered", "nearest")


class SaturationError(ValueError):
    """An input fell outside ``[-R, R]``."""

    def __init__(self, message, value=None, index=None):
        super().__init__(message)
        self.value = value
        self.index = index


@dataclass(frozen=True)
class QuantizerSpec:
    """Grid definition for a symmetric uniform quantizer.

    ``dynamic_range == 0`` is a degenerate quantizer used only for all-zero
    inputs: every code decodes to 0.
    """

    dynamic_range: float
    bits: int

    def __post_init__(self):
        R = float(self.dynamic_range)
        if not np.isfinite(R) or R < 0:
            raise ValueError(f"dynamic range must be finite and >= 0, got {R}")
        if not 1 <= int(self.bits) <= MAX_BITS:
            raise ValueError(f"bits must lie in [1, {MAX_BITS}], got {self.bits}")
        object.__setattr__(self, "dynamic_range", R)
        object.__setattr__(self, "bits", int(self.bits))

    @property
    def levels(self):
        return 1 << self.bits

    @property
    def resolution(self):
        return 2.0 * self.dynamic_range / (self.levels - 1)

    @property
    def is_zero(self):
        return self.dynamic_range == 0.0

    def grid(self):
        return decode(np.arange(self.levels), self)


def decode(codes, spec):
    """Grid values for integer ``codes``.

    Written as ``R * (2c - (M-1)) / (M-1)`` so the end points come out as
    exactly ``-R`` and ``+R``.
    """
    codes = np.asarray(codes, dtype=np.int64)
    top = spec.levels - 1
    return spec.dynamic_range * ((2 * codes - top) / top)


def _positions(x, spec):
    """Continuous grid coordinate ``(x + R) / delta`` in ``[0, M-1]``."""
    top = spec.levels - 1
    p = (np.asarray(x, dtype=np.float64) / spec.dynamic_range + 1.0) * (0.5 * top)
    # inputs that sit on a grid point up to rounding noise decode exactly
    snapped = np.rint(p)
    near = np.abs(p - snapped) <= 16 * np.finfo(np.float64).eps * max(top, 1)
    p = np.where(near, snapped, p)
    return np.clip(p, 0.0, float(top))


def encode(X, spec, u=None, rounding="dithered"):
    """Vectorised quantization of an unsaturated array given dither ``u``.

    ``u`` holds one uniform variate in [0, 1) per entry and is ignored for
    ``rounding='nearest'``. The caller is responsible for saturation checks.
    """
    X = np.asarray(X, dtype=np.float64)
    if spec.is_zero:
        return np.zeros(X.shape, dtype=np.uint32)
    p = _positions(X, spec)
    if rounding == "nearest":
        # ties round up, matching floor(p + 1/2)
        return np.floor(p + 0.5).astype(np.uint32)
    if rounding != "dithered":
        raise ValueError(f"unknown rounding mode {rounding!r}")
    top = spec.levels - 1
    k = np.minimum(np.floor(p), top - 1)
    frac = p - k
    return (k + (u < frac)).astype(np.uint32)


def check_saturation(X, R):
    """Return ``(max_abs, saturated)`` with ``saturated`` iff max|X| > R."""
    X = np.asarray(X, dtype=np.float64)
    max_abs = float(np.max(np.abs(X))) if X.size else 0.0
    return max_abs, bool(max_abs > R)


def quantize_scalar(x, spec, rng, rounding="dithered"):
    """Quantize one real ``x`` using one draw from ``rng``; returns the code."""
    x = float(x)
    R = spec.dynamic_range
    if abs(x) > R:
        raise SaturationError(f"value {x!r} saturates quantizer with range {R!r}", value=x)
    u = rng.random()
    return int(encode(np.array([x]), spec, np.array([u]), rounding)[0])


def quantize_clipped(x, spec, rng):
    """Clipped dithered quantizer: inputs beyond ``+-R`` snap to the end codes.

    Here ``spec.dynamic_range`` plays the role of the clipping level ``t``.
    Works elementwise on arrays too; ``rng`` supplies one variate per entry.
    """
    x = np.asarray(x, dtype=np.float64)
    u = rng.random(x.shape)
    clipped = np.clip(x, -spec.dynamic_range, spec.dynamic_range)
    codes = encode(clipped, spec, u)
    return int(codes) if codes.ndim == 0 else codes


@dataclass(frozen=True)
class QuantizedMatrix:
    codes: np.ndarray
    spec: QuantizerSpec

    def __post_init__(self):
        codes = np.asarray(self.codes)
        if codes.ndim != 2:
            raise ValueError(f"codes must be 2-D, got shape {codes.shape}")
        if codes.size and (codes.min() < 0 or codes.max() >= self.spec.levels):
            raise ValueError(f"codes must lie in [0, {self.spec.levels - 1}]")
        object.__setattr__(self, "codes", codes.astype(np.uint32, copy=False))

    @property
    def shape(self):
        return self.codes.shape

    @property
    def payload_bits(self):
        return self.spec.bits * self.codes.size

    def __eq__(self, other):
        if not isinstance(other, QuantizedMatrix):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self.codes, other.codes)

    __hash__ = None


def quantize_matrix(X, spec, seed, rounding="dithered", stream=_random.DITHER):
    """Quantize every entry independently; deterministic given ``seed``.

    The dither for entry ``(i, j)`` is counter position ``i * cols + j`` of the
    stream keyed by ``(seed, stream)``.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"X must be 2-D, got shape {X.shape}")
    R = spec.dynamic_range
    bad = np.abs(X) > R
    if np.any(bad):
        i, j = (int(v) for v in np.argwhere(bad)[0])
        raise SaturationError(
            f"entry ({i}, {j}) = {X[i, j]!r} saturates quantizer with range {R!r}",
            value=float(X[i, j]), index=(i, j),
        )
    u = None
    if rounding == "dithered" and not spec.is_zero:
        u = _random.uniforms(_random.stream_key(seed, stream), X.shape)
    return QuantizedMatrix(encode(X, spec, u, rounding), spec)


def dequantize(Q):
    """Exact grid values of a :class:`QuantizedMatrix`."""
    if Q.spec.is_zero:
        return np.zeros(Q.codes.shape)
    return decode(Q.codes, Q.spec)
