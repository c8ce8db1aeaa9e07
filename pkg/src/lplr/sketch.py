"""Gaussian sketching matrices and the randomized rangefinder."""

import warnings
from dataclasses import dataclass

import numpy as np

from . import _random
from .linalg import as_matrix


@dataclass(frozen=True)
class SketchConfig:
    input_cols: int
    sketch_size: int
    seed: int = 0

    def __post_init__(self):
        d, m = int(self.input_cols), int(self.sketch_size)
        if d < 1 or m < 1:
            raise ValueError(f"need d >= 1 and m >= 1, got d={d}, m={m}")
        if m > d / 4:
            warnings.warn(
                f"sketch size m={m} is not small relative to d={d}; "
                "the error bounds assume m << d",
                stacklevel=3,
            )


def gaussian_sketch(cfg, stream=_random.SKETCH):
    """``d x m`` matrix with i.i.d. N(0, 1/m) entries, deterministic in the seed."""
    d, m = int(cfg.input_cols), int(cfg.sketch_size)
    key = _random.stream_key(cfg.seed, stream)
    return _random.normals(key, (d, m)) / np.sqrt(m)


def _sketch(d, m, seed):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return gaussian_sketch(SketchConfig(d, m, seed))


def rangefinder(A, m, seed):
    """Return ``A @ S`` for the Gaussian sketch ``S`` drawn from ``seed``."""
    A = as_matrix(A)
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return A @ _sketch(A.shape[1], m, seed)


@dataclass(frozen=True)
class SingularBand:
    sigma_min: float
    sigma_max: float
    lower: float
    upper: float

    @property
    def inside(self):
        return self.lower <= self.sigma_min and self.sigma_max <= self.upper


def singular_band(S, t):
    """Extreme singular values of ``S`` next to ``sqrt(d/m) -+ (1 + t)``.

    For S with N(0, 1/m) entries both extremes fall inside the band with
    probability at least ``1 - 2 exp(-m t^2 / 2)``.
    """
    S = as_matrix(S, "S")
    d, m = S.shape
    if d < m:
        raise ValueError(f"need d >= m, got {S.shape}")
    s = np.linalg.svd(S, compute_uv=False)
    root = np.sqrt(d / m)
    return SingularBand(float(s[-1]), float(s[0]), root - 1.0 - t, root + 1.0 + t)


def band_violation_probability(m, t):
    """Upper bound on the probability of leaving the band."""
    return min(1.0, 2.0 * np.exp(-m * t**2 / 2.0))
