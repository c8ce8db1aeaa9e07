"""Low-precision low-rank compressors.

Four algorithms share one configuration object and one report format:

* ``lplr``      sketch ``A S``, quantize it, fit the right factor by least
                squares against the quantized basis, quantize that.
* ``lplr_svd``  same, but the basis is the top-k scaled left singular vectors
                ``U_k Sigma_k`` (optionally rotated by a k x k Gaussian).
* ``dsvd``      quantize ``U_k Sigma_k`` and ``V_k^T`` directly.
* ``naive``     quantize every entry of ``A``.

Every random draw comes from a counter-based stream keyed by the seed, so the
same ``(A, config)`` always yields the same codes.
"""

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _random
from .linalg import as_matrix, fro, lstsq, spectrum_stats, svd, thin_svd
from .quantize import (
    MAX_BITS,
    ROUNDING_MODES,
    QuantizedMatrix,
    QuantizerSpec,
    SaturationError,
    dequantize,
    quantize_matrix,
)
from .sketch import _sketch

ALGORITHMS = ("lplr", "lplr_svd", "dsvd", "naive")
RANGE_MODES = ("data_driven", "theory")
SOLVERS = ("closed_form", "conjugate_gradient")
RETRY = 7


class SaturationExhaustedError(SaturationError):
    """Every retry saturated one of the quantizers."""


@dataclass
class CompressionConfig:
    algorithm: str = "lplr"
    sketch_size: int | None = None
    target_rank: int | None = None
    bits: int = 8
    bits2: int | None = None
    range_mode: str = "data_driven"
    eps: float | None = None
    solver: str = "closed_form"
    cg_tol: float = 1e-10
    cg_max_iter: int | None = None
    lsvd_rotation: bool = False
    lsvd_scaled: bool = True
    normalize_shift: bool = False
    rounding: str = "dithered"
    naive_offset: bool = True
    seed: int = 0
    max_retries: int = 10

    def __post_init__(self):
        if self.bits2 is None:
            self.bits2 = self.bits
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        for name in ("bits", "bits2"):
            b = getattr(self, name)
            if not 1 <= int(b) <= MAX_BITS:
                raise ValueError(f"{name} must lie in [1, {MAX_BITS}], got {b}")
        if self.range_mode not in RANGE_MODES:
            raise ValueError(f"unknown range mode {self.range_mode!r}")
        if self.range_mode == "theory" and (self.eps is None or self.eps <= 0):
            raise ValueError("theory range mode needs a positive eps")
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.rounding not in ROUNDING_MODES:
            raise ValueError(f"unknown rounding mode {self.rounding!r}")
        if int(self.seed) < 0:
            raise ValueError("seed must be non-negative")
        if self.max_retries < 0:
            raise ValueError("max_retries must be non-negative")
        if self.algorithm == "lplr":
            if self.sketch_size is None or self.sketch_size < 1:
                raise ValueError("lplr needs sketch_size >= 1")
        elif self.algorithm in ("lplr_svd", "dsvd"):
            if self.sketch_size is not None:
                raise ValueError(f"{self.algorithm} takes target_rank, not sketch_size")
            if self.target_rank is None or self.target_rank < 1:
                raise ValueError(f"{self.algorithm} needs target_rank >= 1")
        elif self.sketch_size is not None or self.target_rank is not None:
            raise ValueError("naive quantization takes neither sketch_size nor target_rank")

    @property
    def width(self):
        """Inner dimension of the factorization."""
        return self.sketch_size if self.algorithm == "lplr" else self.target_rank


@dataclass
class Factorization:
    """Quantized factors ``L`` (n x m) and ``R`` (m x d).

    For naive quantization ``R`` is None and ``L`` holds the n x d codes.
    """

    L: QuantizedMatrix
    R: QuantizedMatrix | None
    algorithm: str
    alpha: float | None = None
    beta: float | None = None
    # provenance, not content: excluded from equality
    seed: int = field(default=0, compare=False)
    retry_count: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.R is not None and self.L.shape[1] != self.R.shape[0]:
            raise ValueError(f"inner dimensions differ: L is {self.L.shape}, R is {self.R.shape}")
        if (self.alpha is None) != (self.beta is None):
            raise ValueError("alpha and beta must be set together")

    @property
    def has_affine(self):
        return self.alpha is not None

    @property
    def shape(self):
        d = self.L.shape[1] if self.R is None else self.R.shape[1]
        return self.L.shape[0], d

    @property
    def payload_bits(self):
        bits = self.L.payload_bits + (0 if self.R is None else self.R.payload_bits)
        return bits + (128 if self.has_affine else 0)


@dataclass
class CompressionReport:
    algorithm: str
    n: int
    d: int
    width: int
    bits: int
    bits2: int
    payload_bits: int
    relative_error: float
    range_q: float
    range_q2: float
    range_mode: str
    rounding: str
    seed: int
    retries: int = 0
    saturation_log: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    solver: dict | None = None
    alpha: float | None = None
    beta: float | None = None

    @property
    def compression_ratio(self):
        return 64.0 * self.n * self.d / self.payload_bits

    def to_dict(self):
        out = asdict(self)
        out["compression_ratio"] = self.compression_ratio
        return out

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


class _Clock:
    def __init__(self):
        self.timings = {}

    def stage(self, name):
        clock = self

        class _Stage:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                clock.timings[name] = clock.timings.get(name, 0.0) + time.perf_counter() - self.t0

        return _Stage()


def attempt_seed(seed, attempt):
    """Seed for retry ``attempt``; attempt 0 uses ``seed`` itself."""
    if attempt == 0:
        return int(seed)
    return int(_random.stream_key(seed, RETRY, attempt)[0] >> np.uint64(1))


def theory_ranges(stats):
    """Worst-case ranges for ``Q(AS)`` and ``Q'(W*)`` from the spectrum."""
    R, n, m, eps = stats.row_norm_bound, stats.n, stats.m, stats.eps
    r_q = R * np.sqrt(2.0 * np.log(16.0 * R**2 * n**2 * m / eps) / m)
    r_q2 = 2.0 * stats.kappa / stats.margin
    return float(r_q), float(r_q2)


def select_dynamic_ranges(A, m, mode="data_driven", eps=None, stats=None,
                          sketch=None, coefficients=None, k=None):
    """``(R_Q, R_Q')`` for LPLR.

    ``data_driven`` returns the max-abs of the actual intermediates ``sketch``
    (``A S``) and ``coefficients`` (``W*``). ``theory`` evaluates the
    worst-case formulas; ``stats`` is computed from ``A`` when not supplied.
    """
    if mode == "data_driven":
        if sketch is None or coefficients is None:
            raise ValueError("data_driven ranges need the sketch and coefficient matrices")
        return float(np.max(np.abs(sketch))), float(np.max(np.abs(coefficients)))
    if mode != "theory":
        raise ValueError(f"unknown range mode {mode!r}")
    if stats is None:
        if eps is None:
            raise ValueError("theory ranges need eps")
        A = as_matrix(A)
        if k is None:
            k = _default_theory_rank(A, m)
        stats = spectrum_stats(A, k, m, eps)
    return theory_ranges(stats)


def _default_theory_rank(A, m):
    r = svd(A).rank
    return max(1, min(m - 2, r))


def _spec(values, bits, fixed_range=None):
    """Quantizer for ``values``: fixed range, or its max-abs (0 for all-zero input)."""
    if fixed_range is not None:
        return QuantizerSpec(fixed_range, bits)
    return QuantizerSpec(float(np.max(np.abs(values))) if values.size else 0.0, bits)


def _saturates(X, R):
    return bool(np.max(np.abs(X), initial=0.0) > R)


def _solve(L, A, cfg):
    W, info = lstsq(L, A, method=cfg.solver, tol=cfg.cg_tol, max_iter=cfg.cg_max_iter,
                    return_info=True)
    return W, asdict(info)


def _finish(A, F, cfg, clock, r_q, r_q2, retries, log, solver_info=None):
    with clock.stage("reconstruct"):
        if cfg.normalize_shift:
            Y = reconstruct(F)
            alpha, beta = normalize_shift(Y, A)
            F.alpha, F.beta = alpha, beta
        Ahat = reconstruct(F)
    norm = fro(A)
    err = fro(Ahat - A) / norm if norm > 0 else fro(Ahat)
    n, d = A.shape
    report = CompressionReport(
        algorithm=F.algorithm, n=n, d=d, width=F.L.shape[1] if F.R is not None else d,
        bits=cfg.bits, bits2=cfg.bits2 if F.R is not None else 0,
        payload_bits=F.payload_bits, relative_error=float(err),
        range_q=float(r_q), range_q2=float(r_q2), range_mode=cfg.range_mode,
        rounding=cfg.rounding, seed=int(cfg.seed), retries=retries,
        saturation_log=log, timings=clock.timings, solver=solver_info,
        alpha=F.alpha, beta=F.beta,
    )
    return F, report


def _retry_exhausted(cfg, log):
    last = log[-1] if log else {}
    raise SaturationExhaustedError(
        f"{cfg.algorithm}: quantizer saturated on all {cfg.max_retries + 1} attempts "
        f"(last: {last.get('factor')} max-abs {last.get('max_abs')!r} > range {last.get('range')!r})"
    )


def lplr(A, cfg):
    """Sketch, quantize the basis, least-squares fit, quantize the coefficients."""
    A = as_matrix(A)
    if cfg.algorithm != "lplr":
        raise ValueError(f"config is for {cfg.algorithm!r}, not lplr")
    n, d = A.shape
    m = int(cfg.sketch_size)
    clock = _Clock()
    r_q = r_q2 = None
    if cfg.range_mode == "theory":
        k = cfg.target_rank if cfg.target_rank is not None else _default_theory_rank(A, m)
        with clock.stage("ranges"):
            r_q, r_q2 = theory_ranges(spectrum_stats(A, k, m, cfg.eps))
    log = []
    for attempt in range(cfg.max_retries + 1):
        seed = attempt_seed(cfg.seed, attempt)
        with clock.stage("sketch"):
            AS = A @ _sketch(d, m, seed)
        if r_q is not None and _saturates(AS, r_q):
            log.append({"attempt": attempt, "factor": "L", "max_abs": float(np.max(np.abs(AS))),
                        "range": r_q})
            continue
        with clock.stage("quantize"):
            L = quantize_matrix(AS, _spec(AS, cfg.bits, r_q), seed, cfg.rounding,
                                _random.DITHER_LEFT)
            L_deq = dequantize(L)
        with clock.stage("solve"):
            W, info = _solve(L_deq, A, cfg)
        if r_q2 is not None and _saturates(W, r_q2):
            log.append({"attempt": attempt, "factor": "R", "max_abs": float(np.max(np.abs(W))),
                        "range": r_q2})
            continue
        with clock.stage("quantize"):
            spec2 = _spec(W, cfg.bits2, r_q2)
            R = quantize_matrix(W, spec2, seed, cfg.rounding, _random.DITHER_RIGHT)
        F = Factorization(L, R, "lplr", seed=int(cfg.seed), retry_count=attempt)
        return _finish(A, F, cfg, clock, L.spec.dynamic_range, spec2.dynamic_range,
                       attempt, log, info)
    _retry_exhausted(cfg, log)


def _check_rank(A, k):
    if not 1 <= k <= min(A.shape):
        raise ValueError(f"target_rank must lie in [1, {min(A.shape)}], got {k}")


def lplr_svd(A, cfg):
    """Quantized top-k SVD basis plus a least-squares right factor."""
    A = as_matrix(A)
    if cfg.algorithm != "lplr_svd":
        raise ValueError(f"config is for {cfg.algorithm!r}, not lplr_svd")
    k = int(cfg.target_rank)
    _check_rank(A, k)
    clock = _Clock()
    with clock.stage("svd"):
        U, s, _ = thin_svd(A)
        basis = U[:, :k] * s[:k] if cfg.lsvd_scaled else U[:, :k].copy()
    r_q = r_q2 = None
    if cfg.range_mode == "theory":
        r_q = float(s[0]) if cfg.lsvd_scaled else 1.0
        nz = s[:k][s[:k] > 0]
        r_q2 = 2.0 * float(s[0] / nz[-1]) if nz.size else 1.0
        if not cfg.lsvd_scaled:
            r_q2 = float(s[0])
    log = []
    for attempt in range(cfg.max_retries + 1):
        seed = attempt_seed(cfg.seed, attempt)
        if cfg.lsvd_rotation:
            with clock.stage("sketch"):
                G = _random.normals(_random.stream_key(seed, _random.ROTATION), (k, k)) / np.sqrt(k)
                Ub = basis @ G
        else:
            Ub = basis
        if r_q is not None and _saturates(Ub, r_q):
            log.append({"attempt": attempt, "factor": "L", "max_abs": float(np.max(np.abs(Ub))),
                        "range": r_q})
            continue
        with clock.stage("quantize"):
            L = quantize_matrix(Ub, _spec(Ub, cfg.bits, r_q), seed, cfg.rounding,
                                _random.DITHER_LEFT)
            L_deq = dequantize(L)
        with clock.stage("solve"):
            W, info = _solve(L_deq, A, cfg)
        if r_q2 is not None and _saturates(W, r_q2):
            log.append({"attempt": attempt, "factor": "R", "max_abs": float(np.max(np.abs(W))),
                        "range": r_q2})
            continue
        with clock.stage("quantize"):
            spec2 = _spec(W, cfg.bits2, r_q2)
            R = quantize_matrix(W, spec2, seed, cfg.rounding, _random.DITHER_RIGHT)
        F = Factorization(L, R, "lplr_svd", seed=int(cfg.seed), retry_count=attempt)
        return _finish(A, F, cfg, clock, L.spec.dynamic_range, spec2.dynamic_range,
                       attempt, log, info)
    _retry_exhausted(cfg, log)


def dsvd(A, cfg):
    """Quantize ``U_k Sigma_k`` and ``V_k^T`` directly, no least squares."""
    A = as_matrix(A)
    if cfg.algorithm != "dsvd":
        raise ValueError(f"config is for {cfg.algorithm!r}, not dsvd")
    k = int(cfg.target_rank)
    _check_rank(A, k)
    clock = _Clock()
    with clock.stage("svd"):
        U, s, Vt = thin_svd(A)
        left = U[:, :k] * s[:k]
        right = Vt[:k]
    r_q = r_q2 = None
    if cfg.range_mode == "theory":
        r_q, r_q2 = float(s[0]), 1.0
    log = []
    # |U_ij s_j| <= s_1 and |V_ij| <= 1 up to rounding, so retries only re-dither
    for attempt in range(cfg.max_retries + 1):
        seed = attempt_seed(cfg.seed, attempt)
        bad = [(name, X, r) for name, X, r in (("L", left, r_q), ("R", right, r_q2))
               if r is not None and _saturates(X, r)]
        if bad:
            name, X, r = bad[0]
            log.append({"attempt": attempt, "factor": name, "max_abs": float(np.max(np.abs(X))),
                        "range": r})
            continue
        with clock.stage("quantize"):
            L = quantize_matrix(left, _spec(left, cfg.bits, r_q), seed, cfg.rounding,
                                _random.DITHER_LEFT)
            R = quantize_matrix(right, _spec(right, cfg.bits2, r_q2), seed, cfg.rounding,
                                _random.DITHER_RIGHT)
        F = Factorization(L, R, "dsvd", seed=int(cfg.seed), retry_count=attempt)
        return _finish(A, F, cfg, clock, L.spec.dynamic_range, R.spec.dynamic_range,
                       attempt, log)
    _retry_exhausted(cfg, log)


def naive_quant(A, bits, seed=0, rounding="dithered", offset=True):
    """Entrywise quantization of ``A`` with ``bits`` per entry.

    The grid is centred on the midrange ``c`` of ``A`` with half-width
    ``(max - min) / 2``; ``c`` is stored as ``beta`` (with ``alpha = 1``) so
    nonnegative data such as images do not waste half the grid. With
    ``offset=False`` the grid is symmetric about zero with ``R = max|A|``.
    """
    cfg = CompressionConfig(algorithm="naive", bits=bits, bits2=bits, seed=seed,
                            rounding=rounding, naive_offset=offset)
    return _naive(as_matrix(A), cfg)


def _naive(A, cfg):
    clock = _Clock()
    with clock.stage("quantize"):
        if cfg.naive_offset:
            lo, hi = float(A.min()), float(A.max())
            center = 0.5 * (lo + hi)
            X = A - center
            spec = QuantizerSpec(0.5 * (hi - lo), cfg.bits)
            # midrange subtraction can round a hair past +-R
            X = np.clip(X, -spec.dynamic_range, spec.dynamic_range)
        else:
            X, spec, center = A, _spec(A, cfg.bits), None
        Q = quantize_matrix(X, spec, cfg.seed, cfg.rounding, _random.DITHER)
    F = Factorization(Q, None, "naive", alpha=None if center is None else 1.0, beta=center,
                      seed=int(cfg.seed))
    return _finish(A, F, cfg, clock, spec.dynamic_range, 0.0, 0, [])


def compress(A, cfg):
    """Dispatch on ``cfg.algorithm``."""
    if cfg.algorithm == "lplr":
        return lplr(A, cfg)
    if cfg.algorithm == "lplr_svd":
        return lplr_svd(A, cfg)
    if cfg.algorithm == "dsvd":
        return dsvd(A, cfg)
    return _naive(as_matrix(A), cfg)


def reconstruct(F):
    """Dense approximation ``alpha * L R + beta`` (affine part only if present)."""
    L = dequantize(F.L)
    Ahat = L if F.R is None else L @ dequantize(F.R)
    if F.has_affine:
        Ahat = F.alpha * Ahat + F.beta
    return Ahat


def normalize_shift(Y, X, tol=1e-14):
    """Least-squares ``(alpha, beta)`` minimising ``||alpha Y + beta J - X||_F``.

    ``J`` is the all-ones matrix. A (numerically) constant ``Y`` cannot carry
    a scale, so it gets ``alpha = 0, beta = mean(X)``.
    """
    Y = as_matrix(Y, "Y")
    X = as_matrix(X, "X")
    if Y.shape != X.shape:
        raise ValueError(f"shape mismatch: {Y.shape} vs {X.shape}")
    N = Y.size
    sy, sx = float(Y.sum()), float(X.sum())
    yy = float(np.vdot(Y, Y))
    denom = yy - sy * sy / N
    if denom <= tol * max(yy, 1.0):
        return 0.0, sx / N
    alpha = (float(np.vdot(X, Y)) - sx * sy / N) / denom
    beta = (sx - alpha * sy) / N
    return float(alpha), float(beta)


@dataclass(frozen=True)
class BitThresholds:
    B_min: float
    B1: float
    B2: float
    Bprime_min: float


def bit_thresholds(A, k, m, eps, stats=None, C=1.0):
    """Sufficient bit budgets for the LPLR error guarantee (advisory).

    ``B_min = max(B1, B2)`` bounds the first factor's bits and ``Bprime_min``
    the second's. ``C`` is the unspecified absolute constant in ``B2``.
    """
    A = as_matrix(A)
    if stats is None:
        stats = spectrum_stats(A, k, m, eps)
    n, d = A.shape
    R = stats.row_norm_bound
    g = stats.gamma
    log_term = np.log(16.0 * R**2 * n**2 * m / eps)
    B1 = np.log2(2.0 * R * stats.kappa_Ak * np.sqrt(2.0 * n)
                 / np.sqrt(eps * (g - 1.0 - 1.0 / m)) * np.sqrt(log_term) + 1.0)
    sr = float(stats.sigma[-1])
    gap = stats.sigma_at(k) - stats.sigma_at(k + 1) * stats.spread
    floor = max(sr, gap)
    ratio = (np.sqrt(g) + 1.0 + stats.t / np.sqrt(2.0)) / stats.margin
    B2 = np.log2(4.0 * C * R / (floor * np.log(2.0)) * ratio * np.sqrt(2.0 * log_term) + 1.0)
    Bp = np.log2(4.0 * R * stats.kappa / stats.margin * np.sqrt(n * d / eps) + 1.0)
    return BitThresholds(float(max(B1, B2)), float(B1), float(B2), float(Bp))
