"""Monte-Carlo checks of the probabilistic facts the error analysis leans on.

Each verifier returns a small result object carrying the estimate, the
theoretical value and a ``passed`` flag at the documented slack.
"""

from dataclasses import asdict, dataclass

import numpy as np

from . import _random
from .linalg import as_matrix, svd
from .quantize import QuantizerSpec, decode, encode


def _rng(seed, *tags):
    return np.random.Generator(np.random.Philox(key=_random.stream_key(seed, _random.VERIFY, *tags)))


@dataclass
class WishartResult:
    mc_estimate: float
    theory: float
    rel_dev: float
    trials: int
    resampled: int

    def passed(self, tol=0.05):
        return self.rel_dev <= tol

    def to_dict(self):
        return asdict(self)


def wishart_trace_theory(m, d):
    return m * m / (d - m - 1)


def verify_wishart_trace(m, d, trials=5000, seed=0):
    """Mean of ``Tr[(S^T S)^{-1}]`` for ``d x m`` Gaussian ``S`` with variance 1/m."""
    if d < m + 2:
        raise ValueError(f"need d >= m + 2, got m={m}, d={d}")
    rng = _rng(seed, 1, m, d)
    total = 0.0
    resampled = 0
    done = 0
    while done < trials:
        S = rng.standard_normal((d, m)) / np.sqrt(m)
        G = S.T @ S
        try:
            C = np.linalg.cholesky(G)
        except np.linalg.LinAlgError:
            resampled += 1
            continue
        Cinv = np.linalg.inv(C)
        total += float(np.sum(Cinv * Cinv))
        done += 1
    mc = total / trials
    theory = wishart_trace_theory(m, d)
    return WishartResult(mc, theory, abs(mc - theory) / theory, trials, resampled)


@dataclass
class EqualizationResult:
    mc_error: float
    std_error: float
    bound: float
    quantization_term: float
    trials: int

    @property
    def passed(self):
        return self.mc_error <= self.bound + 3.0 * self.std_error

    def to_dict(self):
        out = asdict(self)
        out["passed"] = self.passed
        return out


def equalization_bound(B, R):
    return R**2 / (2**B - 1) ** 2 + R**2 * np.sqrt(2.0) / np.sqrt(np.pi * np.e)


def verify_equalization(d, m, B, R=1.0, trials=2000, seed=0, x=None):
    """Clipped dithered quantization of ``S x`` at clip level ``t = R / sqrt(m)``.

    ``x`` defaults to a fresh random direction scaled to norm ``R`` for each
    trial (the worst case allowed by ``||x|| <= R``).
    """
    rng = _rng(seed, 2, d, m, B)
    t = R / np.sqrt(m)
    spec = QuantizerSpec(t, B)
    errs = np.empty(trials)
    fixed = None if x is None else np.asarray(x, dtype=np.float64)
    if fixed is not None and np.linalg.norm(fixed) > R * (1 + 1e-12):
        raise ValueError("x must satisfy ||x|| <= R")
    for i in range(trials):
        if fixed is None:
            v = rng.standard_normal(d)
            v *= R / np.linalg.norm(v)
        else:
            v = fixed
        S = rng.standard_normal((m, d)) / np.sqrt(m)
        y = S @ v
        codes = encode(np.clip(y, -t, t), spec, rng.random(m))
        errs[i] = float(np.sum((decode(codes, spec) - y) ** 2))
    se = float(errs.std(ddof=1) / np.sqrt(trials))
    return EqualizationResult(float(errs.mean()), se, float(equalization_bound(B, R)),
                              float(R**2 / (2**B - 1) ** 2), trials)


@dataclass
class SandwichResult:
    optimum: float
    mc_mean: float
    std_error: float
    upper: float
    ratio_term: float
    quantization_term: float
    trials: int
    saturated: int

    @property
    def lower_ok(self):
        return self.optimum <= self.mc_mean + 3.0 * self.std_error

    @property
    def upper_ok(self):
        return self.mc_mean <= self.upper + 3.0 * self.std_error

    @property
    def passed(self):
        return self.lower_ok and self.upper_ok

    def to_dict(self):
        out = asdict(self)
        out.update(lower_ok=self.lower_ok, upper_ok=self.upper_ok, passed=self.passed)
        return out


def sandwich_instance(ell=60, p=40, q=30, k=4, seed=0):
    """Rank-``k`` design ``Phi`` with spread-out spectrum and a response with a
    sizeable component outside its range."""
    rng = _rng(seed, 3, ell, p, q, k)
    U = np.linalg.qr(rng.standard_normal((ell, k)))[0]
    V = np.linalg.qr(rng.standard_normal((p, k)))[0]
    s = np.geomspace(4.0, 1.0, k)
    Phi = (U * s) @ V.T
    Y = Phi @ rng.standard_normal((p, q)) + 0.5 * rng.standard_normal((ell, q))
    return Phi, Y


def verify_sketched_ls(Phi=None, Y=None, m=10, B=4, trials=200, seed=0, dynamic_range=None):
    """Sketched least squares with a dithered-quantized response.

    Solves ``min ||G Phi X - Q(G Y)||`` for Gaussian ``G`` (m x l, variance
    1/m) and compares the mean of ``||Phi X - Y||^2`` against the unsketched
    optimum and the upper bound
    ``(m-1)/(m-r-1) * opt + q * Delta^2/4 * kappa^2 * m^2 / (l-m-1)``.
    A fixed quantizer range is used so ``Delta`` is the same in every trial;
    draws whose ``G Y`` would saturate it are redrawn and counted.
    """
    if Phi is None:
        Phi, Y = sandwich_instance(seed=seed)
    Phi = as_matrix(Phi, "Phi")
    Y = as_matrix(Y, "Y")
    ell, _ = Phi.shape
    q = Y.shape[1]
    sv = svd(Phi)
    r = sv.rank
    if m < r + 2 or ell < m + 2:
        raise ValueError(f"need r + 2 <= m <= l - 2, got r={r}, m={m}, l={ell}")
    X_opt = np.linalg.lstsq(Phi, Y, rcond=None)[0]
    opt = float(np.sum((Phi @ X_opt - Y) ** 2))
    if dynamic_range is None:
        # entries of G Y are N(0, ||y_j||^2 / m); 6 sigma keeps saturation negligible
        dynamic_range = 6.0 * float(np.max(np.linalg.norm(Y, axis=0))) / np.sqrt(m)
    spec = QuantizerSpec(dynamic_range, B)
    delta = spec.resolution
    kappa = float(sv.s[0] / sv.s[-1])
    ratio_term = (m - 1) / (m - r - 1) * opt
    quant_term = q * delta**2 / 4.0 * kappa**2 * m**2 / (ell - m - 1)
    rng = _rng(seed, 4, m, B)
    vals = np.empty(trials)
    saturated = 0
    i = 0
    while i < trials:
        G = rng.standard_normal((m, ell)) / np.sqrt(m)
        GY = G @ Y
        if np.max(np.abs(GY)) > dynamic_range:
            saturated += 1
            continue
        QGY = decode(encode(GY, spec, rng.random(GY.shape)), spec)
        X = np.linalg.pinv(G @ Phi, rcond=1e-10) @ QGY
        vals[i] = float(np.sum((Phi @ X - Y) ** 2))
        i += 1
    se = float(vals.std(ddof=1) / np.sqrt(trials))
    return SandwichResult(opt, float(vals.mean()), se, ratio_term + quant_term, ratio_term,
                          quant_term, trials, saturated)


@dataclass
class MaxNormResult:
    exceed_rate: float
    allowed: float
    range_q: float
    trials: int

    @property
    def passed(self):
        return self.exceed_rate <= self.allowed

    def to_dict(self):
        out = asdict(self)
        out["passed"] = self.passed
        return out


def verify_maxnorm(A, m, eps, trials=200, seed=0):
    """Fraction of sketches with ``max|A S|`` above the worst-case range.

    The range ``R sqrt(2 log(16 R^2 n^2 m / eps) / m)`` is exceeded with
    probability at most ``eps / (4 n R^2)``; a 3-sigma binomial allowance is
    added for the finite trial count.
    """
    A = as_matrix(A)
    n, d = A.shape
    R = float(np.max(np.linalg.norm(A, axis=1)))
    r_q = R * np.sqrt(2.0 * np.log(16.0 * R**2 * n**2 * m / eps) / m)
    p = min(1.0, eps / (4.0 * n * R**2))
    rng = _rng(seed, 5, m)
    hits = 0
    for _ in range(trials):
        S = rng.standard_normal((d, m)) / np.sqrt(m)
        hits += int(np.max(np.abs(A @ S)) > r_q)
    allowed = p + 3.0 * np.sqrt(p * (1 - p) / trials) + 1.0 / trials
    return MaxNormResult(hits / trials, float(allowed), float(r_q), trials)
