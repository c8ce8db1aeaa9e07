"""Dense linear algebra used by the compressors.

Matrices are plain 2-D ``float64`` numpy arrays. The SVD itself is LAPACK's
divide-and-conquer driver; everything layered on top of it (numerical rank,
truncation, pseudo-inverse, least squares, the spectrum quantities that enter
the error bounds) lives here.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

DEFAULT_RANK_TOL = 1e-12


def as_matrix(A, name="A"):
    """Return ``A`` as a finite 2-D float64 array, raising on bad input."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and column, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains NaN or Inf")
    return A


def fro(A):
    return float(np.linalg.norm(A, "fro"))


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD truncated to numerical rank: ``A ~= U @ diag(s) @ V.T``."""

    U: np.ndarray
    s: np.ndarray
    V: np.ndarray

    @property
    def rank(self):
        return int(self.s.size)


def svd(A, rank_tolerance=DEFAULT_RANK_TOL):
    """Thin SVD keeping only singular values above ``rank_tolerance * s[0]``.

    A zero matrix has numerical rank 0 and yields empty factors.
    """
    if not 0.0 < rank_tolerance < 1.0:
        raise ValueError(f"rank_tolerance must lie in (0, 1), got {rank_tolerance}")
    U, s, Vt = thin_svd(A)
    if s.size == 0 or s[0] == 0.0:
        r = 0
    else:
        r = int(np.count_nonzero(s > rank_tolerance * s[0]))
    return SvdResult(U=U[:, :r], s=s[:r], V=Vt[:r].T)


def thin_svd(A):
    """Untruncated thin SVD ``(U, s, Vt)`` with all min(n, d) triplets."""
    A = as_matrix(A)
    try:
        return np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"SVD did not converge for a {A.shape[0]}x{A.shape[1]} matrix"
        ) from exc


def singular_values(A):
    """All min(n, d) singular values, nonincreasing, including zeros."""
    return np.linalg.svd(as_matrix(A), compute_uv=False)


def best_rank_k(A, k):
    """Eckart-Young truncation.

    Returns ``(Ak, tail_energy)`` where ``tail_energy`` is the sum of the
    squared singular values beyond the ``k``-th, i.e. ``||Ak - A||_F^2``.
    """
    A = as_matrix(A)
    if not 1 <= k <= min(A.shape):
        raise ValueError(f"k must lie in [1, {min(A.shape)}], got {k}")
    U, s, Vt = thin_svd(A)
    Ak = (U[:, :k] * s[:k]) @ Vt[:k]
    tail = float(np.sum(s[k:] ** 2))
    return Ak, tail


def pinv(A, rank_tolerance=DEFAULT_RANK_TOL):
    """Moore-Penrose pseudo-inverse from the retained singular triplets."""
    res = svd(A, rank_tolerance)
    if res.rank == 0:
        return np.zeros((A.shape[1], A.shape[0]))
    return (res.V / res.s) @ res.U.T


@dataclass
class LstsqInfo:
    method: str
    converged: bool
    iterations: int
    residual: float


def _cg_normal(Phi, Y, tol, max_iter):
    """CG on ``Phi^T Phi X = Phi^T Y``, one independent recursion per column.

    The columns advance in lockstep but never share step sizes; a column
    freezes once its relative normal-equation residual drops below ``tol``.
    Starting from zero keeps every iterate in range(Phi^T), so the limit is
    the minimum-norm solution.
    """
    p = Phi.shape[1]
    q = Y.shape[1]
    X = np.zeros((p, q))
    rhs = Phi.T @ Y
    rhs_norm = np.linalg.norm(rhs, axis=0)
    rhs_norm[rhs_norm == 0.0] = 1.0
    R = rhs.copy()
    P = R.copy()
    rr = np.sum(R * R, axis=0)
    active = np.sqrt(rr) / rhs_norm > tol
    best = X.copy()
    best_res = np.sqrt(rr) / rhs_norm
    it = 0
    while it < max_iter and np.any(active):
        it += 1
        AP = Phi.T @ (Phi @ P[:, active])
        denom = np.sum(P[:, active] * AP, axis=0)
        safe = denom > 0.0
        alpha = np.zeros_like(denom)
        alpha[safe] = rr[active][safe] / denom[safe]
        X[:, active] += alpha * P[:, active]
        R[:, active] -= alpha * AP
        rr_new = np.sum(R[:, active] ** 2, axis=0)
        beta = np.zeros_like(rr_new)
        nz = rr[active] > 0.0
        beta[nz] = rr_new[nz] / rr[active][nz]
        P[:, active] = R[:, active] + beta * P[:, active]
        idx = np.flatnonzero(active)
        rr[idx] = rr_new
        res = np.sqrt(rr_new) / rhs_norm[idx]
        improved = res < best_res[idx]
        best[:, idx[improved]] = X[:, idx[improved]]
        best_res[idx[improved]] = res[improved]
        stalled = ~safe
        active[idx[(res <= tol) | stalled]] = False
    converged = bool(np.all(best_res <= tol))
    return best, LstsqInfo("conjugate_gradient", converged, it, float(np.max(best_res, initial=0.0)))


def _closed_form(Phi, Y, rank_tolerance):
    """QR solve for a well-conditioned tall ``Phi``, pseudo-inverse otherwise."""
    n, p = Phi.shape
    if n >= p:
        Q, R = np.linalg.qr(Phi)
        diag = np.abs(np.diag(R))
        if diag.size and diag.min() > 1e3 * rank_tolerance * diag.max():
            return scipy.linalg.solve_triangular(R, Q.T @ Y)
    return pinv(Phi, rank_tolerance) @ Y


def lstsq(Phi, Y, method="closed_form", tol=1e-10, max_iter=None,
          rank_tolerance=DEFAULT_RANK_TOL, return_info=False):
    """Solve ``argmin_X ||Phi X - Y||_F``.

    ``closed_form`` returns the minimum-norm solution ``pinv(Phi) @ Y``,
    computed through a QR factorization when ``Phi`` clearly has full
    column rank.
    ``conjugate_gradient`` iterates on the normal equations; if it hits
    ``max_iter`` (default ``10 * p``) the best iterate is returned and
    ``info.converged`` is False.
    """
    Phi = as_matrix(Phi, "Phi")
    Y = np.asarray(Y, dtype=np.float64)
    vector = Y.ndim == 1
    Y = as_matrix(Y.reshape(-1, 1) if vector else Y, "Y")
    if Phi.shape[0] != Y.shape[0]:
        raise ValueError(f"row mismatch: Phi is {Phi.shape}, Y is {Y.shape}")
    if method == "closed_form":
        X = _closed_form(Phi, Y, rank_tolerance)
        info = LstsqInfo("closed_form", True, 0, 0.0)
    elif method == "conjugate_gradient":
        if tol <= 0:
            raise ValueError("tol must be positive")
        if max_iter is None:
            max_iter = 10 * Phi.shape[1]
        X, info = _cg_normal(Phi, Y, tol, int(max_iter))
    else:
        raise ValueError(f"unknown least-squares method {method!r}")
    if vector:
        X = X[:, 0]
    return (X, info) if return_info else X


def condition_number(A, rank_tolerance=DEFAULT_RANK_TOL):
    s = svd(A, rank_tolerance).s
    if s.size == 0:
        return np.inf
    return float(s[0] / s[-1])


class AspectRatioError(ValueError):
    """Raised when sqrt(d/m) - 1 - t <= 0 and the theory formulas break down."""


@dataclass(frozen=True)
class SpectrumStats:
    """Spectral quantities entering the theoretical ranges and bit thresholds."""

    kappa_A: float
    kappa_Ak: float
    kappa: float
    t: float
    gamma: float
    row_norm_bound: float
    sigma: np.ndarray
    n: int
    d: int
    k: int
    m: int
    eps: float

    @property
    def margin(self):
        """``sqrt(gamma) - 1 - t``; positive whenever the stats were built."""
        return float(np.sqrt(self.gamma) - 1.0 - self.t)

    @property
    def spread(self):
        """``(sqrt(gamma) + 1 + t) / (sqrt(gamma) - 1 - t)``."""
        return float((np.sqrt(self.gamma) + 1.0 + self.t) / self.margin)

    def sigma_at(self, i):
        """1-based singular value, zero beyond the numerical rank."""
        return float(self.sigma[i - 1]) if i <= self.sigma.size else 0.0


def spectrum_stats(A, k, m, eps, rank_tolerance=DEFAULT_RANK_TOL, row_norm_bound=None):
    """Condition numbers, aspect ratio and concentration parameter for LPLR.

    ``t = sqrt(2 log(32 n R^2 / eps) / m)`` and ``gamma = d / m``;
    ``kappa = min(kappa(A), kappa(A_k) / (1 - (s_{k+1}/s_k) * spread))`` with the
    second branch dropped when its denominator is not positive. ``R`` is the
    largest row norm of ``A`` unless given.
    """
    A = as_matrix(A)
    n, d = A.shape
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    s = svd(A, rank_tolerance).s
    r = s.size
    if not 1 <= k <= r:
        raise ValueError(f"k must lie in [1, rank(A)={r}], got {k}")
    R = float(np.max(np.linalg.norm(A, axis=1))) if row_norm_bound is None else float(row_norm_bound)
    gamma = d / m
    t = float(np.sqrt(2.0 * np.log(32.0 * n * R**2 / eps) / m))
    margin = np.sqrt(gamma) - 1.0 - t
    if margin <= 0:
        raise AspectRatioError(
            f"sketch aspect ratio too small for theory mode: sqrt(d/m) - 1 - t = {margin:.4g} "
            f"(d={d}, m={m}, t={t:.4g})"
        )
    kappa_A = float(s[0] / s[-1])
    kappa_Ak = float(s[0] / s[k - 1])
    s_next = float(s[k]) if k < r else 0.0
    denom = 1.0 - (s_next / s[k - 1]) * (np.sqrt(gamma) + 1.0 + t) / margin
    kappa = min(kappa_A, kappa_Ak / denom) if denom > 0 else kappa_A
    return SpectrumStats(kappa_A=kappa_A, kappa_Ak=kappa_Ak, kappa=float(kappa), t=t,
                         gamma=gamma, row_norm_bound=R, sigma=s, n=n, d=d, k=k, m=m,
                         eps=float(eps))
