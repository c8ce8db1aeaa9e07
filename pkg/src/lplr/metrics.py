"""Bit-parity accounting, error metrics and the headline error bound."""

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, best_rank_k, fro


class BudgetError(ValueError):
    """The bit budget cannot pay for even a rank-1 factorization."""


@dataclass(frozen=True)
class ParityBudget:
    n: int
    d: int
    B: int
    Bprime: int
    B_nq: int
    m: int

    @property
    def factor_bits(self):
        return self.B * self.n * self.m + self.Bprime * self.m * self.d

    @property
    def naive_bits(self):
        return self.B_nq * self.n * self.d


def parity_budget(n, d, B, Bprime, B_nq):
    for name, v in (("n", n), ("d", d), ("B", B), ("Bprime", Bprime), ("B_nq", B_nq)):
        if int(v) < 1:
            raise ValueError(f"{name} must be >= 1, got {v}")
    n, d, B, Bprime, B_nq = (int(v) for v in (n, d, B, Bprime, B_nq))
    # exact integer floor division, no float rounding
    m = (B_nq * n * d) // (B * n + Bprime * d)
    if m < 1:
        raise BudgetError(
            f"budget too small for rank-1: {B_nq} bits x {n}x{d} entries cannot hold "
            f"factors at B={B}, B'={Bprime}"
        )
    return ParityBudget(n, d, B, Bprime, B_nq, m)


def parity_sketch_size(n, d, B, Bprime, B_nq):
    """Largest inner width whose factors fit in the naive quantizer's bit budget."""
    return parity_budget(n, d, B, Bprime, B_nq).m


def relative_fro_error(Ahat, A):
    A = as_matrix(A)
    Ahat = as_matrix(Ahat, "Ahat")
    if Ahat.shape != A.shape:
        raise ValueError(f"shape mismatch: {Ahat.shape} vs {A.shape}")
    norm = fro(A)
    if norm == 0.0:
        raise ValueError("relative error is undefined for a zero reference matrix")
    return fro(Ahat - A) / norm


def thm1_bound(A, k, m, eps):
    """``(1 + k / (m - k - 1)) * ||A_k - A||_F^2 + eps``, a bound on the squared error."""
    if m < k + 2:
        raise ValueError(f"need m >= k + 2, got m={m}, k={k}")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    _, tail = best_rank_k(A, k)
    return (1.0 + k / (m - k - 1)) * tail + float(eps)


def stats_summary(values):
    v = np.asarray(values, dtype=np.float64)
    std = float(v.std(ddof=1)) if v.size > 1 else 0.0
    return {"mean": float(v.mean()), "std": std, "count": int(v.size)}
