"""Grid runner for compressor comparisons at matched bit budgets."""

import time
from dataclasses import dataclass, field

from .compressor import CompressionConfig, compress
from .linalg import as_matrix
from .metrics import parity_sketch_size, stats_summary

ALIASES = {"lplr": "lplr", "lsvd": "lplr_svd", "lplr_svd": "lplr_svd", "dsvd": "dsvd",
           "nq": "naive", "naive": "naive"}


@dataclass(frozen=True)
class Budget:
    """Bits for the two factors and the naive budget they must match."""

    B: int
    Bprime: int
    B_nq: int


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)
    summary: list = field(default_factory=list)

    def to_dict(self):
        return {"rows": self.rows, "summary": self.summary}


def cell_config(algorithm, budget, n, d, seed, **options):
    """Compression config for one grid cell; widths come from bit parity."""
    algo = ALIASES[algorithm]
    if algo == "naive":
        return CompressionConfig(algorithm="naive", bits=budget.B_nq, bits2=budget.B_nq,
                                 seed=seed, rounding=options.get("naive_rounding", "dithered"),
                                 naive_offset=options.get("naive_offset", True))
    width = parity_sketch_size(n, d, budget.B, budget.Bprime, budget.B_nq)
    extra = {k: v for k, v in options.items() if not k.startswith("naive_")}
    if algo == "lplr":
        return CompressionConfig(algorithm="lplr", sketch_size=width, bits=budget.B,
                                 bits2=budget.Bprime, seed=seed, **extra)
    if algo == "dsvd":
        extra.pop("lsvd_rotation", None)
    return CompressionConfig(algorithm=algo, target_rank=width, bits=budget.B,
                             bits2=budget.Bprime, seed=seed, **extra)


def sweep(A, algorithms, budgets, seeds=(0,), options=None):
    """Run every (algorithm, budget, seed) cell.

    ``options`` maps an algorithm name to extra config fields (for example
    ``{"lsvd": {"lsvd_rotation": True}, "nq": {"naive_rounding": "nearest"}}``).
    Each row is a report dict plus ``budget`` and ``wall_time``; the summary
    has mean and standard deviation per (algorithm, budget) together with the
    first seed's value.
    """
    A = as_matrix(A)
    n, d = A.shape
    options = options or {}
    result = SweepResult()
    for algorithm in algorithms:
        if algorithm not in ALIASES:
            raise ValueError(f"unknown algorithm {algorithm!r}")
        for budget in budgets:
            if not isinstance(budget, Budget):
                budget = Budget(*budget)
            errs, times = [], []
            for seed in seeds:
                cfg = cell_config(algorithm, budget, n, d, seed, **options.get(algorithm, {}))
                t0 = time.perf_counter()
                _, report = compress(A, cfg)
                wall = time.perf_counter() - t0
                row = report.to_dict()
                row.update(label=algorithm, budget={"B": budget.B, "Bprime": budget.Bprime,
                                                    "B_nq": budget.B_nq}, wall_time=wall)
                result.rows.append(row)
                errs.append(report.relative_error)
                times.append(wall)
            err = stats_summary(errs)
            wall = stats_summary(times)
            result.summary.append({
                "label": algorithm,
                "budget": {"B": budget.B, "Bprime": budget.Bprime, "B_nq": budget.B_nq},
                "width": None if ALIASES[algorithm] == "naive"
                else parity_sketch_size(n, d, budget.B, budget.Bprime, budget.B_nq),
                "single_seed_error": errs[0],
                "mean_error": err["mean"], "std_error": err["std"],
                "mean_time": wall["mean"], "std_time": wall["std"],
                "seeds": len(errs),
            })
    return result
