"""Low-precision low-rank matrix factorization."""

from .compressor import (
    BitThresholds,
    CompressionConfig,
    CompressionReport,
    Factorization,
    SaturationExhaustedError,
    bit_thresholds,
    compress,
    dsvd,
    lplr,
    lplr_svd,
    naive_quant,
    normalize_shift,
    reconstruct,
    select_dynamic_ranges,
)
from .formats import (
    FormatError,
    load_factorization,
    load_matrix,
    save_factorization,
    save_matrix,
)
from .knn import KnnResult, knn_classify
from .linalg import best_rank_k, lstsq, spectrum_stats, svd
from .metrics import parity_sketch_size, relative_fro_error, thm1_bound
from .phantom import shepp_logan
from .quantize import QuantizedMatrix, QuantizerSpec, SaturationError, dequantize, quantize_matrix
from .sketch import SketchConfig, gaussian_sketch
from .sweep import Budget, sweep

__all__ = [
    "BitThresholds", "Budget", "CompressionConfig", "CompressionReport", "Factorization",
    "FormatError", "KnnResult", "QuantizedMatrix", "QuantizerSpec", "SaturationError",
    "SaturationExhaustedError", "SketchConfig", "best_rank_k", "bit_thresholds", "compress",
    "dequantize", "dsvd", "gaussian_sketch", "knn_classify", "load_factorization", "load_matrix",
    "lplr", "lplr_svd", "lstsq", "naive_quant", "normalize_shift", "parity_sketch_size",
    "quantize_matrix", "reconstruct", "relative_fro_error", "save_factorization", "save_matrix",
    "select_dynamic_ranges", "shepp_logan", "spectrum_stats", "svd", "sweep", "thm1_bound",
]
