# Four compressors on a 1000 x 1000 phantom at equal bit budgets

# Each factorization gets the same number of bits as one-bit naive
# quantization, which fixes its width.

from dataclasses import replace

import numpy as np

from lplr import CompressionConfig, compress, parity_sketch_size, shepp_logan

A = shepp_logan(1000)
print("phantom range:", A.min(), A.max())

for B, B_nq in ((8, 1), (32, 2)):
    m = parity_sketch_size(1000, 1000, B, B, B_nq)
    configs = {
        "naive": CompressionConfig(algorithm="naive", bits=B_nq, rounding="nearest"),
        "lplr": CompressionConfig(sketch_size=m, bits=B),
        "lplr_svd": CompressionConfig(algorithm="lplr_svd", target_rank=m, bits=B,
                                      lsvd_rotation=True),
        "dsvd": CompressionConfig(algorithm="dsvd", target_rank=m, bits=B),
    }
    print(f"\nB = B' = {B}, naive bits {B_nq}, width {m}")
    for name, cfg in configs.items():
        errs = [compress(A, replace(cfg, seed=s))[1].relative_error
                for s in range(3)]
        print(f"  {name:9s} {np.mean(errs):.4f}")
