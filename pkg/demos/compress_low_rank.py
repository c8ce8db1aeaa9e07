# Compressing a low-rank matrix with a sketch and two quantized factors

import numpy as np

from lplr import CompressionConfig, compress, reconstruct, thm1_bound

rng = np.random.default_rng(1)
A = rng.standard_normal((300, 8)) @ rng.standard_normal((8, 200))
A += 0.01 * rng.standard_normal(A.shape)


# Sketch width 16, 8 bits for the left factor and 8 for the right.

_, report = compress(A, CompressionConfig(sketch_size=16, bits=8, seed=0))
print("relative error:", round(report.relative_error, 4))
print("compression ratio vs float64:", round(report.compression_ratio, 1))
print("stage timings:", {k: round(v, 4) for k, v in report.timings.items()})


# The same width with more bits approaches the unquantized sketch.

for B in (4, 8, 16, 32):
    err = compress(A, CompressionConfig(sketch_size=16, bits=B, seed=0))[1].relative_error
    print(f"B = B' = {B:2d}: {err:.5f}")


# At 32 bits quantization is negligible and the squared error sits under the
# bound for an unquantized sketch of width 16 around rank 8.

Ahat = reconstruct(compress(A, CompressionConfig(sketch_size=16, bits=32, seed=0))[0])
print("squared error", round(float(np.sum((Ahat - A) ** 2)), 3),
      "bound", round(thm1_bound(A, 8, 16, 0.0), 3))
