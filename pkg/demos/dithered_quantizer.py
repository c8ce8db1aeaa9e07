# Dithered quantization on a 2^B-point grid

# A scalar in [-R, R] is rounded up or down to a neighbouring grid point at
# random, with probabilities chosen so the result is correct on average.

import numpy as np

from lplr import QuantizerSpec
from lplr.quantize import decode, encode

spec = QuantizerSpec(1.0, 3)
print("grid:", decode(np.arange(2**3), spec))
print("resolution:", spec.resolution)


# Quantize the same value many times and look at the mean and spread.

x = 0.3
rng = np.random.default_rng(0)
codes = encode(np.full(100_000, x), spec, rng.random(100_000))
y = decode(codes, spec)
print(f"mean {y.mean():.4f} (x = {x}), variance {y.var():.4f} <= {spec.resolution**2 / 4:.4f}")


# Nearest rounding has no variance but a fixed bias.

from lplr.quantize import quantize_scalar

code = quantize_scalar(x, spec, rng, rounding="nearest")
print("nearest:", decode(np.array([code]), spec)[0])
