# Nearest-neighbour labels before and after compressing an embedding matrix

import numpy as np

from lplr import CompressionConfig, compress, knn_classify, parity_sketch_size, reconstruct

rng = np.random.default_rng(3)
d = 64
u = rng.standard_normal(d)
u /= np.linalg.norm(u)
labels = rng.integers(0, 2, 300)


# Two clusters whose centres are 10 apart. The noise is either unit variance in
# every coordinate or scaled so that each cluster has unit radius.

for spread in (1.0, 1 / np.sqrt(d)):
    X = spread * rng.standard_normal((300, d)) + np.where(labels[:, None] == 1, 5.0, -5.0) * u
    m = parity_sketch_size(300, d, 8, 8, 1)
    Xhat = reconstruct(compress(X, CompressionConfig(sketch_size=m, bits=8, seed=0))[0])
    for name, data in (("raw", X), ("compressed", Xhat)):
        res = knn_classify(data[:200], labels[:200], data[200:], K=3, test_labels=labels[200:])
        print(f"noise {spread:.3f}  {name:10s} width {m}: accuracy {res.accuracy:.2f}, "
              f"weighted F1 {res.weighted_f1:.2f}")


# With unit noise per coordinate each sketched row still carries noise from all
# d coordinates, spread over only m directions, so some test points land on the
# wrong side. With unit-radius clusters the sketch keeps them apart.
