# Monte-Carlo checks behind the error analysis

from lplr.verify import verify_equalization, verify_sketched_ls, verify_wishart_trace

w = verify_wishart_trace(8, 40, 5000, seed=0)
print(f"inverse-Wishart trace: {w.mc_estimate:.4f} vs {w.theory:.4f}")

for B in (1, 4, 8):
    e = verify_equalization(256, 32, B, 1.0, 2000, seed=0)
    print(f"clipped quantization, B={B}: {e.mc_error:.4f} <= {e.bound:.4f}")

s = verify_sketched_ls(trials=200, seed=0)
print(f"sketched least squares: {s.optimum:.1f} <= {s.mc_mean:.1f} <= {s.upper:.1f}")
