"""
Walking along Hessian eigenvectors
==================================

From the top of the landscape, step along each eigenvector of the fitted
Hessian out to +-30% of the pulse norm. The two negative directions give a
clean downward parabola; the six null directions stay flat within noise.
"""
# %%
import numpy as np

from landscape_rover import (NoiseModel, Spectrometer, dc_optimum, eigendecompose,
                             eigenvector_scan, hessian_least_squares)

inst = Spectrometer(noise=NoiseModel(sigma=1e-3, seed=4))
x_top = dc_optimum().x
spec = eigendecompose(hessian_least_squares(inst, x_top).H, 0.1)

# %%
for i, lam in enumerate(spec.eigenvalues):
    scan = eigenvector_scan(inst, x_top, spec.eigenvectors[:, i], 0.3, 21)
    kind = "null" if spec.null_mask[i] else "negative"
    print(f"v{i + 1} ({kind:8s}) lambda={lam:+.2e}  parabola a={scan.coeffs[0]:+.4f} "
          f"R2={scan.r2:.3f}  largest drop {scan.max_drop:.4f}")
