"""
Hessian spectra along an ascent
===============================

Least-squares Hessians fitted to clouds of noisy measurements at several
heights of one ascent/descent pair. At the top and bottom two eigenvalues
stand out and six vanish; near J ~ 0 the landscape curves both ways.
"""
# %%
import numpy as np

from landscape_rover import (NoiseModel, Spectrometer, eigendecompose, hessian_least_squares,
                             run_ascent_descent)

inst = Spectrometer(noise=NoiseModel(sigma=1e-3, seed=3))
runs = run_ascent_descent(inst, np.random.default_rng(3).uniform(-20, 20, 8))
records = runs["ascent"].records + runs["descent"].records

# %%
for target in (1.0, 0.71, 0.31, 0.03, -1.0):
    rec = min(records, key=lambda r: abs(r.j - target))
    spec = eigendecompose(hessian_least_squares(inst, rec.x).H, 0.1)
    print(f"J = {rec.j:+.3f}: n_neg={spec.n_neg} n_null={spec.n_null} n_pos={spec.n_pos}  "
          f"eigenvalues {np.array2string(spec.eigenvalues * 1e4, precision=2)} x1e-4")
