"""
Driving over the top
====================

Move across the maximum while staying on it: each iteration fits a fresh
Hessian, keeps only the component of a fixed free direction that lies in its
null space, and takes a 20-unit step. J stays near 1 while the pulse ends up
far from where it started.
"""
# %%
import numpy as np

from landscape_rover import NoiseModel, Spectrometer, dc_optimum, run_top_drive

inst = Spectrometer(noise=NoiseModel(sigma=1e-3, seed=5))
traj = run_top_drive(inst, dc_optimum(), h_free=np.ones(8), n_iter=10)

# %%
for r in traj.records:
    tag = f"n_neg={r.info['n_neg']}" if r.event == "hessian-probe" else "final"
    print(f"iter {r.iter:2d}  J {r.j:.4f}  relative distance {r.rel_distance:.2f}  {tag}")
print("final pulse:", np.round(traj.final.x, 1))
