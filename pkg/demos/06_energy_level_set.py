"""
Cheaper pulses with the same effect
===================================

Hold J fixed and push the pulse towards lower energy by projecting the
direction -x/|x| orthogonally to the measured gradient. The energy drops
while J hardly moves, and the x-field share of the pulse shrinks.
"""
# %%
import numpy as np

from landscape_rover import NoiseModel, Spectrometer, run_levelset_energy

inst = Spectrometer(noise=NoiseModel(sigma=1e-3, seed=6))
rng = np.random.default_rng(6)
while True:
    x0 = rng.uniform(-30, 30, 8)
    if 0.5 <= inst.measure(x0).value <= 0.7:
        break

traj = run_levelset_energy(inst, x0, n_iter=30)

# %%
for r in traj.records[::5]:
    bx, by = np.linalg.norm(r.x[:4]), np.linalg.norm(r.x[4:])
    print(f"iter {r.iter:2d}  J {r.j:.4f} +- {r.info['j_std']:.4f}  energy "
          f"{r.info['energy']:8.1f}  |Bx|/|By| {bx / by:.3f}")
