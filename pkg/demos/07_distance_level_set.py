"""
Travelling far along a level set
================================

March in a fixed direction orthogonal to the gradient, re-measuring J after
each step. Only when J drifts beyond the tolerance is the gradient measured
again and a correction applied. The pulse moves 250% of its own norm away
from the start at essentially constant J.
"""
# %%
import numpy as np

from landscape_rover import NoiseModel, RoverConfig, Spectrometer, run_levelset_distance

inst = Spectrometer(noise=NoiseModel(sigma=1e-3, seed=7))
rng = np.random.default_rng(7)
while True:
    x0 = rng.uniform(-20, 20, 8)
    if 0.4 <= inst.measure(x0).value <= 0.6:
        break

traj = run_levelset_distance(inst, x0, target_rel_distance=2.5,
                             config=RoverConfig(epsilon=0.014))

# %%
j0 = traj.records[0].j
for r in traj.records:
    print(f"iter {r.iter:2d}  {r.event:10s}  J-J0 {r.j - j0:+.4f}  "
          f"relative distance {r.rel_distance:.2f}")
print(f"corrections: {traj.corrections}, measurements: {inst.clock.measurement_count}")
