"""
Spin dynamics and calibration
=============================

A single spin starts along +z. A piecewise-constant RF pulse with four x-field
and four y-field amplitudes rotates it; the figure of merit is the magnetization
that ends up along -x. This script checks the calibration constant, shows
where a few hand-made pulses send the spin, and prints the curvature at the
best DC pulse.
"""
# %%
import numpy as np

from landscape_rover import (PulseShape, SpinSystemParams, analytic_gradient,
                             analytic_hessian, dc_optimum, objective, propagate)

params = SpinSystemParams()
print(f"calibration constant k = {params.calib_k:.4f} rad/s per field unit")
print(f"37 units for 500 us gives a {np.degrees(params.calib_k * 37 * 500e-6):.1f} degree turn")

# %%
# A constant +y field of 37 units is the 90-degree pulse; twice that is 180.
pulses = {
    "no pulse": np.zeros(8),
    "90 deg about +y": [0, 0, 0, 0, 37, 37, 37, 37],
    "180 deg about +y": [0, 0, 0, 0, 74, 74, 74, 74],
    "90 deg about +x": [37, 37, 37, 37, 0, 0, 0, 0],
}
for name, x in pulses.items():
    m = propagate(PulseShape(x)).m
    print(f"{name:18s} M(T) = {np.round(m, 6)}  J = {objective(PulseShape(x)):+.4f}")

# %%
# The DC optimum is a critical point: the gradient vanishes and only two
# directions curve downwards; the other six leave J unchanged to second order.
top = dc_optimum()
print("gradient norm at the optimum:", np.linalg.norm(analytic_gradient(top)))
print("Hessian eigenvalues:", np.array2string(np.linalg.eigvalsh(analytic_hessian(top)),
                                              precision=3))
