"""
Virtual NMR spectrometer and control-landscape rover for a single spin-1/2.

The landscape is ``J(x) = -<Ix>(T)`` over an 8-component piecewise-constant
RF pulse. Measurements are noisy and cost simulated lab time; gradients and
Hessians are estimated from them and drive ascent/descent, Hessian topology
probes, eigenvector scans and level-set exploration.
"""

__version__ = "0.1.0"

from .estimators import (EstimatorSettings, GradientEstimate, HessianEstimate,
                         RankDeficientError, gradient_central_diff, gradient_noise_floor,
                         hessian_least_squares)
from .instrument import (BudgetExhausted, LabClock, Measurement, NoiseModel,
                         RepeatedMeasurement, Spectrometer)
from .rover import (CriticalPointError, RoverConfig, Trajectory, TrajectoryRecord,
                    direction_fixed, direction_gradient, direction_level_set,
                    direction_null_space, euler_step, gradient_correction,
                    run_ascent_descent, run_gradient_search, run_levelset_distance,
                    run_levelset_energy, run_top_drive)
from .spectra import (CriticalVerdict, HessianSpectrum, ScanResult, classify_critical_point,
                      eigendecompose, eigenvector_scan, null_space, relative_distance)
from .spin import (BlochVector, PulseShape, SpinSystemParams, analytic_gradient,
                   analytic_hessian, dc_minimum, dc_optimum, interval_rotation, objective,
                   propagate)
