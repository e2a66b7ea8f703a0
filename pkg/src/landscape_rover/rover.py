"""
Landscape roving: elementary movements, forward-Euler stepping and the
experiment drivers built from them.

Every trajectory moves by ``x(k+1) = x(k) + beta * F(x(k))`` where ``F`` is
one of

* a fixed direction ``c``,
* ``alpha * grad J`` (ascent for ``alpha > 0``, descent for ``alpha < 0``),
* a free vector with its gradient component removed (non-critical level set),
* a free vector projected onto the Hessian null space (critical level set).

Drivers log one :class:`TrajectoryRecord` per iteration and hand each record
to an optional ``sink`` as soon as it exists, so partial runs are never lost.
A :class:`~landscape_rover.instrument.BudgetExhausted` raised mid-run ends
the trajectory early with ``complete = False``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .estimators import (EstimatorSettings, gradient_central_diff, gradient_noise_floor,
                         hessian_least_squares)
from .instrument import BudgetExhausted, Spectrometer
from .spectra import eigendecompose, null_space, relative_distance

EVENTS = ("step", "correction", "hessian-probe", "converged")

#: Spread of J observed along the energy level set; drift beyond 5x warns.
ENERGY_BAND = 0.003


class CriticalPointError(ValueError):
    """A movement needing a non-zero gradient was asked to act at a critical point."""


@dataclass(frozen=True)
class RoverConfig:
    """Step sizes and stopping rules for the drivers.

    ``alpha * beta`` is the ascent gain in field-unit^2 per unit of J; with the
    default 1000 a mid-landscape gradient saturates the ``max_step_len`` clip
    while steps near the top shrink with the gradient.
    """

    alpha: float = 1.0
    beta: float = 1000.0
    max_step_len: float = 2.0
    max_iter: int = 200
    grad_floor_factor: float = 3.0
    grad_floor_min: float = 1e-6
    converge_count: int = 3
    epsilon: float = 0.014
    step_len: float = 3.0
    energy_step_len: float = 2.0
    energy_repeats: int = 5
    top_step_len: float = 20.0
    top_n_samples: int = 100
    top_delta: float = 15.0
    null_rel_tol: float = 0.1
    expected_extremum_rank: int = 2
    max_inner_corrections: int = 10

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.epsilon >= 0:
            raise ValueError("epsilon must be non-negative")


@dataclass
class TrajectoryRecord:
    iter: int
    s: float
    x: np.ndarray
    j: float
    grad_norm: float | None
    rel_distance: float | None
    event: str
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.event not in EVENTS:
            raise ValueError(f"unknown event tag {self.event!r}")


@dataclass
class Trajectory:
    name: str
    records: list[TrajectoryRecord] = field(default_factory=list)
    complete: bool = True
    budget_exhausted: bool = False
    converged: bool = False
    failed: bool = False
    warnings: list[str] = field(default_factory=list)
    sink: Callable[[TrajectoryRecord], None] | None = field(default=None, repr=False)

    def append(self, record: TrajectoryRecord) -> None:
        if self.records and record.iter <= self.records[-1].iter:
            raise ValueError("iteration index must increase")
        self.records.append(record)
        if self.sink is not None:
            self.sink(record)

    def warn(self, message: str) -> None:
        self.warnings.append(message)

    @property
    def x(self) -> np.ndarray:
        return np.array([r.x for r in self.records])

    @property
    def j(self) -> np.ndarray:
        return np.array([r.j for r in self.records])

    @property
    def final(self) -> TrajectoryRecord:
        return self.records[-1]

    def count(self, event: str) -> int:
        return sum(r.event == event for r in self.records)

    @property
    def corrections(self) -> int:
        return self.count("correction")


# -- elementary movements ---------------------------------------------------

def euler_step(x, F, beta: float, max_step_len: float | None = None) -> np.ndarray:
    """``x + beta F``, rescaled to ``max_step_len`` if longer."""
    x = np.asarray(x, dtype=float)
    F = np.asarray(F, dtype=float)
    if F.shape != x.shape:
        raise ValueError("direction and control must have the same length")
    step = beta * F
    if max_step_len is not None:
        n = np.linalg.norm(step)
        if n > max_step_len:
            step = step * (max_step_len / n)
    return x + step


def direction_fixed(c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if not np.any(c):
        raise ValueError("fixed direction must be non-zero")
    return c.copy()


def direction_gradient(gradient, alpha: float) -> np.ndarray:
    return alpha * np.asarray(gradient, dtype=float)


def direction_level_set(gradient, g_free) -> np.ndarray:
    """Remove the gradient component of ``g_free``."""
    g = np.asarray(gradient, dtype=float)
    f = np.asarray(g_free, dtype=float)
    gg = g @ g
    if gg == 0:
        raise CriticalPointError(
            "gradient vanishes; use direction_null_space at a critical point"
        )
    out = f - g * ((g @ f) / gg)
    # one refinement pass brings |g.out| down to rounding level
    return out - g * ((g @ out) / gg)


def direction_null_space(null_basis, h_free) -> np.ndarray:
    """Project ``h_free`` onto the span of the orthonormal ``null_basis``.

    ``null_basis`` holds one basis vector per column. An empty basis gives
    the zero vector: an isolated critical point admits no motion.
    """
    h = np.asarray(h_free, dtype=float)
    V = np.asarray(null_basis, dtype=float)
    if V.size == 0:
        return np.zeros_like(h)
    V = V.reshape(h.size, -1)
    return V @ (V.T @ h)


def gradient_correction(x, j_measured: float, j0: float, gradient) -> np.ndarray:
    """Single gradient move that returns ``J`` to ``j0`` to first order."""
    g = np.asarray(gradient, dtype=float)
    gg = g @ g
    if gg == 0:
        raise CriticalPointError("cannot correct along a vanishing gradient")
    return np.asarray(x, dtype=float) - ((j_measured - j0) / gg) * g


def random_initial_control(rng: np.random.Generator, dim: int = 8,
                           half_width: float = 20.0) -> np.ndarray:
    return rng.uniform(-half_width, half_width, size=dim)


# -- drivers ------------------------------------------------------------------

def _rel(x, x0):
    return relative_distance(x, x0) if np.any(x0) else None


def run_gradient_search(instrument: Spectrometer, x_init, config: RoverConfig | None = None,
                        estimator: EstimatorSettings | None = None, sign: int = 1,
                        sink=None) -> Trajectory:
    """Gradient ascent (``sign=+1``) or descent (``sign=-1``) from ``x_init``.

    Each iteration measures ``J`` once and the gradient by central
    differences, then steps. The run converges when the gradient norm stays
    under ``grad_floor_factor`` times the noise floor for ``converge_count``
    consecutive iterations; that row is tagged ``converged``.
    """
    config = config or RoverConfig()
    estimator = estimator or EstimatorSettings()
    x0 = np.asarray(getattr(x_init, "x", x_init), dtype=float).copy()
    floor = gradient_noise_floor(instrument.sigma, estimator.d, x0.size)
    threshold = config.grad_floor_factor * max(floor, config.grad_floor_min)
    alpha = math.copysign(abs(config.alpha), sign)
    traj = Trajectory("ascent" if sign > 0 else "descent", sink=sink)

    x, s, below = x0.copy(), 0.0, 0
    try:
        for k in range(config.max_iter):
            j = instrument.measure(x).value
            ge = gradient_central_diff(instrument, x, estimator.d)
            below = below + 1 if ge.norm < threshold else 0
            done = below >= config.converge_count
            traj.append(TrajectoryRecord(k, s, x.copy(), j, ge.norm, _rel(x, x0),
                                         "converged" if done else "step",
                                         {"threshold": threshold}))
            if done:
                traj.converged = True
                break
            x_new = euler_step(x, direction_gradient(ge.g, alpha), config.beta,
                               config.max_step_len)
            s += float(np.linalg.norm(x_new - x))
            x = x_new
    except BudgetExhausted as exc:
        traj.complete = False
        traj.budget_exhausted = True
        traj.warn(str(exc))
    return traj


def run_ascent_descent(instrument: Spectrometer, x_init, config: RoverConfig | None = None,
                       estimator: EstimatorSettings | None = None,
                       directions=("ascent", "descent"), sinks=None) -> dict[str, Trajectory]:
    """Ascend and descend the landscape from the same starting control.

    Returns a dict keyed by ``"ascent"`` / ``"descent"``. Descent only starts
    if the ascent did not run out of budget.
    """
    sinks = sinks or {}
    out = {}
    for name in directions:
        sign = {"ascent": 1, "descent": -1}[name]
        out[name] = run_gradient_search(instrument, x_init, config, estimator, sign,
                                        sinks.get(name))
        if out[name].budget_exhausted:
            break
    return out


def run_top_drive(instrument: Spectrometer, x_top, h_free=None, n_iter: int = 10,
                  config: RoverConfig | None = None, sink=None) -> Trajectory:
    """Wander over a landscape extremum inside the local Hessian null space.

    Each iteration re-estimates the Hessian from ``top_n_samples`` probes,
    projects ``h_free`` onto the null space and moves a fixed control-space
    distance ``top_step_len`` along it. A probe whose spectrum does not show
    exactly ``expected_extremum_rank`` non-null eigenvalues of one sign is
    logged as a topology violation; the run continues.
    """
    config = config or RoverConfig()
    x0 = np.asarray(getattr(x_top, "x", x_top), dtype=float).copy()
    h = np.ones_like(x0) if h_free is None else np.asarray(h_free, dtype=float)
    traj = Trajectory("top-drive", sink=sink)
    x, s = x0.copy(), 0.0
    try:
        for k in range(n_iter):
            est = hessian_least_squares(instrument, x, config.top_n_samples, config.top_delta)
            spec = eigendecompose(est.H, config.null_rel_tol)
            basis = null_space(spec, config.null_rel_tol)
            rank = config.expected_extremum_rank
            info = {"n_pos": spec.n_pos, "n_neg": spec.n_neg, "n_null": spec.n_null,
                    "eigenvalues": spec.eigenvalues.tolist()}
            if not (spec.n_neg == rank and spec.n_pos == 0) and \
                    not (spec.n_pos == rank and spec.n_neg == 0):
                traj.warn(f"topology violation at iteration {k}: "
                          f"n_neg={spec.n_neg} n_pos={spec.n_pos}")
            traj.append(TrajectoryRecord(k, s, x.copy(), est.j0,
                                         float(np.linalg.norm(est.g)),
                                         _rel(x, x0), "hessian-probe", info))
            F = direction_null_space(basis, h)
            nF = np.linalg.norm(F)
            if nF > 0:
                x_new = euler_step(x, F, config.top_step_len / nF)
                s += float(np.linalg.norm(x_new - x))
                x = x_new
        j = instrument.measure(x).value
        traj.append(TrajectoryRecord(n_iter, s, x.copy(), j, None, _rel(x, x0), "step"))
    except BudgetExhausted as exc:
        traj.complete = False
        traj.budget_exhausted = True
        traj.warn(str(exc))
    return traj


def pulse_energy(x) -> float:
    """Discrete pulse energy ``||x||^2``."""
    x = np.asarray(x, dtype=float)
    return float(x @ x)


def run_levelset_energy(instrument: Spectrometer, x_init, n_iter: int = 30,
                        config: RoverConfig | None = None,
                        estimator: EstimatorSettings | None = None,
                        sink=None) -> Trajectory:
    """Lower the pulse energy while staying on the level set of ``x_init``.

    Per iteration: fresh central-difference gradient, free vector
    ``-x / ||x||``, orthogonal projection, Euler step of size
    ``energy_step_len``, then ``energy_repeats`` measurements of J for the
    log (mean in ``j``, spread in ``info["j_std"]``).
    """
    config = config or RoverConfig()
    estimator = estimator or EstimatorSettings()
    x0 = np.asarray(getattr(x_init, "x", x_init), dtype=float).copy()
    traj = Trajectory("levelset-energy", sink=sink)
    x, s = x0.copy(), 0.0
    band = 5 * ENERGY_BAND * instrument.j_max
    try:
        rep = instrument.measure_repeated(x, config.energy_repeats)
        j0 = rep.mean
        traj.append(TrajectoryRecord(0, s, x.copy(), rep.mean, None, 0.0, "step",
                                     {"energy": pulse_energy(x), "j_std": rep.std}))
        for k in range(1, n_iter + 1):
            ge = gradient_central_diff(instrument, x, estimator.d)
            F = direction_level_set(ge.g, -x / np.linalg.norm(x))
            x_new = euler_step(x, F, config.energy_step_len, config.max_step_len)
            s += float(np.linalg.norm(x_new - x))
            x = x_new
            rep = instrument.measure_repeated(x, config.energy_repeats)
            if abs(rep.mean - j0) > band:
                traj.warn(f"level drift {rep.mean - j0:+.4g} at iteration {k}")
            traj.append(TrajectoryRecord(k, s, x.copy(), rep.mean, ge.norm, _rel(x, x0),
                                         "step",
                                         {"energy": pulse_energy(x), "j_std": rep.std}))
    except BudgetExhausted as exc:
        traj.complete = False
        traj.budget_exhausted = True
        traj.warn(str(exc))
    return traj


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


def run_levelset_distance(instrument: Spectrometer, x_init, target_rel_distance: float = 2.5,
                          config: RoverConfig | None = None,
                          estimator: EstimatorSettings | None = None,
                          rng: np.random.Generator | None = None,
                          sink=None) -> Trajectory:
    """Travel far from ``x_init`` along its level set, correcting drift.

    1. Measure ``J0`` and the gradient at ``x(0)``; draw a random free vector.
    2. Project the free vector orthogonally to the (stored) gradient.
    3. Move a fixed distance ``step_len`` along that direction and measure J.
    4. While ``|J - J0| <= epsilon`` keep marching on the same direction.
       Otherwise re-measure the gradient and apply gradient corrections until
       back within ``epsilon`` (at most ``max_inner_corrections``), set the
       free vector to ``x - x(0)`` and return to step 2.
    5. Stop once the relative distance from ``x(0)`` reaches the target.
    """
    config = config or RoverConfig()
    estimator = estimator or EstimatorSettings()
    rng = rng or instrument.derived_rng("levelset-distance")
    x0 = np.asarray(getattr(x_init, "x", x_init), dtype=float).copy()
    eps = config.epsilon * instrument.j_max
    traj = Trajectory("levelset-distance", sink=sink)
    x, s, k = x0.copy(), 0.0, 0
    try:
        j0 = instrument.measure(x).value
        ge = gradient_central_diff(instrument, x, estimator.d)
        traj.append(TrajectoryRecord(k, s, x.copy(), j0, ge.norm, 0.0, "step"))
        direction = _unit(direction_level_set(ge.g, rng.standard_normal(x.size)))
        while True:
            if k >= config.max_iter:
                traj.failed = True
                traj.warn(f"target distance not reached within {config.max_iter} iterations")
                break
            k += 1
            x_new = euler_step(x, direction, config.step_len)
            s += float(np.linalg.norm(x_new - x))
            x = x_new
            j = instrument.measure(x).value
            traj.append(TrajectoryRecord(k, s, x.copy(), j, None, _rel(x, x0), "step",
                                         {"violation": abs(j - j0) > eps}))
            if abs(j - j0) > eps:
                for _ in range(config.max_inner_corrections):
                    ge = gradient_central_diff(instrument, x, estimator.d)
                    x_new = gradient_correction(x, j, j0, ge.g)
                    s += float(np.linalg.norm(x_new - x))
                    x = x_new
                    j = instrument.measure(x).value
                    k += 1
                    traj.append(TrajectoryRecord(k, s, x.copy(), j, ge.norm, _rel(x, x0),
                                                 "correction"))
                    if abs(j - j0) <= eps:
                        break
                else:
                    traj.failed = True
                    traj.warn("gradient correction did not return to the level set")
                    break
                g_free = x - x0
                if not np.any(direction_level_set(ge.g, g_free)):
                    g_free = rng.standard_normal(x.size)
                direction = _unit(direction_level_set(ge.g, g_free))
            if relative_distance(x, x0) >= target_rel_distance:
                traj.converged = True
                break
    except BudgetExhausted as exc:
        traj.complete = False
        traj.budget_exhausted = True
        traj.warn(str(exc))
    return traj
