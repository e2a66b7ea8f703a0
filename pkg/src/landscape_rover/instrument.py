"""
Virtual spectrometer: noisy, budgeted, clocked measurements of the objective.

Each measurement adds i.i.d. Gaussian noise from a seeded PCG64 stream and
costs a fixed 3 s of simulated laboratory time (0.5 s acquisition plus 2.5 s
relaxation wait). Nothing here sleeps; the clock is bookkeeping only.
"""

from __future__ import annotations

import hashlib
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .spin import CALIB_TIME, PulseShape, SpinSystemParams, objective

PRNG_ALGORITHM = "PCG64"
ACQUISITION_TIME = 0.5
RELAXATION_WAIT = 2.5
MEASUREMENT_COST = ACQUISITION_TIME + RELAXATION_WAIT


class BudgetExhausted(RuntimeError):
    """Raised when a measurement would exceed the configured budget."""


@dataclass(frozen=True)
class NoiseModel:
    """Additive Gaussian noise on J.

    Realistic ``sigma`` lies in ``[1e-4, 1e-3] * j_max``.
    """

    sigma: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class Measurement:
    value: float
    pulse_id: str
    tick: int
    lab_time_cost: float = MEASUREMENT_COST


@dataclass(frozen=True)
class RepeatedMeasurement:
    mean: float
    std: float
    n: int

    @property
    def degenerate(self) -> bool:
        """A single shot has no spread estimate; ``std`` is reported as 0."""
        return self.n < 2


@dataclass
class LabClock:
    measurement_count: int = 0
    budget: int | None = None

    @property
    def total_lab_time(self) -> float:
        return MEASUREMENT_COST * self.measurement_count

    @property
    def remaining(self) -> int | None:
        if self.budget is None:
            return None
        return self.budget - self.measurement_count

    def tick(self) -> int:
        if self.budget is not None and self.measurement_count + 1 > self.budget:
            raise BudgetExhausted(
                f"measurement budget of {self.budget} exhausted"
            )
        self.measurement_count += 1
        return self.measurement_count


def pulse_id(x: np.ndarray) -> str:
    """Short content hash of a control vector."""
    return hashlib.sha1(np.ascontiguousarray(x, dtype=float).tobytes()).hexdigest()[:12]


@dataclass
class Spectrometer:
    """Noisy measurement front end for a landscape ``J(x)``.

    By default the landscape is the simulated spin objective. Any callable
    ``objective(x) -> float`` may be supplied instead (e.g. a synthetic
    quadratic for estimator checks); ``dim`` must then be given.

    Examples
    --------
    >>> inst = Spectrometer(noise=NoiseModel(sigma=0.0))
    >>> round(inst.measure([0, 0, 0, 0, 37, 37, 37, 37]).value, 12)
    1.0
    """

    system: SpinSystemParams = field(default_factory=SpinSystemParams)
    noise: NoiseModel = field(default_factory=NoiseModel)
    n_intervals: int = 4
    total_time: float = CALIB_TIME
    budget: int | None = None
    objective: Callable[[np.ndarray], float] | None = None
    dim: int | None = None

    def __post_init__(self):
        self.clock = LabClock(budget=self.budget)
        self._rng = np.random.default_rng(self.noise.seed)
        if self.objective is None:
            self.dim = 2 * self.n_intervals
        elif self.dim is None:
            raise ValueError("dim is required with a custom objective")

    @property
    def sigma(self) -> float:
        return self.noise.sigma

    @property
    def j_max(self) -> float:
        return self.system.j_max

    @property
    def template(self) -> PulseShape:
        return PulseShape.zeros(self.n_intervals, self.total_time)

    def true_value(self, x) -> float:
        """Noise-free objective; does not consume a measurement."""
        x = self._vector(x)
        if self.objective is not None:
            return float(self.objective(x))
        return objective(PulseShape(x, self.total_time, self.n_intervals), self.system)

    def measure(self, x) -> Measurement:
        """One noisy shot at control ``x`` (array or :class:`PulseShape`)."""
        x = self._vector(x)
        tick = self.clock.tick()
        value = self.true_value(x) + self.noise.sigma * self._rng.standard_normal()
        return Measurement(float(value), pulse_id(x), tick)

    def measure_repeated(self, x, n: int) -> RepeatedMeasurement:
        if n < 1:
            raise ValueError(f"n must be at least 1, got {n}")
        values = np.array([self.measure(x).value for _ in range(n)])
        if n == 1 or np.all(values == values[0]):
            std = 0.0
        else:
            std = float(values.std(ddof=1))
        return RepeatedMeasurement(float(values.mean()), std, n)

    def derived_rng(self, label: str) -> np.random.Generator:
        """Generator for algorithmic randomness, independent of the noise stream."""
        return np.random.default_rng([int(self.noise.seed), zlib.crc32(label.encode())])

    def _vector(self, x) -> np.ndarray:
        if isinstance(x, PulseShape):
            x = x.x
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != self.dim:
            raise ValueError(f"control has length {x.size}, expected {self.dim}")
        return x
