"""
Measurement-driven local models of the landscape.

* :func:`gradient_central_diff` spends ``2D`` measurements on a central
  difference gradient.
* :func:`hessian_least_squares` fits ``J(x0) + g.dx + dx.H.dx / 2`` to a cloud
  of random perturbations, solving for the ``D`` gradient entries and the
  ``D(D+1)/2`` distinct Hessian entries. The shot at ``x0`` itself enters as
  one more data row and the level ``J(x0)`` is fitted along with them; pinning
  it to a single noisy shot would leak that shot's error into the Hessian
  diagonal no matter how many samples are taken.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instrument import Spectrometer


class RankDeficientError(np.linalg.LinAlgError):
    """The perturbation design matrix cannot determine all unknowns."""


@dataclass(frozen=True)
class EstimatorSettings:
    d: float = 3.0
    delta: float = 10.0
    n_samples: int = 500


@dataclass(frozen=True)
class GradientEstimate:
    g: np.ndarray
    d: np.ndarray
    measurements_used: int

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.g))


@dataclass(frozen=True)
class HessianEstimate:
    """Local quadratic model; ``j0`` is the measured shot at ``x0``, ``j_fit``
    the fitted level."""

    H: np.ndarray
    g: np.ndarray
    j0: float
    n_samples: int
    residual_rms: float
    delta: float
    j_fit: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "H": self.H.tolist(),
            "g": self.g.tolist(),
            "j0": self.j0,
            "j_fit": self.j_fit,
            "n_samples": self.n_samples,
            "residual_rms": self.residual_rms,
            "delta": self.delta,
        }


def n_quadratic_unknowns(dim: int) -> int:
    return dim * (dim + 3) // 2


def gradient_noise_floor(sigma: float, d: float, dim: int) -> float:
    """Expected norm of a central-difference gradient that is pure noise.

    Each component carries noise ``sigma / (sqrt(2) d)``.
    """
    return sigma * np.sqrt(dim) / (np.sqrt(2.0) * d)


def gradient_central_diff(instrument: Spectrometer, x0, d) -> GradientEstimate:
    """Central-difference gradient from ``2D`` fresh measurements.

    ``d`` is a scalar increment or one increment per coordinate.
    """
    x0 = np.asarray(getattr(x0, "x", x0), dtype=float)
    D = x0.size
    d = np.broadcast_to(np.asarray(d, dtype=float), (D,)).copy()
    if np.any(d <= 0):
        raise ValueError("all increments must be positive")
    g = np.empty(D)
    for i in range(D):
        xp = x0.copy()
        xm = x0.copy()
        xp[i] += d[i]
        xm[i] -= d[i]
        g[i] = (instrument.measure(xp).value - instrument.measure(xm).value) / (2 * d[i])
    return GradientEstimate(g, d, 2 * D)


def quadratic_design(dx: np.ndarray, intercept: bool = False) -> np.ndarray:
    """Rows ``[1?, dx_1..dx_D, w_ij dx_i dx_j for i <= j]`` with ``w_ii = 1/2``.

    With this weighting the coefficients of the quadratic block are exactly
    the upper-triangle Hessian entries ``H_ij``.
    """
    n, D = dx.shape
    iu, ju = np.triu_indices(D)
    quad = dx[:, iu] * dx[:, ju]
    quad[:, iu == ju] *= 0.5
    cols = [np.ones((n, 1))] if intercept else []
    return np.hstack(cols + [dx, quad])


def fit_quadratic(dx: np.ndarray, j: np.ndarray, intercept: bool = True):
    """Least-squares second-order model from offsets ``dx`` and values ``j``.

    Returns ``(c, g, H, residual_rms)``. With ``intercept=False`` the values
    are taken as already referenced to ``J(x0)`` and ``c`` is 0. ``H`` is
    assembled from the fitted upper triangle, so it is symmetric by
    construction.
    """
    n, D = dx.shape
    A = quadratic_design(dx, intercept)
    coef, _, rank, _ = np.linalg.lstsq(A, j, rcond=None)
    if rank < A.shape[1]:
        raise RankDeficientError(
            f"design matrix has rank {rank}, need {A.shape[1]}"
        )
    resid = j - A @ coef
    c, coef = (coef[0], coef[1:]) if intercept else (0.0, coef)
    g = coef[:D]
    H = np.zeros((D, D))
    iu, ju = np.triu_indices(D)
    H[iu, ju] = coef[D:]
    H[ju, iu] = coef[D:]
    return float(c), g, H, float(np.sqrt(np.mean(resid**2)))


def hessian_least_squares(instrument: Spectrometer, x0, n_samples: int = 500,
                          delta: float = 10.0, rng: np.random.Generator | None = None
                          ) -> HessianEstimate:
    """Fit gradient and Hessian at ``x0`` from ``n_samples`` random probes.

    Perturbations are i.i.d. uniform on ``[-delta, delta]`` per coordinate.
    Costs ``n_samples + 1`` measurements: ``J(x0)`` first, then the cloud in
    sample order.

    Raises
    ------
    RankDeficientError
        If ``n_samples`` is below ``D(D+3)/2``, ``delta`` is zero, or the drawn
        design happens to be singular.
    """
    x0 = np.asarray(getattr(x0, "x", x0), dtype=float)
    D = x0.size
    if delta < 0:
        raise ValueError(f"delta must be positive, got {delta}")
    # the x0 shot supplies the row for the fitted level
    if n_samples < n_quadratic_unknowns(D) or delta == 0:
        raise RankDeficientError(
            f"{n_samples} samples at delta={delta} cannot determine "
            f"{n_quadratic_unknowns(D) + 1} unknowns"
        )
    if rng is None:
        rng = instrument.derived_rng(f"hessian-cloud-{instrument.clock.measurement_count}")
    dx = rng.uniform(-delta, delta, size=(n_samples, D))
    j0 = instrument.measure(x0).value
    j = np.array([instrument.measure(x0 + row).value for row in dx])
    c, g, H, rms = fit_quadratic(np.vstack([np.zeros(D), dx]), np.concatenate([[j0], j]))
    return HessianEstimate(H, g, j0, n_samples, rms, float(delta), c)
