"""
Hessian eigen-analysis, critical-point classification and straight-line scans.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instrument import Spectrometer

ABS_NULL_FLOOR = 1e-12


@dataclass(frozen=True)
class HessianSpectrum:
    """Eigenvalues sorted descending with matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    null_mask: np.ndarray
    null_tol: float

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def n_pos(self) -> int:
        return int(np.sum(self.eigenvalues > self.null_tol))

    @property
    def n_neg(self) -> int:
        return int(np.sum(self.eigenvalues < -self.null_tol))

    @property
    def n_null(self) -> int:
        return int(np.sum(self.null_mask))

    def to_dict(self) -> dict:
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            # one list per eigenvector
            "eigenvectors": self.eigenvectors.T.tolist(),
            "null_tol": self.null_tol,
            "n_pos": self.n_pos,
            "n_neg": self.n_neg,
            "n_null": self.n_null,
        }


@dataclass(frozen=True)
class CriticalVerdict:
    n_pos: int
    n_neg: int
    n_null: int
    label: str

    def to_dict(self) -> dict:
        return {"n_pos": self.n_pos, "n_neg": self.n_neg, "n_null": self.n_null,
                "label": self.label}


def _null_tol(eigenvalues: np.ndarray, relative_tol: float) -> float:
    scale = float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0
    return max(relative_tol * scale, ABS_NULL_FLOOR)


def eigendecompose(H, relative_tol: float = 0.1) -> HessianSpectrum:
    """Symmetric eigendecomposition with a deterministic sign convention.

    Eigenvalues come back in descending order. Each eigenvector is flipped so
    that its largest-magnitude component is positive. ``null_mask`` marks
    ``|lambda| <= relative_tol * max|lambda|`` (floored at 1e-12).
    """
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("Hessian must be a square matrix")
    if not np.array_equal(H, H.T):
        raise ValueError("Hessian must be exactly symmetric")
    w, V = np.linalg.eigh(H)
    order = np.argsort(w)[::-1]
    w, V = w[order], V[:, order]
    pivots = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[pivots, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    V = V * signs
    tol = _null_tol(w, relative_tol)
    return HessianSpectrum(w, V, np.abs(w) <= tol, tol)


def null_space(spectrum: HessianSpectrum, relative_tol: float = 0.1) -> np.ndarray:
    """Columns spanning the near-zero eigenvalue subspace, shape ``(D, k)``."""
    if not 0 <= relative_tol < 1:
        raise ValueError(f"relative_tol must lie in [0, 1), got {relative_tol}")
    tol = _null_tol(spectrum.eigenvalues, relative_tol)
    return spectrum.eigenvectors[:, np.abs(spectrum.eigenvalues) <= tol]


def classify_critical_point(spectrum: HessianSpectrum, grad_norm: float,
                            grad_floor: float) -> CriticalVerdict:
    """Label a point from its gradient size and Hessian sign counts.

    A gradient above ``grad_floor`` makes the point non-critical regardless of
    the spectrum. Below it, a spectrum with only negative (positive) non-null
    eigenvalues is max-like (min-like) and a mixed one is a saddle.
    """
    n_pos, n_neg, n_null = spectrum.n_pos, spectrum.n_neg, spectrum.n_null
    if grad_norm > grad_floor:
        label = "non-critical"
    elif n_pos > 0 and n_neg > 0:
        label = "saddle"
    elif n_neg > 0:
        label = "max-like"
    elif n_pos > 0:
        label = "min-like"
    else:
        # fully flat: nothing to distinguish an extremum from a plateau
        label = "non-critical"
    return CriticalVerdict(n_pos, n_neg, n_null, label)


def relative_distance(x, x0) -> float:
    """``||x - x0|| / ||x0||``."""
    x = np.asarray(x, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    n0 = np.linalg.norm(x0)
    if n0 == 0:
        raise ValueError("relative distance is undefined for a zero reference control")
    return float(np.linalg.norm(x - x0) / n0)


@dataclass(frozen=True)
class ScanResult:
    t: np.ndarray
    j: np.ndarray
    coeffs: tuple[float, float, float]  # a, b, c of a t^2 + b t + c
    r2: float

    def fitted(self, t) -> np.ndarray:
        a, b, c = self.coeffs
        t = np.asarray(t, dtype=float)
        return a * t**2 + b * t + c

    def fitted_drop(self, t: float) -> float:
        """Mean fitted decrease of J at ``+t`` and ``-t`` relative to ``t = 0``."""
        c = self.coeffs[2]
        return float(c - 0.5 * (self.fitted(t) + self.fitted(-t)))

    @property
    def max_drop(self) -> float:
        """Largest measured decrease below the ``t = 0`` sample."""
        j0 = self.j[np.argmin(np.abs(self.t))]
        return float(j0 - self.j.min())


def fit_parabola(t, j) -> tuple[tuple[float, float, float], float]:
    t = np.asarray(t, dtype=float)
    j = np.asarray(j, dtype=float)
    A = np.column_stack([t**2, t, np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(A, j, rcond=None)
    resid = j - A @ coef
    ss_tot = float(np.sum((j - j.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return (float(coef[0]), float(coef[1]), float(coef[2])), r2


def eigenvector_scan(instrument: Spectrometer, x0, v, max_rel_distance: float = 0.3,
                     n_points: int = 21) -> ScanResult:
    """March along a fixed unit direction and fit a parabola in relative distance.

    Samples ``x0 + t ||x0|| v`` for ``n_points`` evenly spaced ``t`` in
    ``[-max_rel_distance, max_rel_distance]``; ``n_points`` must be odd so
    that ``t = 0`` is measured.
    """
    x0 = np.asarray(getattr(x0, "x", x0), dtype=float)
    v = np.asarray(v, dtype=float)
    if not np.isclose(np.linalg.norm(v), 1.0, atol=1e-9):
        raise ValueError("scan direction must be a unit vector")
    if n_points < 5 or n_points % 2 == 0:
        raise ValueError("n_points must be an odd number >= 5")
    scale = np.linalg.norm(x0)
    if scale == 0:
        raise ValueError("scan origin must be non-zero")
    t = np.linspace(-max_rel_distance, max_rel_distance, n_points)
    t[n_points // 2] = 0.0
    j = np.array([instrument.measure(x0 + ti * scale * v).value for ti in t])
    coeffs, r2 = fit_parabola(t, j)
    return ScanResult(t, j, coeffs, r2)
