"""
Closed-system dynamics of a single spin-1/2 under piecewise-constant RF fields.

The state is carried as a Bloch vector ``m = (mx, my, mz)``. In the rotating
frame the magnetization obeys

    dM/dt = M x Omega,    Omega = (k*Bx, k*By, -detuning)

so every constant-field interval is an exact rotation and the whole pulse is
a product of 3x3 rotation matrices. The objective is ``J = -mx(T) * j_max``
starting from thermal equilibrium along +z.

The analytic gradient and Hessian in this module are noise-free oracles used
to check the measurement-based estimators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Amplitude (field units) of a constant 90 degree pulse lasting ``CALIB_TIME``.
CALIB_AMPLITUDE = 37.0
CALIB_TIME = 500e-6

#: rad per (field unit * second); fixed by the 90 degree calibration pulse.
DEFAULT_CALIB_K = (np.pi / 2) / (CALIB_AMPLITUDE * CALIB_TIME)

_EX = np.array([1.0, 0.0, 0.0])
_EY = np.array([0.0, 1.0, 0.0])
_Z_UP = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class SpinSystemParams:
    """Physical constants of the simulated spin.

    Parameters
    ----------
    calib_k : float
        Coupling constant (gyromagnetic ratio folded with the field unit),
        rad / (field unit * s).
    detuning : float
        Off-resonance term ``gamma*B0 - omega_RF`` in rad/s. Zero on resonance.
    j_max : float
        Scale of the objective; ``J`` lives in ``[-j_max, j_max]``.
    """

    calib_k: float = DEFAULT_CALIB_K
    detuning: float = 0.0
    j_max: float = 1.0

    def __post_init__(self):
        if not self.calib_k > 0:
            raise ValueError(f"calib_k must be positive, got {self.calib_k}")
        if not self.j_max > 0:
            raise ValueError(f"j_max must be positive, got {self.j_max}")


@dataclass(frozen=True)
class PulseShape:
    """Piecewise-constant control ``x = (Bx_1..Bx_N, By_1..By_N)``."""

    x: np.ndarray
    total_time: float = CALIB_TIME
    n_intervals: int = 4

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        if int(self.n_intervals) != self.n_intervals or self.n_intervals < 1:
            raise ValueError(f"n_intervals must be a positive integer, got {self.n_intervals}")
        if not self.total_time > 0:
            raise ValueError(f"total_time must be positive, got {self.total_time}")
        if x.size != 2 * self.n_intervals:
            raise ValueError(
                f"control vector has length {x.size}, expected {2 * self.n_intervals}"
            )
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "n_intervals", int(self.n_intervals))

    @property
    def dim(self) -> int:
        return self.x.size

    @property
    def dt(self) -> float:
        return self.total_time / self.n_intervals

    @property
    def bx(self) -> np.ndarray:
        return self.x[: self.n_intervals]

    @property
    def by(self) -> np.ndarray:
        return self.x[self.n_intervals :]

    def with_x(self, x) -> "PulseShape":
        """Same timing, new amplitudes."""
        return PulseShape(x, total_time=self.total_time, n_intervals=self.n_intervals)

    @classmethod
    def zeros(cls, n_intervals: int = 4, total_time: float = CALIB_TIME) -> "PulseShape":
        return cls(np.zeros(2 * n_intervals), total_time, n_intervals)

    @classmethod
    def dc(cls, by: float, bx: float = 0.0, n_intervals: int = 4,
           total_time: float = CALIB_TIME) -> "PulseShape":
        """Constant field over the whole pulse."""
        x = np.concatenate([np.full(n_intervals, bx), np.full(n_intervals, by)])
        return cls(x, total_time, n_intervals)


def dc_optimum(n_intervals: int = 4, total_time: float = CALIB_TIME,
               params: SpinSystemParams | None = None) -> PulseShape:
    """The +y DC pulse with a 90 degree flip, which maximizes ``J``."""
    params = params or SpinSystemParams()
    amp = (np.pi / 2) / (params.calib_k * total_time)
    return PulseShape.dc(amp, n_intervals=n_intervals, total_time=total_time)


def dc_minimum(n_intervals: int = 4, total_time: float = CALIB_TIME,
               params: SpinSystemParams | None = None) -> PulseShape:
    """The -y DC pulse with a 90 degree flip, which minimizes ``J``."""
    top = dc_optimum(n_intervals, total_time, params)
    return top.with_x(-top.x)


@dataclass(frozen=True)
class BlochVector:
    m: np.ndarray = field(default_factory=lambda: _Z_UP.copy())

    def __post_init__(self):
        m = np.array(self.m, dtype=float).reshape(-1)
        if m.size != 3:
            raise ValueError("Bloch vector needs three components")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.m))

    def density_matrix(self) -> np.ndarray:
        return to_density_matrix(self.m)


_PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


def to_density_matrix(m) -> np.ndarray:
    """``rho = (1 + m . sigma) / 2``."""
    m = np.asarray(m, dtype=float)
    return 0.5 * (np.eye(2, dtype=complex) + np.einsum("i,ijk->jk", m, _PAULI))


def from_density_matrix(rho) -> np.ndarray:
    """Inverse of :func:`to_density_matrix`: ``m_i = Tr(rho sigma_i)``."""
    rho = np.asarray(rho, dtype=complex)
    return np.real(np.einsum("jk,ikj->i", rho, _PAULI))


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def _rotation_vector(bx: float, by: float, dt: float, params: SpinSystemParams) -> np.ndarray:
    # M x Omega = -[Omega]x M, hence R = exp([phi]x) with phi = -dt * Omega.
    return -dt * np.array([params.calib_k * bx, params.calib_k * by, -params.detuning])


def _expm_so3(phi: np.ndarray) -> np.ndarray:
    theta = np.linalg.norm(phi)
    if theta == 0.0:
        return np.eye(3)
    K = _skew(phi / theta)
    return np.eye(3) + np.sin(theta) * K + (1.0 - np.cos(theta)) * (K @ K)


def _dexp_so3(phi: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Derivatives ``dR/dphi_i`` for ``R = exp([phi]x)``, shape (3, 3, 3)."""
    theta2 = phi @ phi
    out = np.empty((3, 3, 3))
    if theta2 < 1e-24:
        for i in range(3):
            out[i] = _skew(np.eye(3)[i])
        return out
    S = _skew(phi)
    I_minus_R = np.eye(3) - R
    for i in range(3):
        e = np.zeros(3)
        e[i] = 1.0
        out[i] = (phi[i] * S + _skew(np.cross(phi, I_minus_R @ e))) / theta2 @ R
    return out


def interval_rotation(bx: float, by: float, dt: float,
                      params: SpinSystemParams | None = None) -> np.ndarray:
    """Rotation matrix of one constant-field interval.

    A +y field of amplitude 37 held for 500 us takes +z to -x; a +x field of
    the same size takes +z to +y.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    params = params or SpinSystemParams()
    return _expm_so3(_rotation_vector(bx, by, dt, params))


def _interval_rotations(pulse: PulseShape, params: SpinSystemParams) -> list[np.ndarray]:
    dt = pulse.dt
    return [interval_rotation(bx, by, dt, params) for bx, by in zip(pulse.bx, pulse.by)]


def pulse_propagator(pulse: PulseShape, params: SpinSystemParams | None = None) -> np.ndarray:
    """Total rotation ``R_N ... R_1`` of the pulse."""
    params = params or SpinSystemParams()
    U = np.eye(3)
    for R in _interval_rotations(pulse, params):
        U = R @ U
    return U


def propagate(pulse: PulseShape, m0: BlochVector | None = None,
              params: SpinSystemParams | None = None) -> BlochVector:
    """Apply the pulse to ``m0`` (default +z), intervals in time order."""
    params = params or SpinSystemParams()
    m = (m0 if m0 is not None else BlochVector()).m.copy()
    for R in _interval_rotations(pulse, params):
        m = R @ m
    return BlochVector(m)


def objective(pulse: PulseShape, params: SpinSystemParams | None = None) -> float:
    """``J = -<Ix>`` at the end of the pulse, in units of ``j_max``."""
    params = params or SpinSystemParams()
    return float(-propagate(pulse, None, params).m[0] * params.j_max)


def analytic_gradient(pulse: PulseShape, params: SpinSystemParams | None = None) -> np.ndarray:
    """Exact ``dJ/dx`` by chaining the closed-form derivative of each rotation.

    Returns the gradient in the same ``(Bx..., By...)`` ordering as ``pulse.x``.
    """
    params = params or SpinSystemParams()
    N, dt = pulse.n_intervals, pulse.dt
    phis = [_rotation_vector(bx, by, dt, params) for bx, by in zip(pulse.bx, pulse.by)]
    Rs = [_expm_so3(p) for p in phis]

    states = [_Z_UP.copy()]
    for R in Rs:
        states.append(R @ states[-1])
    # costate[j] = d J / d m_j, propagated backwards from the final time
    costate = [None] * (N + 1)
    costate[N] = -params.j_max * _EX
    for j in range(N - 1, -1, -1):
        costate[j] = Rs[j].T @ costate[j + 1]

    dphi_dbx = -dt * params.calib_k * _EX
    dphi_dby = -dt * params.calib_k * _EY
    grad = np.empty(2 * N)
    for j in range(N):
        dR = _dexp_so3(phis[j], Rs[j])
        # sensitivity of the final objective to each rotation-vector component
        s = np.array([costate[j + 1] @ (dR[i] @ states[j]) for i in range(3)])
        grad[j] = s @ dphi_dbx
        grad[N + j] = s @ dphi_dby
    return grad


def analytic_hessian(pulse: PulseShape, params: SpinSystemParams | None = None,
                     step: float = 1e-5) -> np.ndarray:
    """Central differences of :func:`analytic_gradient`, symmetrized."""
    params = params or SpinSystemParams()
    D = pulse.dim
    H = np.empty((D, D))
    for i in range(D):
        e = np.zeros(D)
        e[i] = step
        H[i] = (analytic_gradient(pulse.with_x(pulse.x + e), params)
                - analytic_gradient(pulse.with_x(pulse.x - e), params)) / (2 * step)
    return 0.5 * (H + H.T)
