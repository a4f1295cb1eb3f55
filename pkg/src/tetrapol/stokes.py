"""Polarization state representations and fidelity.

Axis convention used throughout the package:

* ``s_x`` : horizontal (+1) / vertical (-1) linear
* ``s_y`` : +45 deg (+1) / -45 deg (-1) linear
* ``s_z`` : circular, with ``s_z = +1`` for the Jones vector ``(1, i)/sqrt(2)``

so that a coherency matrix reads ``rho = (s_m*I + s_x*PX + s_y*PY + s_z*PZ) / 2``
with ``PX, PY, PZ`` the Pauli matrices below.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotAState, NotPure, Unphysical, ZeroIntensity

PAULI_X = np.array([[1, 0], [0, -1]], dtype=complex)   # H/V axis
PAULI_Y = np.array([[0, 1], [1, 0]], dtype=complex)    # +-45 axis
PAULI_Z = np.array([[0, -1j], [1j, 0]], dtype=complex)  # circular axis
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)

PURITY_TOL = 1e-6
STATE_TOL = 1e-10


@dataclass(frozen=True)
class ReducedStokes:
    """Point in (or, if unphysical, outside) the Poincare ball."""

    r_x: float
    r_y: float
    r_z: float

    @classmethod
    def from_array(cls, a) -> "ReducedStokes":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.r_x, self.r_y, self.r_z])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


@dataclass(frozen=True)
class StokesVector:
    """Intensity plus three polarization components ``(s_m, s_x, s_y, s_z)``."""

    s_m: float
    s_x: float
    s_y: float
    s_z: float

    @classmethod
    def from_array(cls, a) -> "StokesVector":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    @classmethod
    def from_reduced(cls, r, s_m: float = 1.0) -> "StokesVector":
        if isinstance(r, ReducedStokes):
            r = r.as_array()
        r = np.asarray(r, dtype=float)
        return cls.from_array(np.concatenate([[s_m], s_m * r]))

    def as_array(self) -> np.ndarray:
        return np.array([self.s_m, self.s_x, self.s_y, self.s_z])

    def normalized(self) -> "StokesVector":
        if self.s_m <= 0:
            raise ZeroIntensity(f"cannot normalize Stokes vector with s_m={self.s_m}")
        return StokesVector.from_array(self.as_array() / self.s_m)

    @property
    def reduced(self) -> ReducedStokes:
        n = self.normalized()
        return ReducedStokes(n.s_x, n.s_y, n.s_z)

    def is_physical(self, tol: float = 1e-9) -> bool:
        return self.s_m >= 0 and np.linalg.norm(self.as_array()[1:]) <= self.s_m * (1 + tol)


@dataclass(frozen=True)
class JonesVector:
    """Complex field amplitudes in the (H, V) basis."""

    alpha: complex
    beta: complex

    @classmethod
    def from_array(cls, a) -> "JonesVector":
        return cls(complex(a[0]), complex(a[1]))

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)

    @property
    def intensity(self) -> float:
        return abs(self.alpha) ** 2 + abs(self.beta) ** 2

    def normalized(self) -> "JonesVector":
        n = np.sqrt(self.intensity)
        if n == 0:
            raise ZeroIntensity("zero Jones vector")
        return JonesVector(self.alpha / n, self.beta / n)


def jones_to_stokes(v: JonesVector) -> StokesVector:
    a, b = v.alpha, v.beta
    cross = np.conj(a) * b
    return StokesVector(
        abs(a) ** 2 + abs(b) ** 2,
        abs(a) ** 2 - abs(b) ** 2,
        2 * cross.real,
        2 * cross.imag,
    )


def stokes_to_jones(s: StokesVector) -> JonesVector:
    """Jones vector (with real, non-negative ``alpha``) of a pure Stokes vector.

    The intensity ``s_m`` is carried into the norm of the result.
    """
    r = s.reduced.as_array()
    if abs(np.linalg.norm(r) - 1) > PURITY_TOL:
        raise NotPure("only pure states have a Jones representation")
    r = r / np.linalg.norm(r)
    # polar angle measured from the +s_x pole, azimuth in the (s_y, s_z) plane
    theta = np.arccos(np.clip(r[0], -1.0, 1.0))
    phi = np.arctan2(r[2], r[1])
    amp = np.sqrt(s.s_m)
    return JonesVector(amp * np.cos(theta / 2), amp * np.exp(1j * phi) * np.sin(theta / 2))


def coherency_matrix(v: JonesVector) -> np.ndarray:
    a = v.as_array()
    return np.outer(a, np.conj(a))


def stokes_to_coherency(s: StokesVector) -> np.ndarray:
    """Trace-one coherency (density) matrix of a Stokes vector."""
    if s.s_m <= 0:
        raise ZeroIntensity(f"s_m must be positive, got {s.s_m}")
    r = s.reduced.as_array()
    return 0.5 * (np.eye(2, dtype=complex) + sum(rk * p for rk, p in zip(r, PAULIS)))


def coherency_to_stokes(rho: np.ndarray) -> StokesVector:
    rho = np.asarray(rho, dtype=complex)
    comps = [np.trace(rho)] + [np.trace(rho @ p) for p in PAULIS]
    return StokesVector.from_array(np.real(comps))


def degree_of_polarization(s: StokesVector) -> float:
    if s.s_m <= 0:
        raise ZeroIntensity(f"s_m must be positive, got {s.s_m}")
    return float(np.linalg.norm(s.as_array()[1:]) / s.s_m)


def check_state(rho: np.ndarray, tol: float = STATE_TOL) -> np.ndarray:
    """Validate a normalized 2x2 coherency matrix and return it as complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise NotAState(f"expected a 2x2 matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise NotAState("matrix is not Hermitian")
    if abs(np.trace(rho).real - 1) > tol:
        raise NotAState(f"trace {np.trace(rho).real} differs from 1")
    if np.min(np.linalg.eigvalsh(rho)) < -tol:
        raise NotAState("matrix has a negative eigenvalue")
    return rho


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Uhlmann fidelity of two qubit states, evaluated in closed form.

    For 2x2 density matrices ``F = Tr(a b) + 2 sqrt(det a det b)``.
    """
    a = check_state(a)
    b = check_state(b)
    overlap = np.real(np.trace(a @ b))
    dets = max(np.real(np.linalg.det(a)), 0.0) * max(np.real(np.linalg.det(b)), 0.0)
    return float(np.clip(overlap + 2 * np.sqrt(dets), 0.0, 1.0))


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, u = np.linalg.eigh(m)
    # eigenvalues below the decomposition's rounding floor are zero; sqrt would amplify them
    w = np.where(w > 1e-14 * max(np.max(np.abs(w)), 1e-300), w, 0.0)
    return (u * np.sqrt(w)) @ u.conj().T


def fidelity_sqrtm(a: np.ndarray, b: np.ndarray) -> float:
    """Fidelity from its definition ``(Tr sqrt(sqrt(a) b sqrt(a)))**2``.

    Slower than :func:`fidelity`; kept as a cross-check of the closed form.
    """
    a = check_state(a)
    b = check_state(b)
    ra = _psd_sqrt(a)
    inner = ra @ b @ ra
    inner = 0.5 * (inner + inner.conj().T)
    return float(np.real(np.trace(_psd_sqrt(inner))) ** 2)


def _check_pure(s: StokesVector, name: str) -> None:
    dop = degree_of_polarization(s)
    if abs(dop - 1) > PURITY_TOL:
        raise NotPure(f"{name} has degree of polarization {dop:.9f}")


def fidelity_pure(rec: StokesVector, th: StokesVector) -> float:
    """Fidelity of two pure states as half the overlap of normalized Stokes vectors."""
    _check_pure(rec, "rec")
    _check_pure(th, "th")
    return float(0.5 * np.dot(rec.normalized().as_array(), th.normalized().as_array()))


def fidelity_to_pure(rec: StokesVector | ReducedStokes, th: StokesVector) -> float:
    """Fidelity of an arbitrary state against a pure reference state.

    When the reference is pure its determinant vanishes and the fidelity is
    exactly ``(1 + r_rec . r_th) / 2``, so ``rec`` need not be pure.  ``rec``
    must lie inside the unit ball.
    """
    _check_pure(th, "th")
    r = rec.as_array() if isinstance(rec, ReducedStokes) else rec.reduced.as_array()
    if np.linalg.norm(r) > 1 + 1e-9:
        raise Unphysical(f"|r| = {np.linalg.norm(r)} exceeds 1")
    return float(np.clip(0.5 * (1 + r @ th.reduced.as_array()), 0.0, 1.0))
