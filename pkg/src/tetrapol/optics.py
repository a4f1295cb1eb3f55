"""Jones-calculus models of the optical train.

Elements are lossless; losses and detector efficiencies are handled in
:mod:`tetrapol.instrument`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stokes import JonesVector

H_STATE = JonesVector(1.0, 0.0)


def _wrap_axis(angle: float) -> float:
    """Map a fast-axis angle onto (-pi/2, pi/2]; a retarder is symmetric under pi rotation."""
    a = float(np.mod(angle, np.pi))
    return a - np.pi if a > np.pi / 2 else a


@dataclass(frozen=True)
class WaveplateSpec:
    retardance: float
    fast_axis: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "retardance", float(np.mod(self.retardance, 2 * np.pi)))
        object.__setattr__(self, "fast_axis", _wrap_axis(self.fast_axis))

    @classmethod
    def hwp(cls, fast_axis: float) -> "WaveplateSpec":
        return cls(np.pi, fast_axis)

    @classmethod
    def qwp(cls, fast_axis: float) -> "WaveplateSpec":
        return cls(np.pi / 2, fast_axis)


@dataclass(frozen=True)
class PpbsSpec:
    """Partially polarizing beam splitter with residual (post-compensator) arm phases.

    ``x`` is the majority amplitude: H goes to the reflected arm with ``x``,
    V to the transmitted arm with ``x``.
    """

    x: float
    y: float
    phase_t: float = 0.0
    phase_r: float = 0.0

    def __post_init__(self):
        if not (0 <= self.y <= self.x <= 1):
            raise ValueError(f"need 0 <= y <= x <= 1, got x={self.x}, y={self.y}")

    @classmethod
    def from_ratio(cls, x_sq: float, phase_t: float = 0.0, phase_r: float = 0.0) -> "PpbsSpec":
        """Lossless splitter with intensity ratio ``x**2 = x_sq``."""
        if not 0.5 <= x_sq <= 1:
            raise ValueError(f"x_sq must lie in [0.5, 1], got {x_sq}")
        return cls(float(np.sqrt(x_sq)), float(np.sqrt(1 - x_sq)), phase_t, phase_r)

    def transmitted_matrix(self) -> np.ndarray:
        return np.diag([self.y, np.exp(1j * self.phase_t) * self.x]).astype(complex)

    def reflected_matrix(self) -> np.ndarray:
        return np.diag([self.x, np.exp(1j * self.phase_r) * self.y]).astype(complex)


@dataclass(frozen=True)
class AnalyzerSpec:
    """Projection basis ``(cos theta, e^{i phi} sin theta)`` and its orthogonal complement."""

    theta: float
    phi: float

    def __post_init__(self):
        if not -1e-12 <= self.theta <= np.pi / 2 + 1e-12:
            raise ValueError(f"theta must lie in [0, pi/2], got {self.theta}")

    @classmethod
    def diagonal(cls) -> "AnalyzerSpec":
        return cls(np.pi / 4, 0.0)

    @classmethod
    def circular(cls) -> "AnalyzerSpec":
        return cls(np.pi / 4, np.pi / 2)

    def basis(self) -> tuple[np.ndarray, np.ndarray]:
        """The (plus, minus) basis vectors as complex arrays."""
        c, s = np.cos(self.theta), np.sin(self.theta)
        plus = np.array([c, np.exp(1j * self.phi) * s])
        minus = np.array([-np.exp(-1j * self.phi) * s, c])
        return plus, minus


def rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]], dtype=complex)


def waveplate_matrix(w: WaveplateSpec) -> np.ndarray:
    """Jones matrix of a linear retarder; the slow axis picks up ``e^{i retardance}``."""
    core = np.diag([1.0, np.exp(1j * w.retardance)])
    return rotation(w.fast_axis) @ core @ rotation(-w.fast_axis)


def generate_state(hwp_angle: float, qwp_angle: float,
                   hwp_offset: float = 0.0, qwp_offset: float = 0.0) -> JonesVector:
    """State produced by H light passing a HWP and then a QWP.

    Offsets are added to the nominal fast-axis angles to model mount misalignment.
    """
    hwp = waveplate_matrix(WaveplateSpec.hwp(hwp_angle + hwp_offset))
    qwp = waveplate_matrix(WaveplateSpec.qwp(qwp_angle + qwp_offset))
    return JonesVector.from_array(qwp @ hwp @ H_STATE.as_array())


def ppbs_split(v: JonesVector, p: PpbsSpec) -> tuple[JonesVector, JonesVector]:
    a = v.as_array()
    return (JonesVector.from_array(p.transmitted_matrix() @ a),
            JonesVector.from_array(p.reflected_matrix() @ a))


def analyzer_intensities(v: JonesVector, a: AnalyzerSpec) -> tuple[float, float]:
    plus, minus = a.basis()
    amp = v.as_array()
    return (float(abs(np.vdot(plus, amp)) ** 2),
            float(abs(np.vdot(minus, amp)) ** 2))
