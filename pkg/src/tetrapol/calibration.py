"""Instrument-matrix calibration and Stokes reconstruction from photon counts.

Uncertainties are first-order propagations of independent Poisson count
variances (variance = counts).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import Coplanar, EmptyCounts, NegativeIntensity, NotPure
from .instrument import COND_LIMIT, InstrumentMatrix
from .stokes import PURITY_TOL, ReducedStokes, StokesVector, degree_of_polarization


def calibration_quartet() -> list[StokesVector]:
    """Four normalized pure states forming a regular tetrahedron on the Poincare sphere."""
    a, b = np.sqrt(1 / 3), np.sqrt(2 / 3)
    return [
        StokesVector(1.0, a, b, 0.0),
        StokesVector(1.0, a, -b, 0.0),
        StokesVector(1.0, -a, 0.0, -b),
        StokesVector(1.0, -a, 0.0, b),
    ]


@dataclass(frozen=True)
class CalibrationRecord:
    prepared: StokesVector
    counts: np.ndarray

    def __post_init__(self):
        dop = degree_of_polarization(self.prepared)
        if abs(dop - 1) > PURITY_TOL:
            raise NotPure(f"calibration state has degree of polarization {dop}")
        counts = np.asarray(self.counts, dtype=float)
        if counts.shape != (4,) or np.any(counts < 0):
            raise ValueError(f"counts must be four non-negative numbers, got {self.counts}")
        object.__setattr__(self, "counts", counts)


@dataclass(frozen=True)
class CalibrationResult:
    instrument: InstrumentMatrix
    residual: float

    @property
    def b(self) -> np.ndarray:
        return self.instrument.b

    @property
    def b_inv(self) -> np.ndarray:
        return self.instrument.b_inv

    @property
    def sigma_inv(self) -> np.ndarray:
        return self.instrument.sigma_inv

    @property
    def cond(self) -> float:
        return self.instrument.cond


def calibrate(records: Sequence[CalibrationRecord], scale: float = 1.0,
              poisson: bool = True) -> CalibrationResult:
    """Fit the instrument matrix ``B`` with ``counts / scale = B @ S``.

    Exactly four records give the exactly determined solution; more are
    fitted by unweighted least squares.

    Parameters
    ----------
    records : sequence of CalibrationRecord
        Known prepared states with their measured counts, all taken over the
        same acquisition window.
    scale : float
        Divisor applied to every count, e.g. the nominal number of photons
        per calibration state, so that ``B`` is expressed per input photon.
    poisson : bool
        Propagate Poisson variances into ``sigma_inv``. Pass False for
        noiseless expected counts, which yields zero uncertainties.
    """
    if len(records) < 4:
        raise Coplanar(f"need at least 4 calibration records, got {len(records)}")
    if not scale > 0:
        raise ValueError("scale must be positive")
    s_bar = np.column_stack([r.prepared.normalized().as_array() for r in records])
    n_bar = np.column_stack([r.counts for r in records])
    i_bar = n_bar / scale
    if np.linalg.cond(s_bar) > COND_LIMIT:
        raise Coplanar("prepared calibration states do not span the Stokes space")

    if len(records) == 4:
        s_pinv = np.linalg.inv(s_bar)
    else:
        s_pinv = s_bar.T @ np.linalg.inv(s_bar @ s_bar.T)
    b = i_bar @ s_pinv
    residual = float(np.linalg.norm(i_bar - b @ s_bar))
    instrument = InstrumentMatrix.from_matrix(b)

    sigma = np.zeros((4, 4))
    if poisson:
        # d(B^-1) = -B^-1 dI P B^-1 with P = s_pinv; every I[j,k] independent
        q = s_pinv @ instrument.b_inv
        var_i = n_bar / scale**2
        sigma = np.sqrt(instrument.b_inv**2 @ var_i @ q**2)
    return CalibrationResult(
        InstrumentMatrix(instrument.b, instrument.b_inv, instrument.cond, sigma), residual)


@dataclass(frozen=True)
class ReconstructionResult:
    raw: StokesVector
    reduced: ReducedStokes
    sigma: np.ndarray
    sigma_reduced: np.ndarray
    sigma_norm: float
    physical: bool
    projected: ReducedStokes
    jacobian: np.ndarray
    counts: np.ndarray


def _reduced_jacobian(b_inv: np.ndarray, raw: np.ndarray) -> np.ndarray:
    # d(raw_i / raw_0) / d n_j by the quotient rule
    r = raw[1:] / raw[0]
    return (b_inv[1:] - np.outer(r, b_inv[0])) / raw[0]


def reconstruct(counts, cal: CalibrationResult, poisson: bool = True) -> ReconstructionResult:
    """Linear-inversion Stokes estimate with propagated Poisson uncertainties.

    Unphysical estimates (``|r| > 1``) are reported as they are and flagged;
    ``projected`` holds their radial projection onto the unit sphere.
    """
    n = np.asarray(counts, dtype=float)
    if n.shape != (4,) or np.any(n < 0):
        raise ValueError(f"counts must be four non-negative numbers, got {counts}")
    if not np.any(n > 0):
        raise EmptyCounts("all counts are zero")
    b_inv = cal.b_inv
    raw = b_inv @ n
    if raw[0] <= 0:
        raise NegativeIntensity(f"reconstructed intensity {raw[0]} is not positive")
    var_n = n if poisson else np.zeros(4)
    sigma = np.sqrt(b_inv**2 @ var_n)

    r = raw[1:] / raw[0]
    jac = _reduced_jacobian(b_inv, raw)
    sigma_reduced = np.sqrt(jac**2 @ var_n)
    norm = float(np.linalg.norm(r))
    if norm > 0:
        sigma_norm = float(np.sqrt(((r / norm) @ jac) ** 2 @ var_n))
    else:
        sigma_norm = float(np.max(sigma_reduced))
    physical = norm <= 1 + 3 * sigma_norm
    projected = r / norm if norm > 1 else r
    return ReconstructionResult(
        raw=StokesVector.from_array(raw),
        reduced=ReducedStokes.from_array(r),
        sigma=sigma,
        sigma_reduced=sigma_reduced,
        sigma_norm=sigma_norm,
        physical=bool(physical),
        projected=ReducedStokes.from_array(projected),
        jacobian=jac,
        counts=n,
    )


def reconstruction_uncertainty(result: ReconstructionResult) -> np.ndarray:
    """One-sigma uncertainties of the raw Stokes 4-vector."""
    return result.sigma


def fidelity_uncertainty(result: ReconstructionResult, th: StokesVector,
                         poisson: bool = True) -> float:
    """First-order sigma of ``(1 + r . r_th) / 2`` from the count variances."""
    grad = 0.5 * (th.reduced.as_array() @ result.jacobian)
    var_n = result.counts if poisson else np.zeros(4)
    return float(np.sqrt(grad**2 @ var_n))
