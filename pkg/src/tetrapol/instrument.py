"""Four-detector polarimeter: forward model, instrument matrix, design and counts.

Detector numbering follows the optical layout: detectors 1 and 2 sit behind
the analyzer in the transmitted arm (plus / minus port), detectors 3 and 4
behind the analyzer in the reflected arm.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFrame, Singular, Unphysical
from .optics import AnalyzerSpec, PpbsSpec, analyzer_intensities, ppbs_split
from .stokes import (PAULIS, JonesVector, ReducedStokes, StokesVector,
                     degree_of_polarization, jones_to_stokes)

COND_LIMIT = 1e8


def optimal_splitting_ratio() -> tuple[float, float]:
    """Intensity splitting ratio ``(x**2, y**2)`` giving a regular tetrahedron."""
    x_sq = 0.5 + 0.5 / np.sqrt(3)
    return x_sq, 1.0 - x_sq


@dataclass(frozen=True)
class TetrahedronFrame:
    vectors: tuple[ReducedStokes, ReducedStokes, ReducedStokes, ReducedStokes]

    @classmethod
    def from_array(cls, a) -> "TetrahedronFrame":
        a = np.asarray(a, dtype=float)
        if a.shape != (4, 3):
            raise ValueError(f"frame needs shape (4, 3), got {a.shape}")
        return cls(tuple(ReducedStokes.from_array(row) for row in a))

    def as_array(self) -> np.ndarray:
        return np.array([b.as_array() for b in self.vectors])

    def gram(self) -> np.ndarray:
        a = self.as_array()
        return a @ a.T

    def pairwise_dots(self) -> np.ndarray:
        g = self.gram()
        return g[np.triu_indices(4, k=1)]

    def is_regular(self, tol: float = 1e-9) -> bool:
        a = self.as_array()
        return bool(np.allclose(np.linalg.norm(a, axis=1), 1, atol=tol)
                    and np.allclose(self.pairwise_dots(), -1 / 3, atol=tol)
                    and np.linalg.norm(a.sum(axis=0)) < tol)

    def is_coplanar(self, tol: float = 1e-9) -> bool:
        # the four points lie in a common plane iff the 4x4 matrix of rows (1, b_j) is singular
        m = np.hstack([np.ones((4, 1)), self.as_array()])
        return bool(abs(np.linalg.det(m)) < tol)


@dataclass(frozen=True)
class PolarimeterModel:
    ppbs: PpbsSpec
    analyzer_t: AnalyzerSpec = field(default_factory=AnalyzerSpec.diagonal)
    analyzer_r: AnalyzerSpec = field(default_factory=AnalyzerSpec.circular)
    efficiencies: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    dark_rate: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        eff = tuple(float(e) for e in self.efficiencies)
        dark = tuple(float(d) for d in self.dark_rate)
        if len(eff) != 4 or any(not 0 < e <= 1 for e in eff):
            raise ValueError(f"efficiencies must be four values in (0, 1], got {eff}")
        if len(dark) != 4 or any(d < 0 for d in dark):
            raise ValueError(f"dark rates must be four values >= 0, got {dark}")
        object.__setattr__(self, "efficiencies", eff)
        object.__setattr__(self, "dark_rate", dark)

    @classmethod
    def optimal(cls, **kwargs) -> "PolarimeterModel":
        """Ideal device at the optimal splitting ratio with diagonal/circular analyzers."""
        return cls(PpbsSpec.from_ratio(optimal_splitting_ratio()[0]), **kwargs)

    @classmethod
    def with_ratio(cls, x_sq: float, **kwargs) -> "PolarimeterModel":
        return cls(PpbsSpec.from_ratio(x_sq), **kwargs)

    @property
    def is_ideal(self) -> bool:
        return self.efficiencies == (1.0,) * 4 and self.dark_rate == (0.0,) * 4


def detector_intensities(v: JonesVector, m: PolarimeterModel) -> np.ndarray:
    """Intensities at the four detectors for a pure input state."""
    transmitted, reflected = ppbs_split(v, m.ppbs)
    raw = np.array(analyzer_intensities(transmitted, m.analyzer_t)
                   + analyzer_intensities(reflected, m.analyzer_r))
    return raw * np.array(m.efficiencies) + np.array(m.dark_rate)


def detection_vectors(m: PolarimeterModel) -> np.ndarray:
    """Rows ``w_j`` such that detector ``j`` registers ``|<w_j|v>|**2`` (before efficiency)."""
    rows = []
    for arm, analyzer in ((m.ppbs.transmitted_matrix(), m.analyzer_t),
                          (m.ppbs.reflected_matrix(), m.analyzer_r)):
        for basis_vec in analyzer.basis():
            rows.append(arm.conj().T @ basis_vec)
    return np.array(rows)


def detection_operators(m: PolarimeterModel) -> np.ndarray:
    """POVM elements (shape 4x2x2) including detector efficiencies, excluding dark counts."""
    w = detection_vectors(m)
    eff = np.array(m.efficiencies)
    return np.array([e * np.outer(wj, np.conj(wj)) for e, wj in zip(eff, w)])


def effective_frame(m: PolarimeterModel) -> TetrahedronFrame:
    """Reduced Stokes vectors of the four normalized detection states."""
    w = detection_vectors(m)
    norms = np.sum(np.abs(w) ** 2, axis=1)
    if np.any(norms < 1e-14):
        raise DegenerateFrame(f"detection state with zero amplitude (weights {norms})")
    vecs = [jones_to_stokes(JonesVector.from_array(wj / np.sqrt(n))).reduced
            for wj, n in zip(w, norms)]
    return TetrahedronFrame(tuple(vecs))


def throughputs(m: PolarimeterModel) -> np.ndarray:
    """Row scalings such that row j of B is ``throughput_j / 4 * (1, b_j)``."""
    w = detection_vectors(m)
    return 2 * np.sum(np.abs(w) ** 2, axis=1) * np.array(m.efficiencies)


@dataclass(frozen=True)
class InstrumentMatrix:
    b: np.ndarray
    b_inv: np.ndarray
    cond: float
    sigma_inv: np.ndarray

    @classmethod
    def from_matrix(cls, b, sigma_inv=None) -> "InstrumentMatrix":
        b = np.asarray(b, dtype=float)
        cond = float(np.linalg.cond(b))
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise Singular(f"instrument matrix condition number {cond:.3g} exceeds {COND_LIMIT:.0e}")
        if sigma_inv is None:
            sigma_inv = np.zeros_like(b)
        return cls(b, np.linalg.inv(b), cond, np.asarray(sigma_inv, dtype=float))

    def apply(self, s: StokesVector) -> np.ndarray:
        return self.b @ s.as_array()


def instrument_matrix_from_frame(f: TetrahedronFrame, throughput=(1.0, 1.0, 1.0, 1.0)) -> InstrumentMatrix:
    t = np.asarray(throughput, dtype=float)
    if t.shape != (4,) or np.any(t <= 0):
        raise ValueError(f"throughput must be four positive values, got {throughput}")
    rows = np.hstack([np.ones((4, 1)), f.as_array()])
    return InstrumentMatrix.from_matrix(t[:, None] / 4 * rows)


def stokes_response(m: PolarimeterModel) -> np.ndarray:
    """Matrix mapping an unnormalized Stokes 4-vector to detector intensities.

    Built directly from the detection operators as ``Tr(Pi_j rho)``; it is
    linear, so it also covers partially polarized light.
    """
    ops = detection_operators(m)
    basis = (np.eye(2, dtype=complex),) + PAULIS
    return np.array([[0.5 * np.real(np.trace(op @ p)) for p in basis] for op in ops])


def instrument_matrix(m: PolarimeterModel) -> InstrumentMatrix:
    """Ideal instrument matrix of a model (dark counts are not part of the linear map)."""
    return instrument_matrix_from_frame(effective_frame(m), throughputs(m))


def det_b(x_sq: float, basis_t: AnalyzerSpec, basis_r: AnalyzerSpec) -> float:
    """|det B| of the lossless device at splitting ratio ``x_sq``."""
    m = PolarimeterModel(PpbsSpec.from_ratio(x_sq), basis_t, basis_r)
    return float(abs(np.linalg.det(stokes_response(m))))


def maximize_determinant(basis_t: AnalyzerSpec | None = None,
                         basis_r: AnalyzerSpec | None = None,
                         tolerance: float = 1e-6) -> float:
    """Golden-section search for the ``x**2`` in [0.5, 1) maximizing |det B|."""
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    basis_t = basis_t or AnalyzerSpec.diagonal()
    basis_r = basis_r or AnalyzerSpec.circular()

    def f(x):
        return det_b(x, basis_t, basis_r)

    invphi = (np.sqrt(5) - 1) / 2
    lo, hi = 0.5, 1.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tolerance:
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi)


def expected_counts(s: StokesVector, m: PolarimeterModel, mean_total: float) -> np.ndarray:
    """Mean detector counts for ``mean_total`` photons entering the device.

    ``s`` is normalized first, so its intensity does not change the scale.
    """
    if not mean_total > 0:
        raise ValueError(f"mean_total must be positive, got {mean_total}")
    if s.s_m <= 0:
        raise Unphysical(f"non-positive intensity s_m={s.s_m}")
    if degree_of_polarization(s) > 1 + 1e-9:
        raise Unphysical(f"degree of polarization {degree_of_polarization(s)} > 1")
    lam = mean_total * (stokes_response(m) @ s.normalized().as_array())
    return np.clip(lam, 0.0, None) + np.array(m.dark_rate)


def simulate_counts(s: StokesVector, m: PolarimeterModel, mean_total: float, seed,
                    size: int | None = None) -> np.ndarray:
    """Poisson-distributed detector counts, reproducible for a fixed seed.

    ``seed`` may be an int, a :class:`numpy.random.SeedSequence` or a
    Generator; for int/SeedSequence a private generator is created per call.
    With ``size`` the result has shape ``(size, 4)`` (independent acquisitions).
    """
    lam = expected_counts(s, m, mean_total)
    rng = np.random.default_rng(seed)
    shape = None if size is None else (size, 4)
    return rng.poisson(lam, size=shape).astype(np.int64)


def counts_for_jones(v: JonesVector, m: PolarimeterModel, mean_total: float, seed=None) -> np.ndarray:
    """Convenience wrapper: expected counts when ``seed`` is None, else Poisson draws."""
    s = jones_to_stokes(v)
    if seed is None:
        return expected_counts(s, m, mean_total)
    return simulate_counts(s, m, mean_total, seed)


def povm_sum(m: PolarimeterModel) -> np.ndarray:
    return detection_operators(m).sum(axis=0)

