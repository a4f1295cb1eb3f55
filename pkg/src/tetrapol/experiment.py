"""Simulated experiments: quartet calibration and HWP/QWP fidelity sweeps.

Randomness is derived from a master seed with :class:`numpy.random.SeedSequence`.
Calibration record ``k`` uses ``spawn_key=(k,)``; sweep point ``(i, j)``
uses ``spawn_key=(i, j)``. Every point is therefore reproducible on its own
and results do not depend on evaluation order or parallelism.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .calibration import (CalibrationRecord, CalibrationResult, calibrate,
                          calibration_quartet, fidelity_uncertainty, reconstruct)
from .errors import EmptyCounts, NegativeIntensity
from .instrument import PolarimeterModel, expected_counts, simulate_counts
from .optics import generate_state
from .stokes import fidelity_to_pure, jones_to_stokes

EXACT = "exact"


def point_seed(master_seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=tuple(key))


def simulate_calibration(model: PolarimeterModel, mean_total: float | str,
                         seed: int) -> CalibrationResult:
    """Calibrate ``model`` with the quartet states at ``mean_total`` photons each.

    ``mean_total="exact"`` uses expected counts per unit input and skips noise.
    """
    exact = mean_total == EXACT
    scale = 1.0 if exact else float(mean_total)
    records = []
    for k, s in enumerate(calibration_quartet()):
        if exact:
            counts = expected_counts(s, model, 1.0)
        else:
            counts = simulate_counts(s, model, scale, point_seed(seed, k))
        records.append(CalibrationRecord(s, counts))
    return calibrate(records, scale=scale, poisson=not exact)


def grid_values(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive arithmetic grid ``start, start+step, ... <= stop``."""
    if step <= 0 or stop < start:
        raise ValueError(f"invalid grid {start}:{stop}:{step}")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


@dataclass(frozen=True)
class SweepConfig:
    hwp_deg: tuple[float, float, float] = (0.0, 87.0, 3.0)
    qwp_deg: tuple[float, float, float] = (0.0, 174.0, 6.0)
    mean_total: float | str = 1e5
    misalignment_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.mean_total != EXACT and not float(self.mean_total) > 0:
            raise ValueError("mean_total must be positive or 'exact'")
        if self.misalignment_sigma < 0:
            raise ValueError("misalignment_sigma must be >= 0")
        self.hwp_grid()
        self.qwp_grid()

    def hwp_grid(self) -> np.ndarray:
        return grid_values(*self.hwp_deg)

    def qwp_grid(self) -> np.ndarray:
        return grid_values(*self.qwp_deg)


@dataclass(frozen=True)
class SweepRow:
    hwp_deg: float
    qwp_deg: float
    fidelity: float
    sigma_fidelity: float
    n_total: float


def sweep_point(model: PolarimeterModel, cal: CalibrationResult, cfg: SweepConfig,
                i: int, j: int) -> SweepRow:
    hwp_deg = float(cfg.hwp_grid()[i])
    qwp_deg = float(cfg.qwp_grid()[j])
    h, q = np.radians(hwp_deg), np.radians(qwp_deg)
    rng = np.random.default_rng(point_seed(cfg.seed, i, j))
    dh, dq = rng.normal(0.0, cfg.misalignment_sigma, size=2) if cfg.misalignment_sigma > 0 else (0.0, 0.0)

    intended = jones_to_stokes(generate_state(h, q))
    actual = jones_to_stokes(generate_state(h, q, dh, dq))
    exact = cfg.mean_total == EXACT
    if exact:
        counts = expected_counts(actual, model, 1.0)
    else:
        counts = simulate_counts(actual, model, float(cfg.mean_total), rng)
    try:
        rec = reconstruct(counts, cal, poisson=not exact)
    except (EmptyCounts, NegativeIntensity):
        # no usable light: the estimate is the unpolarized state
        return SweepRow(hwp_deg, qwp_deg, 0.5, 0.5, float(np.sum(counts)))
    fid = fidelity_to_pure(rec.projected, intended)
    sig = fidelity_uncertainty(rec, intended, poisson=not exact)
    return SweepRow(hwp_deg, qwp_deg, fid, sig, float(np.sum(counts)))


def _chunk(args):
    model, cal, cfg, points = args
    return [sweep_point(model, cal, cfg, i, j) for i, j in points]


def run_sweep(model: PolarimeterModel, cal: CalibrationResult, cfg: SweepConfig,
              jobs: int = 1) -> list[SweepRow]:
    """Evaluate every grid point; rows come back in (hwp, qwp) grid order."""
    points = [(i, j) for i in range(len(cfg.hwp_grid())) for j in range(len(cfg.qwp_grid()))]
    if jobs <= 1:
        return _chunk((model, cal, cfg, points))
    chunks = [points[k::jobs] for k in range(jobs)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(_chunk, [(model, cal, cfg, c) for c in chunks]))
    by_point = {}
    for c, rows in zip(chunks, results):
        by_point.update(zip(c, rows))
    return [by_point[p] for p in points]


def summarize(rows: list[SweepRow]) -> dict[str, float]:
    f = np.array([r.fidelity for r in rows])
    return {"mean": float(np.mean(f)), "min": float(np.min(f)), "max": float(np.max(f)),
            "points": len(rows)}
