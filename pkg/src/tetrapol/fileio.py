"""Text formats: device configs, calibration files and fidelity maps.

Device configs are flat ``key = value`` files; ``#`` starts a comment.
Calibration files and fidelity maps are CSV with ``#`` header lines.
Floats are written with ``repr`` so files round-trip exactly.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .calibration import CalibrationResult
from .instrument import InstrumentMatrix, PolarimeterModel, optimal_splitting_ratio
from .optics import AnalyzerSpec, PpbsSpec

FORMAT_VERSION = 1


class ConfigError(ValueError):
    pass


class CalibrationFileError(ValueError):
    pass


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True)
class DeviceConfig:
    x_sq: float
    analyzer_t_deg: tuple[float, float] = (45.0, 0.0)
    analyzer_r_deg: tuple[float, float] = (45.0, 90.0)
    phase_t_deg: float = 0.0
    phase_r_deg: float = 0.0
    efficiencies: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0)
    dark_rates: tuple[float, ...] = (0.0, 0.0, 0.0, 0.0)

    @classmethod
    def optimal(cls) -> "DeviceConfig":
        return cls(optimal_splitting_ratio()[0])

    def to_model(self) -> PolarimeterModel:
        try:
            return PolarimeterModel(
                PpbsSpec.from_ratio(self.x_sq, np.radians(self.phase_t_deg), np.radians(self.phase_r_deg)),
                AnalyzerSpec(*np.radians(self.analyzer_t_deg)),
                AnalyzerSpec(*np.radians(self.analyzer_r_deg)),
                self.efficiencies,
                self.dark_rates,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def echo(self) -> list[str]:
        """Canonical ``key = value`` lines (parseable by :func:`parse_device_config`)."""
        return [
            f"x_sq = {_fmt(self.x_sq)}",
            f"analyzer_t_theta_deg = {_fmt(self.analyzer_t_deg[0])}",
            f"analyzer_t_phi_deg = {_fmt(self.analyzer_t_deg[1])}",
            f"analyzer_r_theta_deg = {_fmt(self.analyzer_r_deg[0])}",
            f"analyzer_r_phi_deg = {_fmt(self.analyzer_r_deg[1])}",
            f"phase_t_deg = {_fmt(self.phase_t_deg)}",
            f"phase_r_deg = {_fmt(self.phase_r_deg)}",
            "efficiencies = " + ", ".join(_fmt(e) for e in self.efficiencies),
            "dark_rates = " + ", ".join(_fmt(d) for d in self.dark_rates),
        ]


_SCALAR_KEYS = {"x_sq", "analyzer_t_theta_deg", "analyzer_t_phi_deg", "analyzer_r_theta_deg",
                "analyzer_r_phi_deg", "phase_t_deg", "phase_r_deg"}
_LIST_KEYS = {"efficiencies", "dark_rates"}


def _as_float(key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as a number") from None


def parse_device_config(text: str) -> DeviceConfig:
    """Parse a device config.

    ``optimal = true`` fills in the optimal splitting ratio and may not be
    combined with an explicit ``x_sq``.  Analyzer defaults are the diagonal
    (transmitted) and circular (reflected) bases.
    """
    values: dict[str, object] = {}
    optimal = False
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in values or (key == "optimal" and optimal):
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if key == "optimal":
            if value.lower() not in ("true", "false"):
                raise ConfigError(f"line {lineno}: optimal must be true or false")
            optimal = value.lower() == "true"
        elif key in _SCALAR_KEYS:
            values[key] = _as_float(key, value)
        elif key in _LIST_KEYS:
            items = [_as_float(key, v) for v in value.split(",")]
            if len(items) == 1:
                items *= 4
            if len(items) != 4:
                raise ConfigError(f"line {lineno}: {key} needs 1 or 4 values")
            values[key] = tuple(items)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")

    if optimal and "x_sq" in values:
        raise ConfigError("'optimal = true' conflicts with an explicit x_sq")
    if optimal:
        x_sq = optimal_splitting_ratio()[0]
    elif "x_sq" in values:
        x_sq = values["x_sq"]
    else:
        raise ConfigError("config needs either x_sq or 'optimal = true'")
    if not 0.5 < x_sq < 1:
        raise ConfigError(f"x_sq = {x_sq} outside the open interval (0.5, 1)")

    cfg = DeviceConfig(
        x_sq=x_sq,
        analyzer_t_deg=(values.get("analyzer_t_theta_deg", 45.0), values.get("analyzer_t_phi_deg", 0.0)),
        analyzer_r_deg=(values.get("analyzer_r_theta_deg", 45.0), values.get("analyzer_r_phi_deg", 90.0)),
        phase_t_deg=values.get("phase_t_deg", 0.0),
        phase_r_deg=values.get("phase_r_deg", 0.0),
        efficiencies=values.get("efficiencies", (1.0,) * 4),
        dark_rates=values.get("dark_rates", (0.0,) * 4),
    )
    cfg.to_model()
    return cfg


def write_calibration(cal: CalibrationResult, device: DeviceConfig, seed: int, counts) -> str:
    buf = io.StringIO()
    buf.write("# tetrapol calibration\n")
    buf.write(f"# format_version = {FORMAT_VERSION}\n")
    buf.write(f"# seed = {seed}\n")
    buf.write(f"# counts = {counts}\n")
    buf.write(f"# cond = {_fmt(cal.cond)}\n")
    buf.write(f"# residual = {_fmt(cal.residual)}\n")
    for line in device.echo():
        buf.write(f"# config.{line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "row", "c0", "c1", "c2", "c3"])
    for name, mat in (("b", cal.b), ("b_inv", cal.b_inv), ("sigma_inv", cal.sigma_inv)):
        for i, row in enumerate(mat):
            w.writerow([name, i] + [_fmt(v) for v in row])
    return buf.getvalue()


def read_calibration(text: str) -> CalibrationResult:
    header: dict[str, str] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            if " = " in line:
                k, v = line[1:].split(" = ", 1)
                header[k.strip()] = v.strip()
        elif line.strip():
            body.append(line)
    try:
        version = int(header.get("format_version", "-1"))
    except ValueError:
        version = -1
    if version != FORMAT_VERSION:
        raise CalibrationFileError(f"unsupported or missing format_version {header.get('format_version')!r}")

    mats = {name: np.full((4, 4), np.nan) for name in ("b", "b_inv", "sigma_inv")}
    try:
        rows = list(csv.reader(body))
        if rows[0] != ["quantity", "row", "c0", "c1", "c2", "c3"]:
            raise CalibrationFileError("missing column header")
        for rec in rows[1:]:
            mats[rec[0]][int(rec[1])] = [float(v) for v in rec[2:6]]
        residual = float(header.get("residual", "0"))
    except (KeyError, IndexError, ValueError) as exc:
        raise CalibrationFileError(f"malformed calibration file: {exc}") from exc
    if any(np.isnan(m).any() for m in mats.values()):
        raise CalibrationFileError("calibration file is missing matrix entries")

    inst = InstrumentMatrix.from_matrix(mats["b"], mats["sigma_inv"])
    # keep the stored inverse: it is what was reported, and round-trips bit-exactly
    inst = InstrumentMatrix(inst.b, mats["b_inv"], inst.cond, inst.sigma_inv)
    return CalibrationResult(inst, residual)


def write_sweep(rows, header: list[str]) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["hwp_deg", "qwp_deg", "fidelity", "sigma_fidelity", "n_total"])
    for r in rows:
        w.writerow([_fmt(r.hwp_deg), _fmt(r.qwp_deg), _fmt(r.fidelity),
                    _fmt(r.sigma_fidelity), _fmt(r.n_total)])
    return buf.getvalue()


def read_sweep(text: str) -> list[dict[str, float]]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return [{k: float(v) for k, v in rec.items()} for rec in csv.DictReader(lines)]
