"""Frequency sweeps over the 2.4-24 GHz band with a scheduled drive power."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from anttenna.aco import worker_count
from anttenna.errors import AntennaError, SweepError, ValidationError
from anttenna.farfield import (
    GridSpec,
    LobeStats,
    directivity_gain,
    great_circle_cut,
    lobe_stats,
    radiation_pattern,
    total_radiated_power,
)
from anttenna.geometry import discretize, spec_as_dict
from anttenna.mom import (
    Z0_DEFAULT,
    Excitation,
    assemble_impedance_matrix,
    port_params,
    solve_currents,
)

CSV_HEADER = (
    "freq_hz", "zin_re_ohm", "zin_im_ohm", "s11_db", "vswr",
    "input_power_w", "radiated_power_w", "peak_surface_current_a_per_m",
)


@dataclass(frozen=True)
class SweepConfig:
    f_start: float = 2.4e9
    f_stop: float = 24e9
    n_points: int = 50
    power_start: float = 0.5
    power_stop: float = 0.05
    report_freqs: tuple = (2.4e9, 13.2e9, 24e9)
    z0: float = Z0_DEFAULT
    grid: GridSpec = field(default_factory=GridSpec)

    def __post_init__(self):
        object.__setattr__(self, "report_freqs", tuple(float(f) for f in self.report_freqs))
        problems = []
        if not 0 < self.f_start < self.f_stop:
            problems.append(f"need 0 < f_start < f_stop (got {self.f_start}, {self.f_stop})")
        if not (isinstance(self.n_points, (int, np.integer)) and self.n_points >= 2):
            problems.append(f"n_points must be an integer >= 2 (got {self.n_points})")
        if not (self.power_start > 0 and self.power_stop > 0):
            problems.append("powers must be > 0")
        if not self.z0 > 0:
            problems.append(f"z0 must be > 0 (got {self.z0})")
        for f in self.report_freqs:
            if not self.f_start <= f <= self.f_stop:
                problems.append(f"report frequency {f} lies outside the sweep band")
        if problems:
            raise ValidationError(problems)

    def frequencies(self) -> np.ndarray:
        step = (self.f_stop - self.f_start) / (self.n_points - 1)
        f = self.f_start + step * np.arange(self.n_points)
        f[-1] = self.f_stop
        return f

    def as_dict(self) -> dict:
        return {
            "f_start": self.f_start, "f_stop": self.f_stop, "n_points": self.n_points,
            "power_start": self.power_start, "power_stop": self.power_stop,
            "report_freqs": list(self.report_freqs), "z0": self.z0,
            "theta_step": self.grid.theta_step, "phi_step": self.grid.phi_step,
        }


def power_schedule(config: SweepConfig, freq: float) -> float:
    """Linear ramp from ``power_start`` at f_start to ``power_stop`` at f_stop."""
    if not config.f_start <= freq <= config.f_stop:
        raise ValidationError(
            f"freq {freq} outside the band [{config.f_start}, {config.f_stop}]", field="freq")
    if freq == config.f_start:
        return config.power_start
    if freq == config.f_stop:
        return config.power_stop
    t = (freq - config.f_start) / (config.f_stop - config.f_start)
    return config.power_start + t * (config.power_stop - config.power_start)


@dataclass
class SweepRow:
    freq: float
    z_in: complex = complex(math.nan, math.nan)
    s11_db: float = math.nan
    vswr: float = math.nan
    input_power: float = math.nan
    radiated_power: float = math.nan
    peak_surface_current: float = math.nan
    lobe: LobeStats | None = None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    def as_dict(self) -> dict:
        return {
            "freq": self.freq,
            "z_in": {"re": self.z_in.real, "im": self.z_in.imag},
            "s11_db": self.s11_db,
            "vswr": self.vswr,
            "input_power": self.input_power,
            "radiated_power": self.radiated_power,
            "peak_surface_current": self.peak_surface_current,
            "lobe": None if self.lobe is None else self.lobe.as_dict(),
            "error": self.error,
        }


def pattern_lobes(grid) -> LobeStats:
    """Lobe statistics on the great-circle cut through the global peak."""
    g = grid if grid.gain_dbi is not None else directivity_gain(grid)
    it, ip = np.unravel_index(int(np.argmax(g.gain_dbi)), g.gain_dbi.shape)
    angles, cut = great_circle_cut(g, float(g.phi_deg[ip]))
    return lobe_stats(angles, cut, periodic=True, peak_db=float(g.gain_dbi[it, ip]))


def analyze_frequency(segments, freq: float, power: float | None = None,
                      z0: float = Z0_DEFAULT, grid: GridSpec | None = None,
                      voltage: complex = 1.0, with_lobes: bool = False):
    """Solve one frequency with a gap at the feed segment.

    With ``power`` set, currents are rescaled so the accepted power
    1/2 Re(V conj(I)) equals it; z_in comes from the unscaled solve.
    Returns ``(row, solution, pattern)``.
    """
    z = assemble_impedance_matrix(segments, freq)
    sol = solve_currents(z, Excitation.delta_gap(voltage, segments.feed_index), segments)
    port = port_params(sol, segments, z0)
    if power is not None:
        if not port.input_power > 0:
            raise SweepError(f"non-positive accepted power {port.input_power} at {freq} Hz")
        sol = sol.scaled(math.sqrt(power / port.input_power))
        scaled = port_params(sol, segments, z0)
        peak, p_in = scaled.peak_surface_current, scaled.input_power
    else:
        peak, p_in = port.peak_surface_current, port.input_power
    pattern = radiation_pattern(sol, segments, grid)
    row = SweepRow(
        freq=float(freq),
        z_in=port.z_in,
        s11_db=port.s11_db,
        vswr=port.vswr,
        input_power=p_in,
        radiated_power=total_radiated_power(pattern),
        peak_surface_current=peak,
    )
    if with_lobes:
        pattern = directivity_gain(pattern)
        row.lobe = pattern_lobes(pattern)
    return row, sol, pattern


@dataclass
class SweepResult:
    geometry: object
    config: SweepConfig
    rows: list[SweepRow]
    lobe_reports: dict[float, LobeStats | None]

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, k):
        return self.rows[k]


def _same_freq(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-9 * max(abs(a), abs(b))


def run_sweep(spec, config: SweepConfig | None = None,
              workers: int | None = None) -> SweepResult:
    config = config or SweepConfig()
    segments = discretize(spec)
    freqs = [float(f) for f in config.frequencies()]
    reports = list(config.report_freqs)

    def one(freq):
        want_lobe = any(_same_freq(freq, r) for r in reports)
        try:
            row, _, _ = analyze_frequency(segments, freq, power_schedule(config, freq),
                                          config.z0, config.grid, with_lobes=want_lobe)
        except AntennaError as exc:
            row = SweepRow(freq=freq, error=f"{type(exc).__name__}: {exc}")
        return row

    extra = [r for r in reports if not any(_same_freq(r, f) for f in freqs)]
    workers = worker_count() if workers is None else max(1, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(one, freqs))
        extra_rows = list(pool.map(one, extra))
    if all(r.failed for r in rows):
        raise SweepError(f"every frequency failed; first error: {rows[0].error}")
    lobe_reports = {}
    for r in reports:
        match = next(row for row in rows + extra_rows if _same_freq(row.freq, r))
        lobe_reports[r] = match.lobe
    return SweepResult(spec, config, rows, lobe_reports)


def _num(x: float) -> str:
    return repr(float(x))


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


def dumps_json(doc) -> str:
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([_num(r.freq), _num(r.z_in.real), _num(r.z_in.imag), _num(r.s11_db),
                    _num(r.vswr), _num(r.input_power), _num(r.radiated_power),
                    _num(r.peak_surface_current)])
    return buf.getvalue()


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in rec.items()} for rec in csv.DictReader(fh)]


def result_document(result: SweepResult) -> dict:
    return {
        "geometry": spec_as_dict(result.geometry),
        "sweep": result.config.as_dict(),
        "rows": [r.as_dict() for r in result.rows],
        "lobe_reports": {
            repr(f): (None if s is None else s.as_dict())
            for f, s in result.lobe_reports.items()
        },
    }


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def export_results(result: SweepResult, out_dir, stem: str = "sweep",
                   charts: bool = True) -> dict[str, Path]:
    """Write ``<stem>.csv``, ``<stem>.json`` and one SVG chart per observable."""
    if not result.rows:
        raise ValidationError("nothing to export")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    paths = {"csv": out / f"{stem}.csv", "json": out / f"{stem}.json"}
    _write(paths["csv"], rows_to_csv(result.rows))
    _write(paths["json"], dumps_json(result_document(result)))
    if charts:
        from anttenna import plotting

        paths.update(plotting.sweep_charts(result.rows, out, stem))
    return paths
