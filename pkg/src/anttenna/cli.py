"""Command-line entry point: ``anttenna {simulate,sweep,pattern,optimize,aco-demo}``.

All physical quantities are SI base units (m, Hz, W, V) with no suffixes.
Every command accepts ``--config FILE``, an INI document; command-line
flags override values read from it.  Sections and keys::

    [geometry]   kind = torus|dipole, major_radius, wire_radius, num_segments,
                 feed_index, length (dipole only)
    [sweep]      f_start, f_stop, n_points, power_start, power_stop,
                 report_freqs (comma separated), z0
    [pattern]    theta_step, phi_step
    [aco]        n_ants, iterations, alpha, beta, rho, q, tau_min, tau_max, seed
    [axes]       <axis> = v1, v2, ...      (optimize: one line per design axis)
    [objective]  kind = s11|gain|target, freqs, freq
    [targets]    <axis> = value           (objective kind = target)
    [run]        out, seed

Exit status: 0 success, 1 runtime/solver/I-O failure, 2 validation or usage.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from anttenna import aco
from anttenna.errors import AntennaError, DegeneratePatternError, ValidationError
from anttenna.farfield import (
    GridSpec,
    conical_cut,
    directivity_gain,
    great_circle_cut,
    lobe_stats,
    radiation_pattern,
    total_radiated_power,
)
from anttenna.geometry import (
    DipoleSpec,
    TorusSpec,
    discretize,
    spec_as_dict,
    thin_wire_check,
)
from anttenna.mom import (
    Z0_DEFAULT,
    Excitation,
    assemble_impedance_matrix,
    solve_currents,
    surface_current_density,
)
from anttenna.objectives import check_axes, gain_objective, s11_objective, target_objective
from anttenna.sweep import (
    SweepConfig,
    analyze_frequency,
    dumps_json,
    export_results,
    run_sweep,
)

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class ConfigError(ValidationError):
    pass


@dataclass
class RunConfig:
    geometry: object = field(default_factory=TorusSpec)
    excitation: str = "gap"
    sweep: SweepConfig = field(default_factory=SweepConfig)
    aco: aco.AcoConfig = field(default_factory=aco.AcoConfig)
    grid: GridSpec = field(default_factory=GridSpec)
    out: Path | None = None
    seed: int = 0


# -- config file ---------------------------------------------------------------

class IniFile:
    """Parsed INI file that remembers where each key was defined."""

    def __init__(self, path):
        self.path = Path(path)
        try:
            text = self.path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {self.path}: {exc.strerror or exc}",
                              field="config")
        self.parser = configparser.ConfigParser(interpolation=None)
        self.parser.optionxform = str
        try:
            self.parser.read_string(text, source=str(self.path))
        except configparser.Error as exc:
            raise ConfigError(f"{self.path}: {exc}".replace("\n", " "), field="config")
        self.lines = {}
        section = None
        for n, line in enumerate(text.splitlines(), 1):
            m = re.match(r"\s*\[([^\]]+)\]", line)
            if m:
                section = m.group(1).strip()
                continue
            m = re.match(r"\s*([^=:#;\s][^=:]*?)\s*[=:]", line)
            if m and section:
                self.lines[(section, m.group(1))] = n

    def where(self, section, key) -> str:
        n = self.lines.get((section, key))
        return f"{self.path}:{n}: [{section}] {key}" if n else f"{self.path}: [{section}] {key}"

    def section(self, name) -> dict:
        return dict(self.parser[name]) if self.parser.has_section(name) else {}

    def number(self, section, key, kind=float):
        raw = self.parser[section][key]
        try:
            return kind(raw) if kind is not int else _int(raw)
        except ValueError:
            raise ConfigError(f"{self.where(section, key)}: expected {kind.__name__}, got {raw!r}",
                              field=key)

    def numbers(self, section, key) -> list:
        raw = self.parser[section][key]
        items = [s.strip() for s in raw.replace("\n", ",").split(",") if s.strip()]
        try:
            return [_scalar(s) for s in items]
        except ValueError:
            raise ConfigError(f"{self.where(section, key)}: expected a comma-separated "
                              f"list of numbers, got {raw!r}", field=key)


def _int(raw: str) -> int:
    v = float(raw)
    if v != int(v):
        raise ValueError(raw)
    return int(v)


def _scalar(s: str):
    try:
        return int(s)
    except ValueError:
        return float(s)


_KNOWN = {
    "geometry": {"kind", "major_radius", "wire_radius", "num_segments", "feed_index", "length"},
    "sweep": {"f_start", "f_stop", "n_points", "power_start", "power_stop", "report_freqs", "z0"},
    "pattern": {"theta_step", "phi_step"},
    "aco": {"n_ants", "iterations", "alpha", "beta", "rho", "q", "tau_min", "tau_max", "seed"},
    "objective": {"kind", "freqs", "freq"},
    "run": {"out", "seed"},
}
_INT_KEYS = {"num_segments", "feed_index", "n_points", "n_ants", "iterations", "seed"}


def _read_section(ini: IniFile, name: str) -> dict:
    out = {}
    for key in ini.section(name):
        if key not in _KNOWN[name]:
            raise ConfigError(f"{ini.where(name, key)}: unknown key", field=key)
        if key in ("kind", "out"):
            out[key] = ini.parser[name][key].strip()
        elif key in ("report_freqs", "freqs"):
            out[key] = [float(v) for v in ini.numbers(name, key)]
        else:
            out[key] = ini.number(name, key, int if key in _INT_KEYS else float)
    return out


# -- argument parsing -------------------------------------------------------------

def _common(p: argparse.ArgumentParser, geometry: bool = True) -> None:
    p.add_argument("--config", help="INI config file; flags override it")
    p.add_argument("--seed", type=int, help="master seed (64-bit)")
    p.add_argument("--out", help="output directory")
    if geometry:
        g = p.add_argument_group("geometry")
        g.add_argument("--geometry", choices=("torus", "dipole"))
        g.add_argument("--major-radius", type=float, help="torus ring radius (m)")
        g.add_argument("--wire-radius", type=float, help="conductor radius (m)")
        g.add_argument("--segments", type=int, help="number of segments")
        g.add_argument("--feed-index", type=int, help="feed segment (torus)")
        g.add_argument("--length", type=float, help="dipole length (m)")


def _grid_flags(p):
    p.add_argument("--theta-step", type=float, help="pattern theta step (deg)")
    p.add_argument("--phi-step", type=float, help="pattern phi step (deg)")


def _aco_flags(p):
    p.add_argument("--ants", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--rho", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anttenna",
        description="Thin-wire torus antenna analysis and ant-colony design search.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="analyze one frequency")
    _common(p)
    _grid_flags(p)
    p.add_argument("--freq", type=float, required=True, help="frequency (Hz)")
    p.add_argument("--excitation", choices=("gap", "plane-wave"), default="gap")
    p.add_argument("--voltage", type=float, default=1.0, help="gap voltage (V)")
    p.add_argument("--power", type=float, help="rescale drive to this accepted power (W)")
    p.add_argument("--e0", type=float, default=1.0, help="plane-wave amplitude (V/m)")
    p.add_argument("--direction", default="0,0,-1", help="plane-wave propagation unit vector")
    p.add_argument("--polarization", default="1,0,0", help="plane-wave E unit vector")
    p.add_argument("--z0", type=float, help="reference impedance (ohm)")

    p = sub.add_parser("sweep", help="sweep the band and export CSV/JSON/SVG")
    _common(p)
    _grid_flags(p)
    p.add_argument("--f-start", type=float)
    p.add_argument("--f-stop", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--power-start", type=float)
    p.add_argument("--power-stop", type=float)
    p.add_argument("--report-freqs", help="comma-separated lobe report frequencies (Hz)")
    p.add_argument("--z0", type=float)

    p = sub.add_parser("pattern", help="full-sphere pattern and lobe statistics")
    _common(p)
    _grid_flags(p)
    p.add_argument("--freq", type=float, required=True)
    p.add_argument("--cut", help="phi=<deg> (great circle) or theta=<deg> (conical); "
                                 "default: great circle through the peak")
    p.add_argument("--voltage", type=float, default=1.0, help="gap voltage (V)")

    p = sub.add_parser("optimize", help="ant-colony search over a design space")
    _common(p, geometry=False)
    _aco_flags(p)
    p.add_argument("--space", required=True, help="INI design-space file")

    p = sub.add_parser("aco-demo", help="ant-colony shortest path on a JSON graph")
    _common(p, geometry=False)
    _aco_flags(p)
    p.add_argument("--graph", required=True, help="graph JSON document")
    return parser


def _vector(text: str, name: str) -> tuple:
    try:
        v = tuple(float(s) for s in text.split(","))
    except ValueError:
        raise ValidationError(f"{name} must be three comma-separated numbers", field=name)
    if len(v) != 3:
        raise ValidationError(f"{name} must have three components", field=name)
    return v


def _check_positive(name: str, value) -> None:
    if value is not None and not value > 0:
        raise ValidationError(f"{name} must be > 0 (got {value})", field=name)


def resolve(args, ini: IniFile | None = None) -> RunConfig:
    """Merge config-file values with command-line flags into a RunConfig."""
    sections = {name: (_read_section(ini, name) if ini else {}) for name in _KNOWN}
    if ini:
        for name in ini.parser.sections():
            if name not in _KNOWN and name not in ("axes", "targets"):
                raise ConfigError(f"{ini.path}: unknown section [{name}]", field=name)
    cfg = RunConfig()

    geo = sections["geometry"]
    kind = getattr(args, "geometry", None) or geo.get("kind", "torus")
    if kind not in ("torus", "dipole"):
        raise ConfigError(f"geometry kind must be torus or dipole (got {kind!r})", field="kind")
    flag = lambda name: getattr(args, name, None)  # noqa: E731
    pick = lambda f, key, default: flag(f) if flag(f) is not None else geo.get(key, default)  # noqa: E731
    if kind == "torus":
        d = TorusSpec()
        cfg.geometry = TorusSpec(
            major_radius=pick("major_radius", "major_radius", d.major_radius),
            wire_radius=pick("wire_radius", "wire_radius", d.wire_radius),
            num_segments=pick("segments", "num_segments", d.num_segments),
            feed_index=pick("feed_index", "feed_index", d.feed_index),
        ).validate()
    else:
        length = pick("length", "length", None)
        if length is None:
            raise ValidationError("dipole geometry needs --length", field="length")
        cfg.geometry = DipoleSpec(
            length=length,
            wire_radius=pick("wire_radius", "wire_radius", 0.001),
            num_segments=pick("segments", "num_segments", 41),
        ).validate()

    pat = sections["pattern"]
    cfg.grid = GridSpec(
        theta_step=flag("theta_step") or pat.get("theta_step", 1.0),
        phi_step=flag("phi_step") or pat.get("phi_step", 2.0),
    )
    cfg.grid.axes()

    sw = sections["sweep"]
    report = flag("report_freqs")
    if report is not None:
        try:
            report = [float(s) for s in report.split(",") if s.strip()]
        except ValueError:
            raise ValidationError("report-freqs must be comma-separated numbers",
                                  field="report_freqs")
    d = SweepConfig()
    take = lambda f, key, default: flag(f) if flag(f) is not None else sw.get(key, default)  # noqa: E731
    f_start = take("f_start", "f_start", d.f_start)
    f_stop = take("f_stop", "f_stop", d.f_stop)
    if report is None:
        report = sw.get("report_freqs",
                        [f for f in d.report_freqs if f_start <= f <= f_stop])
    cfg.sweep = SweepConfig(
        f_start=f_start, f_stop=f_stop,
        n_points=take("points", "n_points", d.n_points),
        power_start=take("power_start", "power_start", d.power_start),
        power_stop=take("power_stop", "power_stop", d.power_stop),
        report_freqs=tuple(report),
        z0=take("z0", "z0", d.z0),
        grid=cfg.grid,
    )

    run = sections["run"]
    cfg.seed = flag("seed") if flag("seed") is not None else run.get(
        "seed", sections["aco"].get("seed", 0))
    a = sections["aco"]
    da = aco.AcoConfig()
    cfg.aco = aco.AcoConfig(
        n_ants=flag("ants") or a.get("n_ants", da.n_ants),
        iterations=flag("iterations") or a.get("iterations", da.iterations),
        alpha=flag("alpha") if flag("alpha") is not None else a.get("alpha", da.alpha),
        beta=flag("beta") if flag("beta") is not None else a.get("beta", da.beta),
        rho=flag("rho") if flag("rho") is not None else a.get("rho", da.rho),
        q=a.get("q", da.q), tau_min=a.get("tau_min", da.tau_min),
        tau_max=a.get("tau_max", da.tau_max), seed=cfg.seed,
    )
    out = flag("out") or run.get("out")
    cfg.out = Path(out) if out else None
    return cfg


# -- output helpers -----------------------------------------------------------

def _ensure_dir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path}: {exc.strerror or exc}") from exc
    return path


def _write(path: Path, text: str) -> Path:
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _emit(doc) -> None:
    sys.stdout.write(dumps_json(doc))


# -- commands -----------------------------------------------------------------

def cmd_simulate(args, cfg: RunConfig) -> int:
    _check_positive("freq", args.freq)
    _check_positive("power", args.power)
    segs = discretize(cfg.geometry)
    z0 = cfg.sweep.z0
    diag = thin_wire_check(segs, args.freq)
    doc = {"geometry": spec_as_dict(cfg.geometry), "excitation": args.excitation,
           "warnings": diag.warnings}
    if args.excitation == "gap":
        if args.voltage == 0:
            raise ValidationError("gap voltage must be non-zero", field="voltage")
        row, _, _ = analyze_frequency(segs, args.freq, args.power, z0, cfg.grid,
                                      voltage=args.voltage, with_lobes=True)
        doc.update(row.as_dict())
    else:
        exc = Excitation.plane_wave(args.e0, _vector(args.direction, "direction"),
                                    _vector(args.polarization, "polarization"))
        sol = solve_currents(assemble_impedance_matrix(segs, args.freq), exc, segs)
        pattern = radiation_pattern(sol, segs, cfg.grid)
        doc.update({
            "freq": float(args.freq), "z_in": None, "s11_db": None, "vswr": None,
            "input_power": None,
            "radiated_power": total_radiated_power(pattern),
            "peak_surface_current": surface_current_density(sol, segs),
            "lobe": None, "error": None,
        })
    if cfg.out:
        _write(_ensure_dir(cfg.out) / "simulate.json", dumps_json(doc))
    _emit(doc)
    return EXIT_OK


def cmd_sweep(args, cfg: RunConfig) -> int:
    if cfg.out is None:
        raise ValidationError("sweep needs --out <dir>", field="out")
    result = run_sweep(cfg.geometry, cfg.sweep)
    paths = export_results(result, cfg.out)
    failed = sum(r.failed for r in result.rows)
    _emit({"rows": len(result.rows), "failed": failed,
           "files": {k: str(v) for k, v in sorted(paths.items())}})
    return EXIT_OK


PATTERN_HEADER = ("theta_deg", "phi_deg", "gain_dbi", "e_theta_re", "e_theta_im",
                  "e_phi_re", "e_phi_im")


def pattern_csv(grid) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PATTERN_HEADER)
    for i, th in enumerate(grid.theta_deg):
        for j, ph in enumerate(grid.phi_deg):
            et, ep = grid.e_theta[i, j], grid.e_phi[i, j]
            w.writerow([repr(float(th)), repr(float(ph)), repr(float(grid.gain_dbi[i, j])),
                        repr(float(et.real)), repr(float(et.imag)),
                        repr(float(ep.real)), repr(float(ep.imag))])
    return buf.getvalue()


def _parse_cut(text: str | None):
    if text is None:
        return None
    m = re.fullmatch(r"\s*(phi|theta)\s*=\s*([-+0-9.eE]+)\s*", text)
    if not m:
        raise ValidationError(f"--cut must look like phi=<deg> or theta=<deg> (got {text!r})",
                              field="cut")
    return m.group(1), float(m.group(2))


def cmd_pattern(args, cfg: RunConfig) -> int:
    _check_positive("freq", args.freq)
    cut = _parse_cut(args.cut)
    segs = discretize(cfg.geometry)
    z = assemble_impedance_matrix(segs, args.freq)
    # Solve at 1 V and scale, so a zero drive reaches the pattern as zero current.
    sol = solve_currents(z, Excitation.delta_gap(1.0, segs.feed_index), segs)
    sol = type(sol)(sol.currents * args.voltage, sol.frequency, sol.excitation, sol.residual)
    grid = directivity_gain(radiation_pattern(sol, segs, cfg.grid))
    it, ip = np.unravel_index(int(np.argmax(grid.gain_dbi)), grid.gain_dbi.shape)
    peak = float(grid.gain_dbi[it, ip])
    if cut is None:
        cut = ("phi", float(grid.phi_deg[ip]))
    if cut[0] == "phi":
        angles, values = great_circle_cut(grid, cut[1])
        stats = lobe_stats(angles, values, periodic=True)
    else:
        angles, values = conical_cut(grid, cut[1])
        stats = lobe_stats(angles, values, periodic=True)
    doc = {"freq": float(args.freq), "cut": {"axis": cut[0], "angle_deg": cut[1]},
           "global_peak_dbi": peak,
           "global_peak_direction": {"theta_deg": float(grid.theta_deg[it]),
                                     "phi_deg": float(grid.phi_deg[ip])},
           "lobe_stats": stats.as_dict()}
    out = _ensure_dir(cfg.out or Path("."))
    _write(out / "pattern.csv", pattern_csv(grid))
    _write(out / "lobes.json", dumps_json(doc))
    from anttenna.plotting import pattern_cut_chart

    pattern_cut_chart(angles, values, f"{cut[0]} = {cut[1]:g} deg cut, "
                                      f"f = {args.freq / 1e9:g} GHz", out / "pattern_cut.svg")
    _emit(doc)
    return EXIT_OK


def load_space(path, cfg: RunConfig):
    """Design space, objective and ACO config from an optimize INI file."""
    ini = IniFile(path)
    base = resolve(argparse.Namespace(), ini)
    # sections missing from the space file fall back to --config / flags
    if not ini.section("geometry"):
        base.geometry = cfg.geometry
    if not ini.section("sweep"):
        base.sweep = cfg.sweep
    if not (ini.section("aco") or ini.section("run")):
        base.aco, base.seed = cfg.aco, cfg.seed
    axes_sec = ini.section("axes")
    if not axes_sec:
        raise ConfigError(f"{ini.path}: missing [axes] section with at least one axis",
                          field="axes")
    mapping = {}
    for key in axes_sec:
        mapping[key] = ini.numbers("axes", key)
        if not mapping[key]:
            raise ConfigError(f"{ini.where('axes', key)}: empty candidate list", field=key)
    try:
        space = aco.DesignSpace.from_mapping(mapping)
    except ValidationError as exc:
        raise ConfigError(f"{ini.path}: [axes] {exc}", field=exc.field)
    obj = _read_section(ini, "objective")
    kind = obj.get("kind", "s11")
    geometry = base.geometry
    if kind in ("s11", "gain"):
        check_axes(mapping)
        if not isinstance(geometry, TorusSpec):
            raise ConfigError("s11/gain objectives need a torus geometry", field="kind")
    if kind == "s11":
        objective = s11_objective(geometry, obj.get("freqs", [2.4e9]), base.sweep.z0)
    elif kind == "gain":
        objective = gain_objective(geometry, obj.get("freq", 2.4e9))
    elif kind == "target":
        targets = {}
        for key in ini.section("targets"):
            if key not in mapping:
                raise ConfigError(f"{ini.where('targets', key)}: not a design axis", field=key)
            targets[key] = ini.number("targets", key)
        if not targets:
            raise ConfigError(f"{ini.path}: objective kind=target needs a [targets] section",
                              field="targets")
        objective = target_objective(targets)
    else:
        raise ConfigError(f"{ini.where('objective', 'kind')}: unknown objective {kind!r}",
                          field="kind")
    return space, objective, base


def cmd_optimize(args, cfg: RunConfig) -> int:
    space, objective, base = load_space(args.space, cfg)
    a = base.aco
    config = replace(
        a,
        n_ants=args.ants or a.n_ants,
        iterations=args.iterations or a.iterations,
        alpha=a.alpha if args.alpha is None else args.alpha,
        beta=a.beta if args.beta is None else args.beta,
        rho=a.rho if args.rho is None else args.rho,
        seed=args.seed if args.seed is not None else base.seed,
    )
    result = aco.optimize(space, objective, config)
    doc = {"objective": objective.name, "best_assignment": result.best_assignment,
           "best_cost": result.best_cost, "iterations": len(result.history),
           "evaluations": result.evaluations, "seed": config.seed,
           "space": {ax.name: list(ax.values) for ax in space.axes}}
    out = _ensure_dir(cfg.out or base.out or Path("."))
    _write(out / "best.json", dumps_json(doc))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = [ax.name for ax in space.axes]
    w.writerow(["iteration", "iteration_best_cost", "best_cost"] + names)
    for rec in result.history:
        w.writerow([rec.iteration, repr(rec.iteration_best_cost), repr(rec.best_cost)]
                   + [repr(rec.iteration_best[n]) for n in names])
    _write(out / "history.csv", buf.getvalue())
    _emit(doc)
    return EXIT_OK


def cmd_aco_demo(args, cfg: RunConfig) -> int:
    try:
        doc = json.loads(Path(args.graph).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read graph {args.graph}: {exc.strerror or exc}",
                              field="graph")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{args.graph}:{exc.lineno}:{exc.colno}: {exc.msg}",
                              field="graph")
    graph, source, sink = aco.load_graph_document(doc)
    d = aco.DEMO_CONFIG
    config = replace(
        cfg.aco,
        n_ants=args.ants or d.n_ants,
        iterations=args.iterations or d.iterations,
    )
    result = aco.shortest_path_demo(graph, source, sink, config)
    out_doc = {"path": result.path, "length": result.length,
               "iterations_to_converge": result.iterations_to_converge,
               "seed": config.seed}
    if cfg.out:
        _write(_ensure_dir(cfg.out) / "path.json", dumps_json(out_doc))
    _emit(out_doc)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "pattern": cmd_pattern,
    "optimize": cmd_optimize,
    "aco-demo": cmd_aco_demo,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        ini = IniFile(args.config) if args.config else None
        cfg = resolve(args, ini)
        return COMMANDS[args.command](args, cfg)
    except ValidationError as exc:
        where = f" ({exc.field})" if exc.field else ""
        print(f"anttenna {args.command}: invalid input{where}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegeneratePatternError as exc:
        print(f"anttenna {args.command}: degenerate pattern: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except AntennaError as exc:
        print(f"anttenna {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"anttenna {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
