"""Command-line front end: ``nsacvdw {eos,run,check,converge}``.

Every command reads one JSON configuration with the sections ``params``,
``far_field``, ``grid``, ``time``, ``ic``, ``output`` and ``checks``; any
omitted entry takes the default listed in :data:`DEFAULTS`.  Exit codes are
0 on success, 1 when an invariant check fails, 2 for configuration or
artifact errors and 3 when the solver aborts.
"""

import argparse
import copy
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .diagnostics import (
    CheckResult,
    DiagnosticsReport,
    bounds_over_run,
    cell_average_bounds,
    cell_average_check,
    energy_budget,
    energy_budget_check,
    energy_defect,
    kazhikhov_reconstruction,
    ns_monitor_check,
    series_bounds_check,
    sobolev_sup_check,
    truncation_check,
)
from .energy import energy_report
from .eos import (
    VdwParams,
    critical_point,
    maxwell_construction,
    pressure,
    pressure_derivatives,
    spinodal,
)
from .errors import (
    ConfigError,
    DomainError,
    InsufficientCadence,
    MissingArtifacts,
    NsacError,
    PreconditionFailed,
    SolverAbort,
)
from .solver.mms import ManufacturedProblem, convergence_ladder, observed_orders
from .solver.operators import chemical_potential
from .solver.profiles import PROFILE_KINDS, init_state
from .solver.run import SERIES_COLUMNS, check_mode, run
from .solver.stepping import MODES, STEPPERS, SimConfig
from .state import FarField, Grid1D, State

__all__ = [
    "DEFAULTS",
    "EXIT_OK",
    "EXIT_CHECK_FAILED",
    "EXIT_CONFIG",
    "EXIT_ABORT",
    "RunSpec",
    "parse_config",
    "load_config",
    "cmd_eos",
    "cmd_run",
    "cmd_check",
    "cmd_converge",
    "main",
]

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3

FMT = "%.17g"
CONFIG_ECHO = "config.json"
SERIES_FILE = "series.csv"
REPORT_FILE = "report.json"
SNAPSHOT_COLUMNS = ("x", "v", "u", "theta", "chi", "mu")

DEFAULTS = {
    "params": {
        "a": 3.0, "b": 1.0 / 3.0, "R": 8.0 / 3.0, "h": None, "epsilon": 0.1,
        "kappa_tilde": 1.0, "beta": 0.5, "c_v": 1.0, "e_int0": 0.0,
    },
    "far_field": {"v_bar": 3.0, "theta_bar": 1.2, "chi_left": -1.0, "chi_right": 1.0},
    "grid": {"x_min": -10.0, "x_max": 10.0, "n": 512},
    "time": {
        "dt": 1e-3, "t_end": 0.1, "cfl": 0.4, "mode": "NSAC", "stepper": "imex",
        "picard_tol": 1e-10, "picard_max_iter": 50,
    },
    "ic": {"kind": "constant"},
    "output": {
        "every": 10, "isotherms": [0.85, 0.9, 0.95], "n_samples": 201, "v_max": None,
    },
    "checks": {
        "energy_budget_C": 2.0,
        "mass_tol": 1e-9,
        "kazhikhov_threshold": 5e-2,
        "tol_chi": 1e-8,
        "algebraic_eq_form": "phi_consistent",
        "truncation_p": [2, 4, 8, 16],
        "mms_n0": 64,
        "mms_t_end": 0.2,
        "mms_amplitude": 0.1,
        "mms_space_C": 40.0,
        "mms_time_ratio": 0.2,
    },
}

_POSITIVE = {
    "params": ("a", "b", "R", "h", "epsilon", "kappa_tilde", "c_v"),
    "grid": (),
    "time": ("dt", "t_end", "picard_tol"),
    "checks": ("energy_budget_C", "mass_tol", "kazhikhov_threshold", "tol_chi",
               "mms_t_end", "mms_amplitude", "mms_space_C", "mms_time_ratio"),
    "far_field": ("v_bar", "theta_bar"),
}
_INTEGER = {
    "grid": ("n",),
    "time": ("picard_max_iter",),
    "output": ("every", "n_samples"),
    "checks": ("mms_n0",),
}
_CHOICES = {
    ("time", "mode"): MODES,
    ("time", "stepper"): STEPPERS,
    ("checks", "algebraic_eq_form"): ("phi_consistent", "as_printed"),
}


@dataclass
class RunSpec:
    """Parsed configuration.  Unpacks as ``params, far, grid, sim, profile``."""

    params: VdwParams
    far: FarField
    grid: Grid1D
    sim: SimConfig
    profile: dict
    checks: dict
    output: dict
    effective: dict

    def __iter__(self):
        return iter((self.params, self.far, self.grid, self.sim, self.profile))


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _merge(raw):
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    cfg = copy.deepcopy(DEFAULTS)
    for section, body in raw.items():
        if section not in DEFAULTS:
            raise ConfigError(section, "unknown section")
        if not isinstance(body, dict):
            raise ConfigError(section, "section must be an object")
        if section == "ic":
            cfg["ic"] = dict(body)
            continue
        for key, value in body.items():
            if key not in DEFAULTS[section]:
                raise ConfigError(f"{section}.{key}", "unknown key")
            cfg[section][key] = value
    return cfg


def _validate(cfg):
    for section, body in cfg.items():
        if section == "ic":
            continue
        for key, value in body.items():
            where = f"{section}.{key}"
            default = DEFAULTS[section][key]
            if value is None:
                if default is not None:
                    raise ConfigError(where, "must not be null")
                continue
            if (section, key) in _CHOICES:
                if value not in _CHOICES[section, key]:
                    raise ConfigError(where, f"must be one of {list(_CHOICES[section, key])}")
                continue
            if isinstance(default, list):
                if not isinstance(value, list) or not all(_is_number(x) for x in value):
                    raise ConfigError(where, "must be a list of numbers")
                continue
            if not _is_number(value) or not math.isfinite(value):
                raise ConfigError(where, f"must be a finite number, got {value!r}")
            if key in _INTEGER.get(section, ()) and (int(value) != value or value < 1):
                raise ConfigError(where, f"must be a positive integer, got {value!r}")
            if key in _POSITIVE.get(section, ()) and not value > 0:
                raise ConfigError(where, f"must be positive, got {value!r}")
    if cfg["params"]["beta"] < 0:
        raise ConfigError("params.beta", f"must be >= 0, got {cfg['params']['beta']!r}")
    if not 0 < cfg["time"]["cfl"] < 1:
        raise ConfigError("time.cfl", "must lie in (0, 1)")
    if not cfg["grid"]["x_max"] > cfg["grid"]["x_min"]:
        raise ConfigError("grid.x_max", "must exceed grid.x_min")
    if cfg["grid"]["n"] < 16:
        raise ConfigError("grid.n", "needs at least 16 nodes")
    if cfg["ic"].get("kind") not in PROFILE_KINDS:
        raise ConfigError("ic.kind", f"must be one of {list(PROFILE_KINDS)}")


def parse_config(source, allow_unproven=False):
    """Parse a configuration file (or an already loaded dict) into a RunSpec.

    Raises
    ------
    ConfigError
        With the dotted key of the offending entry.
    """
    if isinstance(source, dict):
        raw = source
    else:
        path = Path(source)
        if not path.is_file():
            raise ConfigError("<file>", f"{path} does not exist")
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"not a JSON document: {exc}") from None
    cfg = _merge(raw)
    _validate(cfg)
    try:
        params = VdwParams(**cfg["params"])
    except DomainError as exc:
        raise ConfigError("params", str(exc)) from None
    cfg["params"]["h"] = params.h
    if params.v_min >= cfg["far_field"]["v_bar"]:
        raise ConfigError("far_field.v_bar", "must exceed b + h")
    far = FarField(**cfg["far_field"])
    grid = Grid1D(float(cfg["grid"]["x_min"]), float(cfg["grid"]["x_max"]), int(cfg["grid"]["n"]))
    t = cfg["time"]
    sim = SimConfig(
        dt=float(t["dt"]), t_end=float(t["t_end"]), cfl=float(t["cfl"]), mode=t["mode"],
        stepper=t["stepper"], picard_tol=float(t["picard_tol"]),
        picard_max_iter=int(t["picard_max_iter"]), output_every=int(cfg["output"]["every"]),
        allow_unproven=bool(allow_unproven),
    )
    check_mode(params, sim)
    return RunSpec(params, far, grid, sim, dict(cfg["ic"]), dict(cfg["checks"]),
                   dict(cfg["output"]), cfg)


def load_config(path, allow_unproven=False):
    return parse_config(path, allow_unproven=allow_unproven)


# -- file emission ---------------------------------------------------------


def _write_json(path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_csv(path, header, columns):
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    np.savetxt(path, data, fmt=FMT, delimiter=",", header=",".join(header), comments="")


def _snapshot_name(step):
    return f"snap_{step:08d}.csv"


def _write_snapshot(out, params, state, step, mode):
    if mode == "NSAC":
        mu = chemical_potential(params, state)
    else:
        mu = np.zeros(state.grid.n)
    _write_csv(out / _snapshot_name(step), SNAPSHOT_COLUMNS,
               (state.grid.x, state.v, state.u, state.theta, state.chi, mu))


def _write_series(out, series):
    _write_csv(out / SERIES_FILE, SERIES_COLUMNS, [series[c] for c in SERIES_COLUMNS])


def _theta_label(theta):
    return f"{theta:.6g}"


# -- commands --------------------------------------------------------------


def cmd_eos(spec, out):
    """Isotherm tables and the spinodal/equal-area analysis.

    Every requested temperature gets an ``analysis.csv`` row; entries that
    do not exist (no spinodal above the critical temperature, a cutoff
    conflict, no positive equilibrium pressure) are NaN and the reason goes
    to stderr.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    params = spec.params
    crit = critical_point(params)
    v_max = spec.output["v_max"] or 20.0 * params.b
    n = int(spec.output["n_samples"])
    v = np.linspace(params.v_min, v_max, n + 1)[1:]
    rows = []
    for theta in spec.output["isotherms"]:
        theta = float(theta)
        if not theta > 0:
            raise ConfigError("output.isotherms", "temperatures must be positive")
        p = pressure(params, v, theta)
        dp_dv, _ = pressure_derivatives(params, v, theta)
        _write_csv(out / f"isotherm_{_theta_label(theta)}.csv", ("v", "p", "dp_dv"), (v, p, dp_dv))
        try:
            m = maxwell_construction(params, theta)
        except NsacError as exc:
            # the row stays, with NaN for whatever could not be computed
            try:
                v_alpha, v_beta = spinodal(params, theta)
            except NsacError:
                v_alpha = v_beta = math.nan
            print(f"theta={theta:.17g}: {type(exc).__name__}: {exc}", file=sys.stderr)
            rows.append((theta, v_alpha, v_beta, math.nan, math.nan, math.nan))
        else:
            rows.append((theta, m.v_alpha, m.v_beta, m.v_star, m.v_sup, m.p_eq))
    cols = list(zip(*rows)) if rows else [[]] * 6
    _write_csv(out / "analysis.csv", ("theta", "v_alpha", "v_beta", "v_star", "v_sup", "p_eq"), cols)
    print(f"critical point: theta_c={crit.theta_c:.17g} v_c={crit.v_c:.17g} p_c={crit.p_c:.17g}")
    return EXIT_OK


def _run_summary(result, spec):
    return dict(
        e0=result.e0, mass0=result.mass0, steps=int(result.series.size),
        expected_steps=spec.sim.n_steps, snapshots=len(result.snapshots),
        boundary_deviation=result.boundary_deviation,
    )


def cmd_run(spec, out):
    """Run the configured simulation and write every artifact."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / CONFIG_ECHO, spec.effective)
    for old in out.glob("snap_*.csv"):
        old.unlink()
    initial = init_state(spec.grid, spec.far, spec.profile, spec.params)
    try:
        result = run(spec.params, spec.far, initial, spec.sim)
        code = EXIT_OK
    except SolverAbort as exc:
        result = exc.partial
        code = EXIT_ABORT
        print(f"solver abort: {exc}", file=sys.stderr)
    for state, step in zip(result.snapshots, result.steps):
        _write_snapshot(out, spec.params, state, step, spec.sim.mode)
    _write_series(out, result.series)
    report = dict(run=_run_summary(result, spec), checks=[], abort=result.abort)
    _write_json(out / REPORT_FILE, _json_safe(report))
    return code


def _json_safe(obj):
    return json.loads(json.dumps(obj, default=lambda o: o.item() if hasattr(o, "item") else str(o)))


def _load_run_dir(run_dir):
    run_dir = Path(run_dir)
    echo = run_dir / CONFIG_ECHO
    series_path = run_dir / SERIES_FILE
    snaps = sorted(run_dir.glob("snap_*.csv"))
    missing = [p.name for p in (echo, series_path) if not p.is_file()]
    if not snaps:
        missing.append("snap_*.csv")
    if missing:
        raise MissingArtifacts(f"{run_dir}: missing {', '.join(missing)}")
    # the run itself enforced the beta guard; checks apply regardless
    spec = parse_config(echo, allow_unproven=True)
    try:
        table = np.atleast_2d(np.loadtxt(series_path, delimiter=",", skiprows=1))
        with series_path.open() as fh:
            header = fh.readline().strip().split(",")
    except ValueError as exc:
        raise MissingArtifacts(f"{series_path}: unreadable ({exc})") from None
    if tuple(header) != SERIES_COLUMNS:
        raise MissingArtifacts(f"{series_path}: unexpected header")
    if table.size == 0:
        table = np.zeros((0, len(SERIES_COLUMNS)))
    series = np.array([tuple(r) for r in table], dtype=[(c, float) for c in SERIES_COLUMNS])
    states = []
    for path in snaps:
        step = int(path.stem.split("_")[1])
        try:
            data = np.loadtxt(path, delimiter=",", skiprows=1)
        except ValueError as exc:
            raise MissingArtifacts(f"{path}: unreadable ({exc})") from None
        if data.ndim != 2 or data.shape != (spec.grid.n, len(SNAPSHOT_COLUMNS)):
            raise MissingArtifacts(f"{path}: expected {spec.grid.n} rows of {len(SNAPSHOT_COLUMNS)} columns")
        t = min(step * spec.sim.dt, spec.sim.t_end)
        states.append((step, State(spec.grid, t, data[:, 1], data[:, 2], data[:, 3], data[:, 4])))
    states.sort(key=lambda item: item[0])
    return spec, series, [s for _, s in states]


def _guarded(name, func):
    try:
        return func()
    except (PreconditionFailed, InsufficientCadence, DomainError) as exc:
        return CheckResult(name, False, -math.inf, dict(error=type(exc).__name__, message=str(exc)))


def run_checks(spec, series, snapshots):
    """Every diagnostic applicable to the run's mode."""
    params, far, grid, sim = spec.params, spec.far, spec.grid, spec.sim
    checks = spec.checks
    report = DiagnosticsReport()
    first = snapshots[0]
    mu0 = None if sim.mode == "NSAC" else np.zeros(grid.n)
    start = energy_report(params, far, first, mu=mu0)
    e0, mass0 = start.e_total, start.mass_integral

    report.add(bounds_over_run(params, snapshots, checks["tol_chi"]))
    report.add(series_bounds_check(params, series, checks["tol_chi"]))

    drift = np.abs(series["mass"] - mass0) if series.size else np.zeros(1)
    report.add(CheckResult("mass_drift", bool(drift.max() <= checks["mass_tol"]),
                           float(checks["mass_tol"] - drift.max()),
                           dict(max_drift=float(drift.max()), mass0=mass0)))

    if series.size:
        budget = energy_budget(series, checks["energy_budget_C"], grid.dx)
        budget_check = energy_budget_check(series, e0, budget)
        budget_check.details["C"] = checks["energy_budget_C"]
        report.add(budget_check)

    def cells():
        bounds = cell_average_bounds(params, far, e0, mass0, form=checks["algebraic_eq_form"])
        results = [cell_average_check(params, far, s, bounds) for s in snapshots]
        worst = min(results, key=lambda r: r.worst_margin)
        return CheckResult("cell_averages", all(r.ok for r in results), worst.worst_margin,
                           dict(worst.details, form=bounds.form))

    report.add(_guarded("cell_averages", cells))
    report.add(_guarded("kazhikhov", lambda: kazhikhov_reconstruction(
        params, far, snapshots, series, dt=sim.dt, threshold=checks["kazhikhov_threshold"])[0]))

    report.add(_guarded("truncation", lambda: truncation_check(
        far, snapshots, checks["truncation_p"])))
    if sim.mode == "NSAC":
        def sobolev():
            results = [sobolev_sup_check(s) for s in snapshots]
            worst = min(results, key=lambda r: r.worst_margin)
            return CheckResult("sobolev_sup", all(r.ok for r in results), worst.worst_margin,
                               worst.details)

        report.add(_guarded("sobolev_sup", sobolev))
    else:
        report.add(ns_monitor_check(series, sim.t_end, e0, params.kappa_tilde))
    return report


def cmd_check(run_dir):
    """Run every diagnostic on a run directory and update report.json."""
    run_dir = Path(run_dir)
    spec, series, snapshots = _load_run_dir(run_dir)
    report = run_checks(spec, series, snapshots)
    report_path = run_dir / REPORT_FILE
    doc = {}
    if report_path.is_file():
        try:
            doc = json.loads(report_path.read_text())
        except json.JSONDecodeError:
            doc = {}
    doc["checks"] = json.loads(report.to_json())
    _write_json(report_path, doc)
    for c in report.checks:
        print(f"{'PASS' if c.ok else 'FAIL'} {c.name} (worst margin {c.worst_margin:.6g})")
    if report.ok:
        return EXIT_OK
    print("failed checks: " + ", ".join(report.failed), file=sys.stderr)
    return EXIT_CHECK_FAILED


def cmd_converge(spec, levels, out):
    """Manufactured-solution ladders and the energy-defect ladder.

    Spatial errors use dt = C dx^2 (time error far below the spatial one),
    temporal errors use dt = r dx.  The energy defect ladder reruns the
    configured initial data, unforced, at n, 2n, ... nodes with dt halved
    alongside dx.
    """
    if levels is None or int(levels) < 2:
        raise ConfigError("levels", "need at least two levels")
    levels = int(levels)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / CONFIG_ECHO, dict(spec.effective, levels=levels))
    c = spec.checks
    problem = ManufacturedProblem(spec.params, spec.far, 1, c["mms_amplitude"])
    space = convergence_ladder(problem, levels, n0=c["mms_n0"], t_end=c["mms_t_end"],
                               dt_of_dx=lambda dx: c["mms_space_C"] * dx**2)
    time_ = convergence_ladder(problem, levels, n0=c["mms_n0"], t_end=c["mms_t_end"],
                               dt_of_dx=lambda dx: c["mms_time_ratio"] * dx)
    order_s = np.r_[math.nan, observed_orders([r["error"] for r in space])]
    order_t = np.r_[math.nan, observed_orders([r["error"] for r in time_])]

    defects = []
    for i in range(levels):
        grid = Grid1D(spec.grid.x_min, spec.grid.x_max, (spec.grid.n - 1) * 2**i + 1)
        sim = SimConfig(dt=spec.sim.dt / 2**i, t_end=spec.sim.t_end, cfl=spec.sim.cfl,
                        mode=spec.sim.mode, stepper=spec.sim.stepper,
                        picard_tol=spec.sim.picard_tol, picard_max_iter=spec.sim.picard_max_iter,
                        output_every=10**9, allow_unproven=spec.sim.allow_unproven)
        result = run(spec.params, spec.far, init_state(grid, spec.far, spec.profile, spec.params), sim)
        defects.append(float(np.max(np.abs(energy_defect(result.series, result.e0)))))
    ratio = np.r_[math.nan, np.array(defects[:-1]) / np.array(defects[1:])]

    cols = (
        [r["n"] for r in space], [r["dx"] for r in space],
        [r["dt"] for r in space], [r["error"] for r in space], order_s,
        [r["dt"] for r in time_], [r["error"] for r in time_], order_t,
        defects, ratio,
    )
    _write_csv(out / "convergence.csv",
               ("n", "dx", "dt_space", "error_space", "order_space", "dt_time",
                "error_time", "order_time", "energy_defect", "defect_ratio"), cols)
    for i in range(levels):
        print(f"n={space[i]['n']} space_err={space[i]['error']:.6g} order={order_s[i]:.3f} "
              f"time_err={time_[i]['error']:.6g} order={order_t[i]:.3f} "
              f"defect={defects[i]:.6g} ratio={ratio[i]:.3f}")
    return EXIT_OK


# -- entry point -----------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="nsacvdw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("eos", "isotherm tables and coexistence analysis"),
                       ("run", "run a simulation"),
                       ("check", "run the diagnostics on a run directory"),
                       ("converge", "convergence study")):
        p = sub.add_parser(name, help=text)
        if name != "check":
            p.add_argument("--config", required=True, help="JSON configuration file")
        else:
            p.add_argument("run_dir", nargs="?", help="run directory (defaults to --out)")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--allow-unproven", action="store_true",
                       help="allow NSAC runs with beta = 0")
        if name == "converge":
            p.add_argument("--levels", type=int, default=3, help="number of refinement levels")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check":
            return cmd_check(args.run_dir or args.out)
        spec = parse_config(args.config, allow_unproven=args.allow_unproven)
        if args.command == "eos":
            return cmd_eos(spec, args.out)
        if args.command == "run":
            return cmd_run(spec, args.out)
        return cmd_converge(spec, args.levels, args.out)
    except (ConfigError, MissingArtifacts) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverAbort as exc:
        print(f"solver abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except NsacError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
