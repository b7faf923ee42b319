"""
Command-line front end.

    abfringe {cancel,faraday,wb,sweep,trajectory} [--config PATH] [--out PATH]
             [--format csv|json] [--set key=value ...]
    abfringe defaults [EXPERIMENT]

Configs are JSON with units in the key names.  Unknown keys are errors.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .constants import CONSTANTS
from .core import QuadratureError
from .fields import Solenoid, Waveform
from .interferometer import (FRINGE_MODELS, GeometryError, WBConfig, build_geometry,
                             fringe_time_series, phase_report, radius_of_curvature)
from .phase import ConsistencyError, LoopSpec, faraday_check, total_phase
from .trajectory import (ElectronState, IntegrationError, cyclotron_period, integrate,
                         momentum_from_wavelength, uniform_field)

EXPERIMENTS = ("cancel", "faraday", "wb", "sweep", "trajectory")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

_WAVEFORM_60HZ = {"B_static_gauss": 0.0, "B_amp_gauss": 1.0, "freq_hz": 60.0,
                  "phase0_rad": 0.0, "ramp_gauss_per_s": 0.0}
_INTERFEROMETER = {"D_cm": 5.0, "theta_rad": 2e-2, "lambda_cm": 4.86e-10}

DEFAULTS: dict[str, dict] = {
    "cancel": {
        "experiment": "cancel",
        "solenoid": {"radius_cm": 1.0},
        "waveform": {"B_static_gauss": 0.0, "B_amp_gauss": 0.0, "freq_hz": 0.0,
                     "phase0_rad": 0.0, "ramp_gauss_per_s": 1.0e3},
        "loop": {"radii_cm": [1.5, 2.0, 10.0], "t0_s": 0.0, "duration_s": 1.0e-3,
                 "directions": [1, -1]},
        "numerics": {"n_sub": 64, "n_t": 64},
    },
    "faraday": {
        "experiment": "faraday",
        "solenoid": {"radius_cm": 1.0},
        "waveform": dict(_WAVEFORM_60HZ),
        "radii_cm": [0.25, 0.5, 1.5, 2.0, 10.0],
        "times_s": [0.0, 1.0e-3, 4.0e-3],
        "numerics": {"n_sub": 64},
    },
    "wb": {
        "experiment": "wb",
        "interferometer": dict(_INTERFEROMETER, B0_gauss=[1.0, 5.0]),
        "include_second_order": True,
    },
    "sweep": {
        "experiment": "sweep",
        "interferometer": dict(_INTERFEROMETER),
        "waveform": dict(_WAVEFORM_60HZ, B_amp_gauss=0.1),
        "samples": 64,
        "models": list(FRINGE_MODELS),
    },
    "trajectory": {
        "experiment": "trajectory",
        "lambda_cm": 4.86e-10,
        "B0_gauss": 1.0,
        "revolutions": 1.0,
        "dt_fraction_of_period": 1.0e-4,
        "samples": 101,
    },
}


class ConfigError(ValueError):
    pass


@dataclass
class ResultTable:
    """Columns are (name, unit) pairs; ``metadata`` echoes config and constants."""

    columns: list[tuple[str, str]]
    rows: list[list]
    metadata: dict = field(default_factory=dict)

    def header(self) -> list[str]:
        return [f"{name}[{unit}]" for name, unit in self.columns]

    @staticmethod
    def _fmt(v):
        if isinstance(v, str):
            return v
        if isinstance(v, (bool, np.bool_)):
            return "1" if v else "0"
        return "%.12e" % float(v)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(self.header())
        for row in self.rows:
            w.writerow([self._fmt(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        def num(v):
            if isinstance(v, str):
                return v
            if isinstance(v, (bool, np.bool_)):
                return bool(v)
            f = float(v)
            return float("%.12e" % f) if math.isfinite(f) else None

        doc = {
            "columns": self.header(),
            "rows": [[num(v) for v in row] for row in self.rows],
            "metadata": self.metadata,
        }
        return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------- config parsing

def _merge_strict(defaults, given, where="config"):
    if not isinstance(given, dict):
        raise ConfigError(f"{where} must be a JSON object")
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        if key not in defaults:
            raise ConfigError(f"unknown key {where}.{key}")
        ref = defaults[key]
        if isinstance(ref, dict):
            out[key] = _merge_strict(ref, value, f"{where}.{key}")
        else:
            out[key] = _check_type(ref, value, f"{where}.{key}")
    return out


def _check_type(ref, value, where):
    if isinstance(ref, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be true or false")
        return value
    if isinstance(ref, (int, float)) and not isinstance(ref, bool):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number")
        if not math.isfinite(value):
            raise ConfigError(f"{where} must be finite")
        return value
    if isinstance(ref, list):
        if isinstance(value, (int, float, str)) and not isinstance(value, bool):
            value = [value]
        if not isinstance(value, list) or not value:
            raise ConfigError(f"{where} must be a non-empty list")
        if ref and all(isinstance(r, str) for r in ref):
            if not all(isinstance(v, str) for v in value):
                raise ConfigError(f"{where} must list strings")
        else:
            for v in value:
                _check_type(0.0, v, where)
        return value
    if isinstance(ref, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string")
        return value
    return value


def parse_config(raw: dict, experiment: str) -> dict:
    if experiment not in DEFAULTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    declared = raw.get("experiment", experiment)
    if declared != experiment:
        raise ConfigError(f"config is for {declared!r}, not {experiment!r}")
    cfg = _merge_strict(DEFAULTS[experiment], raw)
    _validate(cfg)
    return cfg


def apply_override(raw: dict, assignment: str) -> None:
    """Apply ``a.b.c=value`` in place; value is parsed as JSON when possible."""
    if "=" not in assignment:
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    key, text = assignment.split("=", 1)
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    parts = key.strip().split(".")
    node = raw
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"--set path {key!r} runs through a non-object")
    node[parts[-1]] = value


def _positive(value, where):
    vals = value if isinstance(value, list) else [value]
    for v in vals:
        if not v > 0:
            raise ConfigError(f"{where} must be positive")


def _waveform(block) -> Waveform:
    try:
        return Waveform(B_static=block["B_static_gauss"], B_amp=block["B_amp_gauss"],
                        freq=block["freq_hz"], phase0=block["phase0_rad"],
                        ramp=block["ramp_gauss_per_s"])
    except ValueError as exc:
        raise ConfigError(f"waveform: {exc}") from exc


def _validate(cfg: dict) -> None:
    exp = cfg["experiment"]
    if "waveform" in cfg:
        _waveform(cfg["waveform"])
    if "solenoid" in cfg:
        _positive(cfg["solenoid"]["radius_cm"], "solenoid.radius_cm")
    if exp == "cancel":
        _positive(cfg["loop"]["radii_cm"], "loop.radii_cm")
        if cfg["loop"]["duration_s"] < 0:
            raise ConfigError("loop.duration_s must be >= 0")
        if any(d not in (1, -1) for d in cfg["loop"]["directions"]):
            raise ConfigError("loop.directions entries must be +1 or -1")
    if exp == "faraday":
        _positive(cfg["radii_cm"], "radii_cm")
    if "interferometer" in cfg:
        ib = cfg["interferometer"]
        _positive(ib["D_cm"], "interferometer.D_cm")
        _positive(ib["lambda_cm"], "interferometer.lambda_cm")
        if not 0 < ib["theta_rad"] < math.pi / 4:
            raise ConfigError("interferometer.theta_rad must lie in (0, pi/4)")
    if exp == "sweep":
        if cfg["waveform"]["freq_hz"] <= 0:
            raise ConfigError("sweep needs waveform.freq_hz > 0")
        if int(cfg["samples"]) != cfg["samples"] or cfg["samples"] < 1:
            raise ConfigError("samples must be a positive integer")
        bad = [m for m in cfg["models"] if m not in FRINGE_MODELS]
        if bad:
            raise ConfigError(f"unknown fringe models {bad}")
    if exp == "trajectory":
        _positive(cfg["lambda_cm"], "lambda_cm")
        if cfg["B0_gauss"] == 0:
            raise ConfigError("trajectory needs B0_gauss != 0")
        _positive(cfg["revolutions"], "revolutions")
        _positive(cfg["dt_fraction_of_period"], "dt_fraction_of_period")
        if int(cfg["samples"]) != cfg["samples"] or cfg["samples"] < 2:
            raise ConfigError("samples must be an integer >= 2")
    for k, v in cfg.get("numerics", {}).items():
        if int(v) != v or v < 1:
            raise ConfigError(f"numerics.{k} must be a positive integer")


# ---------------------------------------------------------------- experiments

def _workers() -> int:
    try:
        return max(1, int(os.environ.get("ABFRINGE_THREADS", "1")))
    except ValueError:
        return 1


def run_cancel(cfg) -> ResultTable:
    s = Solenoid(cfg["solenoid"]["radius_cm"], _waveform(cfg["waveform"]))
    lp, num = cfg["loop"], cfg["numerics"]
    rows = []
    for rho in lp["radii_cm"]:
        for d in lp["directions"]:
            loop = LoopSpec(rho, lp["t0_s"], lp["duration_s"], int(d))
            pb = total_phase(loop, s, int(num["n_sub"]), int(num["n_t"]))
            mtd = pb.magnetic_time_dependent
            ratio = abs(pb.time_dependent_residual) / abs(mtd) if mtd else 0.0
            rows.append([rho, d, pb.electric, pb.magnetic, pb.total, pb.static_part,
                         mtd, pb.time_dependent_residual, ratio])
    cols = [("rho", "cm"), ("direction", "1"), ("electric", "rad"), ("magnetic", "rad"),
            ("total", "rad"), ("static_part", "rad"), ("magnetic_time_dependent", "rad"),
            ("time_dependent_residual", "rad"), ("residual_ratio", "1")]
    return ResultTable(cols, rows)


def run_faraday(cfg) -> ResultTable:
    s = Solenoid(cfg["solenoid"]["radius_cm"], _waveform(cfg["waveform"]))
    rows = []
    for rho in cfg["radii_cm"]:
        for t in cfg["times_s"]:
            fc = faraday_check(rho, s, t, int(cfg["numerics"]["n_sub"]))
            rel = abs(fc.residual) / abs(fc.lhs) if fc.lhs else 0.0
            rows.append([rho, t, fc.lhs, fc.rhs, fc.residual, rel])
    cols = [("rho", "cm"), ("t", "s"), ("emf_line", "statV"), ("emf_flux_rate", "statV"),
            ("residual", "statV"), ("relative_residual", "1")]
    return ResultTable(cols, rows)


def _wb_config(block, B0=0.0) -> WBConfig:
    return WBConfig(D=block["D_cm"], theta=block["theta_rad"], lam=block["lambda_cm"], B0=B0)


def run_wb(cfg) -> ResultTable:
    ib = cfg["interferometer"]
    fields_ = ib["B0_gauss"] if isinstance(ib["B0_gauss"], list) else [ib["B0_gauss"]]
    rows = []
    for B0 in fields_:
        wb = _wb_config(ib, B0)
        paths = build_geometry(wb)
        rep = phase_report(wb, cfg["include_second_order"])
        d = paths.deltas
        rows.append([B0, radius_of_curvature(wb.lam, B0), rep.D_over_R, d["l1"], d["l2"],
                     d["m1"], d["m2"], paths.enclosed_area, paths.recombination_gap,
                     rep.ab_phase, rep.dynamical_phase, rep.net_phase,
                     rep.cancellation_ratio, rep.regime_ok, rep.regime])
    cols = [("B0", "G"), ("R", "cm"), ("D_over_R", "rad"), ("dl1", "cm"), ("dl2", "cm"),
            ("dm1", "cm"), ("dm2", "cm"), ("enclosed_area", "cm^2"),
            ("recombination_gap", "cm"), ("ab_phase", "rad"), ("dynamical_phase", "rad"),
            ("net_phase", "rad"), ("cancellation_ratio", "1"), ("regime_ok", "bool"),
            ("regime", "label")]
    return ResultTable(cols, rows)


def run_sweep(cfg) -> ResultTable:
    wb = _wb_config(cfg["interferometer"])
    wf = _waveform(cfg["waveform"])
    models = cfg["models"]
    n = int(cfg["samples"])
    series = {m: fringe_time_series(wb, wf, n, m, workers=_workers()) for m in models}
    t = series[models[0]].t
    B = wf.B(t)
    cols = [("t", "s"), ("B0", "G")]
    cols += [(f"phase_{m}", "rad") for m in models]
    cols += [(f"ptp_{m}", "rad") for m in models]
    rows = []
    for k in range(n):
        row = [t[k], B[k]]
        row += [series[m].phase[k] for m in models]
        row += [series[m].peak_to_peak for m in models]
        rows.append(row)
    meta = {"gaps": {m: series[m].gaps for m in models}}
    return ResultTable(cols, rows, meta)


def run_trajectory(cfg) -> ResultTable:
    lam, B0 = cfg["lambda_cm"], cfg["B0_gauss"]
    p = momentum_from_wavelength(lam)
    period = cyclotron_period(p, B0)
    E_fn, B_fn = uniform_field(B0)
    state0 = ElectronState(np.zeros(3), np.array([p, 0.0, 0.0]))
    traj = integrate(state0, E_fn, B_fn, dt=cfg["dt_fraction_of_period"] * period,
                     T=cfg["revolutions"] * period)
    idx = np.unique(np.linspace(0, len(traj.times) - 1, int(cfg["samples"])).round().astype(int))
    energies = traj.energies()
    rows = [[traj.times[i], *traj.positions[i], *traj.momenta[i], traj.path_length[i],
             energies[i]] for i in idx]
    cols = [("t", "s"), ("x", "cm"), ("y", "cm"), ("z", "cm"), ("px", "g*cm/s"),
            ("py", "g*cm/s"), ("pz", "g*cm/s"), ("path_length", "cm"), ("energy", "erg")]
    meta = {"gyroradius_cm": p * CONSTANTS.c / (CONSTANTS.e * abs(B0)),
            "cyclotron_period_s": period,
            "radius_of_curvature_cm": radius_of_curvature(lam, B0)}
    return ResultTable(cols, rows, meta)


RUNNERS = {"cancel": run_cancel, "faraday": run_faraday, "wb": run_wb,
           "sweep": run_sweep, "trajectory": run_trajectory}


def run(experiment: str, config_path: str | None = None, overrides=(),
        out: str | None = None, fmt: str = "csv", stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        raw = {}
        if config_path:
            with open(config_path) as fh:
                raw = json.load(fh)
        for assignment in overrides:
            apply_override(raw, assignment)
        cfg = parse_config(raw, experiment)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG

    try:
        table = RUNNERS[experiment](cfg)
    except (GeometryError, QuadratureError, IntegrationError, ConsistencyError,
            FloatingPointError) as exc:
        print(f"numerical failure in {experiment} ({type(exc).__name__}): {exc}", file=stderr)
        return EXIT_NUMERIC

    table.metadata = {"experiment": experiment, "config": cfg,
                      "constants": CONSTANTS.as_dict(), "version": __version__,
                      **table.metadata}
    text = table.to_csv() if fmt == "csv" else table.to_json()
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
        if fmt == "csv":
            with open(out + ".meta.json", "w") as fh:
                json.dump(table.metadata, fh, indent=2)
                fh.write("\n")
    else:
        stdout.write(text)
    return EXIT_OK


def emit_defaults(experiment: str | None = None) -> str:
    if experiment is None:
        return json.dumps(DEFAULTS, indent=2) + "\n"
    return json.dumps(DEFAULTS[experiment], indent=2) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="abfringe", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", metavar="PATH")
        sp.add_argument("--out", metavar="PATH")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        dest="overrides")
    dp = sub.add_parser("defaults")
    dp.add_argument("experiment", nargs="?", choices=EXPERIMENTS)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "defaults":
        sys.stdout.write(emit_defaults(args.experiment))
        return EXIT_OK
    return run(args.command, args.config, args.overrides, args.out, args.format)


if __name__ == "__main__":
    sys.exit(main())
