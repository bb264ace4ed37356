"""Command-line front end: ``udw-harvest <command> [options]``."""
from __future__ import annotations

import argparse
import copy
import csv
import io
import itertools
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .quad import DEFAULT_1D, DEFAULT_2D, QuadSpec
from .sweep import SweepRow, run_rows

log = logging.getLogger(__name__)

AXES = ("a_sigma", "bbar", "omega_sigma", "L_sigma", "flavor")
DEFAULTS = {"a_sigma": 1.0, "bbar": 0.0, "omega_sigma": 1.0, "L_sigma": 1.0,
            "flavor": "stationary"}
COMMANDS = ("response", "harvest", "figure", "battery")
QUANTITIES = ("probability", "temperature")

EXIT_OK, EXIT_PARSE, EXIT_PARTIAL, EXIT_FAILED = 0, 2, 3, 4


class ManifestError(ValueError):
    pass


def _axis_values(name, spec):
    if isinstance(spec, list):
        vals = spec
    elif isinstance(spec, dict) and "values" in spec:
        vals = spec["values"]
    elif isinstance(spec, dict):
        unknown = set(spec) - {"start", "stop", "count", "scale"}
        if unknown:
            raise ManifestError(f"axis {name}: unknown keys {sorted(unknown)}")
        try:
            start, stop, count = float(spec["start"]), float(spec["stop"]), int(spec["count"])
        except KeyError as exc:
            raise ManifestError(f"axis {name}: missing {exc.args[0]!r}") from None
        scale = spec.get("scale", "linear")
        if scale == "linear":
            vals = np.linspace(start, stop, count).tolist()
        elif scale == "log10":
            vals = np.logspace(start, stop, count).tolist()
        else:
            raise ManifestError(f"axis {name}: scale must be linear or log10, got {scale!r}")
    else:
        raise ManifestError(f"axis {name}: expected a list or an object")
    if name == "flavor":
        bad = [v for v in vals if v not in ("stationary", "nonstationary")]
        if bad:
            raise ManifestError(f"axis flavor: invalid values {bad}")
        return list(vals)
    return [float(v) for v in vals]


@dataclass
class RunManifest:
    command: str
    grid: dict = field(default_factory=dict)
    fixed: dict = field(default_factory=dict)
    quad: dict = field(default_factory=dict)
    quantity: str = "probability"
    preset: str | None = None
    out: str | None = None
    format: str = "csv"
    notes: str = ""

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ManifestError(f"unknown command {self.command!r}")
        for name in list(self.grid) + list(self.fixed):
            if name not in AXES:
                raise ManifestError(f"unknown axis {name!r}; expected one of {', '.join(AXES)}")
        for name, spec in self.grid.items():
            _axis_values(name, spec)
        if self.quantity not in QUANTITIES:
            raise ManifestError(f"unknown quantity {self.quantity!r}")
        if self.format not in ("csv", "json"):
            raise ManifestError(f"format must be csv or json, got {self.format!r}")
        fields = set(QuadSpec.__dataclass_fields__)
        unknown = set(self.quad) - fields
        if unknown:
            raise ManifestError(f"unknown quad settings {sorted(unknown)}")

    def to_dict(self):
        return {"command": self.command, "grid": self.grid, "fixed": self.fixed,
                "quad": self.quad, "quantity": self.quantity, "preset": self.preset,
                "out": self.out, "format": self.format, "notes": self.notes}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ManifestError("manifest must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ManifestError(f"unknown manifest keys {sorted(unknown)}")
        if "command" not in d:
            raise ManifestError("manifest needs a 'command'")
        return cls(**copy.deepcopy(d))

    @classmethod
    def from_json(cls, text: str):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(d)

    def axis_names(self):
        return [n for n in AXES if n in self.grid]

    def points(self):
        """Cartesian product of the grid axes (canonical axis order) with fixed values."""
        names = self.axis_names()
        values = [_axis_values(n, self.grid[n]) for n in names]
        base = {**DEFAULTS, **self.fixed}
        for combo in itertools.product(*values):
            p = dict(base)
            p.update(zip(names, combo))
            yield p

    def quad_spec(self, two_d: bool = False) -> QuadSpec:
        base = DEFAULT_2D if two_d else DEFAULT_1D
        kw = dict(self.quad)
        if "eps_schedule" in kw:
            kw["eps_schedule"] = tuple(kw["eps_schedule"])
        return base.replace(**kw) if kw else base


# ---------------------------------------------------------------- presets

def _lin(start, stop, count):
    return {"start": start, "stop": stop, "count": count, "scale": "linear"}


def _log(start, stop, count):
    return {"start": start, "stop": stop, "count": count, "scale": "log10"}


MOTIONS = [0.0, 0.5, 1.0, 2.0]
BOTH = ["stationary", "nonstationary"]

PRESETS = {
    "fig3a": dict(command="response", grid={"a_sigma": _lin(0.1, 8.0, 80), "bbar": MOTIONS},
                  fixed={"omega_sigma": 2.0},
                  notes="transition probability vs a*sigma, Omega*sigma = 2"),
    "fig3b": dict(command="response", grid={"bbar": _log(-2, 2, 81),
                                            "omega_sigma": [0.5, 1.0, 1.5, 2.0, 3.0]},
                  fixed={"a_sigma": 1.0},
                  notes="transition probability vs bbar at a*sigma = 1"),
    "fig3c": dict(command="response", grid={"bbar": _log(-2, 2, 81),
                                            "omega_sigma": [0.5, 1.0, 1.5, 2.0, 3.0]},
                  fixed={"a_sigma": 6.0},
                  notes="transition probability vs bbar at a*sigma = 6"),
    "fig3d": dict(command="response", quantity="temperature",
                  grid={"bbar": _log(-2, 2, 81), "omega_sigma": [0.5, 1.0, 1.5, 2.0, 3.0]},
                  fixed={"a_sigma": 1.0},
                  notes="effective temperature vs bbar at a*sigma = 1"),
    "fig4": dict(command="harvest", grid={"a_sigma": [1.0, 2.0], "bbar": _lin(0.0, 3.0, 31),
                                          "flavor": BOTH},
                 fixed={"omega_sigma": 0.1, "L_sigma": 1.0},
                 notes="correlations vs bbar, Omega*sigma = 0.1, L/sigma = 1"),
    "fig5a": dict(command="harvest", grid={"a_sigma": _lin(0.5, 10.0, 20), "bbar": MOTIONS,
                                           "flavor": BOTH},
                  fixed={"omega_sigma": 0.1, "L_sigma": 0.5},
                  notes="concurrence vs a*sigma, Omega*sigma = 0.1, L/sigma = 0.5"),
    "fig5b": dict(command="harvest", grid={"a_sigma": _lin(0.5, 10.0, 20), "bbar": MOTIONS,
                                           "flavor": BOTH},
                  fixed={"omega_sigma": 0.1, "L_sigma": 3.0},
                  notes="mutual information vs a*sigma, Omega*sigma = 0.1, L/sigma = 3"),
    "fig6": dict(command="harvest", grid={"bbar": MOTIONS, "omega_sigma": _lin(0.1, 4.0, 40),
                                          "L_sigma": _lin(0.1, 4.0, 40)},
                 fixed={"a_sigma": 1.0},
                 notes="concurrence boundary in (L/sigma, Omega*sigma), a*sigma = 1"),
    "fig7": dict(command="harvest", grid={"bbar": [0.0, 2.0], "omega_sigma": [1.0, 2.0],
                                          "L_sigma": _lin(0.1, 4.0, 40)},
                 fixed={"a_sigma": 1.0},
                 notes="C+ and C- vs L/sigma; a*sigma = 1 assumed (not stated for this figure)"),
}


def preset_manifest(name: str) -> RunManifest:
    if name not in PRESETS:
        raise ManifestError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return RunManifest(preset=name, **copy.deepcopy(PRESETS[name]))


# ---------------------------------------------------------------- execution

def _temperature_row(point, spec):
    from .response import DetectorParams, effective_temperature_full
    from .wightman import TrajectoryParams

    return effective_temperature_full(TrajectoryParams(point["a_sigma"], point["bbar"]),
                                      DetectorParams(point["omega_sigma"]), spec)


def _probability_row(point, spec):
    from .response import DetectorParams, transition_probability
    from .wightman import TrajectoryParams

    return transition_probability(TrajectoryParams(point["a_sigma"], point["bbar"]),
                                  DetectorParams(point["omega_sigma"]), spec)


def _harvest_row(point, spec):
    from .harvest import HarvestPoint, _harvest_row as row

    keys = ("a_sigma", "bbar", "omega_sigma", "L_sigma", "flavor")
    return row(HarvestPoint(**{k: point[k] for k in keys}), spec)


def _result_columns(manifest):
    if manifest.command == "response":
        if manifest.quantity == "temperature":
            return ["T_eff", "err"]
        return ["L_over_lambda2", "err"]
    return ["concurrence", "concurrence_plus", "concurrence_minus", "mutual_info",
            "l_plus", "l_minus", "laa", "lbb", "re_lab", "im_lab", "re_m", "im_m",
            "re_m_plus", "im_m_plus", "re_m_minus", "im_m_minus",
            "err_laa", "err_lab", "err_m"]


def _result_values(manifest, res):
    if manifest.command == "response":
        if manifest.quantity == "temperature":
            return [res.value, res.err]
        return [res.prob_over_lambda2, res.err]
    b = res.blocks
    return [res.concurrence, res.concurrence_plus, res.concurrence_minus, res.mutual_info,
            res.l_plus, res.l_minus, b.laa, b.lbb, b.lab.real, b.lab.imag,
            b.m.real, b.m.imag, b.m_plus.real, b.m_plus.imag, b.m_minus.real, b.m_minus.imag,
            b.err_laa, b.err_lab, b.err_m]


def execute(manifest: RunManifest, jobs: int = 1) -> list[SweepRow]:
    if manifest.command == "response":
        fn = _temperature_row if manifest.quantity == "temperature" else _probability_row
        spec = manifest.quad_spec()
    elif manifest.command == "harvest":
        fn = _harvest_row
        spec = manifest.quad_spec(two_d=False) if manifest.quad else None
    else:
        raise ManifestError(f"cannot execute {manifest.command!r} as a sweep")
    return run_rows(fn, list(manifest.points()), spec, jobs)


def _fmt(v):
    if isinstance(v, str):
        return v
    return "%.17g" % v


def render(manifest: RunManifest, rows: list[SweepRow], fmt: str = "csv") -> str:
    axes = manifest.axis_names()
    cols = _result_columns(manifest)
    failed = any(not r.ok for r in rows)
    header = axes + cols + (["status"] if failed else [])
    records = []
    for r in rows:
        rec = [r.point[a] for a in axes]
        rec += _result_values(manifest, r.result) if r.ok else [math.nan] * len(cols)
        if failed:
            rec.append("ok" if r.ok else r.error)
        records.append(rec)
    if fmt == "json":
        return json.dumps({"manifest": manifest.to_dict(), "columns": header,
                           "rows": [[x if isinstance(x, str) or math.isfinite(x) else None
                                     for x in rec] for rec in records]}, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for rec in records:
        w.writerow([_fmt(x) for x in rec])
    return buf.getvalue()


def exit_status(rows) -> int:
    if not rows or all(r.ok for r in rows):
        return EXIT_OK
    if any(r.ok for r in rows):
        return EXIT_PARTIAL
    return EXIT_FAILED


def run_battery_report(include_2d: bool = True):
    from .oracle import run_battery

    reports = run_battery(include_2d=include_2d)
    ok = all(r.passed for r in reports)
    return {"passed": ok, "n_reports": len(reports),
            "reports": [r.to_dict() for r in reports]}, ok


# ---------------------------------------------------------------- argument handling

def _set_dotted(d: dict, key: str, raw: str):
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    parts = key.split(".")
    cur = d
    for p in parts[:-1]:
        nxt = cur.get(p)
        if not isinstance(nxt, dict):
            nxt = {}
            cur[p] = nxt
        cur = nxt
    cur[parts[-1]] = value


def build_parser():
    p = argparse.ArgumentParser(prog="udw-harvest",
                                description="Correlation harvesting by accelerated detectors")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("preset", nargs="?", help="figure preset name (figure command only)")
    p.add_argument("--config", help="JSON run manifest")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a manifest entry by dotted path, e.g. fixed.omega_sigma=2")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--jobs", type=int, default=None,
                   help="worker processes (default: $UDW_HARVEST_JOBS or 1)")
    p.add_argument("--no-2d", action="store_true", help="battery: skip the 2D reduction checks")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def load_manifest(args) -> RunManifest:
    if args.command == "figure":
        if not args.preset:
            raise ManifestError("figure needs a preset name: " + ", ".join(PRESETS))
        d = preset_manifest(args.preset).to_dict()
    else:
        if args.preset:
            raise ManifestError(f"unexpected argument {args.preset!r}")
        d = {"command": args.command}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
        try:
            loaded = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"{args.config}: line {exc.lineno}, column {exc.colno}: "
                                f"{exc.msg}") from None
        if not isinstance(loaded, dict):
            raise ManifestError(f"{args.config}: manifest must be a JSON object")
        d.update(loaded)
        if args.command != "figure":
            d["command"] = args.command
    for item in args.overrides:
        if "=" not in item:
            raise ManifestError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        _set_dotted(d, k.strip(), v)
    if args.out:
        d["out"] = args.out
    if args.format:
        d["format"] = args.format
    m = RunManifest.from_dict(d)
    if m.command == "figure":
        raise ManifestError("a figure manifest must resolve to response or harvest")
    return m


def _write(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    jobs = args.jobs
    if jobs is None:
        try:
            jobs = int(os.environ.get("UDW_HARVEST_JOBS", "1"))
        except ValueError:
            print("error: UDW_HARVEST_JOBS must be an integer", file=sys.stderr)
            return EXIT_PARSE
    if args.command == "battery":
        report, ok = run_battery_report(include_2d=not args.no_2d)
        _write(json.dumps(report, indent=1) + "\n", args.out)
        return EXIT_OK if ok else EXIT_FAILED
    try:
        manifest = load_manifest(args)
    except (ManifestError, OSError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    rows = execute(manifest, jobs=max(1, jobs))
    _write(render(manifest, rows, manifest.format), manifest.out)
    return exit_status(rows)


if __name__ == "__main__":
    sys.exit(main())
