"""Command-line front end: ``softrgg sweep | theory | figure``.

Exit codes: 0 success, 2 usage or configuration error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import itertools
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, theory
from .connection import make_connection, mean_degree, solve_rc_for_mean_degree
from .errors import SoftRGGError
from .montecarlo import SweepConfig, SweepResult, compare_theory, run_sweep
from .point_process import BoundaryMode

log = logging.getLogger("softrgg")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 2, 3
OUTPUT_ENV = "SOFTRGG_OUTPUT_DIR"

SWEEP_COLUMNS = (
    "axis_value", "r_c",
    "p_dis", "p_dis_lo", "p_dis_hi",
    "p_iso", "p_iso_lo", "p_iso_hi",
    "p_ucg", "p_ucg_lo", "p_ucg_hi",
    "p_iso_or_ucg", "p_iso_or_ucg_lo", "p_iso_or_ucg_hi",
    "mean_n_iso", "var_n_iso",
    "th_expected_iso", "th_poisson_p", "th_cv_bound", "th_ucg_lower",
)

# section -> key -> SweepConfig field
CONFIG_SCHEMA = {
    "model": {"length": "length", "boundary": "boundary", "family": "family", "beta": "beta",
              "eta": "eta", "r_c": "r_c", "tail_epsilon": "tail_epsilon"},
    "sweep": {"axis": "sweep_axis", "values": "sweep_values", "trials": "trials_per_point",
              "seed": "master_seed", "modes": "record_modes"},
    "output": {"dir": None},
}


class ConfigError(Exception):
    pass


# ------------------------------------------------------------------ CSV I/O

def format_value(v) -> str:
    return repr(float(v))


def sweep_rows(result: SweepResult) -> list[dict]:
    rows = []
    for pt in result.points:
        row = {"axis_value": pt.axis_value, "r_c": pt.r_c}
        for name in ("p_dis", "p_iso", "p_ucg", "p_iso_or_ucg"):
            est = getattr(pt, name)
            row[name], row[name + "_lo"], row[name + "_hi"] = est.p, est.lo, est.hi
        row.update(mean_n_iso=pt.mean_n_iso, var_n_iso=pt.var_n_iso, th_expected_iso=pt.th_expected_iso,
                   th_poisson_p=pt.th_poisson_p, th_cv_bound=pt.th_cv_bound, th_ucg_lower=pt.th_ucg_lower)
        rows.append(row)
    return rows


def dumps_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_value(row[c]) for c in columns])
    return buf.getvalue()


def loads_csv(text: str) -> tuple[list[str], list[dict]]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    return header, [dict(zip(header, map(float, rec))) for rec in reader]


def read_sweep_csv(path) -> list[dict]:
    return loads_csv(Path(path).read_text(encoding="utf-8"))[1]


def _atomic_write(files: dict[Path, str]):
    """Write all files or none: stage to temporaries, then rename."""
    staged = []
    try:
        for path, text in files.items():
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            staged.append((tmp, path))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, path in staged:
        os.replace(tmp, path)


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if hasattr(obj, "value") and not isinstance(obj, (int, float, str)):
        return obj.value
    return obj


# ------------------------------------------------------------------- config

def _parse_value(field, raw: str):
    raw = raw.strip()
    if field in ("boundary", "family", "sweep_axis"):
        return raw
    if field == "sweep_values":
        return tuple(float(v) for v in raw.replace(",", " ").split())
    if field == "record_modes":
        return frozenset(v for v in raw.replace(",", " ").split())
    if field in ("trials_per_point", "master_seed"):
        return int(raw)
    if field == "eta" and raw.lower() in ("", "none"):
        return None
    return float(raw)


def load_config(path, overrides=()) -> tuple[SweepConfig, str | None]:
    """Parse an INI sweep config plus ``section.key=value`` overrides."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for item in overrides:
        key, sep, value = item.partition("=")
        section, dot, name = key.strip().partition(".")
        if not sep or not dot:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, name, value)
    return config_from_parser(parser)


def config_from_parser(parser: configparser.ConfigParser) -> tuple[SweepConfig, str | None]:
    kwargs, out_dir = {}, None
    for section in parser.sections():
        if section not in CONFIG_SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in CONFIG_SCHEMA[section]:
                raise ConfigError(f"unknown config key {section}.{key}")
            field = CONFIG_SCHEMA[section][key]
            if field is None:
                out_dir = raw.strip()
                continue
            try:
                kwargs[field] = _parse_value(field, raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from exc
    for required in ("length", "sweep_values"):
        if required not in kwargs:
            raise ConfigError(f"config is missing {required}")
    try:
        return SweepConfig(**kwargs), out_dir
    except (SoftRGGError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _output_dir(explicit, from_config) -> Path:
    return Path(explicit or from_config or os.environ.get(OUTPUT_ENV) or "softrgg-out")


# ------------------------------------------------------------------ sweep

def _manifest(command, config: SweepConfig, started, outputs, extra=None) -> dict:
    m = {"tool": "softrgg", "version": __version__, "command": command, "config": config.to_dict(),
         "master_seed": config.master_seed, "started": started, "finished": _now(), "outputs": outputs}
    if extra:
        m.update(extra)
    return m


def _point_summary(pt):
    d = asdict(pt)
    return _json_safe(d)


def execute_sweep(config: SweepConfig, out_dir: Path, parallelism) -> Path:
    started = _now()
    result = run_sweep(config, parallelism)
    csv_text = dumps_csv(sweep_rows(result), SWEEP_COLUMNS)
    summary = {
        "manifest": _manifest("sweep", config, started, {"csv": "sweep.csv"}, {"csv_sha256": _sha256(csv_text)}),
        "points": [_point_summary(p) for p in result.points],
    }
    if config.boundary is BoundaryMode.TORUS:
        summary["poisson_comparison"] = [_json_safe(asdict(r)) for r in compare_theory(result)]
    for pt in result.points:
        if pt.error:
            print(f"warning: sweep point {pt.axis_value}: {pt.error}", file=sys.stderr)
    _atomic_write({out_dir / "sweep.csv": csv_text,
                   out_dir / "sweep.json": json.dumps(_json_safe(summary), indent=2) + "\n"})
    return out_dir / "sweep.csv"


def verify_manifest(manifest_path: Path, parallelism) -> int:
    data = json.loads(manifest_path.read_text(encoding="utf-8"))
    manifest = data.get("manifest", data)
    cfg = dict(manifest["config"])
    cfg["record_modes"] = frozenset(cfg["record_modes"])
    config = SweepConfig.from_dict(cfg)
    recorded = (manifest_path.parent / manifest["outputs"]["csv"]).read_text(encoding="utf-8")
    fresh = dumps_csv(sweep_rows(run_sweep(config, parallelism)), SWEEP_COLUMNS)
    if fresh == recorded:
        print(f"manifest verified: {manifest_path}")
        return EXIT_OK
    print(f"manifest mismatch: re-run of {manifest_path} differs from recorded CSV", file=sys.stderr)
    return EXIT_RUNTIME


def cmd_sweep(args) -> int:
    if args.verify_manifest:
        return verify_manifest(Path(args.verify_manifest), args.parallelism)
    if not args.config:
        raise ConfigError("sweep needs a config file (or --verify-manifest)")
    config, cfg_dir = load_config(args.config, args.set or ())
    path = execute_sweep(config, _output_dir(args.out, cfg_dir), args.parallelism)
    print(path)
    return EXIT_OK


# ----------------------------------------------------------------- theory

def _cf(p):
    return make_connection(p.get("family", "waxman"), p.get("rc", 1.0), p.get("beta", 1.0), p.get("eta"),
                           p.get("scale", 1.0))


def _lstar(p):
    if "l1" in p:
        res = theory.crossover_loglog(p["l1"], p["eta"], p["C"])
    else:
        res = theory.crossover_L_star(_cf(p), p["C"])
    return {"loglog_L_star": res.loglog, "L_star": res.value if res.value is not None else math.inf}


QUANTITIES = {
    "expected-iso": (("L",), lambda p: theory.expected_isolated(_cf(p), p["L"])),
    "prob-iso-point": (("L",), lambda p: theory.prob_isolation_at_point(_cf(p), p["L"])),
    "mean-degree": (("L",), lambda p: mean_degree(_cf(p), p["L"], p.get("boundary", "torus"))),
    "cv-bound": (("L",), lambda p: theory.cv_squared_upper_bound(_cf(p), p["L"])),
    "poisson": (("L", "kbar"), lambda p: theory.poisson_approx_prob_iso(p["L"], p["kbar"])),
    "l1": ((), lambda p: _cf(p).l1_norm()),
    "critical-gamma": ((), lambda p: theory.critical_gamma(_cf(p))),
    "theta": (("eta",), lambda p: theory.ucg_theta(p["eta"])),
    "scaling-r": (("L", "gamma"), lambda p: theory.scaling_R(p.get("kind", "isolated"), p["L"], p["gamma"],
                                                             p.get("eta", 1.0))),
    "ucg-lower": (("L",), lambda p: theory.expected_ucg_lower_bound(_cf(p), p["L"])),
    "incgamma": (("a", "y"), lambda p: theory.incomplete_gamma_upper(p["a"], p["y"])),
    "tail-moment": (("x",), lambda p: theory.tail_moment_bound(_cf(p), p["x"])),
    "chernoff": (("alpha", "delta"), lambda p: theory.chernoff_rate(p["alpha"], p["delta"])),
    "crossing-mean": (("R",), lambda p: theory.conditional_crossing_mean(_cf(p), p["R"])),
    "gamma-floor": ((), lambda p: theory.gamma_floor(_cf(p))),
    "lstar": (("C",), _lstar),
    "solve-rc": (("L", "kbar"), lambda p: solve_rc_for_mean_degree(
        p["kbar"], p["L"], p.get("boundary", "torus"), p.get("family", "waxman"), p.get("beta", 1.0), p.get("eta"))),
    "scale-from-tau": (("L", "tau"), lambda p: theory.scale_from_tau(_cf(p), p["tau"], p["L"])),
}

THEORY_PARAMS = {  # option -> (key, type)
    "L": float, "kbar": float, "family": str, "rc": float, "beta": float, "eta": float, "scale": float,
    "boundary": str, "gamma": float, "kind": str, "a": float, "y": float, "x": float, "alpha": float,
    "delta": float, "R": float, "C": float, "l1": float, "tau": float,
}


def cmd_theory(args) -> int:
    required, func = QUANTITIES[args.quantity]
    grid = {}
    for name, typ in THEORY_PARAMS.items():
        raw = getattr(args, "p_" + name)
        if raw is None:
            continue
        try:
            grid[name] = [typ(v.strip()) for v in raw.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad value for --{name}: {raw!r}") from exc
    missing = [r for r in required if r not in grid]
    if args.quantity == "lstar" and "l1" in grid and "eta" not in grid:
        missing.append("eta")
    if missing:
        raise ConfigError(f"quantity {args.quantity} needs --{', --'.join(missing)}")
    names = list(grid)
    rows = []
    for combo in itertools.product(*(grid[n] for n in names)):
        params = dict(zip(names, combo))
        value = func(params)
        row = {"quantity": args.quantity, **params}
        row.update(value if isinstance(value, dict) else {"value": value})
        rows.append(row)
    if args.format == "json":
        text = json.dumps(_json_safe(rows), indent=2) + "\n"
    else:
        cols = list(rows[0])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in (r[c] for c in cols)])
        text = buf.getvalue()
    if args.out:
        _atomic_write({Path(args.out): text})
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ----------------------------------------------------------------- figures

def _grid(lo, hi, step):
    n = int(round((hi - lo) / step))
    return tuple(float(v) for v in np.round(lo + step * np.arange(n + 1), 10))


def cmd_figure(args) -> int:
    if args.figure not in ("fig3", "fig5"):
        raise ConfigError(f"unknown figure {args.figure!r}; expected fig3 or fig5")
    started = _now()
    out_dir = _output_dir(args.out, None)
    kbars = _grid(args.kbar_min, args.kbar_max, args.kbar_step)
    families = [f.strip() for f in args.family.split(",") if f.strip()]
    files, configs = {}, []
    boundary = "line" if args.figure == "fig3" else "torus"
    modes = {"isolated", "gaps"} if args.figure == "fig3" else {"isolated"}
    try:
        cfgs = [SweepConfig(length=args.L, sweep_values=kbars, boundary=boundary, family=fam,
                            trials_per_point=args.trials, master_seed=args.seed, record_modes=modes)
                for fam in families]
    except SoftRGGError as exc:
        raise ConfigError(str(exc)) from exc
    for cfg in cfgs:
        result = run_sweep(cfg, args.parallelism)
        configs.append(cfg.to_dict())
        fam = cfg.family
        curves = ("p_dis", "p_iso", "p_ucg", "p_iso_or_ucg") if args.figure == "fig3" else ("p_iso",)
        for curve in curves:
            rows = [{"mean_degree": pt.axis_value, "p": getattr(pt, curve).p, "lo": getattr(pt, curve).lo,
                     "hi": getattr(pt, curve).hi} for pt in result.points]
            files[out_dir / f"{args.figure}_{fam}_{curve}.csv"] = dumps_csv(rows, ("mean_degree", "p", "lo", "hi"))
    if args.figure == "fig5":
        fine = np.linspace(args.kbar_min, args.kbar_max, 121)
        rows = [{"mean_degree": k, "p": theory.poisson_approx_prob_iso(args.L, k)} for k in fine]
        files[out_dir / "fig5_poisson.csv"] = dumps_csv(rows, ("mean_degree", "p"))
    manifest = {"tool": "softrgg", "version": __version__, "command": f"figure {args.figure}",
                "configs": configs, "master_seed": args.seed, "started": started, "finished": _now(),
                "outputs": sorted(p.name for p in files),
                "sha256": {p.name: _sha256(t) for p, t in files.items()}}
    files[out_dir / f"{args.figure}.json"] = json.dumps(_json_safe(manifest), indent=2) + "\n"
    _atomic_write(files)
    for p in sorted(files):
        print(p)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="softrgg", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"softrgg {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="run a Monte Carlo sweep from an INI config")
    sw.add_argument("config", nargs="?")
    sw.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override a config entry")
    sw.add_argument("--out", help=f"output directory (default: config [output] dir, ${OUTPUT_ENV}, ./softrgg-out)")
    sw.add_argument("--parallelism", type=int, default=None, help="worker processes (default: all cores)")
    sw.add_argument("--verify-manifest", metavar="SWEEP_JSON", help="re-run a recorded sweep and diff its CSV")
    sw.set_defaults(func=cmd_sweep)

    th = sub.add_parser("theory", help="evaluate analytic quantities over a parameter grid")
    th.add_argument("--quantity", required=True, choices=sorted(QUANTITIES))
    for name in THEORY_PARAMS:
        th.add_argument(f"--{name}", dest="p_" + name, metavar="V[,V...]")
    th.add_argument("--format", choices=("csv", "json"), default="csv")
    th.add_argument("--out")
    th.set_defaults(func=cmd_theory)

    fg = sub.add_parser("figure", help="emit plot-ready data for fig3 or fig5")
    fg.add_argument("figure")
    fg.add_argument("--L", type=float, default=1000.0)
    fg.add_argument("--trials", type=int, default=5000)
    fg.add_argument("--family", default="waxman", help="comma-separated families, e.g. waxman,rayleigh")
    fg.add_argument("--kbar-min", type=float, default=4.0)
    fg.add_argument("--kbar-max", type=float, default=10.0)
    fg.add_argument("--kbar-step", type=float, default=0.5)
    fg.add_argument("--seed", type=int, default=2024)
    fg.add_argument("--out")
    fg.add_argument("--parallelism", type=int, default=None)
    fg.set_defaults(func=cmd_figure)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SoftRGGError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE if args.command == "theory" else EXIT_RUNTIME
    except (OSError, ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
