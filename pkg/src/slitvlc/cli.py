"""Command-line entry point.

Subcommands: pattern, link, map, analyze, preset-dump. A run is described by
an INI-style config (``[sweep]``, ``[params]``, ``[axes]``, ``[numerics]``,
``[output]``); ``--preset`` starts from a figure configuration and
``--override`` edits single keys.

Exit codes: 0 success, 2 configuration error, 3 numerical non-convergence.
"""

import argparse
import configparser
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import __version__, beam, link
from .constants import ETA0, MM, NM, THZ
from .errors import BeamwidthSaturationError, ConfigError, QuadratureError, SlitVLCError
from .sweep import KINDS, METRICS, PARAMS, PRESETS, Axis, SweepSpec, preset, run_sweep

log = logging.getLogger("slitvlc")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3

FORMATS = ("csv", "json")
SECTIONS = {
    "sweep": ("kind", "name", "metrics", "notes"),
    "params": PARAMS,
    "axes": PARAMS,
    "numerics": ("rel_tol", "density"),
    "output": ("format", "path"),
}
_INTEGER_COLUMNS = ("M", "V", "slits")


@dataclass(frozen=True)
class RunConfig:
    spec: SweepSpec
    out: str = None
    format: str = "csv"


# -- config text ------------------------------------------------------------

def _parser():
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    return cp


def _number(key, raw, problems):
    try:
        value = float(raw)
    except ValueError:
        problems.append(f"{key}: {raw!r} is not a number")
        return None
    if key in ("M", "slits", "density"):
        if not value.is_integer():
            problems.append(f"{key}: {raw!r} must be an integer")
            return None
        return int(value)
    return value


def _parse_axis(name, raw, problems):
    parts = raw.replace(",", " ").split()
    if not parts:
        problems.append(f"axis {name}: empty definition")
        return None
    mode, rest = parts[0], parts[1:]
    if mode == "values":
        vals = [_number(name, v, problems) for v in rest]
        return None if None in vals else Axis(name, values=tuple(vals))
    if mode in ("linear", "log"):
        if len(rest) != 3:
            problems.append(f"axis {name}: expected '{mode} START STOP COUNT'")
            return None
        start, stop = _number(name, rest[0], problems), _number(name, rest[1], problems)
        count = _number("M", rest[2], problems)
        if None in (start, stop, count):
            return None
        return Axis(name, float(start), float(stop), int(count), mode)
    problems.append(f"axis {name}: mode must be values, linear or log, got {mode!r}")
    return None


def _format_axis(ax):
    if ax.values is not None:
        return "values " + " ".join(_fmt(v) for v in ax.values)
    return f"{ax.spacing} {_fmt(ax.start)} {_fmt(ax.stop)} {ax.count}"


def _fmt(v):
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    return repr(float(v))


def _read(text, overrides, problems):
    """ConfigParser for ``text`` with overrides applied; key problems are appended."""
    cp = _parser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    for item in overrides:
        _apply_override(cp, item, problems)
    for section in cp.sections():
        if section not in SECTIONS:
            problems.append(f"unknown section [{section}]")
            continue
        for key in cp[section]:
            if key not in SECTIONS[section]:
                problems.append(f"unknown key {key!r} in [{section}]")
    return cp


def _params(cp, problems, broken=None):
    params = {}
    if cp.has_section("params"):
        for key, raw in cp["params"].items():
            if key not in PARAMS:
                continue
            value = _number(key, raw, problems)
            if value is not None:
                params[key] = value
            elif broken is not None:
                broken.add(key)
    return params


def _follows_from(problem, broken):
    """True for problems that only restate an earlier parse failure."""
    if not broken:
        return False
    if problem.startswith("need 1 or 2 axes"):
        return True
    return any(f"'{key}'" in problem for key in broken)


def parse_config(text, overrides=()):
    """Parse config text plus ``KEY=VALUE`` overrides into a validated RunConfig."""
    problems = []
    cp = _read(text, overrides, problems)
    sw = cp["sweep"] if cp.has_section("sweep") else {}
    kind = sw.get("kind")
    if kind is None:
        problems.append("[sweep] kind is required")
    elif kind not in KINDS:
        problems.append(f"kind must be one of {KINDS}, got {kind!r}")
    metrics = tuple(sw.get("metrics", "").replace(",", " ").split())
    for m in metrics:
        if m not in METRICS:
            problems.append(f"unknown metric {m!r}")
    notes = tuple(n.strip() for n in sw.get("notes", "").splitlines() if n.strip())

    broken = set()  # keys that were given but did not parse
    params = _params(cp, problems, broken)
    axes = []
    if cp.has_section("axes"):
        for key, raw in cp["axes"].items():
            if key not in PARAMS:
                continue
            ax = _parse_axis(key, raw, problems)
            if ax is not None:
                axes.append(ax)
            else:
                broken.add(key)

    num = cp["numerics"] if cp.has_section("numerics") else {}
    rel_tol = _number("rel_tol", num.get("rel_tol", "1e-8"), problems)
    density = _number("density", num.get("density", "8"), problems)
    out = cp["output"] if cp.has_section("output") else {}
    fmt = out.get("format", "csv")
    if fmt not in FORMATS:
        problems.append(f"format must be one of {FORMATS}, got {fmt!r}")

    spec = SweepSpec(
        kind=kind, params=params, axes=tuple(axes), metrics=metrics,
        rel_tol=rel_tol if rel_tol is not None else 1e-8,
        density=density if density is not None else 8,
        name=sw.get("name", "custom"), notes=notes,
    )
    for problem in spec.problems():
        if problem in problems or _follows_from(problem, broken):
            continue
        problems.append(problem)
    if problems:
        raise ConfigError(problems)
    return RunConfig(spec, out.get("path") or None, fmt)


def _apply_override(cp, item, problems):
    key, sep, value = item.partition("=")
    key, value = key.strip(), value.strip()
    if not sep or not key:
        problems.append(f"override {item!r} is not KEY=VALUE")
        return
    if "." in key:
        section, key = key.split(".", 1)
    elif key in PARAMS:
        section = "params"
    elif key in SECTIONS["numerics"]:
        section = "numerics"
    elif key in SECTIONS["output"]:
        section = "output"
    elif key in SECTIONS["sweep"]:
        section = "sweep"
    else:
        problems.append(f"override key {key!r} is unknown")
        return
    if not cp.has_section(section):
        cp.add_section(section)
    # a fixed value replaces an axis of the same name and vice versa
    other = {"params": "axes", "axes": "params"}.get(section)
    if other and cp.has_section(other) and cp.has_option(other, key):
        cp.remove_option(other, key)
    cp.set(section, key, value)


def dump_config(spec, fmt="csv", out=None):
    """Config text that :func:`parse_config` turns back into ``spec``."""
    cp = _parser()
    cp["sweep"] = {"kind": spec.kind, "name": spec.name, "metrics": ", ".join(spec.metrics)}
    if spec.notes:
        cp["sweep"]["notes"] = "\n" + "\n".join(spec.notes)
    cp["params"] = {k: _fmt(v) for k, v in spec.params.items()}
    cp["axes"] = {ax.name: _format_axis(ax) for ax in spec.axes}
    cp["numerics"] = {"rel_tol": repr(float(spec.rel_tol)), "density": str(int(spec.density))}
    cp["output"] = {"format": fmt}
    if out:
        cp["output"]["path"] = out
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


# -- tables -----------------------------------------------------------------

def _cell(column, value):
    if isinstance(value, str):
        return value
    if column in _INTEGER_COLUMNS and math.isfinite(value) and float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def format_csv(result):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([_cell(c, v) for c, v in zip(result.columns, row)])
    return buf.getvalue()


def _json_value(column, value):
    if isinstance(value, str):
        return value
    if not math.isfinite(value):
        return repr(float(value))
    if column in _INTEGER_COLUMNS and float(value).is_integer():
        return int(value)
    return float(value)


def format_json(result):
    """JSON document with one table row per line; non-finite numbers become strings."""
    head = json.dumps({"metadata": result.metadata, "columns": list(result.columns)}, indent=1)
    rows = [
        json.dumps([_json_value(c, v) for c, v in zip(result.columns, row)])
        for row in result.rows
    ]
    return head[:-2] + ',\n "rows": [\n  ' + ",\n  ".join(rows) + "\n ]\n}\n"


def write_result(result, fmt, out):
    _emit(format_csv(result) if fmt == "csv" else format_json(result), out)
    if out and fmt == "csv":
        meta = Path(str(out) + ".meta.json")
        meta.write_text(json.dumps(result.metadata, indent=1) + "\n")


# -- commands ---------------------------------------------------------------

def _config_text(args):
    if args.config:
        try:
            return Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    if args.preset:
        return dump_config(preset(args.preset))
    raise ConfigError("give --config PATH or --preset NAME")


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(args):
    text = _config_text(args)
    overrides = list(args.override or [])
    if getattr(args, "slits", None) is not None:
        overrides.append(f"params.slits={args.slits}")
    if args.format:
        overrides.append(f"output.format={args.format}")
    if args.out:
        overrides.append(f"output.path={args.out}")
    return parse_config(text, overrides)


def _run_table(args, kinds):
    cfg = _load(args)
    if cfg.spec.kind not in kinds:
        raise ConfigError(f"this command needs sweep kind {' or '.join(kinds)}, got {cfg.spec.kind!r}")
    result = run_sweep(cfg.spec)
    write_result(result, cfg.format, cfg.out)
    failed = sum("nonconvergence" in row[-1] for row in result.rows)
    if failed:
        log.error("%d row(s) did not converge", failed)
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def cmd_pattern(args):
    return _run_table(args, ("pattern",))


def cmd_link(args):
    return _run_table(args, ("m_sweep", "freq_sweep", "custom"))


def cmd_map(args):
    return _run_table(args, ("misalign_map",))


def analyze(params):
    """Static figures of merit for one geometry, as (label, value, unit) rows.

    Needs ``a_nm`` and ``f_THz`` plus either ``d_mm`` or ``k0L`` and ``M``.
    Rows whose inputs are missing (e.g. M when it is a swept axis) read "n/a".
    """
    problems = [f"analyze needs parameter {k!r}" for k in ("a_nm", "f_THz") if k not in params]
    if "d_mm" not in params and not ("k0L" in params and "M" in params):
        problems.append("analyze needs d_mm, or k0L together with M")
    if problems:
        raise ConfigError(problems)
    wave = beam.Wave(params["f_THz"] * THZ)
    a = params["a_nm"] * NM
    M = params.get("M")
    L = params["k0L"] / wave.k0 if "k0L" in params else None
    d = params["d_mm"] * MM if "d_mm" in params else M * L
    if L is None and M is not None:
        L = d / M
    h = params["h_mm"] * MM if "h_mm" in params else None
    na = "n/a"

    # a one-slit-per-side probe carries the M-independent quantities
    probe = beam.SourceGeometry.from_half_length(a, d, 1)
    geom = beam.SourceGeometry.from_pitch(a, L, int(M)) if M is not None else None
    rows = [
        ("wavelength", wave.wavelength / NM, "nm"),
        ("k0L", wave.k0 * L if L else na, "rad"),
        ("V (nested floors)", beam.lobe_count(geom, wave) if geom else na, "lobes"),
        ("V (floor(4d/lambda))", beam.lobe_count_simplified(probe, wave), "lobes"),
    ]
    if geom is None:
        rows.append(("main-lobe width 2theta", na, "deg"))
    else:
        try:
            rows.append(("main-lobe width 2theta", math.degrees(beam.beamwidth(geom, wave)), "deg"))
        except BeamwidthSaturationError:
            rows.append(("main-lobe width 2theta", "main lobe fills half-space", ""))
    gm = beam.g_max(probe, wave)
    rows += [
        ("minimum M for h", beam.min_slits(wave, L, h, d) if L and h else na, "slits per side"),
        ("slit capacity N", probe.capacity, "slits per side"),
        ("g_max", gm, "rad"),
        ("P_max", gm / (ETA0 * math.pi * wave.k0), "W/m per (V/m)^2"),
    ]
    return rows


def format_report(rows):
    lines = []
    for label, value, unit in rows:
        if isinstance(value, float):
            value = f"{value:.10g}"
        lines.append(f"{label:24s} {value} {unit}".rstrip())
    return "\n".join(lines) + "\n"


def cmd_analyze(args):
    if args.config or args.preset:
        text = _config_text(args)
    else:
        text = ""
    problems = []
    cp = _read(text, args.override or [], problems)
    params = _params(cp, problems)
    if problems:
        raise ConfigError(problems)
    rows = analyze(params)
    if args.format == "json":
        text = json.dumps({label: value for label, value, _ in rows}, indent=1) + "\n"
    else:
        text = format_report(rows)
    _emit(text, args.out)
    return EXIT_OK


def cmd_preset_dump(args):
    if not args.preset:
        raise ConfigError("preset-dump needs --preset NAME")
    _emit(dump_config(preset(args.preset), args.format or "csv"), args.out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="slitvlc", description="Nanoslit-metasurface visible-light link simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH")
        p.add_argument("--preset", choices=PRESETS)
        p.add_argument("--out", metavar="PATH")
        p.add_argument("--format", choices=FORMATS)
        p.add_argument("--override", action="append", metavar="KEY=VALUE",
                       help="set one config key, e.g. D_over_d=inf or axes.M='values 10 100'")
        return p

    p = common(sub.add_parser("pattern", help="radiation pattern table"))
    p.add_argument("--slits", type=int, help="only 1 is supported: a single omnidirectional slit")
    p.set_defaults(func=cmd_pattern)
    common(sub.add_parser("link", help="received power and SIR table")).set_defaults(func=cmd_link)
    common(sub.add_parser("map", help="misaligned-receiver map")).set_defaults(func=cmd_map)
    common(sub.add_parser("analyze", help="lobe count, beamwidth, slit bounds, g_max")).set_defaults(
        func=cmd_analyze)
    common(sub.add_parser("preset-dump", help="write a preset as an editable config")).set_defaults(
        func=cmd_preset_dump)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except QuadratureError as exc:
        log.error("%s", exc)
        return EXIT_NONCONVERGENCE
    except ConfigError as exc:
        for problem in exc.problems:
            log.error("%s", problem)
        return EXIT_CONFIG
    except (configparser.Error, OSError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except SlitVLCError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
