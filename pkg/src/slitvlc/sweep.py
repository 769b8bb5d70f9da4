"""Declarative parameter sweeps and the figure presets.

Parameters are given in display units (``a_nm``, ``d_mm``, ``h_mm``,
``f_THz``, ``beta_deg``; ``b``, ``D`` and ``l`` as multiples of ``d``) and
converted to SI once per grid point.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, beam, link
from .constants import ETA0, MM, NM, SPEED_OF_LIGHT, THZ
from .errors import (
    BeamwidthSaturationError,
    ConfigError,
    GeometryError,
    QuadratureError,
    UnsupportedRegimeError,
)
from .quad import QuadSpec

KINDS = ("pattern", "m_sweep", "freq_sweep", "misalign_map", "custom")
METRICS = (
    "G", "G_scaled", "P_W_per_m", "P_over_Pmax", "SIR", "SIR0", "SIR_enh",
    "P_over_P0", "V", "beamwidth",
)
PARAMS = (
    "a_nm", "d_mm", "M", "k0L", "slits", "f_THz", "h_mm", "b_over_d",
    "D_over_d", "beta_deg", "l_over_d", "phi_rad",
)
# axis name -> output column; beta is reported in radians
COLUMN = {name: name for name in PARAMS}
COLUMN["beta_deg"] = "beta_rad"
SPACINGS = ("linear", "log")
THREADS_ENV = "SLITVLC_THREADS"

PRESETS = ("fig2a", "fig2b", "fig3", "fig4", "fig5_small", "fig5_large")


@dataclass(frozen=True)
class Axis:
    """A swept parameter: either a ``start..stop`` grid or explicit ``values``."""

    name: str
    start: float = None
    stop: float = None
    count: int = None
    spacing: str = "linear"
    values: tuple = None

    def problems(self):
        out = []
        if self.name not in PARAMS:
            out.append(f"unknown axis parameter {self.name!r}")
        if self.values is not None:
            if len(self.values) < 2:
                out.append(f"axis {self.name}: need at least 2 values")
            return out
        if self.count is None or self.count < 2:
            out.append(f"axis {self.name}: count must be >= 2")
        if self.spacing not in SPACINGS:
            out.append(f"axis {self.name}: spacing must be one of {SPACINGS}")
        if self.start is None or self.stop is None:
            out.append(f"axis {self.name}: start and stop are required")
        elif self.spacing == "log" and not (self.start > 0 and self.stop > 0):
            out.append(f"axis {self.name}: log spacing needs positive bounds")
        return out

    def points(self):
        if self.values is not None:
            pts = np.asarray(self.values, dtype=float)
        elif self.spacing == "log":
            pts = np.geomspace(self.start, self.stop, self.count)
        else:
            pts = np.linspace(self.start, self.stop, self.count)
        if self.name in ("M", "slits"):
            pts = np.round(pts)
        return pts

    def __len__(self):
        return len(self.values) if self.values is not None else self.count


@dataclass(frozen=True)
class SweepSpec:
    kind: str
    params: dict
    axes: tuple
    metrics: tuple
    rel_tol: float = 1e-8
    density: int = 8
    name: str = "custom"
    notes: tuple = ()

    def problems(self):
        out = []
        if self.kind not in KINDS:
            out.append(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not 1 <= len(self.axes) <= 2:
            out.append(f"need 1 or 2 axes, got {len(self.axes)}")
        names = [ax.name for ax in self.axes]
        if len(set(names)) != len(names):
            out.append("axes must be distinct")
        for ax in self.axes:
            out.extend(ax.problems())
        for key in self.params:
            if key not in PARAMS:
                out.append(f"unknown parameter {key!r}")
            elif key in names:
                out.append(f"parameter {key!r} is both fixed and swept")
        for m in self.metrics:
            if m not in METRICS:
                out.append(f"unknown metric {m!r}")
        if not self.metrics:
            out.append("at least one metric is required")
        if not self.rel_tol > 0:
            out.append("rel_tol must be > 0")
        if int(self.density) < 1:
            out.append("density must be >= 1")
        if self.kind == "pattern":
            if not names or names[-1] != "phi_rad":
                out.append("pattern sweeps need phi_rad as the inner (last) axis")
            extra = set(self.metrics) - {"G", "G_scaled"}
            if extra:
                out.append(f"pattern sweeps only provide G and G_scaled, not {sorted(extra)}")
        elif "phi_rad" in names or "phi_rad" in self.params:
            out.append("phi_rad is only meaningful for pattern sweeps")
        elif set(self.metrics) & {"G", "G_scaled"}:
            out.append("G and G_scaled are only available from pattern sweeps")
        if self.kind == "misalign_map" and {"beta_deg", "l_over_d"} - set(names):
            out.append("misalign_map sweeps need beta_deg and l_over_d axes")
        out.extend(_fixed_param_problems(self.params))
        out.extend(_missing_params(self.kind, set(self.params) | set(names)))
        return out

    def validate(self):
        probs = self.problems()
        if probs:
            raise ConfigError(probs)
        return self

    @property
    def columns(self):
        if self.kind == "pattern":
            return ("phi_rad", "k0L", "M") + tuple(self.metrics) + ("sentinel_reason",)
        return tuple(COLUMN[ax.name] for ax in self.axes) + tuple(self.metrics) + ("sentinel_reason",)


def _missing_params(kind, given):
    out = []
    need = ["a_nm", "f_THz"]
    if kind != "pattern" or "slits" not in given:
        need.append("M")
        if "k0L" not in given:
            need.append("d_mm")
    if kind != "pattern":
        need += ["h_mm", "b_over_d", "D_over_d"]
    for key in need:
        if key not in given:
            out.append(f"missing parameter {key!r}")
    return out


def _fixed_param_problems(params):
    out = []
    positive = ("a_nm", "d_mm", "f_THz", "h_mm", "b_over_d", "D_over_d", "k0L")
    for key in positive:
        if key in params and not params[key] > 0:
            out.append(f"{key} must be > 0, got {params[key]}")
    if "M" in params and not (float(params["M"]).is_integer() and params["M"] >= 1):
        out.append(f"M must be an integer >= 1, got {params['M']}")
    if "slits" in params and params["slits"] != 1:
        out.append("slits override only supports the single-slit case (slits = 1)")
    if "beta_deg" in params and not abs(params["beta_deg"]) < 90:
        out.append("beta_deg must satisfy |beta| < 90")
    if "f_THz" in params and math.isinf(params["f_THz"]):
        out.append("f_THz must be finite")
    return out


@dataclass
class SweepResult:
    spec: SweepSpec
    columns: tuple
    rows: list
    metadata: dict = field(default_factory=dict)

    def column(self, name):
        idx = self.columns.index(name)
        return np.array([row[idx] for row in self.rows], dtype=object if name == "sentinel_reason" else float)


def _si(p):
    """Convert a display-unit parameter dict to the model objects."""
    wave = beam.Wave(p["f_THz"] * THZ)
    a = p["a_nm"] * NM
    M = int(p["M"])
    if "k0L" in p:
        geom = beam.SourceGeometry.from_pitch(a, p["k0L"] / wave.k0, M)
    else:
        geom = beam.SourceGeometry.from_half_length(a, p["d_mm"] * MM, M)
    return geom, wave


def _link(p, geom):
    d = geom.d
    return link.LinkGeometry(p["h_mm"] * MM, p["b_over_d"] * d, p["D_over_d"] * d)


def _pose(p, geom):
    return link.ReceiverPose(
        l=p.get("l_over_d", 0.0) * geom.d,
        beta=math.radians(p.get("beta_deg", 0.0)),
    )


class _Point:
    """Lazily computed quantities at one grid point."""

    def __init__(self, p, quad, density):
        self.p = p
        self.quad = quad
        self.density = density
        self.geom, self.wave = _si(p)
        self._cache = {}

    def _get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def link(self):
        return self._get("link", lambda: _link(self.p, self.geom))

    @property
    def pose(self):
        return self._get("pose", lambda: _pose(self.p, self.geom))

    def power(self):
        return self._get("P", lambda: link.received_power(
            self.geom, self.wave, self.link, self.pose, self.quad, self.density))

    def p_max(self):
        return self._get("Pmax", lambda: link.p_max(self.geom, self.wave, self.quad, self.density))

    def sir(self):
        return self._get("SIR", lambda: link.sir(
            self.geom, self.wave, self.link, self.pose, quad=self.quad, density=self.density))

    def sir0(self):
        return self._get("SIR0", lambda: link.sir0_posed(self.link, self.pose, self.quad))

    def metric(self, name):
        if name == "P_W_per_m":
            return self.power()
        if name == "P_over_Pmax":
            return self.power() / self.p_max()
        if name == "SIR":
            return self.sir()
        if name == "SIR0":
            return self.sir0()
        if name == "SIR_enh":
            # with the interferer removed both ratios are infinite; keep the sentinel
            sir = self.sir()
            return math.inf if math.isinf(sir) else sir / self.sir0()
        if name == "P_over_P0":
            p0 = link.received_power_lambertian(
                self.geom, self.wave, self.link, self.pose, self.quad, self.density)
            return math.inf if p0 == 0 else self.power() / p0
        if name == "V":
            return float(beam.lobe_count(self.geom, self.wave))
        if name == "beamwidth":
            return beam.beamwidth(self.geom, self.wave)
        if name == "G":
            return beam.radiation_pattern(self.geom, self.wave, self.p["phi_rad"])
        if name == "G_scaled":
            return beam.pattern_scaled(self.p["phi_rad"], self.geom.M, self.wave.k0 * self.geom.L)
        raise KeyError(name)


_REASONS = (
    (GeometryError, "geometry"),
    (BeamwidthSaturationError, "beamwidth_saturated"),
    (UnsupportedRegimeError, "unsupported_regime"),
    (QuadratureError, "nonconvergence"),
    (ValueError, "invalid_point"),
)


def _reason(exc):
    for cls, code in _REASONS:
        if isinstance(exc, cls):
            return code
    raise exc


def _with_retry(point, name, quad):
    """One metric; a non-converged quadrature is retried once at double depth."""
    try:
        return point.metric(name)
    except QuadratureError:
        point.quad = QuadSpec(quad.rel_tol, quad.abs_tol, 2 * quad.max_depth, quad.min_panels)
        try:
            return point.metric(name)
        finally:
            point.quad = quad


def _evaluate(p, metrics, quad, density):
    """Metric values and sentinel reason codes at one grid point."""
    reasons = []
    values = [math.nan] * len(metrics)
    try:
        point = _Point(p, quad, density)
    except Exception as exc:  # noqa: BLE001 -- mapped to a reason code or re-raised
        return values, [_reason(exc)]
    for i, name in enumerate(metrics):
        try:
            values[i] = float(_with_retry(point, name, quad))
        except Exception as exc:  # noqa: BLE001
            code = _reason(exc)
        else:
            if not (math.isinf(values[i]) and name in ("SIR", "SIR_enh")):
                continue
            code = "infinite_sir"
        if code not in reasons:
            reasons.append(code)
    return values, reasons


def _grid(spec):
    pts = [ax.points() for ax in spec.axes]
    if len(pts) == 1:
        return [(v,) for v in pts[0]]
    return [(u, v) for u in pts[0] for v in pts[1]]


def _threads():
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return min(4, os.cpu_count() or 1)


def _run_pattern(spec):
    phis = spec.axes[-1].points()
    outer = spec.axes[0] if len(spec.axes) == 2 else None
    rows = []
    for val in (outer.points() if outer else [None]):
        p = dict(spec.params)
        if outer:
            p[outer.name] = float(val)
        try:
            k0L, M, values = _pattern_series(p, phis, spec.metrics)
            reason = ""
        except Exception as exc:  # noqa: BLE001
            reason = _reason(exc)
            k0L = float(p.get("k0L", math.nan))
            M = float(p.get("M", math.nan))
            values = {m: np.full(phis.shape, math.nan) for m in spec.metrics}
        for i, phi in enumerate(phis):
            rows.append([float(phi), k0L, M] + [float(values[m][i]) for m in spec.metrics] + [reason])
    return rows


def _pattern_series(p, phis, metrics):
    """(k0L, M, {metric: values}) over a whole phi grid for one series."""
    wave = beam.Wave(p["f_THz"] * THZ)
    if p.get("slits") == 1:
        M = 0
        k0L = float(p.get("k0L", math.nan))
        scaled = np.ones_like(phis)
    else:
        geom, _ = _si(p)
        M = geom.M
        k0L = wave.k0 * geom.L
        scaled = beam.pattern_scaled(phis, M, k0L)
    norm = beam.hankel0_abs2(wave.k0 * p["a_nm"] * NM)
    values = {"G_scaled": scaled, "G": scaled / norm}
    return k0L, float(M), {m: values[m] for m in metrics}


def run_sweep(spec, threads=None):
    """Evaluate every requested metric on the spec's grid.

    Rows are ordered outer axis slow, inner axis fast. Failures at a grid
    point become NaN values plus a reason code in ``sentinel_reason``; only
    an invalid spec raises (:class:`ConfigError`, listing all problems).
    """
    spec.validate()
    quad = QuadSpec(rel_tol=spec.rel_tol)
    if spec.kind == "pattern":
        rows = _run_pattern(spec)
    else:
        grid = _grid(spec)
        names = [ax.name for ax in spec.axes]

        def task(vals):
            p = dict(spec.params)
            p.update({n: float(v) for n, v in zip(names, vals)})
            return _evaluate(p, spec.metrics, quad, int(spec.density))

        workers = threads or _threads()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(task, grid))
        else:
            results = [task(v) for v in grid]
        rows = []
        for vals, (values, reasons) in zip(grid, results):
            axis_cols = [
                math.radians(v) if n == "beta_deg" else float(v) for n, v in zip(names, vals)
            ]
            rows.append(axis_cols + values + ["|".join(reasons)])
    return SweepResult(spec, spec.columns, rows, provenance(spec))


def provenance(spec):
    return {
        "library": "slitvlc",
        "version": __version__,
        "name": spec.name,
        "kind": spec.kind,
        "speed_of_light_m_per_s": SPEED_OF_LIGHT,
        "eta0_ohm": ETA0,
        "rel_tol": spec.rel_tol,
        "panels_per_lobe": int(spec.density),
        "assumed_defaults": list(spec.notes),
    }


_FIG_BASE = {"a_nm": 25.0, "d_mm": 2.5, "h_mm": 1000.0}
_LINK_METRICS = ("P_W_per_m", "P_over_Pmax", "SIR", "SIR0", "SIR_enh")
_MAP_METRICS = ("P_over_Pmax", "SIR_enh")


def preset(name):
    """SweepSpec reproducing one of the figure configurations."""
    pi = math.pi
    phi_axis = Axis("phi_rad", 0.0, pi, 4001)
    if name == "fig2a":
        return SweepSpec(
            "pattern", {"a_nm": 10.0, "f_THz": 600.0, "M": 1000},
            (Axis("k0L", values=(0.1 * pi, 0.5 * pi, pi)), phi_axis),
            ("G_scaled", "G"), name=name,
            notes=("k0L set {0.1pi, 0.5pi, pi} is an assumed default",
                   "a = 10 nm so that L >= 2a holds at k0L = 0.1pi; G_scaled does not depend on a",
                   "f = 600 THz (only enters the |H0(k0 a)|^2 normalisation)"),
        )
    if name == "fig2b":
        return SweepSpec(
            "pattern", {"a_nm": 10.0, "f_THz": 600.0, "k0L": 0.1 * pi},
            (Axis("M", values=(10, 100, 1000)), phi_axis),
            ("G_scaled", "G"), name=name,
            notes=("M set {10, 100, 1000} is an assumed default",
                   "a = 10 nm so that L >= 2a holds at k0L = 0.1pi; G_scaled does not depend on a",
                   "f = 600 THz (only enters the |H0(k0 a)|^2 normalisation)"),
        )
    if name == "fig3":
        return SweepSpec(
            "m_sweep", dict(_FIG_BASE, b_over_d=1.0, D_over_d=2.0),
            (Axis("f_THz", values=(450.0, 550.0, 650.0)),
             Axis("M", 1, 20000, 61, "log")),
            _LINK_METRICS, name=name,
            notes=("frequencies {450, 550, 650} THz stand in for red/green/blue",),
        )
    if name == "fig4":
        return SweepSpec(
            "freq_sweep", dict(_FIG_BASE, M=12000, D_over_d=2.0),
            (Axis("b_over_d", values=(1 / 35, 0.2, 0.5, 1.0)),
             Axis("f_THz", 400.0, 800.0, 33)),
            _LINK_METRICS, name=name,
            notes=("b set {d/35, 0.2d, 0.5d, d} is an assumed default",),
        )
    if name in ("fig5_small", "fig5_large"):
        b = 0.2 if name == "fig5_small" else 0.8
        return SweepSpec(
            "misalign_map", dict(_FIG_BASE, M=5000, D_over_d=2.0, f_THz=600.0, b_over_d=b),
            (Axis("beta_deg", -75.0, 75.0, 41), Axis("l_over_d", -2.0, 2.0, 41)),
            _MAP_METRICS, name=name,
            notes=("41 x 41 grid over beta in [-75, 75] deg and l/d in [-2, 2]",),
        )
    raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
