"""Transmitter model: a (2M+1)-slit array on top of a flat LED.

Every slit is an omnidirectional line source with unit field amplitude
(1 V/m) in its immediate vicinity. All powers derived from these fields
therefore carry an implicit 1 (V/m)^2 scale.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .constants import SPEED_OF_LIGHT
from .errors import (
    BeamwidthSaturationError,
    FarZoneError,
    GeometryError,
    UnsupportedRegimeError,
)
from .quad import QuadSpec, integrate, oscillatory_panels
from .specfun import hankel0, hankel0_abs2

# |delta| below this uses the Taylor form of the Dirichlet kernel
_TAYLOR_THRESHOLD = 1e-8

VISIBLE_BAND = (400e12, 800e12)


def _floor(x):
    """floor() that tolerates representation error on exact integers."""
    return math.floor(x * (1.0 + 1e-12))


@dataclass(frozen=True)
class Wave:
    """Monochromatic excitation at frequency ``f`` (Hz)."""

    f: float

    def __post_init__(self):
        if not (math.isfinite(self.f) and self.f > 0):
            raise ValueError(f"frequency must be positive and finite, got {self.f}")

    @classmethod
    def visible(cls, f):
        lo, hi = VISIBLE_BAND
        if not lo <= f <= hi:
            raise ValueError(f"{f / 1e12:g} THz is outside the visible band 400..800 THz")
        return cls(f)

    @classmethod
    def from_wavelength(cls, wavelength):
        return cls(SPEED_OF_LIGHT / wavelength)

    @property
    def omega(self):
        return 2.0 * math.pi * self.f

    @property
    def k0(self):
        return self.omega / SPEED_OF_LIGHT

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.f


@dataclass(frozen=True)
class SourceGeometry:
    """Slit half-width ``a``, emitter half-length ``d = M*L``, pitch ``L``.

    Build with :meth:`from_half_length` (fixed emitter, pitch follows M) or
    :meth:`from_pitch` (fixed pitch, emitter grows with M).
    """

    a: float
    d: float
    M: int
    L: float

    def __post_init__(self):
        problems = []
        if not self.a > 0:
            problems.append(f"a must be > 0, got {self.a}")
        if not (isinstance(self.M, (int, np.integer)) and self.M >= 1):
            problems.append(f"M must be an integer >= 1, got {self.M!r}")
        if not self.L > 0:
            problems.append(f"L must be > 0, got {self.L}")
        if problems:
            raise GeometryError("; ".join(problems))
        if self.L < 2.0 * self.a * (1.0 - 1e-12):
            raise GeometryError(
                f"slits overlap: pitch L={self.L:g} m is below the slit width 2a={2 * self.a:g} m"
            )
        if abs(self.d - self.M * self.L) > 1e-12 * abs(self.d):
            raise GeometryError(f"d={self.d!r} must equal M*L={self.M * self.L!r}")
        if self.M > self.capacity:
            raise GeometryError(f"M={self.M} exceeds the slit capacity N={self.capacity}")

    @classmethod
    def from_half_length(cls, a, d, M):
        return cls(a=a, d=d, M=int(M), L=d / M)

    @classmethod
    def from_pitch(cls, a, L, M):
        return cls(a=a, d=M * L, M=int(M), L=L)

    @property
    def n_slits(self):
        return 2 * self.M + 1

    @property
    def capacity(self):
        """N = ceil((d - a) / 2a): slits that fit side by side in the aperture."""
        return max(math.ceil((self.d - self.a) / (2.0 * self.a) * (1.0 - 1e-12)), 0)


def array_factor(u, M):
    """sin((2M+1)u) / sin(u), evaluated stably near the poles u = w*pi.

    The argument is reduced to ``delta = u - w*pi`` with ``w`` the nearest
    integer; since 2M+1 is odd the ratio equals ``sin(N delta) / sin(delta)``,
    and a second-order Taylor form takes over for ``|delta| < 1e-8``.
    Accepts ``M = 0`` (a single slit, ratio 1).
    """
    n = 2 * int(M) + 1
    u = np.asarray(u, dtype=float)
    delta = u - np.round(u / math.pi) * math.pi
    small = np.abs(delta) < _TAYLOR_THRESHOLD
    safe = np.where(small, 1.0, delta)
    direct = np.sin(n * safe) / np.sin(safe)
    taylor = n * (1.0 - (n * n - 1.0) * delta * delta / 6.0)
    out = np.where(small, taylor, direct)
    return float(out) if out.ndim == 0 else out


def _check_angle(phi):
    arr = np.asarray(phi, dtype=float)
    if np.any((arr < 0) | (arr > math.pi)) or not np.all(np.isfinite(arr)):
        raise ValueError("angle must lie in [0, pi]")
    return arr


def pattern_scaled(phi, M, k0L):
    """G(phi) * |H0(k0 a)|^2, the array factor squared."""
    arr = _check_angle(phi)
    af = array_factor(0.5 * k0L * np.cos(arr), M)
    return af * af


@lru_cache(maxsize=256)
def _h0_abs2(k0a):
    return hankel0_abs2(k0a)


def normalization(geom, wave):
    """|H0(k0 a)|^2."""
    return _h0_abs2(wave.k0 * geom.a)


def radiation_pattern(geom, wave, phi):
    """Far-field intensity pattern G(phi), 0 <= phi <= pi."""
    return pattern_scaled(phi, geom.M, wave.k0 * geom.L) / normalization(geom, wave)


def near_field(geom, wave, x, y):
    """Complex E_z at (x, y) from the exact sum of slit Hankel waves.

    Each term is normalised by H0(k0 a) so the field is ~1 V/m next to a slit.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise GeometryError("near_field needs y > 0")
    k0 = wave.k0
    x, y = np.broadcast_arrays(x, y)
    total = np.zeros(x.shape, dtype=complex)
    for m in range(-geom.M, geom.M + 1):
        total += hankel0(k0 * np.hypot(x - m * geom.L, y))
    total /= hankel0(k0 * geom.a)
    return complex(total) if total.ndim == 0 else total


def far_field(geom, wave, r, phi):
    """Asymptotic E_z at polar (r, phi); requires k0 r > 100."""
    k0 = wave.k0
    r_arr = np.asarray(r, dtype=float)
    if np.any(k0 * r_arr <= 100.0):
        raise FarZoneError(f"far-field form needs k0*r > 100, got {np.min(k0 * r_arr):g}")
    arr = _check_angle(phi)
    radial = np.sqrt(2j / (math.pi * k0 * r_arr)) * np.exp(-1j * k0 * r_arr)
    out = radial / hankel0(k0 * geom.a) * array_factor(0.5 * k0 * geom.L * np.cos(arr), geom.M)
    return complex(out) if np.ndim(out) == 0 else out


def lobe_count(geom, wave):
    """Number of pattern maxima from the nested-floor expression.

    V = floor(2 floor((2M+1) L / lambda) * 2M / (2M+1)); the outer floor is
    done in integer arithmetic.
    """
    n = geom.n_slits
    inner = _floor(n * geom.L / wave.wavelength)
    return (2 * inner * 2 * geom.M) // n


def lobe_count_simplified(geom, wave):
    """The large-M shorthand floor(4 d / lambda)."""
    return _floor(4.0 * geom.d / wave.wavelength)


def beamwidth(geom, wave):
    """Full angular width 2*theta of the main lobe, in radians."""
    s = 2.0 * math.pi / (wave.k0 * geom.L * geom.n_slits)
    if 1.0 < s <= 1.0 + 1e-12:
        s = 1.0
    if s > 1.0:
        raise BeamwidthSaturationError(
            f"main lobe fills half-space (arcsin argument {s:.4g} > 1)"
        )
    return 2.0 * math.asin(s)


def min_slits(wave, L, h, d):
    """Smallest M >= 1 with 2M+1 > (2 pi / (k0 L)) (h / d)."""
    if not (L > 0 and h > 0 and d > 0):
        raise ValueError("L, h and d must all be positive")
    bound = 2.0 * math.pi / (wave.k0 * L) * (h / d)
    return max(1, math.floor((bound - 1.0) / 2.0) + 1)


def gmax_integrand(phi, a, d, k0):
    """sin^2(k0 d cos phi) / sin^2(k0 a cos phi), with the phi = pi/2 limit (d/a)^2."""
    c = np.cos(np.asarray(phi, dtype=float))
    x = k0 * a * c
    small = np.abs(x) < _TAYLOR_THRESHOLD
    safe = np.where(small, 1.0, x)
    direct = (np.sin(k0 * d * c) / np.sin(safe)) ** 2
    taylor = (d / a) ** 2 * (1.0 - (k0 * k0 * (d * d - a * a)) * c * c / 3.0)
    return np.where(small, taylor, direct)


@lru_cache(maxsize=512)
def _g_max(a, d, k0, rel_tol, density):
    panels = oscillatory_panels(math.pi / (k0 * d), 0.0, math.pi, density)
    spec = QuadSpec(rel_tol=rel_tol, min_panels=panels)
    flux = integrate(lambda p: gmax_integrand(p, a, d, k0), 0.0, math.pi, spec)
    return flux / _h0_abs2(k0 * a)


def aperture_flux(a, d, wave, rel_tol=1e-8, density=8):
    """g_max for slit half-width ``a`` and emitter half-length ``d``.

    Cached on (a, d, k0), since no other parameter enters.
    """
    k0a = wave.k0 * a
    if k0a >= math.pi:
        raise UnsupportedRegimeError(
            f"k0*a = {k0a:.4g} >= pi: the flux integrand has non-removable poles"
        )
    if not d >= a:
        raise GeometryError(f"need d >= a, got d={d}, a={a}")
    return _g_max(float(a), float(d), wave.k0, float(rel_tol), int(density))


def g_max(geom, wave, rel_tol=1e-8, density=8):
    """Total angular flux of the fully perforated (M = N, L = 2a) aperture."""
    return aperture_flux(geom.a, geom.d, wave, rel_tol, density)


def lambertian_pattern(gmax, phi):
    """Bare-LED reference pattern (gmax / 2) sin(phi), same total flux gmax."""
    if not gmax > 0:
        raise ValueError(f"gmax must be > 0, got {gmax}")
    arr = _check_angle(phi)
    out = 0.5 * gmax * np.sin(arr)
    return float(out) if out.ndim == 0 else out
