"""Receiver side: Poynting flux through (possibly misaligned) photodiode
apertures, signal-to-interference ratios and noise bookkeeping.

Powers are per unit length along z (W/m) and carry the implicit
1 (V/m)^2 slit-field scale of :mod:`slitvlc.beam`.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import beam
from .constants import ETA0
from .errors import GeometryError
from .quad import QuadSpec, integrate, oscillatory_panels

log = logging.getLogger(__name__)

INTERFERENCE_FLOOR = 1e-300
DEFAULT_DENSITY = 8


@dataclass(frozen=True)
class LinkGeometry:
    """Receiver at normal distance ``h`` with half-aperture ``b``.

    The interfering LED is an identical emitter centred at x = -2D.
    ``D = inf`` removes it.
    """

    h: float
    b: float
    D: float

    def __post_init__(self):
        problems = []
        if not (self.h > 0 and math.isfinite(self.h)):
            problems.append(f"h must be positive and finite, got {self.h}")
        if not (self.b > 0 and math.isfinite(self.b)):
            problems.append(f"b must be positive and finite, got {self.b}")
        if not self.D > 0:
            problems.append(f"D must be > 0, got {self.D}")
        if problems:
            raise GeometryError("; ".join(problems))

    def check_source(self, geom):
        """Enforce b <= d and D >= d against the paired emitter."""
        slack = 1.0 + 1e-12
        if self.b > geom.d * slack:
            raise GeometryError(f"receiver half-aperture b={self.b:g} exceeds d={geom.d:g}")
        if self.D * slack < geom.d:
            raise GeometryError(f"interferer offset D={self.D:g} is below d={geom.d:g}")


@dataclass(frozen=True)
class ReceiverPose:
    """Horizontal shift ``l`` (m) and tilt ``beta`` (rad) of the photodiode."""

    l: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if not abs(self.beta) < math.pi / 2:
            raise GeometryError(f"tilt must satisfy |beta| < pi/2, got {self.beta}")
        if not math.isfinite(self.l):
            raise GeometryError("shift l must be finite")

    @property
    def normal(self):
        return (math.sin(self.beta), math.cos(self.beta))


ALIGNED = ReceiverPose()


@dataclass(frozen=True)
class NoiseModel:
    """White noise of one-sided spectral density ``n`` (W/Hz) over half-bandwidth ``dw`` (rad/s)."""

    n: float = 0.0
    dw: float = 0.0

    def __post_init__(self):
        if not (self.n >= 0 and self.dw >= 0):
            raise ValueError("noise density and bandwidth must be >= 0")


def poynting_normal_density(geom, wave, source_x, px, py, normal, pattern=None):
    """Normal component of the far-zone Poynting vector G(phi)/(eta0 pi k0 r) r_hat.

    ``pattern`` maps phi to intensity and defaults to the metasurface pattern.
    """
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    if np.any(py <= 0):
        raise GeometryError("observation points must have y > 0")
    dx = px - source_x
    r = np.hypot(dx, py)
    if np.any(r == 0):
        raise GeometryError("observation point coincides with the source")
    phi = np.arctan2(py, dx)
    g = beam.radiation_pattern(geom, wave, phi) if pattern is None else pattern(phi)
    nx, ny = normal
    out = g / (ETA0 * math.pi * wave.k0 * r) * (dx * nx + py * ny) / r
    return float(out) if out.ndim == 0 else out


def _segment(pose, link):
    """x-extent and height profile of the tilted aperture y = h - (x + l) tan(beta)."""
    half = link.b * math.cos(pose.beta)
    lo, hi = -pose.l - half, -pose.l + half
    y_min = link.h - link.b * abs(math.sin(pose.beta))
    if y_min <= 0:
        raise GeometryError("tilted aperture reaches the emitter plane y <= 0")
    return lo, hi, y_min


def flux_through_segment(
    geom, wave, source_x, pose, link, pattern=None, lobe_angle=None,
    quad=QuadSpec(), density=DEFAULT_DENSITY,
):
    """Power (W/m) crossing the posed receiver aperture from a source at ``source_x``.

    The initial panelisation gives every pattern lobe ``density`` panels. A
    lobe spans lambda / ((2M+1) L) in cos(phi), hence at least that in phi
    and at least ``y_min`` times that along the aperture. Pass ``lobe_angle``
    to override it (e.g. ``pi`` for a smooth Lambertian pattern).
    """
    lo, hi, y_min = _segment(pose, link)
    tan_b = math.tan(pose.beta)
    cos_b = math.cos(pose.beta)
    normal = pose.normal

    def integrand(x):
        y = link.h - (x + pose.l) * tan_b
        return poynting_normal_density(geom, wave, source_x, x, y, normal, pattern) / cos_b

    if lobe_angle is None:
        lobe_angle = wave.wavelength / (geom.n_slits * geom.L)
    panels = oscillatory_panels(y_min * lobe_angle * cos_b, lo, hi, density)
    return integrate(integrand, lo, hi, quad.with_panels(max(panels, quad.min_panels)))


def _lambertian(geom, wave, quad, density):
    gm = beam.g_max(geom, wave, quad.rel_tol, density)
    return lambda phi: beam.lambertian_pattern(gm, phi)


def received_power(geom, wave, link, pose=ALIGNED, quad=QuadSpec(), density=DEFAULT_DENSITY):
    """Signal power P (W/m) from the receiver's own emitter at x = 0."""
    link.check_source(geom)
    return flux_through_segment(geom, wave, 0.0, pose, link, quad=quad, density=density)


def received_power_lambertian(geom, wave, link, pose=ALIGNED, quad=QuadSpec(),
                              density=DEFAULT_DENSITY):
    """P0: the same aperture flux with the bare-LED Lambertian pattern."""
    link.check_source(geom)
    return flux_through_segment(
        geom, wave, 0.0, pose, link, pattern=_lambertian(geom, wave, quad, density),
        lobe_angle=math.pi, quad=quad, density=density,
    )


def interference_power(geom, wave, link, pose=ALIGNED, pattern=None, lobe_angle=None,
                       quad=QuadSpec(), density=DEFAULT_DENSITY):
    """Power from the identical emitter at x = -2D through the same aperture."""
    if math.isinf(link.D):
        return 0.0
    return flux_through_segment(
        geom, wave, -2.0 * link.D, pose, link, pattern=pattern, lobe_angle=lobe_angle,
        quad=quad, density=density,
    )


def _ratio(signal, interference):
    if interference <= INTERFERENCE_FLOOR:
        log.debug("interference %.3g below floor; reporting infinite SIR", interference)
        return math.inf
    return signal / interference


def sir(geom, wave, link, pose=ALIGNED, pattern=None, quad=QuadSpec(),
        density=DEFAULT_DENSITY):
    """Signal-to-interference ratio with the metasurface.

    Returns ``math.inf`` (the infinite-SIR sentinel) when the interference
    flux is at or below :data:`INTERFERENCE_FLOOR`, including ``D = inf``.
    """
    link.check_source(geom)
    if pose == ALIGNED and not 2.0 * link.D - link.b > 0:
        raise GeometryError("need 2D - b > 0")
    lobe_angle = math.pi if pattern is not None else None
    signal = flux_through_segment(geom, wave, 0.0, pose, link, pattern, lobe_angle, quad, density)
    interference = interference_power(geom, wave, link, pose, pattern, lobe_angle, quad, density)
    return _ratio(signal, interference)


def sir0(link):
    """Closed-form SIR of two bare Lambertian LEDs, aligned receiver."""
    h, b, D = link.h, link.b, link.D
    if not 2.0 * D - b > 0:
        raise GeometryError("need 2D - b > 0 for the interferer window")
    if math.isinf(D):
        return math.inf
    far, near = 2.0 * D + b, 2.0 * D - b
    f_far, f_near = far / math.hypot(h, far), near / math.hypot(h, near)
    # f_far - f_near without cancellation: (f_far^2 - f_near^2) / (f_far + f_near)
    squares = h * h * (far - near) * (far + near) / ((h * h + far * far) * (h * h + near * near))
    window = squares / (f_far + f_near)
    return 2.0 * b / (math.hypot(h, b) * window)


def sir0_posed(link, pose=ALIGNED, quad=QuadSpec()):
    """SIR of two bare Lambertian LEDs through a posed aperture, by quadrature.

    The Lambertian flux scale cancels in the ratio, so a unit pattern sin(phi)
    is integrated.
    """
    if pose == ALIGNED:
        return sir0(link)
    if math.isinf(link.D):
        return math.inf
    lo, hi, _ = _segment(pose, link)
    tan_b, cos_b = math.tan(pose.beta), math.cos(pose.beta)
    nx, ny = pose.normal

    def flux(source_x):
        def integrand(x):
            y = link.h - (x + pose.l) * tan_b
            dx = x - source_x
            r2 = dx * dx + y * y
            # sin(phi) / r * (r_hat . n) = y (dx nx + y ny) / r^3
            return y * (dx * nx + y * ny) / (r2 * np.sqrt(r2)) / cos_b
        return integrate(integrand, lo, hi, quad.with_panels(max(quad.min_panels, DEFAULT_DENSITY)))

    return _ratio(flux(0.0), flux(-2.0 * link.D))


def p_max(geom, wave, quad=QuadSpec(), density=DEFAULT_DENSITY):
    """Total bare-LED power g_max / (eta0 pi k0), W/m."""
    return beam.g_max(geom, wave, quad.rel_tol, density) / (ETA0 * math.pi * wave.k0)


def noise_power(nm):
    """P_n = 2 n dw.

    ``n`` is in W/Hz while ``dw`` is an angular half-bandwidth in rad/s; the
    product is taken literally, which scales P_n by 2 pi relative to a Hz
    bandwidth. Ratios against a common P_n are unaffected.
    """
    return 2.0 * nm.n * nm.dw


def snr(power, nm):
    pn = noise_power(nm)
    return math.inf if pn == 0 else power / pn


def snr_enhancement(geom, wave, link, pose=ALIGNED, quad=QuadSpec(), density=DEFAULT_DENSITY):
    """SNR / SNR0 = P / P0; independent of the noise model. ``inf`` if P0 = 0."""
    p = received_power(geom, wave, link, pose, quad, density)
    p0 = received_power_lambertian(geom, wave, link, pose, quad, density)
    return math.inf if p0 == 0 else p / p0
