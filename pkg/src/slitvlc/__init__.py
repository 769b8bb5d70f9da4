"""Nanoslit-metasurface LED transmitter and photodiode receiver simulator
for visible-light links."""

__version__ = "0.1.0"

from .beam import (  # noqa: E402
    SourceGeometry,
    Wave,
    array_factor,
    beamwidth,
    far_field,
    g_max,
    lambertian_pattern,
    lobe_count,
    min_slits,
    near_field,
    radiation_pattern,
)
from .link import (  # noqa: E402
    LinkGeometry,
    NoiseModel,
    ReceiverPose,
    noise_power,
    p_max,
    received_power,
    received_power_lambertian,
    sir,
    sir0,
    snr_enhancement,
)
from .quad import QuadSpec, integrate  # noqa: E402
from .specfun import bessel_j0, bessel_y0, hankel0_abs2  # noqa: E402
from .sweep import SweepSpec, preset, run_sweep  # noqa: E402
