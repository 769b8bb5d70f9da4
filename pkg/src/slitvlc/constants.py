"""Physical constants (SI)."""

SPEED_OF_LIGHT = 299792458.0  # m/s, exact
ETA0 = 376.730313668  # free-space wave impedance, ohm

THZ = 1e12
MM = 1e-3
NM = 1e-9
