"""Deterministic adaptive Simpson quadrature for oscillatory integrands.

The interval is first cut into ``min_panels`` uniform panels, then every
panel is bisected until its Simpson estimate stabilises. Refinement proceeds
level by level over all live panels at once, so the integrand is called with
numpy arrays and must be vectorised.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureError

# hard cap on live panels at one level; guards against runaway bisection
_MAX_LIVE_PANELS = 4_000_000


@dataclass(frozen=True)
class QuadSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    max_depth: int = 30
    min_panels: int = 1

    def __post_init__(self):
        problems = []
        if not self.rel_tol > 0:
            problems.append(f"rel_tol must be > 0, got {self.rel_tol}")
        if not self.abs_tol >= 0:
            problems.append(f"abs_tol must be >= 0, got {self.abs_tol}")
        if self.max_depth < 1:
            problems.append(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_panels < 1:
            problems.append(f"min_panels must be >= 1, got {self.min_panels}")
        if problems:
            raise ValueError("; ".join(problems))

    def with_panels(self, n):
        return QuadSpec(self.rel_tol, self.abs_tol, self.max_depth, max(int(n), 1))


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    panels: int
    evaluations: int


def oscillatory_panels(lobe_width, lo, hi, density=8):
    """Number of initial panels giving each oscillation lobe ``density`` panels.

    Returns ``ceil(density * (hi - lo) / lobe_width)``, at least 1. A relative
    guard of 1e-12 keeps exact multiples (e.g. 2.5e-3 / 1e-4) from rounding up.
    """
    if not lobe_width > 0:
        raise ValueError(f"lobe_width must be > 0, got {lobe_width}")
    if density < 1:
        raise ValueError(f"density must be >= 1, got {density}")
    n = density * (hi - lo) / lobe_width
    return max(1, math.ceil(n * (1.0 - 1e-12)))


def _eval(f, x):
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape).astype(float)
    return y


def integrate_full(f, lo, hi, spec=QuadSpec()):
    """Like :func:`integrate` but also reports the error bound and work done."""
    lo = float(lo)
    hi = float(hi)
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    span = hi - lo

    # Panel k at a level with denominator ``den`` covers [k/den, (k+1)/den] of
    # the interval. Abscissae come from that exact fraction, so a panel reached
    # by different refinement paths (or initial panel counts) sees the same
    # points and the same Simpson values.
    def at(num, den):
        x = lo + span * (num / den)
        return np.where(num == den, hi, x)

    den = spec.min_panels
    k = np.arange(den, dtype=np.int64)
    a, b = at(k, den), at(k + 1, den)
    m = at(2 * k + 1, 2 * den)
    fa, fm, fb = _eval(f, a), _eval(f, m), _eval(f, b)
    evaluations = 3 * k.size
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    if not np.all(np.isfinite(whole)):
        raise ValueError("integrand is not finite on the interval")

    accepted = []
    errors = []
    eps = np.finfo(float).eps

    for _ in range(spec.max_depth):
        lm, rm = at(4 * k + 1, 4 * den), at(4 * k + 3, 4 * den)
        flm, frm = _eval(f, lm), _eval(f, rm)
        evaluations += 2 * k.size
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole

        estimate = math.fsum(accepted) + float(np.sum(left + right))
        target = max(spec.abs_tol, spec.rel_tol * abs(estimate))
        local_tol = target * (b - a) / span
        roundoff = 50.0 * eps * (np.abs(left) + np.abs(right))
        done = (np.abs(delta) <= 15.0 * local_tol) | (np.abs(delta) <= roundoff)

        accepted.extend((left + right + delta / 15.0)[done].tolist())
        errors.extend((np.abs(delta[done]) / 15.0).tolist())

        keep = ~done
        if not np.any(keep):
            value = math.fsum(accepted)
            return QuadResult(value, math.fsum(errors), len(accepted), evaluations)

        k, a, m, b = k[keep], a[keep], m[keep], b[keep]
        fa, fm, fb = fa[keep], fm[keep], fb[keep]
        lm, rm, flm, frm = lm[keep], rm[keep], flm[keep], frm[keep]
        left, right = left[keep], right[keep]
        # children [a, m] (midpoint lm) and [m, b] (midpoint rm), in order
        k = np.stack([2 * k, 2 * k + 1], axis=1).ravel()
        den *= 2
        a = np.stack([a, m], axis=1).ravel()
        b = np.stack([m, b], axis=1).ravel()
        m = np.stack([lm, rm], axis=1).ravel()
        fa, fb, fm = (np.stack([fa, fm], axis=1).ravel(), np.stack([fm, fb], axis=1).ravel(),
                      np.stack([flm, frm], axis=1).ravel())
        whole = np.stack([left, right], axis=1).ravel()
        if k.size > _MAX_LIVE_PANELS or 4 * den > 2 ** 53:
            break

    value = math.fsum(accepted) + float(np.sum(whole))
    error = math.fsum(errors) + _pending_error(f, a, m, b, fa, fm, fb, whole)
    raise QuadratureError(
        f"adaptive Simpson did not converge within depth {spec.max_depth} "
        f"({k.size} panels unresolved)",
        estimate=value,
        error=error,
    )


def _pending_error(f, a, m, b, fa, fm, fb, whole):
    """Simpson bisection discrepancy over the unresolved panels."""
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    left = (m - a) / 6.0 * (fa + 4.0 * _eval(f, lm) + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * _eval(f, rm) + fb)
    return float(np.sum(np.abs(left + right - whole))) / 15.0


def integrate(f, lo, hi, spec=QuadSpec()):
    """Integrate a vectorised ``f`` over ``[lo, hi]``.

    The estimated error is kept below ``max(abs_tol, rel_tol * |result|)``;
    raises :class:`QuadratureError` when ``max_depth`` bisection levels are
    not enough.
    """
    return integrate_full(f, lo, hi, spec).value
