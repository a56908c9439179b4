"""Sign-change search for convex functions that may take the value +inf."""

from __future__ import annotations

import math

from .errors import NoSignChange


def _positive(v) -> bool:
    # +inf and nan (beyond a radius) both count as "positive"
    return not (v < 0)


def expand_bracket(g, start: float, theta_max: float, factor: float = 2.0):
    """Double ``theta`` from ``start`` until ``g(theta)`` is no longer negative.

    Returns ``(lo, hi)`` with ``g(lo) < 0 <= g(hi)``.  Raises
    :class:`NoSignChange` when ``g`` stays negative up to ``theta_max``.
    """
    lo, theta = 0.0, start
    while True:
        v = g(theta)
        if _positive(v):
            if lo == 0.0 and theta == start:
                # first probe already nonnegative; root (if any) lies in (0, start)
                return 0.0, theta
            return lo, theta
        if theta >= theta_max:
            raise NoSignChange(f"g < 0 on (0, {theta_max}]", theta_max=theta_max)
        lo, theta = theta, min(theta * factor, theta_max)


def bisect_sign_change(g, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200) -> tuple[float, float]:
    """Shrink ``[lo, hi]`` around the last point where ``g < 0``.

    ``g(lo) < 0`` (or ``lo == 0``) and ``g(hi) >= 0`` are assumed.  Returns
    the final bracket.
    """
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _positive(g(mid)):
            hi = mid
        else:
            lo = mid
    return lo, hi


def sup_negative(g, theta_max: float = math.inf, start: float = 1e-6, tol: float = 1e-12):
    """``sup{theta > 0 : g(theta) < 0}`` for convex ``g`` with ``g(0) = 0``.

    Returns the bracket ``(lo, hi)``.
    """
    lo, hi = expand_bracket(g, start, theta_max)
    return bisect_sign_change(g, lo, hi, tol)
