"""Closed-form decay rates and the rate-function cross-check."""

from __future__ import annotations

from dataclasses import dataclass, field
import json
import math

import numpy as np

from .dist import DistributionSpec, Exponential, MarkLaw
from .errors import DegenerateInput, NoSignChange, UnstableInput
from .roots import sup_negative

SINGLE_SERVER = "SingleServer"
TANDEM_INDEPENDENT = "TandemIndependent"
SERVICE_DOMINATED = "TandemCommon_ServiceDominated"
QUEUE_DOMINATED = "TandemCommon_QueueDominated"


@dataclass(frozen=True)
class AnalyticRate:
    theta_star: float
    regime: str
    components: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "theta_star": _json_float(self.theta_star),
            "regime": self.regime,
            "components": {k: _json_float(v) for k, v in self.components.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _json_float(x):
    return "inf" if x == math.inf else float(x)


def _check_stable(service_means, arrival: DistributionSpec):
    a = arrival.mean()
    worst = max(service_means)
    if not worst < a:
        raise UnstableInput(
            f"unstable: mean service {worst:.6g} is not below mean inter-arrival {a:.6g}")


def queue_exponent(service: DistributionSpec, arrival: DistributionSpec):
    """``theta -> log E[exp(theta * service)] + log E[exp(-theta * inter-arrival)]``."""
    return lambda theta: service.log_mgf(theta) + arrival.log_mgf(-theta)


def single_server_rate(service: DistributionSpec, arrival: DistributionSpec) -> AnalyticRate:
    """Decay rate of the stationary workload of a GI/GI/1 queue.

    Returns ``inf`` when the exponent never turns positive (service times
    bounded by inter-arrival times, so no queue ever builds).
    """
    _check_stable([service.mean()], arrival)
    if isinstance(service, Exponential) and isinstance(arrival, Exponential):
        theta = float(service.rate - arrival.rate)
    else:
        g = queue_exponent(service, arrival)
        radius = service.mgf_radius()
        theta_max = radius if math.isfinite(radius) else 1e6
        try:
            lo, hi = sup_negative(g, theta_max, start=min(1e-3, theta_max / 2), tol=1e-13)
        except NoSignChange:
            if math.isfinite(radius):
                # exponent stays finite and negative up to the radius
                theta = radius
            else:
                theta = math.inf
        else:
            theta = 0.5 * (lo + hi)
    return AnalyticRate(theta, SINGLE_SERVER, {"theta1": theta})


def tandem_rate_case1(s1: DistributionSpec, s2: DistributionSpec,
                      arrival: DistributionSpec) -> AnalyticRate:
    """Two stations with independent service sequences: the bottleneck rate."""
    _check_stable([s1.mean(), s2.mean()], arrival)
    t1 = single_server_rate(s1, arrival).theta_star
    t2 = single_server_rate(s2, arrival).theta_star
    return AnalyticRate(min(t1, t2), TANDEM_INDEPENDENT, {"theta1": t1, "theta2": t2})


def tandem_rate_case2(s: DistributionSpec, arrival: DistributionSpec,
                      stations: int = 2) -> AnalyticRate:
    """Stations sharing one service time per customer.

    The saturated dater is ``sum(s) + (stations - 1) * max(s)``, so its
    scaled log-MGF blows up at ``radius / stations``; with two stations this
    gives ``min(theta1, radius / 2)``.
    """
    _check_stable([s.mean()], arrival)
    t1 = single_server_rate(s, arrival).theta_star
    cap = s.mgf_radius() / stations
    regime = SERVICE_DOMINATED if cap <= t1 else QUEUE_DOMINATED
    return AnalyticRate(min(t1, cap), regime, {"theta1": t1, "delta_over_k": cap})


def rate_for(marks: MarkLaw, arrival: DistributionSpec) -> AnalyticRate | None:
    """Closed-form rate for a tandem described by ``marks``, if one applies."""
    K = marks.stations
    if K == 1:
        return single_server_rate(marks.per_station[0], arrival)
    if marks.dependence == "common":
        return tandem_rate_case2(marks.per_station[0], arrival, K)
    if K == 2:
        return tandem_rate_case1(*marks.per_station, arrival)
    _check_stable(marks.means(), arrival)
    thetas = {f"theta{i + 1}": single_server_rate(s, arrival).theta_star
              for i, s in enumerate(marks.per_station)}
    return AnalyticRate(min(thetas.values()), TANDEM_INDEPENDENT, thetas)


def _conjugate_ratio(lam_vals, thetas, alphas):
    # rows: alpha, cols: theta; theta = 0 contributes 0 to the sup
    vals = np.outer(alphas, thetas) - lam_vals[None, :]
    vals = np.where(np.isfinite(lam_vals)[None, :], vals, -np.inf)
    j = np.argmax(vals, axis=1)
    conj = np.maximum(vals[np.arange(len(alphas)), j], 0.0)
    ratio = conj / alphas
    i = int(np.argmin(ratio))
    return float(ratio[i]), i, int(j[i])


def rate_via_rate_function(lam, theta_probe_max: float, points: int = 400,
                           refinements: int = 3) -> float:
    """``inf_{alpha > 0} I(alpha) / alpha`` with ``I`` the Legendre conjugate of ``lam``.

    ``lam`` is a convex function with ``lam(0) = 0`` that may return
    ``inf``.  Both the conjugate and the infimum are taken over geometric
    grids of ``points`` values, then re-gridded around the optimum
    ``refinements`` times.  The alpha grid reaches far beyond the largest
    slope so that a rate set by the edge of the domain of ``lam`` is found.
    """
    if not theta_probe_max > 0:
        raise DegenerateInput("theta_probe_max must be positive")
    thetas = np.geomspace(theta_probe_max * 1e-4, theta_probe_max, points)
    lam_vals = np.array([lam(float(t)) for t in thetas], dtype=float)
    finite = np.isfinite(lam_vals)
    if not np.any(lam_vals[finite] < 0):
        raise DegenerateInput("lam is nonnegative everywhere probed: no positive rate")
    slopes = np.diff(lam_vals[finite]) / np.diff(thetas[finite])
    slopes = slopes[np.isfinite(slopes) & (slopes != 0)]
    rising = slopes[slopes > 0]
    if rising.size:
        a_lo, a_hi = rising.min() / 2, rising.max() * 2
    else:
        # lam falls all the way to the edge of its domain
        scale = np.abs(slopes).max() if slopes.size else 1.0
        a_lo, a_hi = scale / 2, scale * 2
    # when lam is still negative where it stops being finite, the infimum is
    # only approached as alpha grows without bound
    alphas = np.concatenate([np.geomspace(a_lo, a_hi, points),
                             np.geomspace(a_hi, a_hi * 1e9, points // 4)[1:]])
    best, i, j = _conjugate_ratio(lam_vals, thetas, alphas)

    for _ in range(refinements):
        t_lo = thetas[max(j - 3, 0)]
        t_hi = thetas[min(j + 3, len(thetas) - 1)]
        a_lo = alphas[max(i - 2, 0)]
        a_hi = alphas[min(i + 2, len(alphas) - 1)]
        fine_t = np.geomspace(t_lo, t_hi, points)
        fine_a = np.geomspace(a_lo, a_hi, points)
        fine_lam = np.array([lam(float(t)) for t in fine_t], dtype=float)
        # keep the coarse grid so the sup is never taken over a narrower set
        thetas = np.concatenate([thetas, fine_t])
        lam_vals = np.concatenate([lam_vals, fine_lam])
        order = np.argsort(thetas)
        thetas, lam_vals = thetas[order], lam_vals[order]
        # likewise for alpha: a coarse optimum may sit in the wrong place
        # while the conjugate is still under-resolved
        alphas = np.unique(np.concatenate([alphas, fine_a]))
        best, i, j = _conjugate_ratio(lam_vals, thetas, alphas)
    return best
