"""Monte Carlo estimation of the scaled log-MGF of the saturated dater, the
finite-window roots ``theta_n``, their limit ``theta*`` and the saturation
constant ``gamma``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .dist import DistributionSpec, MarkLaw
from .errors import NoSignChange, Unstable, ValidationError
from .net import NetworkModel
from .roots import bisect_sign_change, expand_bracket
from .streams import as_stream, map_chunks

ANALYTIC = "Analytic"
BISECT_ESTIMATE = "BisectEstimate"
TAIL_SLOPE = "TailSlope"

DIVERGENT_SHARE = 0.5


@dataclass(frozen=True)
class LambdaEstimate:
    """Estimate of ``(1/n) log E[exp(theta * Z_[1,n](N0))]``."""

    n: int
    theta: float
    value: float
    stderr: float
    samples: int
    divergent: bool = False
    ess: float = math.nan

    def row(self) -> list:
        return [self.n, self.theta, self.value, self.stderr, self.samples, int(self.divergent)]


@dataclass(frozen=True)
class ThetaResult:
    theta: float
    bracket: tuple
    method: str
    n_used: int | None = None
    seed: dict | None = None
    sequence: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = self.bracket
        if not lo <= self.theta <= hi:
            raise ValueError(f"theta {self.theta} outside bracket {self.bracket}")

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "bracket": list(self.bracket),
            "method": self.method,
            "n_used": self.n_used,
            "seed": self.seed,
            "sequence": self.sequence,
            **self.extra,
        }


def _check_marks(model, marks):
    if marks.stations != model.K:
        raise ValidationError(f"mark law has {marks.stations} stations, model has {model.K}")


def saturated_daters(model: NetworkModel, marks: MarkLaw, n: int, replicas: int,
                     rng, workers=None) -> np.ndarray:
    """Independent draws of ``Z_[1,n](N0)``.

    Replica ``r`` belongs to chunk ``r // CHUNK`` and is drawn from that
    chunk's stream, so the array does not depend on ``workers``.
    """
    if n < 1:
        raise ValidationError("window length n must be >= 1")
    _check_marks(model, marks)
    stream = as_stream(rng)

    def draw(gen, size):
        return model.saturated_arrays(marks.sample(gen, (size, n)))

    return np.concatenate(map_chunks(draw, stream, replicas, workers))


def lambda_from_daters(z: np.ndarray, n: int, theta: float) -> LambdaEstimate:
    """Empirical scaled log-MGF of a sample of saturated daters.

    The standard error comes from the delta method on the mean of
    ``exp(theta * z)``; the estimate is flagged divergent when a single
    replica carries more than half of the exponential mass.
    """
    z = np.asarray(z, dtype=float)
    R = z.size
    if R < 2:
        raise ValidationError("need at least two replicas")
    s = theta * z
    top = s.max()
    w = np.exp(s - top)
    total = w.sum()
    value = (top + math.log(total) - math.log(R)) / n
    stderr = float(np.std(w, ddof=1) / (math.sqrt(R) * (total / R))) / n
    divergent = bool(w.max() / total > DIVERGENT_SHARE)
    ess = float(total**2 / np.dot(w, w))
    return LambdaEstimate(n, float(theta), float(value), stderr, R, divergent, ess)


def lambda_zn(model: NetworkModel, marks: MarkLaw, n: int, theta: float,
              replicas: int = 100_000, rng=0, workers=None) -> LambdaEstimate:
    if replicas < 100:
        raise ValidationError("replicas must be >= 100")
    z = saturated_daters(model, marks, n, replicas, rng, workers)
    return lambda_from_daters(z, n, theta)


def lambda_grid(z: np.ndarray, n: int, thetas) -> list[LambdaEstimate]:
    return [lambda_from_daters(z, n, float(t)) for t in thetas]


def gamma_from_daters(z: np.ndarray, n: int) -> tuple[float, float]:
    x = np.asarray(z, dtype=float) / n
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def gamma_estimate(model: NetworkModel, marks: MarkLaw, n: int, replicas: int = 10_000,
                   rng=0, workers=None) -> tuple[float, float]:
    """Mean and standard error of ``Z_[1,n](N0) / n``.

    Biased upward for finite ``n``; the bias shrinks as ``n`` grows.
    """
    z = saturated_daters(model, marks, n, replicas, rng, workers)
    return gamma_from_daters(z, n)


def _root_bracket(g, tol, theta_max):
    lo, hi = expand_bracket(g, 1e-6, theta_max)
    return bisect_sign_change(g, lo, hi, tol)


@dataclass(frozen=True)
class WindowRoot:
    """Root of the finite-window criterion for one window length."""

    n: int
    theta: float
    lo: float
    hi: float
    ess: float
    evaluations: tuple = ()

    def to_dict(self) -> dict:
        return {"n": self.n, "theta": self.theta, "lo": self.lo, "hi": self.hi,
                "ess": self.ess, "skipped": False}


def theta_n_from_daters(z: np.ndarray, n: int, arrival: DistributionSpec, tol: float = 1e-3,
                        theta_max: float = 50.0, stderr_width: float = 3.0) -> WindowRoot:
    """Roots of ``Lambda_T(-theta) + lambda_hat(theta)`` for one sample of daters.

    ``lo`` and ``hi`` are the roots of the curves shifted by
    ``+/- stderr_width`` standard errors; ``ess`` is the effective sample
    size of the exponential weights at the central root.
    """
    a = arrival.mean()
    mean_z = float(np.mean(z))
    if not mean_z < n * a:
        raise Unstable(
            f"E[Z_[1,{n}](N0)] ~ {mean_z:.6g} is not below n*a = {n * a:.6g}")
    cache = {}

    def est(theta):
        if theta not in cache:
            cache[theta] = lambda_from_daters(z, n, theta)
        return cache[theta]

    def curve(shift):
        def g(theta):
            e = est(theta)
            if e.divergent:
                return math.inf
            return arrival.log_mgf(-theta) + e.value + shift * e.stderr
        return g

    try:
        center = _root_bracket(curve(0.0), tol, theta_max)
        upper = _root_bracket(curve(+stderr_width), tol, theta_max)
        lower = _root_bracket(curve(-stderr_width), tol, theta_max)
    except NoSignChange as exc:
        raise NoSignChange(f"theta_{n} >= {theta_max}: {exc}", theta_max=theta_max) from exc
    mid = 0.5 * (center[0] + center[1])
    lo = min(upper[0], center[0])
    hi = max(lower[1], center[1])
    ess = est(center[0]).ess
    return WindowRoot(n, mid, lo, hi, ess, tuple(est(t) for t in sorted(cache)))


def theta_n(model: NetworkModel, marks: MarkLaw, arrival: DistributionSpec, n: int,
            replicas: int = 100_000, rng=0, tol: float = 1e-3, theta_max: float = 50.0,
            workers=None) -> ThetaResult:
    """``theta_n = sup{theta > 0 : n Lambda_T(-theta) + log E[exp(theta Z_[1,n](N0))] < 0}``.

    One sample of daters is drawn and reused for every ``theta`` probed
    (common random numbers), so the empirical criterion is convex in
    ``theta``.  Divergent evaluations count as positive.
    """
    stream = as_stream(rng)
    z = saturated_daters(model, marks, n, replicas, stream, workers)
    root = theta_n_from_daters(z, n, arrival, tol, theta_max)
    return ThetaResult(root.theta, (root.lo, root.hi), BISECT_ESTIMATE, n, stream.record(),
                       extra={"ess": root.ess})


def richardson(n1: int, t1: float, n2: int, t2: float) -> float:
    """Eliminate a ``c/n`` term from two values of a sequence."""
    return (n2 * t2 - n1 * t1) / (n2 - n1)


def theta_star(model: NetworkModel, marks: MarkLaw, arrival: DistributionSpec,
               n_schedule=(1, 2, 4, 8, 16, 32, 64), replicas: int = 100_000, rng=0,
               tol: float = 1e-3, theta_max: float = 50.0, workers=None,
               gamma_replicas: int = 10_000, min_ess: float = 1000.0) -> ThetaResult:
    """Estimate ``theta*`` from the increasing sequence ``theta_n``.

    ``theta_n`` approaches ``theta*`` from below with a gap of order
    ``1/n``.  For large ``n`` the plain Monte Carlo log-MGF is carried by a
    handful of replicas; windows whose effective sample size at the
    root falls below ``min_ess`` are computed and reported but not used.

    From the last two usable windows ``n1 < n2``, the point estimate is the
    Richardson extrapolation of their roots.  The bracket runs from the
    lower root at ``n2`` to the extrapolation of the upper roots, widened by
    the gap to the second-order extrapolation when a third window is
    available.  Windows whose drift ``E[Z_[1,n](N0)] - n a`` is still
    nonnegative are skipped.
    """
    schedule = [int(n) for n in n_schedule]
    if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValidationError("n_schedule must be increasing and nonempty")
    stream = as_stream(rng)
    a = arrival.mean()
    g_hat, g_se = gamma_estimate(model, marks, schedule[-1], gamma_replicas,
                                 stream.child(0), workers)
    if not g_hat < a:
        raise Unstable(f"gamma estimate {g_hat:.6g} (+/- {g_se:.2g}) is not below a = {a:.6g}")

    sequence, usable = [], []
    for n in schedule:
        z = saturated_daters(model, marks, n, replicas, stream.child(1, n), workers)
        try:
            root = theta_n_from_daters(z, n, arrival, tol, theta_max)
        except Unstable:
            sequence.append({"n": n, "skipped": True, "reason": "drift"})
            continue
        entry = root.to_dict()
        entry["reliable"] = root.ess >= min_ess
        sequence.append(entry)
        if entry["reliable"]:
            usable.append(root)
    if not usable:
        raise Unstable("no window in the schedule has negative drift and enough effective samples")

    last = usable[-1]
    extra = {"gamma": g_hat, "gamma_stderr": g_se, "theta_n": last.theta, "min_ess": min_ess}
    theta, lo, hi = last.theta, last.lo, last.hi
    if len(usable) >= 2:
        prev = usable[-2]
        ext = richardson(prev.n, prev.theta, last.n, last.theta)
        ext_hi = richardson(prev.n, prev.hi, last.n, last.hi)
        # the gap between first- and second-order extrapolation estimates
        # the error left in the first-order one
        err = 0.0
        if len(usable) >= 3:
            older = usable[-3]
            ext_prev = richardson(older.n, older.theta, prev.n, prev.theta)
            # first-order values carry errors ~ 1/(n1 n2)
            e_prev, e_last = 1.0 / (older.n * prev.n), 1.0 / (prev.n * last.n)
            ext2 = (e_prev * ext - e_last * ext_prev) / (e_prev - e_last)
            err = abs(ext2 - ext)
            extra["extrapolated_second_order"] = ext2
        hi = max(hi, ext_hi + err, ext + err)
        theta = min(max(ext, lo), hi)
        extra["extrapolated"] = ext
        extra["extrapolation_error"] = err
    return ThetaResult(theta, (lo, hi), BISECT_ESTIMATE, last.n, stream.record(), sequence, extra)
