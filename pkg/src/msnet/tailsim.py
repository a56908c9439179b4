"""Sampling the stationary maximal dater and measuring its tail."""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import stats

from .dist import DistributionSpec, MarkLaw
from .errors import BatchTooSmall, InsufficientTail, Unstable, ValidationError
from .estimate import gamma_estimate, saturated_daters
from .net import NetworkModel, SamplePath, TandemModel
from .streams import CHUNK, as_stream, map_chunks

FORWARD = "ForwardErgodic"
BACKWARD = "BackwardWindow"


@dataclass(frozen=True, eq=False)
class TailSample:
    values: np.ndarray
    horizon_policy: dict
    warmup: int
    seed: dict
    flagged: int = 0

    def __len__(self):
        return self.values.size

    def to_csv(self) -> str:
        return "Z\n" + "".join(f"{x:.17g}\n" for x in self.values)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    window: tuple
    points_used: int
    r_squared: float
    stderr: float
    intercept: float = 0.0

    @property
    def rate(self) -> float:
        return -self.slope

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "rate": self.rate,
            "window": list(self.window),
            "points_used": self.points_used,
            "r_squared": self.r_squared,
            "stderr": self.stderr,
            "intercept": self.intercept,
        }


def saturation_bound(model: NetworkModel, marks: MarkLaw, rng, n: int = 256,
                     replicas: int = 2000) -> tuple[float, float]:
    """Point estimate and conservative upper value (``+3`` stderr) of gamma.

    For tandems the constant is the largest mean service time and is
    returned exactly.
    """
    if isinstance(model, TandemModel):
        g = max(marks.means())
        return g, g
    g, se = gamma_estimate(model, marks, n, replicas, rng)
    return g, g + 3 * se


def _check_stable(gamma, arrival):
    a = arrival.mean()
    if not gamma < a:
        raise Unstable(f"gamma {gamma:.6g} is not below mean inter-arrival {a:.6g}")
    return a


def default_warmup(gamma: float, a: float) -> int:
    return 10 * math.ceil(1.0 / (a - gamma))


def forward_delays(model: TandemModel, marks: MarkLaw, arrival: DistributionSpec,
                   customers: int, rng) -> np.ndarray:
    """End-to-end delays ``D_K(k) - T_k`` of one long run started empty."""
    gen = as_stream(rng).generator()
    taus = np.asarray(arrival.sample(gen, customers - 1), dtype=float)
    sig = marks.sample(gen, customers)
    T = np.concatenate([[0.0], np.cumsum(taus)])
    return model.departure_times(T, sig)[:, -1] - T


def _backward_chunk(model, marks, arrival, gen, size, gamma_hi, W, n_max, n0):
    margin = 10.0 * gamma_hi
    out = np.empty(size)
    flagged = np.zeros(size, dtype=bool)
    idx = np.arange(size)
    # newest customer first: taus[:, k] = T_{-k} - T_{-k-1}
    taus = np.asarray(arrival.sample(gen, (size, n0)), dtype=float)
    sig = marks.sample(gen, (size, n0 + 1))
    n = n0
    while True:
        T = -np.concatenate([np.zeros((idx.size, 1)), np.cumsum(taus, axis=1)], axis=1)
        prof = model.backward_profile_arrays(T[:, ::-1], sig[:, ::-1, :])
        current = prof[:, n]
        settled = prof[:, n] == prof[:, n - W]
        certified = T[:, n] + n * gamma_hi < current - margin
        done = settled & certified
        if n >= n_max:
            flagged[idx[~done]] = True
            done[:] = True
        out[idx[done]] = current[done]
        keep = ~done
        if not keep.any():
            return out, flagged
        idx, taus, sig = idx[keep], taus[keep], sig[keep]
        ext = min(n, n_max - n)
        taus = np.concatenate([taus, np.asarray(arrival.sample(gen, (idx.size, ext)), dtype=float)], axis=1)
        sig = np.concatenate([sig, marks.sample(gen, (idx.size, ext))], axis=1)
        n += ext


def sample_stationary_daters(model: NetworkModel, marks: MarkLaw, arrival: DistributionSpec,
                             count: int, rng, policy: str = FORWARD, warmup: int | None = None,
                             window_settle: int = 200, n_max: int = 10**6,
                             workers=None) -> TailSample:
    """Draw samples from the law of the stationary maximal dater.

    ``ForwardErgodic`` (tandems only) runs one long stream and keeps the
    delays after ``warmup`` customers; the samples are serially dependent.
    ``BackwardWindow`` evaluates ``Z_[-n,0](N)`` on independent replicas,
    doubling ``n`` until the value has not moved over the last
    ``window_settle`` customers and the drift certificate
    ``T_{-n} - T_0 + n gamma_hi < Z - 10 gamma_hi`` holds.  Replicas that
    reach ``n_max`` first keep their last value and are counted in
    ``flagged``.
    """
    if count < 1:
        raise ValidationError("count must be positive")
    if marks.stations != model.K:
        raise ValidationError(f"mark law has {marks.stations} stations, model has {model.K}")
    stream = as_stream(rng)
    gamma, gamma_hi = saturation_bound(model, marks, stream.child(0))
    a = _check_stable(gamma, arrival)

    if policy == FORWARD:
        if not isinstance(model, TandemModel):
            raise ValidationError("ForwardErgodic sampling needs a tandem model")
        if warmup is None:
            warmup = default_warmup(gamma, a)
        delays = forward_delays(model, marks, arrival, warmup + count, stream.child(1))
        return TailSample(delays[warmup:], {"policy": FORWARD, "gamma": gamma},
                          int(warmup), stream.record())

    if policy == BACKWARD:
        W = int(window_settle)
        n0 = max(2 * W, 256)
        if n_max < n0:
            raise ValidationError(f"n_max must be at least {n0}")

        def run(gen, size):
            return _backward_chunk(model, marks, arrival, gen, size, gamma_hi, W, n_max, n0)

        parts = map_chunks(run, stream.child(1), count, workers, chunk=CHUNK)
        values = np.concatenate([p[0] for p in parts])
        flagged = int(sum(p[1].sum() for p in parts))
        pol = {"policy": BACKWARD, "gamma": gamma, "gamma_hi": gamma_hi,
               "window_settle": W, "n_max": n_max, "margin": 10.0 * gamma_hi}
        return TailSample(values, pol, 0, stream.record(), flagged)

    raise ValidationError(f"unknown policy {policy!r}")


def lower_bound_arrays(model: NetworkModel, arrivals, marks) -> np.ndarray:
    """``max_k Z_[-k,0](N0) + T_{-k} - T_0`` over the window (last customer is 0)."""
    arrivals = np.asarray(arrivals, dtype=float)
    sat = model.saturated_profile_arrays(marks)
    gaps = arrivals[..., ::-1] - arrivals[..., -1:]
    return np.max(sat + gaps, axis=-1)


def lower_bound_dater(model: NetworkModel, path: SamplePath) -> float:
    if path.n != 0:
        raise ValidationError("window must end at customer 0")
    return float(lower_bound_arrays(model, path.arrivals, path.marks))


def batch_walk(model: NetworkModel, arrivals, marks, L: int):
    """Services and increments of the batched single-server queue.

    Block ``j`` (``j = 0`` newest, covering customers ``-L+1..0``) has
    service ``s_hat[j] = Z(N0)`` of its customers.  ``steps[j-1]`` is
    ``s_hat[j] - (T_{-(j-1)L} - T_{-jL})``, the increment of the walk.
    """
    arrivals = np.asarray(arrivals, dtype=float)
    marks = np.asarray(marks, dtype=float)
    N = arrivals.shape[-1]
    if L < 1 or N % L:
        raise ValidationError(f"window length {N} is not a multiple of L={L}")
    k = N // L
    batch = marks.reshape(marks.shape[:-2] + (k, L, marks.shape[-1]))
    s_hat = model.saturated_arrays(batch)[..., ::-1]
    ends = arrivals[..., L - 1::L][..., ::-1]
    tau_hat = ends[..., :-1] - ends[..., 1:]
    return s_hat, s_hat[..., 1:] - tau_hat


def upper_bound_arrays(model: NetworkModel, arrivals, marks, L: int) -> np.ndarray:
    """``s_hat[0] + max_j (steps[0] + ... + steps[j-1])``, empty sum included."""
    s_hat, steps = batch_walk(model, arrivals, marks, L)
    walk = np.concatenate([np.zeros(steps.shape[:-1] + (1,)), np.cumsum(steps, axis=-1)], axis=-1)
    return s_hat[..., 0] + walk.max(axis=-1)


def check_batch(model: NetworkModel, marks: MarkLaw, arrival: DistributionSpec, L: int,
                replicas: int = 2000, rng=0) -> tuple[float, float]:
    """Raise :class:`BatchTooSmall` unless ``E[Z_[1,L](N0)] < L a``."""
    z = saturated_daters(model, marks, L, replicas, rng)
    m = float(z.mean())
    if not m < L * arrival.mean():
        raise BatchTooSmall(f"E[Z_[1,{L}](N0)] ~ {m:.6g} is not below L*a = {L * arrival.mean():.6g}")
    return m, L * arrival.mean()


def upper_bound_dater(model: NetworkModel, marks: MarkLaw, arrival: DistributionSpec, L: int,
                      path: SamplePath) -> float:
    if path.n != 0:
        raise ValidationError("window must end at customer 0")
    check_batch(model, marks, arrival, L)
    return float(upper_bound_arrays(model, path.arrivals, path.marks, L))


def sandwich(model: NetworkModel, marks: MarkLaw, arrival: DistributionSpec, L: int,
             batches: int, replicas: int, rng, workers=None) -> dict:
    """Lower bound, truncated dater and upper bound on coupled replicas."""
    check_batch(model, marks, arrival, L, rng=as_stream(rng).child(0))
    N = batches * L

    def run(gen, size):
        taus = np.asarray(arrival.sample(gen, (size, N - 1)), dtype=float)
        sig = marks.sample(gen, (size, N))
        T = np.concatenate([np.zeros((size, 1)), np.cumsum(taus, axis=1)], axis=1)
        T = T - T[:, -1:]
        lower = lower_bound_arrays(model, T, sig)
        z = model.last_activity_arrays(T, sig) - T[:, -1]
        upper = upper_bound_arrays(model, T, sig, L)
        _, steps = batch_walk(model, T, sig, L)
        return lower, z, upper, steps.sum(), steps.size

    parts = map_chunks(run, as_stream(rng).child(1), replicas, workers)
    lower = np.concatenate([p[0] for p in parts])
    z = np.concatenate([p[1] for p in parts])
    upper = np.concatenate([p[2] for p in parts])
    steps = sum(p[4] for p in parts)
    drift = float(sum(p[3] for p in parts) / steps) if steps else 0.0
    return {"lower": lower, "truncated": z, "upper": upper, "walk_drift": drift}


def _as_values(sample) -> np.ndarray:
    values = sample.values if isinstance(sample, TailSample) else sample
    return np.sort(np.asarray(values, dtype=float))


def ccdf_curve(sample) -> tuple[np.ndarray, np.ndarray]:
    """Sorted values and the log of the fraction of the sample at or above each."""
    x = _as_values(sample)
    N = x.size
    return x, np.log((N - np.arange(N)) / N)


def fit_tail_slope(sample, q_lo: float = 0.95, q_hi: float = 0.9999) -> SlopeFit:
    """Least-squares slope of the log empirical ccdf between two quantiles."""
    if not 0 <= q_lo < q_hi <= 1:
        raise ValidationError(f"need 0 <= q_lo < q_hi <= 1, got {q_lo}, {q_hi}")
    x, logc = ccdf_curve(sample)
    N = x.size
    i0, i1 = int(math.ceil(q_lo * N)), int(math.floor(q_hi * N))
    xs, ys = x[i0:i1], logc[i0:i1]
    if xs.size < 20:
        raise InsufficientTail(f"only {xs.size} points between quantiles {q_lo} and {q_hi}")
    if np.ptp(xs) == 0:
        raise InsufficientTail("sample is constant over the tail window")
    fit = stats.linregress(xs, ys)
    return SlopeFit(float(fit.slope), (q_lo, q_hi), int(xs.size), float(fit.rvalue**2),
                    float(fit.stderr), float(fit.intercept))
