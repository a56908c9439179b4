"""Monotone-separable networks and their path functionals.

A network is described by the time of last activity ``X_[m,n](N)`` when it
starts empty and is fed only customers ``m..n``.  The maximal dater is
``Z_[m,n](N) = X_[m,n](N) - T_n``.

All array functions accept leading batch dimensions: arrivals have shape
``(..., N)`` and marks ``(..., N, K)``.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
import io

import numpy as np

from .dist import DistributionSpec, MarkLaw
from .errors import ValidationError
from .streams import as_stream


@dataclass(frozen=True, eq=False)
class SamplePath:
    """Customers ``m..n`` with arrival epochs and service vectors."""

    m: int
    arrivals: np.ndarray
    marks: np.ndarray
    seed: dict | None = field(default=None)

    def __post_init__(self):
        arrivals = np.array(self.arrivals, dtype=float)
        marks = np.array(self.marks, dtype=float)
        if arrivals.ndim != 1 or arrivals.size == 0:
            raise ValidationError("a sample path needs a nonempty 1-d arrival array")
        if marks.ndim == 1:
            marks = marks[:, None]
        if marks.ndim != 2 or marks.shape[0] != arrivals.size:
            raise ValidationError(
                f"marks must have one row per customer, got {marks.shape} for {arrivals.size} arrivals")
        if not np.all(np.isfinite(arrivals)) or not np.all(np.isfinite(marks)):
            raise ValidationError("arrivals and marks must be finite")
        if np.any(np.diff(arrivals) < 0):
            raise ValidationError("arrival epochs must be nondecreasing")
        if np.any(marks < 0):
            raise ValidationError("service times must be nonnegative")
        arrivals.flags.writeable = False
        marks.flags.writeable = False
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "arrivals", arrivals)
        object.__setattr__(self, "marks", marks)

    @property
    def n(self) -> int:
        return self.m + self.arrivals.size - 1

    @property
    def K(self) -> int:
        return self.marks.shape[1]

    def __len__(self):
        return self.arrivals.size

    def window(self, lo: int, hi: int) -> "SamplePath":
        """Restriction to customers ``lo..hi`` (inclusive, absolute indices)."""
        if not (self.m <= lo <= hi <= self.n):
            raise ValidationError(f"window [{lo},{hi}] outside [{self.m},{self.n}]")
        a, b = lo - self.m, hi - self.m + 1
        return SamplePath(lo, self.arrivals[a:b], self.marks[a:b], self.seed)

    def shifted(self, c: float) -> "SamplePath":
        return SamplePath(self.m, self.arrivals + c, self.marks, self.seed)

    def to_text(self) -> str:
        """Columnar CSV: ``index,T,sigma1..sigmaK``, 17 significant digits."""
        buf = io.StringIO()
        header = ["index", "T"] + [f"sigma{i + 1}" for i in range(self.K)]
        buf.write(",".join(header) + "\n")
        for i in range(len(self)):
            row = [str(self.m + i), f"{self.arrivals[i]:.17g}"]
            row += [f"{x:.17g}" for x in self.marks[i]]
            buf.write(",".join(row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str, seed=None) -> "SamplePath":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if len(lines) < 2:
            raise ValidationError("empty sample path file")
        rows = [ln.split(",") for ln in lines[1:]]
        index = [int(r[0]) for r in rows]
        if index != list(range(index[0], index[0] + len(index))):
            raise ValidationError("customer indices must be consecutive")
        arrivals = [float(r[1]) for r in rows]
        marks = [[float(x) for x in r[2:]] for r in rows]
        return cls(index[0], np.array(arrivals), np.array(marks), seed)


class NetworkModel(ABC):
    """A network fed by a marked point process.

    Subclasses provide :meth:`last_activity_arrays`.  The four structural
    properties (causality, external monotonicity, homogeneity,
    separability) are not enforced here; the test-suite checks them.
    """

    K: int = 1

    @abstractmethod
    def last_activity_arrays(self, arrivals: np.ndarray, marks: np.ndarray) -> np.ndarray:
        ...

    def saturated_arrays(self, marks: np.ndarray) -> np.ndarray:
        """``Z_[1,n](N0)`` with all arrivals at time zero."""
        marks = np.asarray(marks, dtype=float)
        return self.last_activity_arrays(np.zeros(marks.shape[:-1]), marks)

    def backward_profile_arrays(self, arrivals: np.ndarray, marks: np.ndarray) -> np.ndarray:
        """``Z_[n-k,n](N)`` for ``k = 0..N-1``, along the last axis.

        Generic O(N^2) evaluation; subclasses may override.
        """
        arrivals = np.asarray(arrivals, dtype=float)
        marks = np.asarray(marks, dtype=float)
        N = arrivals.shape[-1]
        out = np.empty(arrivals.shape)
        for k in range(N):
            lo = N - 1 - k
            x = self.last_activity_arrays(arrivals[..., lo:], marks[..., lo:, :])
            out[..., k] = x - arrivals[..., -1]
        return out

    def saturated_profile_arrays(self, marks: np.ndarray) -> np.ndarray:
        """``Z_[n-k,n](N0)`` for ``k = 0..N-1``."""
        marks = np.asarray(marks, dtype=float)
        return self.backward_profile_arrays(np.zeros(marks.shape[:-1]), marks)

    def _check_marks(self, marks):
        if marks.shape[-1] != self.K:
            raise ValidationError(f"model has K={self.K} stations, marks have {marks.shape[-1]}")
        if marks.shape[-2] == 0:
            raise ValidationError("empty window")


class TandemModel(NetworkModel):
    """``K`` single-server FIFO stations in series.

    Departure epochs follow the max-plus recursion

        D_i(k) = max(D_i(k-1), D_{i-1}(k)) + s_i(k),    D_0(k) = T_k,

    which we evaluate in unrolled form
    ``D_i(k) = S_i(k) + max_{j<=k} (D_{i-1}(j) - S_i(j-1))`` with prefix
    sums ``S_i``; each station is one cumulative maximum along the customer
    axis.
    """

    def __init__(self, K: int = 2):
        if int(K) < 1:
            raise ValidationError("a tandem needs K >= 1 stations")
        self.K = int(K)

    def __repr__(self):
        return f"TandemModel(K={self.K})"

    def __eq__(self, other):
        return type(other) is type(self) and other.K == self.K

    def __hash__(self):
        return hash((type(self).__name__, self.K))

    def departure_times(self, arrivals, marks) -> np.ndarray:
        """Departure epoch of every customer from every station, shape ``(..., N, K)``."""
        arrivals = np.asarray(arrivals, dtype=float)
        marks = np.asarray(marks, dtype=float)
        self._check_marks(marks)
        out = np.empty(marks.shape)
        prev = arrivals
        for i in range(self.K):
            s = np.cumsum(marks[..., i], axis=-1)
            before = s - marks[..., i]
            prev = s + np.maximum.accumulate(prev - before, axis=-1)
            out[..., i] = prev
        return out

    def last_activity_arrays(self, arrivals, marks):
        arrivals = np.asarray(arrivals, dtype=float)
        marks = np.asarray(marks, dtype=float)
        self._check_marks(marks)
        prev = arrivals
        for i in range(self.K):
            s = np.cumsum(marks[..., i], axis=-1)
            prev = s + np.maximum.accumulate(prev - (s - marks[..., i]), axis=-1)
        # the last customer leaves the last station last (FIFO)
        return prev[..., -1]

    def _longest_paths(self, marks):
        """Heaviest monotone lattice path from (customer j, station 1) to the end.

        Returned along the customer axis; computed by reverse cumulative maxima.
        """
        g = None
        for i in reversed(range(self.K)):
            sig = marks[..., i]
            r = np.cumsum(sig[..., ::-1], axis=-1)[..., ::-1]  # sum_{l>=j}
            if g is None:
                g = r
            else:
                after = r - sig  # sum_{l>j}
                inner = g - after
                g = r + np.maximum.accumulate(inner[..., ::-1], axis=-1)[..., ::-1]
        return g

    def backward_profile_arrays(self, arrivals, marks):
        arrivals = np.asarray(arrivals, dtype=float)
        marks = np.asarray(marks, dtype=float)
        self._check_marks(marks)
        g = self._longest_paths(marks)
        cand = arrivals - arrivals[..., -1:] + g
        return np.maximum.accumulate(cand[..., ::-1], axis=-1)

    def saturated_profile_arrays(self, marks):
        """``Z_[n-k,n](N0)`` for ``k = 0..N-1``."""
        marks = np.asarray(marks, dtype=float)
        self._check_marks(marks)
        g = self._longest_paths(marks)
        return np.maximum.accumulate(g[..., ::-1], axis=-1)


class SingleServerModel(TandemModel):
    def __init__(self):
        super().__init__(1)

    def __repr__(self):
        return "SingleServerModel()"


def _path_arrays(model, path):
    if not isinstance(path, SamplePath):
        raise ValidationError("expected a SamplePath")
    if path.K != model.K:
        raise ValidationError(f"path has K={path.K} marks per customer, model expects {model.K}")
    return path.arrivals, path.marks


def last_activity(model: NetworkModel, path: SamplePath) -> float:
    """``X_[m,n](N)``: last departure epoch for customers ``m..n``."""
    arrivals, marks = _path_arrays(model, path)
    return float(model.last_activity_arrays(arrivals, marks))


def maximal_dater(model: NetworkModel, path: SamplePath) -> float:
    arrivals, marks = _path_arrays(model, path)
    return float(model.last_activity_arrays(arrivals, marks) - arrivals[-1])


def maximal_dater_saturated(model: NetworkModel, marks) -> float:
    marks = np.asarray(marks, dtype=float)
    if marks.ndim == 1:
        marks = marks[:, None] if model.K == 1 else marks[None, :]
    if marks.ndim != 2 or marks.shape[0] == 0:
        raise ValidationError("need a nonempty list of service vectors")
    if np.any(marks < 0):
        raise ValidationError("service times must be nonnegative")
    return float(model.saturated_arrays(marks))


def stationary_dater_truncated(model: NetworkModel, path: SamplePath) -> float:
    """``Z_[-n,0](N)`` for a path whose window ends at customer 0."""
    if path.n != 0:
        raise ValidationError(f"window must end at index 0, ends at {path.n}")
    return maximal_dater(model, path)


def backward_profile(model: NetworkModel, path: SamplePath) -> np.ndarray:
    """``Z_[n-k,n](N)`` for every ``k`` in the window, nondecreasing in ``k``."""
    arrivals, marks = _path_arrays(model, path)
    return model.backward_profile_arrays(arrivals, marks)


def arrival_epochs(taus: np.ndarray, m: int, n: int) -> np.ndarray:
    """Epochs ``T_m..T_n`` from inter-arrivals, anchored at ``T_0 = 0`` when 0 is in the window."""
    T = np.concatenate([np.zeros(taus.shape[:-1] + (1,)), np.cumsum(taus, axis=-1)], axis=-1)
    anchor = -m if m <= 0 <= n else 0
    return T - T[..., anchor:anchor + 1]


def sample_path(model: NetworkModel, arrival: DistributionSpec, marks: MarkLaw,
                window: tuple[int, int], rng) -> SamplePath:
    """Draw i.i.d. inter-arrivals and marks for customers ``window[0]..window[1]``."""
    m, n = (int(w) for w in window)
    if n < m:
        raise ValidationError(f"empty window [{m},{n}]")
    if marks.stations != model.K:
        raise ValidationError(f"mark law has {marks.stations} stations, model has {model.K}")
    stream = as_stream(rng)
    gen = stream.generator()
    N = n - m + 1
    taus = np.asarray(arrival.sample(gen, N - 1), dtype=float)
    sig = marks.sample(gen, N)
    return SamplePath(m, arrival_epochs(taus, m, n), sig, stream.record())
