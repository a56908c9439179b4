"""Service and inter-arrival laws.

Each law knows how to sample itself from a numpy ``Generator`` and exposes
its mean, its log moment generating function and the radius of convergence
of that function.  Divergence is returned as ``math.inf``, never as an
overflowed float.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.special import logsumexp

from .errors import ValidationError

INF = math.inf


class DistributionSpec:
    """Base class; concrete laws are frozen dataclasses below."""

    kind: str = ""

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def mgf_radius(self) -> float:
        raise NotImplementedError

    def log_mgf(self, theta: float) -> float:
        raise NotImplementedError

    def variance(self) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


def _check_finite(name, value):
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class Exponential(DistributionSpec):
    rate: float
    kind = "exponential"

    def __post_init__(self):
        _check_finite("rate", self.rate)
        if self.rate <= 0:
            raise ValidationError(f"rate must be positive, got {self.rate!r}")

    def sample(self, rng, size=None):
        return rng.exponential(1.0 / self.rate, size)

    def mean(self):
        return 1.0 / self.rate

    def variance(self):
        return 1.0 / self.rate**2

    def mgf_radius(self):
        return self.rate

    def log_mgf(self, theta):
        if theta >= self.rate:
            return INF
        return -math.log1p(-theta / self.rate)

    def to_dict(self):
        return {"kind": self.kind, "rate": self.rate}


@dataclass(frozen=True)
class Deterministic(DistributionSpec):
    value: float
    kind = "deterministic"

    def __post_init__(self):
        _check_finite("value", self.value)
        if self.value < 0:
            raise ValidationError(f"value must be nonnegative, got {self.value!r}")

    def sample(self, rng, size=None):
        if size is None:
            return float(self.value)
        return np.full(size, float(self.value))

    def mean(self):
        return float(self.value)

    def variance(self):
        return 0.0

    def mgf_radius(self):
        return INF

    def log_mgf(self, theta):
        return theta * self.value

    def to_dict(self):
        return {"kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class Uniform(DistributionSpec):
    lo: float
    hi: float
    kind = "uniform"

    def __post_init__(self):
        _check_finite("lo", self.lo)
        _check_finite("hi", self.hi)
        if self.lo < 0:
            raise ValidationError(f"lo must be nonnegative, got {self.lo!r}")
        if self.lo > self.hi:
            raise ValidationError(f"need lo <= hi, got lo={self.lo!r}, hi={self.hi!r}")

    def sample(self, rng, size=None):
        if self.lo == self.hi:
            return Deterministic(self.lo).sample(rng, size)
        return rng.uniform(self.lo, self.hi, size)

    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def variance(self):
        return (self.hi - self.lo) ** 2 / 12.0

    def mgf_radius(self):
        return INF

    def log_mgf(self, theta):
        u = theta * (self.hi - self.lo)
        if u == 0.0:
            return theta * self.lo
        # log((e^u - 1)/u), written to avoid overflow for large |u|
        if u > 0:
            tail = u + math.log(-math.expm1(-u)) - math.log(u)
        else:
            tail = math.log(math.expm1(u) / u)
        return theta * self.lo + tail

    def to_dict(self):
        return {"kind": self.kind, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class Gamma(DistributionSpec):
    shape: float
    rate: float
    kind = "gamma"

    def __post_init__(self):
        _check_finite("shape", self.shape)
        _check_finite("rate", self.rate)
        if self.shape <= 0:
            raise ValidationError(f"shape must be positive, got {self.shape!r}")
        if self.rate <= 0:
            raise ValidationError(f"rate must be positive, got {self.rate!r}")

    def sample(self, rng, size=None):
        return rng.gamma(self.shape, 1.0 / self.rate, size)

    def mean(self):
        return self.shape / self.rate

    def variance(self):
        return self.shape / self.rate**2

    def mgf_radius(self):
        return self.rate

    def log_mgf(self, theta):
        if theta >= self.rate:
            return INF
        return -self.shape * math.log1p(-theta / self.rate)

    def to_dict(self):
        return {"kind": self.kind, "shape": self.shape, "rate": self.rate}


@dataclass(frozen=True)
class Empirical(DistributionSpec):
    """Resampling from a fixed list of observations."""

    samples: tuple = field()
    kind = "empirical"

    def __post_init__(self):
        values = tuple(float(x) for x in self.samples)
        if not values:
            raise ValidationError("empirical samples must be nonempty")
        for x in values:
            _check_finite("sample", x)
            if x < 0:
                raise ValidationError(f"empirical samples must be nonnegative, got {x!r}")
        object.__setattr__(self, "samples", values)

    @property
    def _array(self):
        return np.asarray(self.samples)

    def sample(self, rng, size=None):
        return rng.choice(self._array, size)

    def mean(self):
        return float(np.mean(self._array))

    def variance(self):
        return float(np.var(self._array))

    def mgf_radius(self):
        return INF

    def log_mgf(self, theta):
        x = self._array
        return float(logsumexp(theta * x) - math.log(len(x)))

    def to_dict(self):
        return {"kind": self.kind, "samples": list(self.samples)}


_KINDS = {
    "exponential": (Exponential, ("rate",)),
    "deterministic": (Deterministic, ("value",)),
    "uniform": (Uniform, ("lo", "hi")),
    "gamma": (Gamma, ("shape", "rate")),
    "empirical": (Empirical, ("samples",)),
}


def from_dict(data: dict) -> DistributionSpec:
    """Build a law from its literal form, e.g. ``{"kind": "exponential", "rate": 2.0}``."""
    if not isinstance(data, dict) or "kind" not in data:
        raise ValidationError(f"distribution literal needs a 'kind' field: {data!r}")
    kind = str(data["kind"]).lower()
    if kind not in _KINDS:
        raise ValidationError(f"unknown distribution kind {kind!r}")
    cls, params = _KINDS[kind]
    extra = set(data) - set(params) - {"kind"}
    if extra:
        raise ValidationError(f"unexpected fields for {kind}: {sorted(extra)}")
    missing = [p for p in params if p not in data]
    if missing:
        raise ValidationError(f"missing fields for {kind}: {missing}")
    try:
        if kind == "empirical":
            return cls(tuple(data["samples"]))
        return cls(*(float(data[p]) for p in params))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad parameters for {kind}: {exc}") from exc


def sample(spec: DistributionSpec, rng, size=None):
    return spec.sample(rng, size)


def log_mgf(spec: DistributionSpec, theta: float) -> float:
    return spec.log_mgf(theta)


def mean(spec: DistributionSpec) -> float:
    return spec.mean()


def mgf_radius(spec: DistributionSpec) -> float:
    return spec.mgf_radius()


@dataclass(frozen=True)
class MarkLaw:
    """Joint law of the per-customer service vector across ``K`` stations.

    ``Common`` dependence draws one service time per customer and uses it at
    every station.
    """

    per_station: tuple
    dependence: str = "independent"

    def __post_init__(self):
        laws = tuple(self.per_station)
        if not laws:
            raise ValidationError("a mark law needs at least one station")
        for law in laws:
            if not isinstance(law, DistributionSpec):
                raise ValidationError(f"not a distribution: {law!r}")
        dep = self.dependence.lower()
        if dep not in ("independent", "common"):
            raise ValidationError(f"dependence must be independent or common, got {self.dependence!r}")
        if dep == "common" and any(law != laws[0] for law in laws):
            raise ValidationError("common dependence requires identical laws at every station")
        object.__setattr__(self, "per_station", laws)
        object.__setattr__(self, "dependence", dep)

    @classmethod
    def common(cls, law: DistributionSpec, stations: int) -> "MarkLaw":
        return cls((law,) * stations, "common")

    @classmethod
    def independent(cls, *laws: DistributionSpec) -> "MarkLaw":
        return cls(tuple(laws), "independent")

    @property
    def stations(self) -> int:
        return len(self.per_station)

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        """Return an array of service vectors with shape ``(*shape, K)``."""
        shape = (shape,) if np.isscalar(shape) else tuple(shape)
        if self.dependence == "common":
            col = np.asarray(self.per_station[0].sample(rng, shape), dtype=float)
            return np.repeat(col[..., None], self.stations, axis=-1)
        cols = [np.asarray(law.sample(rng, shape), dtype=float) for law in self.per_station]
        return np.stack(cols, axis=-1)

    def means(self) -> list[float]:
        return [law.mean() for law in self.per_station]

    def to_dict(self) -> dict:
        return {
            "dependence": self.dependence,
            "per_station": [law.to_dict() for law in self.per_station],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MarkLaw":
        dep = data.get("dependence", "independent")
        if "per_station" in data:
            laws = [from_dict(d) for d in data["per_station"]]
        elif "law" in data and "stations" in data:
            laws = [from_dict(data["law"])] * int(data["stations"])
        else:
            raise ValidationError("marks need 'per_station' or 'law' + 'stations'")
        return cls(tuple(laws), dep)
