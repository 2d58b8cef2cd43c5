from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from odrpo.exceptions import InputError
from odrpo.models.advantage import NormalizationKind, WeightScheme
from odrpo.models.reward import RewardScale


class EstimatorKind(Enum):
    GRPO = 'grpo'
    MAXRL = 'maxrl'
    ODRPO = 'odrpo'

    @classmethod
    def from_flag(cls, value):
        if isinstance(value, cls):
            return value
        for kind in cls:
            if kind.value == str(value).strip().lower():
                return kind
        raise InputError(f"unknown estimator '{value}' (expected grpo, maxrl or odrpo)")


@dataclass(frozen=True)
class LeaveOneOutStats:
    """Count vector s over reward levels for the other members of a group."""

    counts: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise InputError(f"leave-one-out counts must be non-negative: {counts}")
        object.__setattr__(self, 'counts', counts)

    @classmethod
    def zeros(cls, k):
        return cls((0,) * k)

    @property
    def n(self):
        return sum(self.counts)

    @property
    def K(self):
        return len(self.counts)

    def plus(self, k):
        """s + e_k with a 1-based level index."""
        counts = list(self.counts)
        counts[k - 1] += 1
        return LeaveOneOutStats(tuple(counts))

    def as_array(self):
        return np.asarray(self.counts, dtype=float)


@dataclass(frozen=True)
class EstimatorField:
    """Advantage function f_k(s) of one estimator on a fixed scale and group size."""

    kind: EstimatorKind
    scale: RewardScale
    M: int
    norm: NormalizationKind = NormalizationKind.STD_DEV
    weights: WeightScheme = WeightScheme.UNIT

    def __post_init__(self):
        if self.M < 2:
            raise InputError(f"group size M must be >= 2, got {self.M}")
        object.__setattr__(self, 'kind', EstimatorKind.from_flag(self.kind))
        object.__setattr__(self, 'norm', NormalizationKind.from_flag(self.norm))
        object.__setattr__(self, 'weights', WeightScheme.from_flag(self.weights))

    @property
    def K(self):
        return self.scale.K

    @property
    def label(self):
        if self.kind is EstimatorKind.ODRPO:
            return f"odrpo-{self.norm.value}-{self.weights.value}"
        return self.kind.value

    def __call__(self, k, s):
        from odrpo.services.theory import evaluate_field
        return evaluate_field(self, k, s)


@dataclass(frozen=True)
class CurlReport:
    estimator: str
    K: int
    M: int
    residuals: np.ndarray = field(repr=False)
    mac: float
    max_abs: float

    def to_dict(self):
        return {'estimator': self.estimator, 'K': self.K, 'M': self.M,
                'mac': self.mac, 'max_abs': self.max_abs}


@dataclass(frozen=True)
class SimplexPoint:
    """Level probabilities p_k with suffix sums P_m = sum_{j >= m} p_j."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size < 1:
            raise InputError("simplex point must be a non-empty vector")
        if np.any(probs < 0) or not np.isclose(probs.sum(), 1.0, rtol=0.0, atol=1e-9):
            raise InputError(f"probabilities must be non-negative and sum to 1: {probs}")
        object.__setattr__(self, 'probs', probs)

    @classmethod
    def vertex(cls, k, j):
        probs = np.zeros(k)
        probs[j - 1] = 1.0
        return cls(probs)

    @property
    def K(self):
        return len(self.probs)

    @property
    def suffix_sums(self):
        """(P_1, ..., P_K); P_1 is exactly 1."""
        suffix = np.cumsum(self.probs[::-1])[::-1]
        suffix[0] = 1.0
        return np.clip(suffix, 0.0, 1.0)
