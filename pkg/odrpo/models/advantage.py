from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from odrpo.exceptions import InputError


class NormalizationKind(Enum):
    """Per-bin normalization N^{(k)}: bin standard deviation or bin mean."""

    STD_DEV = 'std'
    MEAN = 'mean'

    @classmethod
    def from_flag(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {'std': cls.STD_DEV, 'stddev': cls.STD_DEV, 'grpo': cls.STD_DEV,
                   'mean': cls.MEAN, 'maxrl': cls.MEAN}
        try:
            return aliases[str(value).strip().lower()]
        except KeyError:
            raise InputError(f"unknown normalization '{value}' (expected std or mean)") from None

    def normalizer(self, mu):
        """N(mu) for Bernoulli bin means; callers skip degenerate bins first."""
        mu = np.asarray(mu, dtype=float)
        if self is NormalizationKind.STD_DEV:
            return np.sqrt(mu * (1.0 - mu))
        return mu


class WeightScheme(Enum):
    UNIT = 'unit'
    GINI = 'gini'
    GINI_MEDIAN = 'gini-median'

    @classmethod
    def from_flag(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace('_', '-')
        if key in ('gini-med', 'ginimedian'):
            key = 'gini-median'
        for scheme in cls:
            if scheme.value == key:
                return scheme
        raise InputError(f"unknown weight scheme '{value}' (expected unit, gini or gini-median)")


@dataclass(frozen=True)
class WeightVector:
    weights: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        if np.any(weights < 0):
            raise InputError("bin weights must be non-negative")
        object.__setattr__(self, 'weights', weights)

    @classmethod
    def unit(cls, k):
        return cls(np.ones(k))

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True)
class AdvantageVector:
    """Per-rollout advantages, optionally with the G x K per-bin contributions."""

    values: np.ndarray
    per_bin: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def G(self):
        return len(self.values)

    def to_dict(self):
        data = {'values': self.values.tolist()}
        if self.per_bin is not None:
            data['per_bin'] = self.per_bin.tolist()
        return data
