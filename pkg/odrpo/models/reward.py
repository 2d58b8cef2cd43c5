from dataclasses import dataclass, field

import numpy as np

from odrpo.exceptions import InputError


@dataclass(frozen=True)
class RewardScale:
    """Ordered discrete reward space R_1 < ... < R_K."""

    levels: tuple

    def __post_init__(self):
        levels = tuple(float(v) for v in self.levels)
        if len(levels) < 1:
            raise InputError("reward scale needs at least one level")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise InputError(f"reward levels must be strictly increasing: {levels}")
        object.__setattr__(self, 'levels', levels)

    @classmethod
    def from_k(cls, k):
        """Unit-spaced scale {1, ..., K}."""
        if int(k) < 1:
            raise InputError(f"K must be >= 1, got {k}")
        return cls(tuple(range(1, int(k) + 1)))

    @property
    def K(self):
        return len(self.levels)

    @property
    def values(self):
        return np.asarray(self.levels, dtype=float)

    def spacing(self, m):
        """Reward spacing R_m - R_{m-1} for 2 <= m <= K."""
        if not 2 <= m <= self.K:
            raise InputError(f"spacing index must lie in 2..{self.K}, got {m}")
        return self.levels[m - 1] - self.levels[m - 2]

    def bin_spacings(self):
        """(R_1, Delta_2, ..., Delta_K), so a reward equals the spacing-weighted indicator sum."""
        values = self.values
        return np.concatenate(([values[0]], np.diff(values)))

    def level_of(self, index):
        return self.levels[index - 1]

    def index_of(self, value):
        """1-based level index of an on-scale reward value."""
        matches = np.flatnonzero(np.isclose(self.values, float(value), rtol=0.0, atol=1e-9))
        if matches.size == 0:
            raise InputError(f"reward {value} is not a level of the scale {self.levels}")
        return int(matches[0]) + 1

    def shifted(self, c):
        return RewardScale(tuple(v + c for v in self.levels))

    def to_dict(self):
        return {'K': self.K, 'levels': list(self.levels)}


@dataclass(frozen=True)
class RolloutGroup:
    """One group of G rollout rewards, stored as level indices on a scale."""

    scale: RewardScale
    level_indices: tuple

    def __post_init__(self):
        indices = tuple(int(i) for i in self.level_indices)
        if len(indices) < 2:
            raise InputError(f"a rollout group needs G >= 2 rewards, got {len(indices)}")
        bad = [i for i in indices if not 1 <= i <= self.scale.K]
        if bad:
            raise InputError(f"level indices {bad} outside 1..{self.scale.K}")
        object.__setattr__(self, 'level_indices', indices)

    @classmethod
    def from_rewards(cls, scale, rewards):
        return cls(scale, tuple(scale.index_of(r) for r in rewards))

    @property
    def G(self):
        return len(self.level_indices)

    @property
    def indices(self):
        return np.asarray(self.level_indices, dtype=int)

    @property
    def rewards(self):
        return self.scale.values[self.indices - 1]

    def counts(self):
        """Number of rollouts at each level, length K."""
        return np.bincount(self.indices - 1, minlength=self.scale.K)

    def with_reward_index(self, rollout, index):
        indices = list(self.level_indices)
        indices[rollout] = index
        return RolloutGroup(self.scale, tuple(indices))

    def to_dict(self):
        return {'G': self.G, 'rewards': self.rewards.tolist(), 'level_indices': list(self.level_indices)}


@dataclass(frozen=True)
class OrdinalIndicatorMatrix:
    """G x K matrix whose entry (i, k) is 1 iff r_i >= R_k."""

    entries: np.ndarray = field(repr=False)
    scale: RewardScale = None

    @property
    def G(self):
        return self.entries.shape[0]

    @property
    def K(self):
        return self.entries.shape[1]


@dataclass(frozen=True)
class BinStats:
    bin_means: np.ndarray
    bin_sizes: np.ndarray
    degenerate_mask: np.ndarray

    @property
    def K(self):
        return len(self.bin_means)

    def to_dict(self):
        return {
            'bin_means': self.bin_means.tolist(),
            'bin_sizes': self.bin_sizes.tolist(),
            'degenerate_mask': self.degenerate_mask.tolist(),
        }
