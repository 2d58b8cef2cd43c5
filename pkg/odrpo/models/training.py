from dataclasses import asdict, dataclass, field
from typing import Optional

import pandas as pd

from config import Config
from odrpo.exceptions import ConfigError
from odrpo.models.advantage import NormalizationKind, WeightScheme
from odrpo.models.reward import RewardScale
from odrpo.models.theory import EstimatorKind

TRACE_COLUMNS = ['step', 'J', 'expected_reward', 'adv_mean', 'adv_std', 'grad_norm']


@dataclass(frozen=True)
class JudgeSettings:
    """Noise of the judge scoring a task; q_i is the class's true level."""

    noise_width: float = Config.JUDGE_NOISE_WIDTH
    outlier_rate: float = Config.JUDGE_OUTLIER_RATE


@dataclass(frozen=True)
class TaskSpec:
    """One question: answer classes, the reward level each class earns, optional judge."""

    scale: RewardScale
    class_rewards: Optional[tuple] = None
    judge: Optional[JudgeSettings] = None

    def __post_init__(self):
        classes = self.class_rewards
        if classes is None:
            classes = tuple(range(1, self.scale.K + 1))
        classes = tuple(int(c) for c in classes)
        bad = [c for c in classes if not 1 <= c <= self.scale.K]
        if bad:
            raise ConfigError(f"class rewards {bad} are not levels of a {self.scale.K}-level scale")
        object.__setattr__(self, 'class_rewards', classes)

    @classmethod
    def identity(cls, k, judge=None):
        return cls(RewardScale.from_k(k), judge=judge)

    @property
    def num_classes(self):
        return len(self.class_rewards)


@dataclass(frozen=True)
class TrainConfig:
    estimator: EstimatorKind = EstimatorKind.ODRPO
    norm: NormalizationKind = NormalizationKind.STD_DEV
    weights: WeightScheme = WeightScheme.UNIT
    group_size: int = Config.GROUP_SIZE
    learning_rate: Optional[float] = None
    steps: int = Config.TRAIN_STEPS
    votes_per_rollout: int = 1
    batch_size: Optional[int] = None
    batch_norm: bool = False
    mode: str = 'exact'
    seed: int = Config.DEFAULT_SEED
    log_every: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'estimator', EstimatorKind.from_flag(self.estimator))
        object.__setattr__(self, 'norm', NormalizationKind.from_flag(self.norm))
        object.__setattr__(self, 'weights', WeightScheme.from_flag(self.weights))
        if self.mode not in ('exact', 'sampled'):
            raise ConfigError(f"mode must be 'exact' or 'sampled', got '{self.mode}'")
        if self.learning_rate is None:
            default_lr = Config.EXACT_LEARNING_RATE if self.mode == 'exact' else Config.SAMPLED_LEARNING_RATE
            object.__setattr__(self, 'learning_rate', default_lr)
        if self.group_size < 2:
            raise ConfigError(f"group size G must be >= 2, got {self.group_size}")
        if self.learning_rate < 0:
            raise ConfigError(f"learning rate must be >= 0, got {self.learning_rate}")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if self.votes_per_rollout < 1:
            raise ConfigError(f"votes per rollout N must be >= 1, got {self.votes_per_rollout}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError(f"batch size must be >= 1, got {self.batch_size}")

    @property
    def label(self):
        if self.estimator is EstimatorKind.ODRPO:
            return f"odrpo-{self.weights.value}"
        return self.estimator.value


@dataclass(frozen=True)
class StepRecord:
    step: int
    J: float
    expected_reward: float
    adv_mean: float
    adv_std: float
    grad_norm: float

    def to_dict(self):
        return asdict(self)


@dataclass
class TrainTrace:
    records: list = field(default_factory=list)

    def append(self, record):
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    @property
    def objective(self):
        return [r.J for r in self.records]

    @property
    def final(self):
        return self.records[-1]

    def to_frame(self):
        return pd.DataFrame([r.to_dict() for r in self.records], columns=TRACE_COLUMNS)
