# Import all models for easy access
from .reward import RewardScale, RolloutGroup, OrdinalIndicatorMatrix, BinStats
from .advantage import NormalizationKind, WeightScheme, WeightVector, AdvantageVector
from .theory import EstimatorKind, LeaveOneOutStats, EstimatorField, CurlReport, SimplexPoint
from .rater import JudgeModel, ScoreMatrix, ConcordanceReport
from .training import JudgeSettings, TaskSpec, TrainConfig, StepRecord, TrainTrace

__all__ = [
    'RewardScale',
    'RolloutGroup',
    'OrdinalIndicatorMatrix',
    'BinStats',
    'NormalizationKind',
    'WeightScheme',
    'WeightVector',
    'AdvantageVector',
    'EstimatorKind',
    'LeaveOneOutStats',
    'EstimatorField',
    'CurlReport',
    'SimplexPoint',
    'JudgeModel',
    'ScoreMatrix',
    'ConcordanceReport',
    'JudgeSettings',
    'TaskSpec',
    'TrainConfig',
    'StepRecord',
    'TrainTrace'
]
