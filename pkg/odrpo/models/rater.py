from dataclasses import dataclass, field

import numpy as np

from odrpo.exceptions import InputError


@dataclass(frozen=True)
class JudgeModel:
    """Synthetic stochastic auto-rater.

    Each call scores response i by a discretized logistic draw centred at its
    latent quality q_i with scale ``noise_width``; with probability
    ``outlier_rate`` the call instead returns a uniform score in 1..K.
    """

    K: int
    latent_qualities: tuple
    noise_width: float = 0.0
    outlier_rate: float = 0.0

    def __post_init__(self):
        if self.K < 1:
            raise InputError(f"judge needs K >= 1 score levels, got {self.K}")
        qualities = tuple(float(q) for q in self.latent_qualities)
        if any(not 1.0 <= q <= self.K for q in qualities):
            raise InputError(f"latent qualities must lie in [1, {self.K}]: {qualities}")
        if self.noise_width < 0:
            raise InputError(f"noise_width must be >= 0, got {self.noise_width}")
        if not 0.0 <= self.outlier_rate <= 1.0:
            raise InputError(f"outlier_rate must lie in [0, 1], got {self.outlier_rate}")
        object.__setattr__(self, 'latent_qualities', qualities)

    @property
    def is_deterministic(self):
        return self.noise_width == 0 and self.outlier_rate == 0

    def to_dict(self):
        return {'K': self.K, 'latent_qualities': list(self.latent_qualities),
                'noise_width': self.noise_width, 'outlier_rate': self.outlier_rate}


@dataclass(frozen=True)
class ScoreMatrix:
    """M responses x N rater calls, integer scores in 1..K."""

    scores: np.ndarray = field(repr=False)
    K: int = None

    def __post_init__(self):
        scores = np.asarray(self.scores)
        if scores.ndim != 2:
            raise InputError(f"score matrix must be 2-D, got shape {scores.shape}")
        if not np.all(np.equal(np.mod(scores, 1), 0)):
            raise InputError("scores must be integers")
        scores = scores.astype(int)
        if scores.size and scores.min() < 1:
            raise InputError("scores must be >= 1")
        if self.K is not None and scores.size and scores.max() > self.K:
            raise InputError(f"scores must lie in 1..{self.K}")
        object.__setattr__(self, 'scores', scores)

    @property
    def M(self):
        return self.scores.shape[0]

    @property
    def N(self):
        return self.scores.shape[1]


@dataclass(frozen=True)
class ConcordanceReport:
    W: float
    chi2: float
    dof: int
    p_value: float
    tie_correction: float

    def is_consistent(self, threshold):
        return self.W >= threshold

    def to_dict(self):
        return {'W': self.W, 'chi2': self.chi2, 'dof': self.dof,
                'p_value': self.p_value, 'tie_correction': self.tie_correction}
