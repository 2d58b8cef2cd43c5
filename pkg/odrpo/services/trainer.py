"""
Toy Policy-Gradient Trainer
===========================

Categorical bandit tasks trained with group-based advantage estimators.

Each task holds logits over its answer classes; a class earns a fixed
reward level, optionally scored by a noisy judge and aggregated by mode
vote. Two update modes are available:

- exact: theta += lr * p * (F - p . F) with F_c = E[f_level(c)(s)] from
  exact enumeration, the noise-free expected policy gradient.
- sampled: theta += lr * (1 / G) * sum_i A_i (e_{c_i} - p) over a sampled
  group, optionally batch-normalized across the step's tasks.

Randomness of step t on task j comes from seeds derived from (seed, t, j),
with class sampling and judge calls on separate streams.
"""

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.special import softmax

from config import Config
from odrpo.exceptions import InputError
from odrpo.models.rater import JudgeModel
from odrpo.models.reward import RolloutGroup
from odrpo.models.theory import EstimatorField, SimplexPoint
from odrpo.models.training import StepRecord, TaskSpec, TrainConfig, TrainTrace
from odrpo.services.estimators import batch_normalize, compute_advantages
from odrpo.services.objective import arcsin_objective, expected_field
from odrpo.services.rater_sim import mode_vote, sample_scores
from odrpo.utils.enumeration import derive_seed, derived_rng
from odrpo.utils.log_utils import log_message

SWEEP_COLUMNS = ['N', 'estimator', 'final_J', 'final_expected_reward']


@dataclass
class StepOutcome:
    theta: np.ndarray
    direction: np.ndarray
    advantages: np.ndarray
    weights: np.ndarray = None


def policy_probs(theta):
    """Exponential normalization of logits into a SimplexPoint."""
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1 or theta.size < 1 or not np.all(np.isfinite(theta)):
        raise InputError(f"logits must be a finite non-empty vector, got {theta}")
    return SimplexPoint(softmax(theta))


def level_probs(class_probs, task):
    """Level probabilities p_k: class probabilities summed by the level each class earns."""
    probs = class_probs.probs if isinstance(class_probs, SimplexPoint) else np.asarray(class_probs, dtype=float)
    levels = np.asarray(task.class_rewards) - 1
    return SimplexPoint(np.bincount(levels, weights=probs, minlength=task.scale.K))


def sample_rollouts(p, G, task, N=1, seed=None):
    """
    Sample G answer classes and score them.

    Args:
        p: class probabilities (SimplexPoint or vector)
        G (int): group size
        task (TaskSpec): class-to-level map and optional judge
        N (int): judge calls per rollout, aggregated by mode vote
        seed (int): classes use derive_seed(seed, 0), judge calls derive_seed(seed, 1)

    Returns:
        tuple: (RolloutGroup, class indices as a 1-based array)
    """
    probs = p.probs if isinstance(p, SimplexPoint) else np.asarray(p, dtype=float)
    if probs.size != task.num_classes:
        raise InputError(f"policy has {probs.size} classes, task has {task.num_classes}")
    if G < 2 or N < 1:
        raise InputError(f"need G >= 2 and N >= 1, got G={G}, N={N}")
    seed = Config.DEFAULT_SEED if seed is None else seed

    classes = derived_rng(seed, 0).choice(task.num_classes, size=G, p=probs) + 1
    true_levels = np.asarray(task.class_rewards)[classes - 1]
    if task.judge is None:
        return RolloutGroup(task.scale, tuple(int(k) for k in true_levels)), classes

    judge = JudgeModel(task.scale.K, tuple(float(k) for k in true_levels),
                       task.judge.noise_width, task.judge.outlier_rate)
    scores = sample_scores(judge, G, N, derive_seed(seed, 1)).scores
    voted = tuple(mode_vote(row) for row in scores)
    return RolloutGroup(task.scale, voted), classes


def build_field(config, task):
    return EstimatorField(config.estimator, task.scale, config.group_size, config.norm, config.weights)


def exact_step(theta, config, task):
    """
    One noise-free ascent step along the expected update field.

    Judge noise and batch normalization do not enter the expectation.

    Raises:
        TooLarge: when the enumeration of S_{G-1} exceeds the limit
    """
    p = policy_probs(theta)
    field_values = expected_field(build_field(config, task), level_probs(p, task))
    class_values = field_values[np.asarray(task.class_rewards) - 1]
    direction = p.probs * (class_values - p.probs @ class_values)
    return StepOutcome(np.asarray(theta, dtype=float) + config.learning_rate * direction,
                       direction, class_values, p.probs)


def _policy_direction(advantages, classes, probs):
    """(1 / G) sum_i A_i (e_{c_i} - p)."""
    counts = np.zeros_like(probs)
    np.add.at(counts, classes - 1, advantages)
    return (counts - advantages.sum() * probs) / advantages.size


def sampled_step(theta, config, task, seed=None):
    """One sampled policy-gradient step on a single task, without batch normalization."""
    outcome, _ = _sample_task(theta, config, task, seed)
    return outcome


def _sample_task(theta, config, task, seed):
    p = policy_probs(theta)
    group, classes = sample_rollouts(p, config.group_size, task, config.votes_per_rollout, seed)
    advantages = compute_advantages(group, config.estimator.value, config.norm, config.weights).values
    direction = _policy_direction(advantages, classes, p.probs)
    theta = np.asarray(theta, dtype=float)
    return StepOutcome(theta + config.learning_rate * direction, direction, advantages), classes


def _sampled_batch(thetas, batch, config, tasks, step):
    sampled = [(_sample_task(thetas[j], config, tasks[j], derive_seed(config.seed, step, j)), j)
               for j in batch]
    if not config.batch_norm:
        return [(outcome, j) for (outcome, _), j in sampled]

    sizes = [outcome.advantages.size for (outcome, _), _ in sampled]
    normalized = np.split(batch_normalize(np.concatenate([o.advantages for (o, _), _ in sampled])),
                          np.cumsum(sizes)[:-1])
    results = []
    for ((outcome, classes), j), advantages in zip(sampled, normalized):
        probs = policy_probs(thetas[j]).probs
        direction = _policy_direction(advantages, classes, probs)
        results.append((StepOutcome(thetas[j] + config.learning_rate * direction, direction, advantages), j))
    return results


def _batch_indices(step, batch_size, num_tasks):
    start = ((step - 1) * batch_size) % num_tasks
    return [(start + offset) % num_tasks for offset in range(batch_size)]


def _moments(outcomes):
    values = np.concatenate([o.advantages for o in outcomes])
    weights = [o.weights for o in outcomes]
    if all(w is not None for w in weights):
        weights = np.concatenate(weights) / len(outcomes)
        mean = float(weights @ values)
        return mean, float(np.sqrt(weights @ (values - mean) ** 2))
    return float(values.mean()), float(values.std())


def run(config, tasks):
    """
    Train every task for ``config.steps`` steps and record one trace row per step.

    Args:
        config (TrainConfig): estimator, mode and optimisation settings
        tasks (list): TaskSpec instances; a step updates ``batch_size`` of them in turn

    Returns:
        tuple: (TrainTrace, final logits per task)
    """
    if isinstance(tasks, TaskSpec):
        tasks = [tasks]
    if not tasks:
        raise InputError("training needs at least one task")
    batch_size = min(config.batch_size or len(tasks), len(tasks))
    if config.mode == 'exact' and config.batch_norm:
        log_message("WARNING: batch normalization is ignored in exact mode")
    if config.mode == 'exact' and any(task.judge is not None for task in tasks):
        log_message("WARNING: judge noise is ignored in exact mode")

    thetas = [np.zeros(task.num_classes) for task in tasks]
    trace = TrainTrace()
    for step in range(1, config.steps + 1):
        batch = _batch_indices(step, batch_size, len(tasks))
        if config.mode == 'exact':
            results = [(exact_step(thetas[j], config, tasks[j]), j) for j in batch]
        else:
            results = _sampled_batch(thetas, batch, config, tasks, step)

        for outcome, j in results:
            thetas[j] = outcome.theta
        outcomes = [outcome for outcome, _ in results]
        objectives, rewards = [], []
        for j in batch:
            levels = level_probs(policy_probs(thetas[j]), tasks[j])
            objectives.append(arcsin_objective(levels, tasks[j].scale))
            rewards.append(float(levels.probs @ tasks[j].scale.values))
        adv_mean, adv_std = _moments(outcomes)
        grad_norm = float(np.linalg.norm(np.concatenate([o.direction for o in outcomes])))
        trace.append(StepRecord(step, float(np.mean(objectives)), float(np.mean(rewards)),
                                adv_mean, adv_std, grad_norm))

        if config.log_every and step % config.log_every == 0:
            log_message(f"[{config.label}] step {step}/{config.steps}: J={trace.final.J:.6f} "
                        f"E[r]={trace.final.expected_reward:.4f}")
    return trace, thetas


def vote_denoising_error(judge, K, N, trials, seed=None):
    """
    Mean |mode_vote - true level| of a judge over ``trials`` rollouts at uniform true levels.

    Args:
        judge (JudgeSettings): noise settings
        K (int): score levels
        N (int): votes per rollout
        trials (int): rollouts averaged
        seed (int): levels use derive_seed(seed, 0), votes derive_seed(seed, N)
    """
    if trials < 2:
        raise InputError(f"trials must be >= 2, got {trials}")
    seed = Config.DEFAULT_SEED if seed is None else seed
    levels = derived_rng(seed, 0).integers(1, K + 1, size=trials)
    model = JudgeModel(K, tuple(float(k) for k in levels), judge.noise_width, judge.outlier_rate)
    scores = sample_scores(model, trials, N, derive_seed(seed, N)).scores
    voted = np.array([mode_vote(row) for row in scores])
    return float(np.mean(np.abs(voted - levels)))


def run_vote_sweep(n_values, variants, base_config, tasks):
    """
    Final objective and expected reward of sampled training per (N, estimator variant).

    Args:
        n_values: votes per rollout to sweep
        variants: (estimator, weights) pairs
        base_config (TrainConfig): settings shared by every run
        tasks (list): TaskSpec instances, normally with a judge

    Returns:
        pandas.DataFrame: columns N, estimator, final_J, final_expected_reward
    """
    rows = []
    for N in n_values:
        for estimator, weights in variants:
            config = TrainConfig(estimator=estimator, norm=base_config.norm, weights=weights,
                                 group_size=base_config.group_size,
                                 learning_rate=base_config.learning_rate, steps=base_config.steps,
                                 votes_per_rollout=int(N), batch_size=base_config.batch_size,
                                 batch_norm=base_config.batch_norm, mode='sampled',
                                 seed=base_config.seed, log_every=base_config.log_every)
            trace, _ = run(config, tasks)
            rows.append({'N': int(N), 'estimator': config.label,
                         'final_J': trace.final.J, 'final_expected_reward': trace.final.expected_reward})
            log_message(f"Vote sweep N={N} {config.label}: final J {trace.final.J:.6f}")
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
