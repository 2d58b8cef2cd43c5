"""
ODRPO Command Line
==================

Every experiment as a reproducible subcommand writing CSV:

    python run_odrpo.py advantage --input groups.csv --estimator odrpo --per-bin
    python run_odrpo.py curl-scan --k-range 2..5 --m-range 2..6
    python run_odrpo.py objective --M 512
    python run_odrpo.py rater-sim --datapoints 1000 --M 8 --N 16 --scale-k 10
    python run_odrpo.py train --mode exact --scale-k 3 --steps 200
    python run_odrpo.py vote-sweep --n-values 1,8,16,32

Flags may also come from a key=value file given by --config; flags passed
on the command line win. Exit codes: 0 success, 2 input error, 3 estimator
error, 4 resource guard.
"""

import argparse
import os
import sys

import numpy as np
import pandas as pd

from config import Config
from odrpo.exceptions import ConfigError, InputError, OdrpoError
from odrpo.models.advantage import WeightScheme
from odrpo.models.reward import RewardScale
from odrpo.models.theory import EstimatorKind
from odrpo.models.training import JudgeSettings, TaskSpec, TrainConfig
from odrpo.services.estimators import ESTIMATOR_NAMES, compute_advantages
from odrpo.services.objective import objective_table
from odrpo.services.rater_sim import simulate_study, summarize_study
from odrpo.services.reward_core import bin_stats, decompose
from odrpo.services.theory import mac_scan
from odrpo.services.trainer import run, run_vote_sweep
from odrpo.services.weighting import compute_weights
from odrpo.utils.file_utils import (parse_config_file, parse_float_list, parse_int_list,
                                    parse_int_range, read_reward_groups, write_csv)
from odrpo.utils.log_utils import log_message

NORM_CHOICES = ('std', 'mean')
WEIGHT_CHOICES = ('unit', 'gini', 'gini-median', 'gini-med')


class OdrpoArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that logs usage errors before exiting with status 2."""

    def error(self, message):
        log_message(f"ERROR {self.prog}: {message}")
        super().error(message)


def _default_path(name):
    return os.path.join(Config.OUTPUT_DIR, name)


def resolve_scale(args, default_k=None):
    """--scale-levels wins over --scale-k, which wins over the configured default."""
    if getattr(args, 'scale_levels', None):
        return RewardScale(tuple(parse_float_list(args.scale_levels)))
    if getattr(args, 'scale_k', None):
        return RewardScale.from_k(args.scale_k)
    return RewardScale.from_k(default_k or Config.DEFAULT_SCALE_K)


def provenance(args):
    settings = {key: value for key, value in vars(args).items()
                if key not in ('func', 'config') and value is not None}
    settings['seed'] = args.seed
    return settings


def cmd_advantage(args):
    scale = resolve_scale(args)
    if args.per_bin and args.estimator != 'odrpo':
        raise InputError("--per-bin is only available for --estimator odrpo")
    groups = read_reward_groups(args.input, scale)

    rows, weight_rows = [], []
    for group_id, group in groups:
        advantages = compute_advantages(group, args.estimator, args.norm, args.weights)
        for i in range(group.G):
            row = {'group_id': group_id, 'rollout': i + 1,
                   'reward': group.rewards[i], 'advantage': advantages.values[i]}
            if args.per_bin:
                for k in range(scale.K):
                    row[f"bin_{k + 1}"] = advantages.per_bin[i, k]
            rows.append(row)
        if args.weights_out:
            stats = bin_stats(decompose(group))
            weights = compute_weights(args.weights, stats, group).weights
            for k in range(scale.K):
                weight_rows.append({'group_id': group_id, 'bin': k + 1,
                                    'mu': stats.bin_means[k], 'weight': weights[k]})

    columns = ['group_id', 'rollout', 'reward', 'advantage']
    if args.per_bin:
        columns += [f"bin_{k}" for k in range(1, scale.K + 1)]
    out = args.out or _default_path('advantages.csv')
    write_csv(pd.DataFrame(rows, columns=columns), out, provenance(args))
    log_message(f"Advantages for {len(groups)} groups written to {out}")
    if args.weights_out:
        write_csv(pd.DataFrame(weight_rows, columns=['group_id', 'bin', 'mu', 'weight']),
                  args.weights_out, provenance(args))
        log_message(f"Bin weights written to {args.weights_out}")
    return 0


def cmd_curl_scan(args):
    k_range = parse_int_range(args.k_range)
    m_range = parse_int_range(args.m_range)
    scale_builder = RewardScale.from_k
    if args.scale_levels:
        fixed = resolve_scale(args)
        k_range, scale_builder = [fixed.K], (lambda K: fixed)

    reports = []
    for kind in EstimatorKind:
        reports.extend(mac_scan(kind, k_range, m_range, scale_builder,
                                args.norm, args.weights, args.threads))
    out = args.out or _default_path('curl_scan.csv')
    frame = pd.DataFrame([report.to_dict() for report in reports],
                         columns=['estimator', 'K', 'M', 'mac', 'max_abs'])
    write_csv(frame, out, provenance(args))
    log_message(f"Curl scan over {len(reports)} cells written to {out}")
    return 0


def cmd_objective(args):
    grid = parse_float_list(args.p_grid) if args.p_grid else np.linspace(0.0, 1.0, 21)
    frame = pd.DataFrame(objective_table(grid, args.M, args.norm),
                         columns=['P', 'beta', 'alpha', 'beta_minus_alpha', 'arcsin_grad'])
    out = args.out or _default_path('objective.csv')
    write_csv(frame, out, provenance(args))
    log_message(f"Objective table ({len(frame)} points, M={args.M}) written to {out}")
    return 0


def cmd_rater_sim(args):
    K = resolve_scale(args).K
    per_datapoint, per_response = simulate_study(
        args.datapoints, args.M, args.N, K, args.noise_width, args.outlier_rate,
        args.quality_spread, args.seed, args.threads)
    out = args.out or _default_path('rater_sim.csv')
    response_out = args.response_out or os.path.splitext(out)[0] + '_responses.csv'
    write_csv(per_datapoint, out, provenance(args))
    write_csv(per_response, response_out, provenance(args))

    summary = summarize_study(per_datapoint, per_response, args.threshold)
    log_message(f"Median Kendall's W: {summary['median_W']:.4f}")
    log_message(f"Datapoints below W={args.threshold:g}: {summary['fraction_below_threshold']:.1%}")
    log_message(f"Median response std {summary['median_std']:.4f}, "
                f"median excess kurtosis {summary['median_kurtosis']:.4f}")
    log_message(f"Rater study written to {out} and {response_out}")
    return 0


def _judge(args):
    if getattr(args, 'deterministic_judge', False):
        return JudgeSettings(0.0, 0.0)
    if getattr(args, 'judge', True):
        return JudgeSettings(args.noise_width, args.outlier_rate)
    return None


def _train_config(args, **overrides):
    settings = dict(estimator=getattr(args, 'estimator', 'odrpo'), norm=args.norm,
                    weights=getattr(args, 'weights', 'unit'),
                    group_size=args.G, learning_rate=args.lr, steps=args.steps,
                    votes_per_rollout=args.N, batch_size=args.batch_size,
                    batch_norm=args.batch_norm, mode=getattr(args, 'mode', 'sampled'), seed=args.seed,
                    log_every=args.log_every)
    settings.update(overrides)
    return TrainConfig(**settings)


def cmd_train(args):
    scale = resolve_scale(args)
    judge = _judge(args)
    tasks = [TaskSpec(scale, judge=judge) for _ in range(args.tasks)]
    config = _train_config(args)
    trace, _ = run(config, tasks)
    out = args.out or _default_path('train_trace.csv')
    write_csv(trace.to_frame(), out, provenance(args))
    log_message(f"[{config.label}] {len(trace)} steps, final J {trace.final.J:.6f}; trace written to {out}")
    return 0


def cmd_vote_sweep(args):
    scale = resolve_scale(args)
    tasks = [TaskSpec(scale, judge=_judge(args)) for _ in range(args.tasks)]
    variants = []
    for name in (part.strip() for part in args.estimators.split(',') if part.strip()):
        kind = EstimatorKind.from_flag(name)
        if kind is EstimatorKind.ODRPO:
            variants.extend((kind, WeightScheme.from_flag(w)) for w in args.weights_list.split(',') if w.strip())
        else:
            variants.append((kind, WeightScheme.UNIT))
    n_values = parse_int_list(args.n_values)
    if not n_values or min(n_values) < 1:
        raise ConfigError(f"--n-values must list integers >= 1, got '{args.n_values}'")

    base = _train_config(args, mode='sampled', estimator=EstimatorKind.ODRPO, weights=WeightScheme.UNIT)
    frame = run_vote_sweep(n_values, variants, base, tasks)
    out = args.out or _default_path('vote_sweep.csv')
    write_csv(frame, out, provenance(args))
    log_message(f"Vote sweep ({len(frame)} runs) written to {out}")
    return 0


def _add_shared(parser):
    parser.add_argument('--seed', type=int, default=Config.DEFAULT_SEED, help='64-bit base seed')
    parser.add_argument('--out', default=None, help='output CSV path')
    parser.add_argument('--threads', type=int, default=1, help='worker threads for independent cells')
    parser.add_argument('--scale-k', type=int, default=None, help='unit reward scale 1..K')
    parser.add_argument('--scale-levels', default=None, help='explicit comma-separated reward levels')
    parser.add_argument('--config', default=None, help='key=value file of flag defaults')


def _add_estimator_flags(parser, estimators):
    parser.add_argument('--estimator', choices=estimators, default='odrpo')
    parser.add_argument('--norm', choices=NORM_CHOICES, default='std')
    parser.add_argument('--weights', choices=WEIGHT_CHOICES, default='unit')


def _add_judge_flags(parser):
    parser.add_argument('--noise-width', type=float, default=Config.JUDGE_NOISE_WIDTH)
    parser.add_argument('--outlier-rate', type=float, default=Config.JUDGE_OUTLIER_RATE)


def _add_training_flags(parser, mode):
    parser.add_argument('--G', type=int, default=Config.GROUP_SIZE, help='rollouts per group')
    parser.add_argument('--lr', type=float, default=None, help='learning rate (mode default when omitted)')
    parser.add_argument('--steps', type=int, default=Config.TRAIN_STEPS)
    parser.add_argument('--N', type=int, default=1, help='judge votes per rollout')
    parser.add_argument('--batch-size', type=int, default=None, help='tasks per step (all by default)')
    parser.add_argument('--batch-norm', action='store_true')
    parser.add_argument('--tasks', type=int, default=1, help='number of identity tasks')
    parser.add_argument('--log-every', type=int, default=0)
    if mode:
        parser.add_argument('--mode', choices=('exact', 'sampled'), default=mode)


def build_parser():
    parser = OdrpoArgumentParser(prog='odrpo', description='Ordinal decomposition advantage experiments')
    subparsers = parser.add_subparsers(dest='command', required=True)
    parser.subcommands = {}

    def add(name, func, help_text):
        sub = subparsers.add_parser(name, help=help_text)
        _add_shared(sub)
        sub.set_defaults(func=func)
        parser.subcommands[name] = sub
        return sub

    sub = add('advantage', cmd_advantage, 'advantages of reward groups read from CSV')
    sub.add_argument('--input', required=True, help="CSV with header 'group_id,r_1,...,r_G'")
    _add_estimator_flags(sub, ESTIMATOR_NAMES)
    sub.add_argument('--per-bin', action='store_true', help='add bin_1..bin_K contribution columns')
    sub.add_argument('--weights-out', default=None, help='CSV of per-bin means and weights')

    sub = add('curl-scan', cmd_curl_scan, 'mean absolute curl of GRPO, MaxRL and ODRPO fields')
    sub.add_argument('--k-range', default='2..5')
    sub.add_argument('--m-range', default='2..6')
    sub.add_argument('--norm', choices=NORM_CHOICES, default='std')
    sub.add_argument('--weights', choices=WEIGHT_CHOICES, default='unit')

    sub = add('objective', cmd_objective, 'binomial expectations beta(P), alpha(P) against the arcsin derivative')
    sub.add_argument('--M', type=int, default=Config.GROUP_SIZE)
    sub.add_argument('--p-grid', default=None, help='comma-separated P values (0, 0.05, ..., 1 by default)')
    sub.add_argument('--norm', choices=NORM_CHOICES, default='std')

    sub = add('rater-sim', cmd_rater_sim, 'synthetic judge consistency study')
    sub.add_argument('--datapoints', type=int, default=1000)
    sub.add_argument('--M', type=int, default=8, help='responses per datapoint')
    sub.add_argument('--N', type=int, default=16, help='judge calls per response')
    _add_judge_flags(sub)
    sub.add_argument('--quality-spread', type=float, default=Config.JUDGE_QUALITY_SPREAD)
    sub.add_argument('--threshold', type=float, default=Config.CONSISTENCY_THRESHOLD)
    sub.add_argument('--response-out', default=None, help='per-response statistics CSV')

    sub = add('train', cmd_train, 'toy policy-gradient training trace')
    _add_estimator_flags(sub, [kind.value for kind in EstimatorKind])
    _add_training_flags(sub, 'exact')
    sub.add_argument('--judge', action='store_true', help='score rollouts with the noisy judge')
    _add_judge_flags(sub)

    sub = add('vote-sweep', cmd_vote_sweep, 'final training quality per votes-per-rollout N and estimator')
    sub.add_argument('--n-values', default='1,8,16,32')
    sub.add_argument('--estimators', default='grpo,maxrl,odrpo')
    sub.add_argument('--weights-list', default='unit', help='ODRPO weight schemes to sweep')
    sub.add_argument('--norm', choices=NORM_CHOICES, default='std')
    _add_training_flags(sub, None)
    sub.add_argument('--deterministic-judge', action='store_true', help='noise-free judge')
    _add_judge_flags(sub)
    sub.set_defaults(tasks=4, N=1)
    return parser


def _install_config_defaults(sub, command, config_path):
    """Make --config entries the subcommand's defaults; supplied keys stop being required."""
    actions = {action.dest: action for action in sub._actions}
    defaults = {}
    for key, value in parse_config_file(config_path).items():
        action = actions.get(key)
        if action is None or key in ('help', 'config'):
            raise ConfigError(f"unknown key '{key}' for '{command}' in {config_path}")
        if action.nargs == 0:
            value = value.lower() in ('1', 'true', 'yes', 'on')
        action.required = False
        defaults[key] = value
    sub.set_defaults(**defaults)


def parse_arguments(parser, argv):
    """
    Parse argv with --config entries installed as subcommand defaults.

    The subcommand and --config are read first, so the file can supply
    flags the subcommand otherwise requires. Flags on the command line win.
    """
    argv = sys.argv[1:] if argv is None else list(argv)
    pre = OdrpoArgumentParser(prog=parser.prog, add_help=False)
    pre.add_argument('command', nargs='?')
    pre.add_argument('--config', default=None)
    known, _ = pre.parse_known_args(argv)

    sub = parser.subcommands.get(known.command)
    if known.config and sub is not None:
        _install_config_defaults(sub, known.command, known.config)
    return parser.parse_args(argv)


def main(argv=None):
    parser = build_parser()
    try:
        args = parse_arguments(parser, argv)
        return args.func(args)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    except OdrpoError as e:
        log_message(f"ERROR {type(e).__name__}: {e}")
        return e.exit_code


if __name__ == '__main__':
    sys.exit(main())
