"""Command-line entry point for running experiments.

Precedence: preset defaults < --config file < individual flags. The
--seed flag reseeds both the dataset generator and the GAN so a single
number reproduces a whole run.
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiment import ExperimentConfig, desk_preset, paper_preset, run
from .tasks import ConfigurationError


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mcsguard",
        description="Synthesize MCS tasks, train the GAN adversary, and "
        "evaluate the two-level fake-task detection cascade.",
    )
    parser.add_argument("--config", help="JSON experiment config to start from")
    parser.add_argument("--preset", choices=["paper", "desk"], default="desk",
                        help="baseline configuration (ignored when --config is given)")
    parser.add_argument("--mode", choices=["full", "datagen-only", "train-only",
                                           "eval-only", "sweep"])
    parser.add_argument("--rounds", type=int, help="number of repetition rounds")
    parser.add_argument("--seed", type=int, help="seed for dataset and GAN")
    parser.add_argument("--out", help="output directory")
    # Dataset knobs
    parser.add_argument("--total-tasks", type=int)
    parser.add_argument("--fake-fraction", type=float)
    parser.add_argument("--split-ratio", type=float)
    # GAN knobs
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--batch-size", type=int)
    parser.add_argument("--learning-rate", type=float)
    parser.add_argument("--noise-dim", type=int)
    parser.add_argument("--synthetic-tasks", type=int)
    parser.add_argument("--gan-corpus", choices=["full_train", "fake_only"])
    parser.add_argument("--disc-threshold", type=float)
    return parser


def config_from_args(args):
    if args.config:
        config = ExperimentConfig.load(args.config)
    elif args.preset == "paper":
        config = paper_preset()
    else:
        config = desk_preset()

    if args.mode is not None:
        config.mode = args.mode
    if args.rounds is not None:
        config.rounds = args.rounds
    if args.out is not None:
        config.output_dir = args.out
    if args.seed is not None:
        config.generation.rng_seed = args.seed
        config.gan.seed = args.seed
    if args.total_tasks is not None:
        config.generation.total_tasks = args.total_tasks
    if args.fake_fraction is not None:
        config.generation.fake_fraction = args.fake_fraction
    if args.split_ratio is not None:
        config.generation.split_ratio = args.split_ratio
    if args.epochs is not None:
        config.gan.epochs = args.epochs
    if args.batch_size is not None:
        config.gan.batch_size = args.batch_size
    if args.learning_rate is not None:
        config.gan.learning_rate = args.learning_rate
    if args.noise_dim is not None:
        config.gan.noise_dim = args.noise_dim
    if args.synthetic_tasks is not None:
        config.synthetic_tasks = args.synthetic_tasks
    if args.gan_corpus is not None:
        config.gan_corpus = args.gan_corpus
    if args.disc_threshold is not None:
        config.disc_threshold = args.disc_threshold
    return config


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        report = run(config)
    except (ConfigurationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    summary = {k: report[k] for k in ("rounds_completed", "failed_rounds") if k in report}
    print(json.dumps({"output_dir": config.output_dir, **summary}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
