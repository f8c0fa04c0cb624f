"""End-to-end experiment orchestration and artifact emission.

One run: synthesize the task population, split and encode it, train the
GAN once per round (seeded with base seed + round index), inject the
generated rows into the test split, and score every configured classifier
with and without the discriminator in front. Counts are averaged across
rounds into a single report.

Emitted files (under output_dir):
    config.json, dataset.csv, scaler.json,
    gan_round<r>_{generator,discriminator}.npz + _meta.json,
    gan_loss.csv (round 0) and gan_loss_round<r>.csv,
    classifier_<name>.json,
    verdicts_<clf>_<arch>.csv (round 0) and ..._round<r>.csv,
    report.json, report.csv

Synthetic-row generation uses seed base + 100000 + round so it never
collides with a training seed at any realistic round count.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import cascade as cascade_mod
from . import gan as gan_mod
from . import metrics as metrics_mod
from .classifiers import ClassifierKind, load_classifier, make_classifier, save_classifier
from .gan import GanConfig, TrainingDivergenceError
from .tasks import (
    ConfigurationError,
    GenerationConfig,
    generate_tasks,
    read_dataset_csv,
    split_dataset,
    write_dataset_csv,
)

MODES = ("full", "datagen-only", "train-only", "eval-only", "sweep")
ARCHITECTURES = ("cascade", "flat")

GAN_CORPUS_FULL = "full_train"
GAN_CORPUS_FAKE_ONLY = "fake_only"

SYNTH_SEED_OFFSET = 100000


@dataclass
class ExperimentConfig:
    generation: GenerationConfig = field(default_factory=GenerationConfig)
    gan: GanConfig = field(default_factory=GanConfig)
    classifiers: list = field(
        default_factory=lambda: [
            ClassifierKind(name="knn"),
            ClassifierKind(name="nb"),
            ClassifierKind(name="dt"),
        ]
    )
    rounds: int = 20
    synthetic_tasks: int = 2000
    gan_corpus: str = GAN_CORPUS_FULL
    disc_threshold: float = 0.5
    output_dir: str = "runs/experiment"
    mode: str = "full"
    sweep_batch_sizes: tuple = (15, 20, 25, 32)
    sweep_epochs: tuple = (2000, 4000, 8000)
    sweep_epoch_scale: float = 0.1

    def validate(self):
        self.generation.validate()
        self.gan.validate()
        if self.rounds < 1:
            raise ConfigurationError("rounds must be >= 1")
        if self.synthetic_tasks < 0:
            raise ConfigurationError("synthetic_tasks must be >= 0")
        if self.gan_corpus not in (GAN_CORPUS_FULL, GAN_CORPUS_FAKE_ONLY):
            raise ConfigurationError(f"unknown gan_corpus {self.gan_corpus!r}")
        if not (0.0 <= self.disc_threshold <= 1.0):
            raise ConfigurationError("disc_threshold must be in [0, 1]")
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        if not self.classifiers:
            raise ConfigurationError("at least one classifier required")
        for kind in self.classifiers:
            kind.validate()
        names = [k.canonical_name for k in self.classifiers]
        if len(set(names)) != len(names):
            raise ConfigurationError("duplicate classifier kinds")

    def to_dict(self):
        payload = asdict(self)
        payload["generation"]["bounding_box"] = list(self.generation.bounding_box)
        return payload

    @classmethod
    def from_dict(cls, payload):
        payload = dict(payload)
        gen = payload.pop("generation", {})
        gan = payload.pop("gan", {})
        kinds = payload.pop("classifiers", None)
        config = cls(
            generation=GenerationConfig(**_tupled(gen)),
            gan=GanConfig(**_tupled(gan)),
            **_tupled(payload),
        )
        if kinds is not None:
            config.classifiers = [ClassifierKind(**k) for k in kinds]
        return config

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _tupled(payload):
    # JSON round-trips tuples as lists; restore them for dataclass equality.
    return {k: tuple(v) if isinstance(v, list) else v for k, v in payload.items()}


def paper_preset(seed=7, output_dir="runs/paper"):
    """Full-scale configuration: 14,484 tasks, 2,000 epochs, 20 rounds."""
    return ExperimentConfig(
        generation=GenerationConfig(rng_seed=seed),
        gan=GanConfig(batch_size=32, epochs=2000, seed=seed),
        rounds=20,
        synthetic_tasks=2000,
        output_dir=output_dir,
    )


def desk_preset(seed=7, output_dir="runs/desk"):
    """Reduced configuration for quick runs: ~2,000 tasks, 500 epochs, 5 rounds."""
    return ExperimentConfig(
        generation=GenerationConfig(total_tasks=2000, rng_seed=seed),
        gan=GanConfig(batch_size=32, epochs=500, seed=seed),
        rounds=5,
        synthetic_tasks=300,
        output_dir=output_dir,
    )


def _gan_training_rows(split, corpus):
    return split.train_fakes if corpus == GAN_CORPUS_FAKE_ONLY else split.train_x


def _verdict_csv_name(clf_name, arch, round_index):
    suffix = "" if round_index == 0 else f"_round{round_index}"
    return f"verdicts_{clf_name}_{arch}{suffix}.csv"


def _evaluate_round(config, split, gan_model, fitted, round_index, out):
    """Score one trained GAN against every classifier; returns tallies."""
    synthetic = gan_mod.generate(
        gan_model, config.synthetic_tasks, seed=config.gan.seed + SYNTH_SEED_OFFSET + round_index
    )
    mixed = cascade_mod.build_mixed(split, synthetic)
    tallies = {}
    for name, clf in fitted.items():
        verdicts = {
            "cascade": cascade_mod.classify_mixed(
                mixed, gan_model, clf, threshold=config.disc_threshold
            ),
            "flat": cascade_mod.classify_flat(mixed, clf),
        }
        tallies[name] = {}
        for arch, arch_verdicts in verdicts.items():
            tallies[name][arch] = metrics_mod.tally(arch_verdicts)
            cascade_mod.write_verdicts_csv(
                arch_verdicts, out / _verdict_csv_name(name, arch, round_index)
            )
    return tallies


def build_report(config, per_round_tallies, failed_rounds):
    """Average round tallies and assemble the report dictionary."""
    clf_names = [k.canonical_name for k in config.classifiers]
    report = {
        "rounds_requested": config.rounds,
        "rounds_completed": len(per_round_tallies),
        "failed_rounds": failed_rounds,
        "gan_corpus": config.gan_corpus,
        "disc_threshold": config.disc_threshold,
        "classifiers": {},
    }
    if not per_round_tallies:
        return report
    for name in clf_names:
        report["classifiers"][name] = {}
        for arch in ARCHITECTURES:
            averaged = metrics_mod.average_rounds(
                [tallies[name][arch] for tallies in per_round_tallies]
            )
            report["classifiers"][name][arch] = {
                "counts": averaged.as_dict(),
                "metrics": metrics_mod.metric_decomposition(averaged),
            }
    # Level-1 behaviour is shared by every cascade entry; surface it once.
    disc_counts = metrics_mod.average_rounds(
        [tallies[clf_names[0]]["cascade"] for tallies in per_round_tallies]
    )
    report["totals"] = {
        "adversarial_fake": disc_counts.total_adversarial,
        "original_fake": disc_counts.total_original_attacks,
        "legitimate": disc_counts.total_legitimate,
    }
    report["discriminator"] = {
        "breakdown": {
            "real_as_real_original_fake": disc_counts.real_as_real_original_fake,
            "real_as_real_legitimate": disc_counts.real_as_real_legitimate,
            "adversarial_as_real": disc_counts.adversarial_as_real,
            "real_as_adversarial_original_fake": disc_counts.real_as_adversarial_original_fake,
            "real_as_adversarial_legitimate": disc_counts.real_as_adversarial_legitimate,
            "adversarial_as_adversarial": disc_counts.adversarial_as_adversarial,
        },
        "elimination_rates": metrics_mod.discriminator_elimination_rates(disc_counts),
    }
    return report


def write_report_json(report, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_report_csv(report, path):
    """Rate table, one row per (metric, architecture, contribution)."""
    clf_names = sorted(report.get("classifiers", {}))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "architecture", "contributed_by", *clf_names])
        if not clf_names:
            return
        for metric in ("aasr", "aadr", "oadr"):
            rows = [
                ("flat", "classifier"),
                ("cascade", "discriminator"),
                ("cascade", "classifier"),
                ("cascade", "final"),
            ]
            for arch, part in rows:
                values = [
                    repr(report["classifiers"][name][arch]["metrics"][metric][part])
                    for name in clf_names
                ]
                writer.writerow([metric, arch, part, *values])
        loss_values = [
            repr(report["classifiers"][name]["cascade"]["metrics"]["legitimate_loss_rate"])
            for name in clf_names
        ]
        writer.writerow(["legitimate_loss_rate", "cascade", "discriminator", *loss_values])


def run(config):
    """Execute the configured mode; returns the report dictionary."""
    config.validate()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    config.save(out / "config.json")

    if config.mode == "sweep":
        return sweep(config)
    if config.mode == "eval-only":
        return _run_eval_only(config, out)

    tasks = generate_tasks(config.generation)
    write_dataset_csv(tasks, out / "dataset.csv")
    split = split_dataset(tasks, config.generation)
    split.scaler.to_json(out / "scaler.json")
    if config.mode == "datagen-only":
        return {"mode": "datagen-only", "tasks": len(tasks)}

    fitted = _fit_classifiers(config, split, out)
    corpus = _gan_training_rows(split, config.gan_corpus)

    per_round_tallies = []
    failed_rounds = []
    for round_index in range(config.rounds):
        round_gan = replace(config.gan, seed=config.gan.seed + round_index)
        try:
            gan_model = gan_mod.train_gan(corpus, round_gan)
        except TrainingDivergenceError as exc:
            failed_rounds.append({"round": round_index, "epoch": exc.epoch, "error": str(exc)})
            continue
        gan_mod.save_gan(gan_model, out / f"gan_round{round_index}")
        loss_name = "gan_loss.csv" if round_index == 0 else f"gan_loss_round{round_index}.csv"
        gan_mod.write_loss_csv(gan_model, out / loss_name)
        if config.mode == "train-only":
            continue
        per_round_tallies.append(
            _evaluate_round(config, split, gan_model, fitted, round_index, out)
        )

    if config.mode == "train-only":
        return {"mode": "train-only", "rounds_trained": config.rounds - len(failed_rounds)}

    report = build_report(config, per_round_tallies, failed_rounds)
    write_report_json(report, out / "report.json")
    write_report_csv(report, out / "report.csv")
    return report


def _fit_classifiers(config, split, out):
    fitted = {}
    for kind in config.classifiers:
        clf = make_classifier(kind).fit(split.train_x, split.train_y)
        fitted[kind.canonical_name] = clf
        save_classifier(clf, out / f"classifier_{kind.canonical_name}.json")
    return fitted


def _run_eval_only(config, out):
    """Re-score saved checkpoints; deterministic replay of a finished run."""
    dataset_path = out / "dataset.csv"
    if not dataset_path.exists():
        raise FileNotFoundError(f"eval-only needs {dataset_path}")
    tasks = read_dataset_csv(dataset_path)
    split = split_dataset(tasks, config.generation)

    fitted = {}
    for kind in config.classifiers:
        path = out / f"classifier_{kind.canonical_name}.json"
        if path.exists():
            fitted[kind.canonical_name] = load_classifier(path)
        else:
            fitted[kind.canonical_name] = make_classifier(kind).fit(split.train_x, split.train_y)

    per_round_tallies = []
    failed_rounds = []
    for round_index in range(config.rounds):
        prefix = out / f"gan_round{round_index}"
        if not Path(f"{prefix}_meta.json").exists():
            raise FileNotFoundError(f"eval-only needs checkpoint {prefix}_*")
        gan_model = gan_mod.load_gan(prefix)
        per_round_tallies.append(
            _evaluate_round(config, split, gan_model, fitted, round_index, out)
        )

    report = build_report(config, per_round_tallies, failed_rounds)
    write_report_json(report, out / "report.json")
    write_report_csv(report, out / "report.csv")
    return report


def sweep(config):
    """Grid over (batch_size, epochs), ranked by discriminator probe accuracy.

    Each grid point trains on a reduced budget (epochs scaled by
    sweep_epoch_scale) and is scored on how well the discriminator
    separates held-out test rows from freshly generated ones.
    """
    config.validate()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    tasks = generate_tasks(config.generation)
    split = split_dataset(tasks, config.generation)
    corpus = _gan_training_rows(split, config.gan_corpus)

    entries = []
    for batch_size in config.sweep_batch_sizes:
        for epochs in config.sweep_epochs:
            budget = max(1, int(round(epochs * config.sweep_epoch_scale)))
            point_gan = replace(
                config.gan, batch_size=batch_size, epochs=budget, seed=config.gan.seed
            )
            model = gan_mod.train_gan(corpus, point_gan)
            accuracy = _probe_accuracy(config, split, model)
            entries.append(
                {
                    "batch_size": batch_size,
                    "epochs": epochs,
                    "trained_epochs": budget,
                    "probe_accuracy": accuracy,
                }
            )
    entries.sort(key=lambda e: (-e["probe_accuracy"], e["batch_size"], e["epochs"]))
    for rank, entry in enumerate(entries, start=1):
        entry["rank"] = rank

    chosen = next(
        (e for e in entries if e["batch_size"] == 32 and e["epochs"] == 2000), None
    )
    report = {
        "grid_points": entries,
        "selected_reference": {"batch_size": 32, "epochs": 2000,
                               "rank": chosen["rank"] if chosen else None},
        "sweep_epoch_scale": config.sweep_epoch_scale,
    }
    write_report_json(report, out / "sweep_report.json")
    with open(out / "sweep_report.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "batch_size", "epochs", "trained_epochs", "probe_accuracy"])
        for e in entries:
            writer.writerow(
                [e["rank"], e["batch_size"], e["epochs"], e["trained_epochs"],
                 repr(e["probe_accuracy"])]
            )
    return report


def _probe_accuracy(config, split, model):
    """Balanced accuracy of the discriminator on real-vs-generated rows."""
    real = split.test_x
    synthetic = gan_mod.generate(
        model, len(real), seed=config.gan.seed + 2 * SYNTH_SEED_OFFSET
    )
    p_real = gan_mod.discriminate(model, real)
    p_synth = gan_mod.discriminate(model, synthetic.rows)
    return float(((p_real >= 0.5).mean() + (p_synth < 0.5).mean()) / 2.0)
