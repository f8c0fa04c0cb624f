"""GAN-backed two-level detection of fake sensing tasks in mobile crowdsensing."""

from .cascade import (
    CascadeVerdict,
    MixedDataset,
    build_mixed,
    classify_flat,
    classify_mixed,
)
from .classifiers import ClassifierKind, make_classifier
from .experiment import ExperimentConfig, desk_preset, paper_preset, run, sweep
from .gan import GanConfig, GanModel, SyntheticBatch, discriminate, generate, train_gan
from .metrics import RoundCounts, aadr, aasr, average_rounds, oadr, tally
from .nn import LayerSpec, MlpModel, bce_loss, init_model
from .tasks import (
    DatasetSplit,
    FeatureScaler,
    GenerationConfig,
    SensingTask,
    encode_tasks,
    generate_tasks,
    split_dataset,
)

__all__ = [
    "CascadeVerdict",
    "ClassifierKind",
    "DatasetSplit",
    "ExperimentConfig",
    "FeatureScaler",
    "GanConfig",
    "GanModel",
    "GenerationConfig",
    "LayerSpec",
    "MixedDataset",
    "MlpModel",
    "RoundCounts",
    "SensingTask",
    "SyntheticBatch",
    "aadr",
    "aasr",
    "average_rounds",
    "bce_loss",
    "build_mixed",
    "classify_flat",
    "classify_mixed",
    "desk_preset",
    "discriminate",
    "encode_tasks",
    "generate",
    "generate_tasks",
    "init_model",
    "make_classifier",
    "oadr",
    "paper_preset",
    "run",
    "split_dataset",
    "sweep",
    "tally",
    "train_gan",
]

__version__ = "0.1.0"
