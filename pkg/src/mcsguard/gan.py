"""Adversarial pair: tanh generator vs sigmoid discriminator.

One training epoch is one adversarial iteration: the discriminator takes
a single SGD step on a half-batch of real rows (label 1) stacked with a
half-batch of generator outputs (label 0), then the generator takes one
step through the frozen discriminator chasing label 1. Losses are logged
every ``loss_log_interval`` epochs as (loss_real, loss_fake, loss_gan).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .nn import DivergenceError, LayerSpec, MlpModel, bce_loss, init_model
from .tasks import PROVENANCE_ADVERSARIAL_FAKE


class TrainingDivergenceError(RuntimeError):
    """GAN training hit a non-finite loss or gradient."""

    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch


@dataclass
class GanConfig:
    noise_dim: int = 100
    gen_hidden: tuple = (256, 512, 1024)
    disc_hidden: tuple = (512, 256, 256)
    learning_rate: float = 0.01
    batch_size: int = 32
    epochs: int = 2000
    loss_log_interval: int = 10
    optimizer: str = "adam"
    seed: int = 7

    def validate(self):
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.noise_dim <= 0:
            raise ValueError("noise_dim must be positive")
        if not self.gen_hidden or not self.disc_hidden:
            raise ValueError("generator and discriminator need hidden layers")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 2:
            raise ValueError("batch_size must be at least 2")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.loss_log_interval < 1:
            raise ValueError("loss_log_interval must be >= 1")


@dataclass
class GanModel:
    generator: MlpModel
    discriminator: MlpModel
    training_history: list = field(default_factory=list)  # (epoch, loss_real, loss_fake, loss_gan)
    epochs_trained: int = 0

    @property
    def feature_dim(self):
        return self.generator.output_dim


@dataclass
class SyntheticBatch:
    rows: np.ndarray
    provenance: str = PROVENANCE_ADVERSARIAL_FAKE


def build_generator(config, feature_dim):
    """Noise -> hidden stack -> tanh head matching the [-1, 1] encoding.

    Hidden layers are leaky ReLU: with plain SGD at lr 0.01 a saturating
    hidden stack never converges in a 2,000-epoch budget.
    """
    dims = (config.noise_dim, *config.gen_hidden)
    specs = [LayerSpec(i, o, "leaky_relu") for i, o in zip(dims, dims[1:])]
    specs.append(LayerSpec(dims[-1], feature_dim, "tanh"))
    return specs


def build_discriminator(config, feature_dim):
    """Features -> hidden stack -> sigmoid probability-of-real head."""
    dims = (feature_dim, *config.disc_hidden)
    specs = [LayerSpec(i, o, "leaky_relu") for i, o in zip(dims, dims[1:])]
    specs.append(LayerSpec(dims[-1], 1, "sigmoid"))
    return specs


def train_discriminator_batch(disc, real_rows, fake_rows):
    """One SGD step on real rows labeled 1 stacked with fakes labeled 0.

    Returns the pre-update (loss_real, loss_fake) on the two halves.
    """
    inputs = np.vstack([real_rows, fake_rows])
    targets = np.vstack(
        [np.ones((len(real_rows), 1)), np.zeros((len(fake_rows), 1))]
    )
    activations = disc.forward(inputs)
    preds = activations[-1]
    loss_real = bce_loss(preds[: len(real_rows)], targets[: len(real_rows)])
    loss_fake = bce_loss(preds[len(real_rows) :], targets[len(real_rows) :])
    grads_w, grads_b, _ = disc.backward(activations, targets=targets)
    disc.apply_gradients(grads_w, grads_b)
    return loss_real, loss_fake


def train_generator_batch(gen, disc, noise):
    """One generator step through the frozen discriminator, target label 1.

    The discriminator only supplies the gradient of the adversarial loss
    with respect to the generated rows; its own parameters are untouched.
    """
    gen_acts = gen.forward(noise)
    disc_acts = disc.forward(gen_acts[-1])
    targets = np.ones((len(noise), 1))
    loss = bce_loss(disc_acts[-1], targets)
    _, _, input_grad = disc.backward(disc_acts, targets=targets)
    grads_w, grads_b, _ = gen.backward(gen_acts, output_grad=input_grad)
    gen.apply_gradients(grads_w, grads_b)
    return loss


def train_gan(train_rows, config):
    """Alternating adversarial training on encoded rows in [-1, 1]."""
    config.validate()
    train_rows = np.asarray(train_rows, dtype=float)
    if train_rows.ndim != 2 or len(train_rows) == 0:
        raise ValueError("train_rows must be a nonempty 2-D array")
    if np.abs(train_rows).max() > 1.0 + 1e-9:
        raise ValueError("train_rows must be encoded in [-1, 1]")
    if config.batch_size > len(train_rows):
        raise ValueError("batch_size exceeds the training-set size")

    feature_dim = train_rows.shape[1]
    gen_seed, disc_seed, loop_seed = np.random.SeedSequence(config.seed).spawn(3)
    gen = init_model(
        build_generator(config, feature_dim), config.learning_rate, gen_seed,
        optimizer=config.optimizer,
    )
    disc = init_model(
        build_discriminator(config, feature_dim), config.learning_rate, disc_seed,
        optimizer=config.optimizer,
    )
    rng = np.random.default_rng(loop_seed)
    half = config.batch_size // 2

    history = []
    for epoch in range(1, config.epochs + 1):
        try:
            real = train_rows[rng.integers(0, len(train_rows), half)]
            fake = gen.predict(rng.standard_normal((half, config.noise_dim)))
            loss_real, loss_fake = train_discriminator_batch(disc, real, fake)
            loss_gan = train_generator_batch(
                gen, disc, rng.standard_normal((config.batch_size, config.noise_dim))
            )
        except DivergenceError as exc:
            raise TrainingDivergenceError(f"epoch {epoch}: {exc}", epoch=epoch) from exc
        if not np.isfinite([loss_real, loss_fake, loss_gan]).all():
            raise TrainingDivergenceError(f"non-finite loss at epoch {epoch}", epoch=epoch)
        if epoch % config.loss_log_interval == 0 or epoch == config.epochs:
            history.append((epoch, loss_real, loss_fake, loss_gan))
    return GanModel(
        generator=gen,
        discriminator=disc,
        training_history=history,
        epochs_trained=config.epochs,
    )


def generate(model, n, seed):
    """n synthetic rows from standard-normal noise; deterministic per seed."""
    if model.epochs_trained < 1:
        raise ValueError("generator is untrained")
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return SyntheticBatch(rows=np.empty((0, model.feature_dim)))
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((n, model.generator.input_dim))
    return SyntheticBatch(rows=model.generator.predict(noise))


def discriminate(model, rows):
    """Per-row probability of being real; callers apply their own threshold."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[1] != model.discriminator.input_dim:
        raise ValueError(
            f"row width {rows.shape[1]} != discriminator input {model.discriminator.input_dim}"
        )
    return model.discriminator.predict(rows).ravel()


def write_loss_csv(model, path):
    """Loss trace as epoch, loss_real, loss_fake, loss_gan rows."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss_real", "loss_fake", "loss_gan"])
        for epoch, loss_real, loss_fake, loss_gan in model.training_history:
            writer.writerow([epoch, repr(loss_real), repr(loss_fake), repr(loss_gan)])


def save_gan(model, prefix):
    """Checkpoint to <prefix>_generator.npz / _discriminator.npz / _meta.json."""
    prefix = Path(prefix)
    model.generator.save(f"{prefix}_generator.npz")
    model.discriminator.save(f"{prefix}_discriminator.npz")
    meta = {
        "epochs_trained": model.epochs_trained,
        "training_history": [list(entry) for entry in model.training_history],
    }
    with open(f"{prefix}_meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh)
        fh.write("\n")


def load_gan(prefix):
    prefix = Path(prefix)
    generator = MlpModel.load(f"{prefix}_generator.npz")
    discriminator = MlpModel.load(f"{prefix}_discriminator.npz")
    with open(f"{prefix}_meta.json", encoding="utf-8") as fh:
        meta = json.load(fh)
    return GanModel(
        generator=generator,
        discriminator=discriminator,
        training_history=[tuple(entry) for entry in meta["training_history"]],
        epochs_trained=meta["epochs_trained"],
    )
