"""Two-level task filtering: discriminator first, binary classifier second.

A task predicted synthetic by the discriminator is eliminated on the
spot and never reaches the classifier. Tasks predicted real go to the
classifier, which accepts them (legitimate) or eliminates them (fake).
The flat variant bypasses the discriminator for the no-level-1 baseline.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .gan import discriminate
from .tasks import (
    PROVENANCE_ADVERSARIAL_FAKE,
    PROVENANCE_LEGITIMATE,
    PROVENANCE_ORIGINAL_FAKE,
)

DISC_REAL = "real"
DISC_ADVERSARIAL = "adversarial"

CLF_LEGITIMATE = "legitimate"
CLF_FAKE = "fake"
CLF_NOT_EVALUATED = "not_evaluated"

ACCEPTED = "accepted"
ELIMINATED_BY_DISCRIMINATOR = "eliminated_by_discriminator"
ELIMINATED_BY_CLASSIFIER = "eliminated_by_classifier"

ORIGINS = (PROVENANCE_LEGITIMATE, PROVENANCE_ORIGINAL_FAKE, PROVENANCE_ADVERSARIAL_FAKE)


@dataclass
class MixedDataset:
    """Test split plus GAN output; disc_label 1 marks rows from real sources."""

    rows: np.ndarray
    origin: np.ndarray
    disc_label: np.ndarray

    def __len__(self):
        return len(self.rows)


@dataclass
class CascadeVerdict:
    index: int
    origin: str
    disc_probability: float
    disc_prediction: str
    classifier_prediction: str
    final_disposition: str


def build_mixed(test_split, synthetic):
    """Concatenate the encoded test split with a synthetic batch."""
    test_rows = np.asarray(test_split.test_x, dtype=float)
    synth_rows = np.asarray(synthetic.rows, dtype=float)
    if len(synth_rows) and synth_rows.shape[1] != test_rows.shape[1]:
        raise ValueError(
            f"synthetic width {synth_rows.shape[1]} != test width {test_rows.shape[1]}"
        )
    rows = np.vstack([test_rows, synth_rows]) if len(synth_rows) else test_rows.copy()
    origin = np.concatenate(
        [test_split.test_provenance, np.full(len(synth_rows), synthetic.provenance)]
    )
    disc_label = (origin != PROVENANCE_ADVERSARIAL_FAKE).astype(int)
    return MixedDataset(rows=rows, origin=origin, disc_label=disc_label)


def classify_mixed(mixed, gan_model, classifier, threshold=0.5):
    """Run the two-level prediction procedure over every row.

    Discriminator probability >= threshold means predicted real and the
    row is forwarded to the classifier; below threshold the row is
    eliminated immediately and the classifier never sees it.
    """
    if gan_model.epochs_trained < 1:
        raise ValueError("discriminator is untrained")
    probs = discriminate(gan_model, mixed.rows)
    return _verdicts_from_probs(mixed, probs, classifier, threshold)


def classify_flat(mixed, classifier):
    """No discriminator: every row goes straight to the classifier."""
    probs = np.ones(len(mixed))
    return _verdicts_from_probs(mixed, probs, classifier, threshold=0.5)


def _verdicts_from_probs(mixed, probs, classifier, threshold):
    if len(mixed) == 0:
        return []
    survivors = probs >= threshold
    clf_labels = {}
    if survivors.any():
        predictions = classifier.predict(mixed.rows[survivors])
        clf_labels = dict(zip(np.flatnonzero(survivors), predictions))

    verdicts = []
    for i in range(len(mixed)):
        if survivors[i]:
            label = clf_labels[i]
            clf_prediction = CLF_LEGITIMATE if label == 1 else CLF_FAKE
            disposition = ACCEPTED if label == 1 else ELIMINATED_BY_CLASSIFIER
            verdicts.append(
                CascadeVerdict(
                    index=i,
                    origin=str(mixed.origin[i]),
                    disc_probability=float(probs[i]),
                    disc_prediction=DISC_REAL,
                    classifier_prediction=clf_prediction,
                    final_disposition=disposition,
                )
            )
        else:
            verdicts.append(
                CascadeVerdict(
                    index=i,
                    origin=str(mixed.origin[i]),
                    disc_probability=float(probs[i]),
                    disc_prediction=DISC_ADVERSARIAL,
                    classifier_prediction=CLF_NOT_EVALUATED,
                    final_disposition=ELIMINATED_BY_DISCRIMINATOR,
                )
            )
    return verdicts


def write_verdicts_csv(verdicts, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "index",
                "origin",
                "disc_probability",
                "disc_prediction",
                "classifier_prediction",
                "final_disposition",
            ]
        )
        for v in verdicts:
            writer.writerow(
                [
                    v.index,
                    v.origin,
                    repr(v.disc_probability),
                    v.disc_prediction,
                    v.classifier_prediction,
                    v.final_disposition,
                ]
            )
