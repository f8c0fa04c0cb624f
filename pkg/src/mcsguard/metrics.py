"""Detection-rate bookkeeping for cascade and flat runs.

Counts are tallied per round from verdicts, averaged across rounds (which
is where the fractional values come from), and turned into the three
headline rates:

- adversarial attack detection rate: detected GAN rows / total GAN rows,
  split into the discriminator's and the classifier's contribution;
- adversarial attack success rate: the complement (detected or injected,
  nothing else can happen);
- original attack detection rate: same decomposition for the empirically
  designed fakes.

The legitimate-elimination rate is reported alongside since level 1 buys
its detections at the cost of discarding some legitimate tasks.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .cascade import (
    DISC_ADVERSARIAL,
    DISC_REAL,
    ELIMINATED_BY_CLASSIFIER,
)
from .tasks import (
    PROVENANCE_ADVERSARIAL_FAKE,
    PROVENANCE_LEGITIMATE,
    PROVENANCE_ORIGINAL_FAKE,
)


@dataclass
class RoundCounts:
    """Per-(discriminator prediction x origin) cell counts for one round.

    Fields are floats so averaged rounds keep their fractional parts.
    """

    real_as_real_original_fake: float = 0.0
    real_as_real_legitimate: float = 0.0
    adversarial_as_real: float = 0.0
    real_as_adversarial_original_fake: float = 0.0
    real_as_adversarial_legitimate: float = 0.0
    adversarial_as_adversarial: float = 0.0
    detected_adversarial_by_classifier: float = 0.0
    detected_original_by_classifier: float = 0.0
    total_adversarial: float = 0.0
    total_original_attacks: float = 0.0
    total_legitimate: float = 0.0

    @property
    def detected_adversarial_by_discriminator(self):
        return self.adversarial_as_adversarial

    @property
    def detected_original_by_discriminator(self):
        return self.real_as_adversarial_original_fake

    def validate(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"negative count in {f.name}")
        da = self.detected_adversarial_by_discriminator + self.adversarial_as_real
        if abs(da - self.total_adversarial) > 1e-9:
            raise ValueError("adversarial cells do not sum to total_adversarial")

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def tally(verdicts):
    """Exact cell counts from one round of verdicts."""
    counts = RoundCounts()
    for v in verdicts:
        if v.origin == PROVENANCE_ADVERSARIAL_FAKE:
            counts.total_adversarial += 1
            if v.disc_prediction == DISC_REAL:
                counts.adversarial_as_real += 1
            else:
                counts.adversarial_as_adversarial += 1
            if v.final_disposition == ELIMINATED_BY_CLASSIFIER:
                counts.detected_adversarial_by_classifier += 1
        elif v.origin == PROVENANCE_ORIGINAL_FAKE:
            counts.total_original_attacks += 1
            if v.disc_prediction == DISC_REAL:
                counts.real_as_real_original_fake += 1
            else:
                counts.real_as_adversarial_original_fake += 1
            if v.final_disposition == ELIMINATED_BY_CLASSIFIER:
                counts.detected_original_by_classifier += 1
        elif v.origin == PROVENANCE_LEGITIMATE:
            counts.total_legitimate += 1
            if v.disc_prediction == DISC_REAL:
                counts.real_as_real_legitimate += 1
            else:
                counts.real_as_adversarial_legitimate += 1
        else:
            raise ValueError(f"unknown origin {v.origin!r}")
    return counts


def aadr(counts):
    """Detected adversarial rows (either level) over all adversarial rows."""
    if counts.total_adversarial <= 0:
        raise ValueError("total_adversarial must be positive")
    detected = (
        counts.detected_adversarial_by_discriminator
        + counts.detected_adversarial_by_classifier
    )
    return detected / counts.total_adversarial


def aasr(counts):
    """Adversarial rows that slipped through: 1 - aadr."""
    return 1.0 - aadr(counts)


def oadr(counts):
    """Detected original fakes (either level) over all original fakes."""
    if counts.total_original_attacks <= 0:
        raise ValueError("total_original_attacks must be positive")
    detected = (
        counts.detected_original_by_discriminator
        + counts.detected_original_by_classifier
    )
    return detected / counts.total_original_attacks


def legitimate_loss_rate(counts):
    """Legitimate tasks the discriminator threw away, as a fraction."""
    if counts.total_legitimate <= 0:
        raise ValueError("total_legitimate must be positive")
    return counts.real_as_adversarial_legitimate / counts.total_legitimate


def average_rounds(rounds):
    """Arithmetic mean per cell; all rounds must share identical totals."""
    if not rounds:
        raise ValueError("need at least one round")
    first = rounds[0]
    for other in rounds[1:]:
        if (
            other.total_adversarial != first.total_adversarial
            or other.total_original_attacks != first.total_original_attacks
            or other.total_legitimate != first.total_legitimate
        ):
            raise ValueError("rounds have mismatched totals")
    averaged = RoundCounts()
    for f in fields(RoundCounts):
        value = sum(getattr(r, f.name) for r in rounds) / len(rounds)
        setattr(averaged, f.name, value)
    return averaged


def metric_decomposition(counts):
    """aadr/aasr/oadr split by contributing level, plus the legitimate cost.

    The detection rates decompose additively (final = discriminator part +
    classifier part). The success rate is cumulative survival: after the
    discriminator, then after both levels (the final value).
    """
    aadr_disc = counts.detected_adversarial_by_discriminator / counts.total_adversarial
    aadr_clf = counts.detected_adversarial_by_classifier / counts.total_adversarial
    oadr_disc = counts.detected_original_by_discriminator / counts.total_original_attacks
    oadr_clf = counts.detected_original_by_classifier / counts.total_original_attacks
    return {
        "aadr": {
            "discriminator": aadr_disc,
            "classifier": aadr_clf,
            "final": aadr_disc + aadr_clf,
        },
        "aasr": {
            "discriminator": 1.0 - aadr_disc,
            "classifier": 1.0 - (aadr_disc + aadr_clf),
            "final": 1.0 - (aadr_disc + aadr_clf),
        },
        "oadr": {
            "discriminator": oadr_disc,
            "classifier": oadr_clf,
            "final": oadr_disc + oadr_clf,
        },
        "legitimate_loss_rate": legitimate_loss_rate(counts),
    }


def discriminator_elimination_rates(counts):
    """Fraction of each origin the discriminator filtered out."""
    return {
        "original_fake": counts.real_as_adversarial_original_fake
        / counts.total_original_attacks,
        "legitimate": counts.real_as_adversarial_legitimate / counts.total_legitimate,
        "adversarial_fake": counts.adversarial_as_adversarial / counts.total_adversarial,
    }
