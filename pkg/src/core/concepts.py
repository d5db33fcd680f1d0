"""
Losses, realizability and empirical risk minimization over finite classes.

Losses are small objects with an `evaluate(predictor, sample)` method so that
verifiers can treat ordinary and robust losses uniformly:
- ZeroOneLoss
- LpLoss(p), exact for integer p and certified for rational p
- LInfLoss
"""

import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.errors import EmptyClassError, EmptySampleError, LabelSpaceMismatchError
from src.core.predictors import ConceptPredictor, MajorityPredictor, Predictor
from src.core.rational import LossInterval, certified_power
from src.data.concept_data import FiniteConceptClass, LabeledSample, LabelSpace, Label

logger = logging.getLogger(__name__)

LossValue = Union[Fraction, LossInterval]


class Loss:
    """Base class for sample losses."""

    name = "loss"
    needs_real_labels = False

    def pointwise(self, predicted: Label, actual: Label):
        """Loss contribution of one example."""
        raise NotImplementedError

    def aggregate(self, terms: List) -> LossValue:
        """Combine per-example terms into the sample loss."""
        raise NotImplementedError

    def evaluate(self, predictor: Predictor, sample: LabeledSample) -> LossValue:
        if len(sample) == 0:
            raise EmptySampleError(f"{self.name} loss needs a non-empty sample")
        return self.aggregate([self.pointwise(predictor.predict(x), y) for x, y in sample])

    def __str__(self) -> str:
        return self.name


class ZeroOneLoss(Loss):
    """Fraction of mismatched labels."""

    name = "zeroOne"

    def pointwise(self, predicted, actual):
        return 0 if predicted == actual else 1

    def aggregate(self, terms):
        return Fraction(sum(terms), len(terms))


class LpLoss(Loss):
    """Mean of |prediction - label|**p for rational p >= 1."""

    needs_real_labels = True

    def __init__(self, p):
        p = Fraction(p)
        if p < 1:
            raise LabelSpaceMismatchError(f"lp loss needs p >= 1, got {p}")
        self.p = p
        self.name = f"l{p}"

    @property
    def integral(self) -> bool:
        return self.p.denominator == 1

    def pointwise(self, predicted, actual):
        distance = abs(Fraction(predicted) - Fraction(actual))
        if self.integral:
            return distance ** int(self.p)
        return certified_power(distance, self.p)

    def aggregate(self, terms):
        n = len(terms)
        if self.integral:
            return sum(terms, Fraction(0)) / n
        return LossInterval(sum((t.lo for t in terms), Fraction(0)) / n,
                            sum((t.hi for t in terms), Fraction(0)) / n)


class LInfLoss(Loss):
    """Largest absolute deviation."""

    name = "lInf"
    needs_real_labels = True

    def pointwise(self, predicted, actual):
        return abs(Fraction(predicted) - Fraction(actual))

    def aggregate(self, terms):
        return max(terms)


ZERO_ONE = ZeroOneLoss()
L_INF = LInfLoss()


def loss_upper(value: LossValue) -> Fraction:
    """Upper end of a loss value (the value itself when exact)."""
    return value.hi if isinstance(value, LossInterval) else value


def _predictor_labels(predictor: Predictor) -> Optional[LabelSpace]:
    if isinstance(predictor, (ConceptPredictor, MajorityPredictor)):
        return predictor.concept_class.labels
    return None


def _has_real_labels(sample: LabeledSample) -> bool:
    """Real-grid samples carry Fraction labels; binary and multiclass ones carry ints."""
    return any(isinstance(y, Fraction) for _, y in sample)


def empirical_loss(predictor: Predictor, sample: LabeledSample, loss: Loss = ZERO_ONE,
                   labels: Optional[LabelSpace] = None) -> LossValue:
    """
    Empirical loss of a predictor on a sample.

    Args:
        predictor: Predictor to evaluate
        sample: Non-empty labeled sample
        loss: Loss object (ZERO_ONE, L_INF or LpLoss(p))
        labels: Label space of the problem, inferred from concept predictors;
            rule predictors without one are checked against the sample labels

    Returns:
        Exact rational loss, or a LossInterval for non-integer p

    Raises:
        EmptySampleError: If the sample is empty
        LabelSpaceMismatchError: If lp/lInf is used without real-grid labels
    """
    labels = labels or _predictor_labels(predictor)
    if labels is None:
        if loss.needs_real_labels and len(sample) and not _has_real_labels(sample):
            raise LabelSpaceMismatchError(f"{loss} loss requires realGrid labels, the sample has discrete labels")
    elif loss.needs_real_labels and not labels.is_real:
        raise LabelSpaceMismatchError(f"{loss} loss requires realGrid labels, got {labels.kind}")
    return loss.evaluate(predictor, sample)


def is_realizable(concept_class: FiniteConceptClass, sample: LabeledSample,
                  loss: Optional[Loss] = None) -> Optional[int]:
    """
    Canonically-first concept with zero loss on the sample.

    Zero loss means exact agreement for every supported loss, so the loss
    argument only documents intent.

    Returns:
        Concept index, or None when the sample is not realizable
    """
    return concept_class.first_consistent(sample.pairs)


def _concept_losses(concept_class: FiniteConceptClass, sample: LabeledSample, loss: Loss) -> List[LossValue]:
    labels = concept_class.labels
    if isinstance(loss, ZeroOneLoss):
        mistakes = np.zeros(concept_class.n_concepts, dtype=np.int64)
        for x, y in sample:
            index = labels.index_of(y)
            mistakes += 1 if index is None else (concept_class.table[:, x] != index)
        return [Fraction(int(m), len(sample)) for m in mistakes]
    # Per-example lookup tables keyed by label index keep this linear in the table size.
    lookups: List[Dict[int, object]] = [
        {j: loss.pointwise(v, y) for j, v in enumerate(labels.values)} for _, y in sample
    ]
    points = sample.points
    return [
        loss.aggregate([lookup[int(concept_class.table[c, x])] for lookup, x in zip(lookups, points)])
        for c in range(concept_class.n_concepts)
    ]


def _sort_key(value: LossValue) -> Tuple[Fraction, Fraction]:
    if isinstance(value, LossInterval):
        return value.hi, value.lo
    return value, value


def erm(concept_class: FiniteConceptClass, sample: LabeledSample,
        loss: Loss = ZERO_ONE) -> Tuple[int, LossValue]:
    """
    Empirical risk minimization by exhaustive scan.

    Ties go to the canonically-first concept. Certified intervals are
    ordered by their upper end.

    Returns:
        (concept index, its empirical loss)

    Raises:
        EmptyClassError: If the class has no concepts
        EmptySampleError: If the sample is empty
    """
    if concept_class.n_concepts == 0:
        raise EmptyClassError("ERM over an empty class")
    if len(sample) == 0:
        raise EmptySampleError("ERM needs a non-empty sample")
    if loss.needs_real_labels and not concept_class.labels.is_real:
        raise LabelSpaceMismatchError(f"{loss} loss requires realGrid labels")
    sample.validate(concept_class.domain, concept_class.labels)
    losses = _concept_losses(concept_class, sample, loss)
    best = min(range(len(losses)), key=lambda c: (_sort_key(losses[c]), c))
    logger.debug("ERM picked %s with %s loss %s", concept_class.names[best], loss, losses[best])
    return best, losses[best]
