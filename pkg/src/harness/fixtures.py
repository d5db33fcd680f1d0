"""
Negative-control schemes.

Both wrap a working scheme and break exactly one of its guarantees, so the
verifiers can be shown to reject them.
"""

from typing import Sequence

from src.core.predictors import Predictor, RulePredictor
from src.core.schemes.base import CompressionOutput, CompressionScheme
from src.data.concept_data import LabeledSample, Pair


class SabotagedScheme(CompressionScheme):
    """Reconstruction of the wrapped scheme with the output on the first kept point flipped."""

    name = "sabotaged"

    def __init__(self, inner: CompressionScheme):
        super().__init__(inner.concept_class)
        self.inner = inner
        self.flags = inner.flags
        self.size_budget = inner.size_budget

    def compress(self, sample: LabeledSample) -> CompressionOutput:
        return self.inner.compress(sample)

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        predictor = self.inner.reconstruct(pairs, bits)
        outputs = list(predictor.values())
        target = pairs[0][0] if pairs else 0
        labels = self.concept_class.labels
        index = labels.index_of(outputs[target])
        outputs[target] = labels.value((index + 1) % labels.count)
        return RulePredictor(outputs, f"{self.name}({self.inner.name})")


class UnstableScheme(CompressionScheme):
    """
    The wrapped scheme plus one trailing bit: the parity of the sample size.

    Dropping a single non-kept example flips the bit, so the output changes.
    """

    name = "unstable"

    def __init__(self, inner: CompressionScheme):
        super().__init__(inner.concept_class)
        self.inner = inner
        self.flags = inner.flags

    def compress(self, sample: LabeledSample) -> CompressionOutput:
        output = self.inner.compress(sample)
        return CompressionOutput(output.kept, output.pairs, output.bits + str(len(sample) % 2))

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        return self.inner.reconstruct(pairs, bits[:-1])
