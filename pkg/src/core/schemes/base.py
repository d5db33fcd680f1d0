"""
Compression scheme base classes.

A scheme is a compressor/reconstructor pair. The only channel between the
two halves is the CompressionOutput: reconstruct receives the kept pairs and
the bitstring, never the sample.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Optional, Sequence, Tuple

from src.core.errors import CompressionError, UnrealizableSampleError
from src.core.predictors import Predictor
from src.data.concept_data import FiniteConceptClass, LabeledSample, Pair

logger = logging.getLogger(__name__)

PROPER = "proper"
MAJORITY_VOTE = "majorityVote"
STABLE = "stable"


@dataclass(frozen=True)
class CompressionOutput:
    """
    Kept subsequence of the input sample plus a bitstring.

    Attributes:
        kept: Strictly increasing positions in the input sample
        pairs: The (point, label) pairs at those positions
        bits: Bitstring over '0'/'1'
    """
    kept: Tuple[int, ...] = ()
    pairs: Tuple[Pair, ...] = ()
    bits: str = ""

    def __post_init__(self):
        if len(self.kept) != len(self.pairs):
            raise CompressionError("Every kept position needs exactly one pair")
        if any(b >= a for a, b in zip(self.kept[1:], self.kept)) or any(k < 0 for k in self.kept):
            raise CompressionError(f"Kept positions must be strictly increasing: {self.kept}")
        if any(b not in "01" for b in self.bits):
            raise CompressionError(f"Not a bitstring: {self.bits!r}")

    @classmethod
    def of(cls, sample: LabeledSample, positions: Sequence[int], bits: str = "") -> 'CompressionOutput':
        """Build an output from positions of a sample (sorted and deduplicated)."""
        kept = tuple(sorted(set(positions)))
        return cls(kept=kept, pairs=tuple(sample[i] for i in kept), bits=bits)

    @property
    def size(self) -> int:
        return len(self.kept) + len(self.bits)

    def key(self) -> Tuple[Tuple[Pair, ...], str]:
        """Position-free identity: sorted kept pairs plus bits."""
        return tuple(sorted(self.pairs, key=lambda p: (p[0], Fraction(p[1])))), self.bits

    def to_dict(self, concept_class: Optional[FiniteConceptClass] = None) -> Dict[str, Any]:
        if concept_class is None:
            kept = [[x, str(y)] for x, y in self.pairs]
        else:
            kept = [[concept_class.domain.names[x], concept_class.labels.format(y)] for x, y in self.pairs]
        return {"kept": kept, "bits": self.bits, "size": self.size}


class CompressionScheme:
    """
    Base class for compression schemes.

    Subclasses set `name`, `flags` and `size_budget` and implement
    compress and reconstruct.
    """

    name = "scheme"
    flags: FrozenSet[str] = frozenset()

    def __init__(self, concept_class: FiniteConceptClass):
        self.concept_class = concept_class
        self.size_budget: Optional[int] = None

    def compress(self, sample: LabeledSample) -> CompressionOutput:
        """Compress a sample."""
        raise NotImplementedError

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        """Rebuild a predictor from kept pairs and bits."""
        raise NotImplementedError

    def reconstruct_output(self, output: CompressionOutput) -> Predictor:
        return self.reconstruct(output.pairs, output.bits)

    def get_description(self) -> str:
        """Human-readable description of this scheme."""
        flags = ",".join(sorted(self.flags)) or "none"
        return f"{self.name} [flags: {flags}]"

    def _realizing_mask(self, sample: LabeledSample):
        """Validate a sample and return the mask of concepts consistent with it."""
        sample.validate(self.concept_class.domain, self.concept_class.labels)
        mask = self.concept_class.consistent_mask(sample.pairs)
        if not mask.any():
            raise UnrealizableSampleError(f"{self.name}: no concept is consistent with the sample")
        return mask


def first_positions(sample: LabeledSample, pairs: Sequence[Pair]) -> Tuple[int, ...]:
    """Position of the first occurrence in the sample of each given pair."""
    first: Dict[Pair, int] = {}
    for position, pair in enumerate(sample):
        first.setdefault(pair, position)
    return tuple(sorted({first[p] for p in pairs}))
