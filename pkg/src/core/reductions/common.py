"""
Shared plumbing for the reductions to binary compression.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

from src.core.errors import AssumptionViolationError, ConstructionError
from src.core.predictors import Predictor
from src.core.schemes.base import CompressionOutput, CompressionScheme
from src.data.concept_data import FiniteConceptClass, LabeledSample


@dataclass(frozen=True)
class ReductionTrace:
    """
    Compression output together with what the reduction fed its substrate.

    Attributes:
        output: What the reduction returns
        substrate: The substrate's own output (its size is the measured f)
        bound: Size bound the output must satisfy, given f
    """
    output: CompressionOutput
    substrate: CompressionOutput
    bound: int

    @property
    def within_bound(self) -> bool:
        return self.output.size <= self.bound

    def to_dict(self) -> Dict[str, Any]:
        return {"size": self.output.size, "f": self.substrate.size, "bound": self.bound,
                "bound_ok": self.within_bound}


class Reduction(CompressionScheme):
    """
    Scheme built on top of a binary substrate scheme.

    Subclasses implement trace(); compress() returns its output.
    """

    def __init__(self, substrate: CompressionScheme, concept_class: FiniteConceptClass):
        super().__init__(concept_class)
        self.substrate = substrate

    def trace(self, sample: LabeledSample) -> ReductionTrace:
        raise NotImplementedError

    def compress(self, sample: LabeledSample) -> CompressionOutput:
        return self.trace(sample).output

    def get_description(self) -> str:
        return f"{self.name}({self.substrate.name})"

    def _require_flags(self, *flags: str) -> None:
        if not self.substrate.flags.intersection(flags):
            raise ConstructionError(
                f"{self.name} needs a substrate flagged {' or '.join(flags)}, got {self.substrate.get_description()}")

    def _require_width(self, expected: int) -> None:
        actual = self.substrate.concept_class.n_points
        if actual != expected:
            raise ConstructionError(f"{self.name} substrate covers {actual} points, expected {expected}")

    def _replay_stable(self, reinflated: LabeledSample, original: CompressionOutput) -> CompressionOutput:
        """Compress the re-inflated kept set and insist it matches the original substrate output."""
        replay = self.substrate.compress(reinflated)
        if replay.key() != original.key():
            raise AssumptionViolationError(
                f"{self.substrate.name} is not stable on this input",
                witness={"expected": original.to_dict(), "replayed": replay.to_dict()})
        return replay


def group_origins(positions: Sequence[int], origin_of) -> Tuple[List[int], List[List[int]]]:
    """
    Group sorted substrate positions by original sample index.

    Args:
        positions: Sorted kept positions in the inflated sample
        origin_of: Maps an inflated position to (original index, sub-index)

    Returns:
        (original indices, sub-index lists), both in increasing order
    """
    origins: List[int] = []
    groups: List[List[int]] = []
    for position in positions:
        origin, sub_index = origin_of(position)
        if origins and origins[-1] == origin:
            groups[-1].append(sub_index)
        else:
            origins.append(origin)
            groups.append([sub_index])
    return origins, groups


def first_firing(predictor: Predictor, base: int, width: int) -> int:
    """Smallest j < width with predictor(base + j) == 1, or -1."""
    for j in range(width):
        if predictor.predict(base + j) == 1:
            return j
    return -1
