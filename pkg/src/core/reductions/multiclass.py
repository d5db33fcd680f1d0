"""
Multiclass to binary reductions.

A multiclass class C over labels Y is inflated into the binary class of
indicators g_c(x, y) = 1[c(x) = y] over the InflatedDomain X x Y, and a
sample S into S_Y = {((x_i, y), 1[y = y_i])}. The reductions below wrap a
binary scheme for the inflated class:
- ReduceGeneral: any substrate, sub-index bits per kept inflated pair
- ReduceProperOrMajority: proper or majority-vote substrates, positive pairs only
- ReduceStable: stable substrates, no label bits
- Graphdim1Scheme: size-1 scheme for classes of graph dimension at most 1
- PiecewiseThresholdInflatedScheme: stable scheme for inflated k-piecewise classes
- AgnosticWrap: ERM followed by a realizable scheme on the correct subsequence
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from src.config import DimensionLimits
from src.core.bitcodec import origins_overhead, pack_origins, unpack_origins
from src.core.concepts import ZERO_ONE, Loss, erm
from src.core.dimensions import graph_dimension
from src.core.errors import (
    AssumptionViolationError,
    ConstructionError,
    DecodeError,
    EmptyClassError,
    LabelSpaceMismatchError,
)
from src.core.predictors import ConceptPredictor, Predictor, RulePredictor
from src.core.rational import ceil_log2
from src.core.reductions.common import Reduction, ReductionTrace, first_firing, group_origins
from src.core.schemes.base import (
    MAJORITY_VOTE,
    PROPER,
    STABLE,
    CompressionOutput,
    CompressionScheme,
    first_positions,
)
from src.data.concept_data import (
    FiniteConceptClass,
    InflatedDomain,
    LabeledSample,
    LabelSpace,
    Pair,
)

logger = logging.getLogger(__name__)


def inflate_class(concept_class: FiniteConceptClass) -> FiniteConceptClass:
    """
    Binary indicator class g_c(x, y) = 1[c(x) = y] over X x Y.

    Concept order and names are preserved.
    """
    labels = concept_class.labels
    domain = InflatedDomain.over(concept_class.domain, labels.values)
    width = labels.count
    table = (concept_class.table[:, :, None] == np.arange(width)[None, None, :]).astype(np.int64)
    return FiniteConceptClass(domain=domain, labels=LabelSpace.binary(),
                              table=table.reshape(concept_class.n_concepts, domain.size),
                              names=concept_class.names)


def _label_index(labels: LabelSpace, value) -> int:
    index = labels.index_of(value)
    if index is None:
        raise LabelSpaceMismatchError(f"Label {value!r} is not in {labels.kind}({labels.size})")
    return index


def inflate_sample(sample: LabeledSample, labels: LabelSpace) -> LabeledSample:
    """S_Y in canonical order: sample order major, label order minor."""
    width = labels.count
    pairs = []
    for x, y in sample:
        target = _label_index(labels, y)
        pairs.extend((x * width + j, int(j == target)) for j in range(width))
    return LabeledSample(tuple(pairs))


def _check_inflated_substrate(substrate: CompressionScheme, concept_class: FiniteConceptClass) -> None:
    expected = concept_class.n_points * concept_class.labels.count
    if substrate.concept_class.n_points != expected or not substrate.concept_class.labels.is_binary:
        raise ConstructionError(
            f"Substrate must be a binary scheme over {expected} inflated points, "
            f"got {substrate.concept_class.n_points} {substrate.concept_class.labels.kind} points")


def _multiclass_predictor(inflated: Predictor, concept_class: FiniteConceptClass, description: str) -> RulePredictor:
    """Smallest label index whose inflated prediction is 1, else label index 0."""
    labels = concept_class.labels
    width = labels.count
    outputs = []
    for x in range(concept_class.n_points):
        j = first_firing(inflated, x * width, width)
        outputs.append(labels.value(max(j, 0)))
    return RulePredictor(outputs, description)


class ReduceGeneral(Reduction):
    """
    Works with any substrate scheme for the inflated class.

    Every kept inflated pair ((x_i, y), z) is stored as the original pair
    (x_i, y_i) plus the label index of y; z is recovered as 1[y = y_i].
    """

    name = "multiclass-general"

    def __init__(self, substrate: CompressionScheme, concept_class: FiniteConceptClass):
        super().__init__(substrate, concept_class)
        _check_inflated_substrate(substrate, concept_class)
        self.width = ceil_log2(concept_class.labels.count)

    def trace(self, sample: LabeledSample) -> ReductionTrace:
        sample.validate(self.concept_class.domain, self.concept_class.labels)
        count = self.concept_class.labels.count
        inner = self.substrate.compress(inflate_sample(sample, self.concept_class.labels))
        origins, groups = group_origins(inner.kept, lambda p: divmod(p, count))
        bits = pack_origins(groups, self.width, inner.bits)
        output = CompressionOutput.of(sample, origins, bits)
        bound = inner.size * (1 + self.width) + origins_overhead(groups, inner.bits)
        return ReductionTrace(output, inner, bound)

    def inflated_pairs(self, pairs: Sequence[Pair], groups: Sequence[Sequence[int]]) -> List[Pair]:
        labels = self.concept_class.labels
        width = labels.count
        rebuilt = []
        for (x, y), group in zip(pairs, groups):
            target = _label_index(labels, y)
            for j in group:
                if j >= width:
                    raise DecodeError(f"Label index {j} out of range for {width} labels")
                rebuilt.append((x * width + j, int(j == target)))
        return rebuilt

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        groups, inner_bits = unpack_origins(bits, len(pairs), self.width)
        inflated = self.substrate.reconstruct(self.inflated_pairs(pairs, groups), inner_bits)
        return _multiclass_predictor(inflated, self.concept_class, self.get_description())


class ReduceProperOrMajority(Reduction):
    """
    Proper or majority-vote substrates only see the positive pairs ((x_i, y_i), 1).

    The kept inflated pairs map one-to-one onto original pairs, so no label
    bits are needed.
    """

    name = "multiclass-proper-majority"

    def __init__(self, substrate: CompressionScheme, concept_class: FiniteConceptClass):
        super().__init__(substrate, concept_class)
        _check_inflated_substrate(substrate, concept_class)
        self._require_flags(PROPER, MAJORITY_VOTE)

    def positive_pairs(self, pairs: Sequence[Pair]) -> LabeledSample:
        labels = self.concept_class.labels
        width = labels.count
        return LabeledSample(tuple((x * width + _label_index(labels, y), 1) for x, y in pairs))

    def trace(self, sample: LabeledSample) -> ReductionTrace:
        sample.validate(self.concept_class.domain, self.concept_class.labels)
        inner = self.substrate.compress(self.positive_pairs(sample.pairs))
        output = CompressionOutput.of(sample, inner.kept, inner.bits)
        return ReductionTrace(output, inner, inner.size)

    def inflated_predictor(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        """Substrate reconstruction over the inflated domain."""
        return self.substrate.reconstruct(self.positive_pairs(pairs).pairs, bits)

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        inflated = self.inflated_predictor(pairs, bits)
        return _multiclass_predictor(inflated, self.concept_class, self.get_description())


class ReduceStable(Reduction):
    """
    Stable substrates: keep the original pair of every point the substrate keeps.

    Reconstruction re-inflates the kept pairs with all labels and reruns the
    substrate compressor; stability makes that reproduce the original
    substrate output, which is checked at compression time.
    """

    name = "multiclass-stable"
    flags = frozenset({STABLE})

    def __init__(self, substrate: CompressionScheme, concept_class: FiniteConceptClass):
        super().__init__(substrate, concept_class)
        _check_inflated_substrate(substrate, concept_class)
        self._require_flags(STABLE)

    def trace(self, sample: LabeledSample) -> ReductionTrace:
        sample.validate(self.concept_class.domain, self.concept_class.labels)
        labels = self.concept_class.labels
        inner = self.substrate.compress(inflate_sample(sample, labels))
        points = {x // labels.count for x, _ in inner.pairs}
        positions = _first_position_per_point(sample, points)
        kept = sample.subsequence(positions)
        self._replay_stable(inflate_sample(kept, labels), inner)
        output = CompressionOutput.of(sample, positions, inner.bits)
        return ReductionTrace(output, inner, inner.size)

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        replay = self.substrate.compress(inflate_sample(LabeledSample(tuple(pairs)), self.concept_class.labels))
        if replay.bits != bits:
            raise AssumptionViolationError("Replayed substrate bits differ from the stored ones",
                                           witness={"stored": bits, "replayed": replay.bits})
        inflated = self.substrate.reconstruct_output(replay)
        return _multiclass_predictor(inflated, self.concept_class, self.get_description())


def _first_position_per_point(sample: LabeledSample, points) -> List[int]:
    first: Dict[int, int] = {}
    for position, (x, _) in enumerate(sample):
        if x in points:
            first.setdefault(x, position)
    return sorted(first.values())


@dataclass
class Graphdim1Trace:
    """Iteration record of one Graphdim1Scheme compression."""
    points: List[int] = field(default_factory=list)
    consistent_sizes: List[int] = field(default_factory=list)
    first_ideal: int = 0

    @property
    def iterations(self) -> int:
        return max(len(self.points) - 1, 0)

    def to_dict(self) -> Dict[str, Any]:
        return {"points": self.points, "consistent_sizes": self.consistent_sizes,
                "iterations": self.iterations, "first_ideal": self.first_ideal}


class Graphdim1Scheme(CompressionScheme):
    """
    Size-1 compression for classes of graph dimension at most 1.

    With c0 the first concept, x <= y when every concept that disagrees
    with c0 at x also disagrees with it at y. This order is a tree order
    on the domain; the compressor walks down it from the deepest
    disagreement of the realizing concept and keeps one pair.
    """

    name = "graphdim1"

    def __init__(self, concept_class: FiniteConceptClass):
        super().__init__(concept_class)
        if concept_class.n_concepts == 0:
            raise EmptyClassError("graphdim1 scheme over an empty class")
        report = graph_dimension(concept_class, DimensionLimits(max_points=None, max_set_size=2))
        if report.value > 1:
            raise ConstructionError(f"graphdim1 needs graph dimension <= 1, found a G-shattered set "
                                    f"{list(report.points)}")
        self.size_budget = 1
        table = concept_class.table
        disagree = table != table[0]
        self.disagree = disagree
        # leq[x, y]: no concept disagrees with c0 at x while agreeing at y
        self.leq = ~(disagree[:, :, None] & ~disagree[:, None, :]).any(axis=0)

    def _deepest(self, candidates: Sequence[int]) -> int:
        for a in candidates:
            if all(self.leq[a, b] for b in candidates):
                return a
        raise AssumptionViolationError("Candidate points are not a chain of the tree order",
                                       witness={"points": list(candidates)})

    def _agreeing(self, concept: int, point: int) -> np.ndarray:
        table = self.concept_class.table
        return table[:, point] == table[concept, point]

    def compress_with_trace(self, sample: LabeledSample) -> Tuple[CompressionOutput, Graphdim1Trace]:
        """Compress and return the walk down the tree order."""
        mask = self._realizing_mask(sample)
        concept = int(np.flatnonzero(mask)[0])
        trace = Graphdim1Trace()
        points = list(dict.fromkeys(sample.points))
        disagreements = [x for x in points if self.disagree[concept, x]]
        if not disagreements:
            return CompressionOutput(), trace
        table = self.concept_class.table
        z = self._deepest(disagreements)
        trace.first_ideal = sum(1 for y in points if self.leq[z, y])
        consistent = self._agreeing(concept, z)
        trace.points.append(z)
        trace.consistent_sizes.append(int(consistent.sum()))
        while True:
            ambiguous = [y for y in points if self.leq[z, y] and len(np.unique(table[consistent, y])) > 1]
            if not ambiguous:
                break
            z_next = self._deepest(ambiguous)
            shrunk = self._agreeing(concept, z_next)
            if (shrunk & ~consistent).any() or shrunk.sum() >= consistent.sum():
                raise AssumptionViolationError(
                    "Consistent set did not shrink strictly",
                    witness={"from": self.concept_class.domain.names[z],
                             "to": self.concept_class.domain.names[z_next]})
            z, consistent = z_next, shrunk
            trace.points.append(z)
            trace.consistent_sizes.append(int(consistent.sum()))
            if trace.iterations > trace.first_ideal:
                raise AssumptionViolationError("Walk exceeded the size of the first ideal",
                                               witness=trace.to_dict())
        logger.debug("graphdim1 walk: %s", trace.to_dict())
        position = sample.points.index(z)
        return CompressionOutput.of(sample, [position]), trace

    def compress(self, sample: LabeledSample) -> CompressionOutput:
        return self.compress_with_trace(sample)[0]

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        if bits:
            raise DecodeError("graphdim1 outputs carry no bits")
        if not pairs:
            return ConceptPredictor(self.concept_class, 0)
        if len(pairs) != 1:
            raise DecodeError(f"graphdim1 keeps at most one pair, got {len(pairs)}")
        mask = self.concept_class.consistent_mask(pairs)
        if not mask.any():
            raise DecodeError(f"No concept agrees with the kept pair {pairs[0]}")
        table = self.concept_class.table
        outputs = []
        for x in range(self.concept_class.n_points):
            column = np.unique(table[mask, x])
            index = column[0] if len(column) == 1 else table[0, x]
            outputs.append(self.concept_class.labels.value(index))
        return RulePredictor(outputs, self.name)


class PiecewiseThresholdInflatedScheme(CompressionScheme):
    """
    Stable scheme for the inflation of a k-piecewise constant class.

    For every label whose region is an interval of the ordered domain, the
    leftmost and rightmost positive pairs pin it down.
    """

    name = "piecewise-threshold"
    flags = frozenset({STABLE})

    def __init__(self, inflated_class: FiniteConceptClass, k: int):
        super().__init__(inflated_class)
        if not isinstance(inflated_class.domain, InflatedDomain):
            raise ConstructionError("piecewise-threshold scheme needs a class over an InflatedDomain")
        if k < 1:
            raise ConstructionError(f"k must be positive, got {k}")
        self.k = k
        self.size_budget = 2 * k

    def compress(self, sample: LabeledSample) -> CompressionOutput:
        self._realizing_mask(sample)
        domain: InflatedDomain = self.concept_class.domain
        ends: Dict[int, Tuple[int, int]] = {}
        for p, z in sample:
            if z != 1:
                continue
            x, j = domain.pair(p)
            low, high = ends.get(j, (x, x))
            ends[j] = (min(low, x), max(high, x))
        kept = [(domain.index(x, j), 1) for j, (low, high) in ends.items() for x in {low, high}]
        return CompressionOutput.of(sample, first_positions(sample, kept))

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        if bits:
            raise DecodeError("piecewise-threshold outputs carry no bits")
        domain: InflatedDomain = self.concept_class.domain
        ends: Dict[int, Tuple[int, int]] = {}
        for p, z in pairs:
            if z != 1:
                raise DecodeError(f"Kept pair {(p, z)} is not positive")
            x, j = domain.pair(p)
            low, high = ends.get(j, (x, x))
            ends[j] = (min(low, x), max(high, x))
        outputs = []
        for p in range(domain.size):
            x, j = domain.pair(p)
            outputs.append(int(j in ends and ends[j][0] <= x <= ends[j][1]))
        return RulePredictor(outputs, f"{self.name}(k={self.k})")


class AgnosticWrap(CompressionScheme):
    """
    Agnostic compression from a realizable scheme.

    The realizable scheme runs on the subsequence where the ERM concept is
    correct; positions are mapped back into the full sample.
    """

    name = "agnostic"

    def __init__(self, realizable: CompressionScheme, concept_class: FiniteConceptClass, loss: Loss = ZERO_ONE):
        super().__init__(concept_class)
        self.realizable = realizable
        self.loss = loss
        self.flags = realizable.flags - {STABLE}
        self.size_budget = realizable.size_budget

    def correct_positions(self, sample: LabeledSample) -> List[int]:
        """Positions where the ERM concept is correct (all of them for an empty sample)."""
        if len(sample) == 0:
            return []
        best, best_loss = erm(self.concept_class, sample, self.loss)
        logger.debug("agnostic ERM concept %s with loss %s", self.concept_class.names[best], best_loss)
        return [i for i, (x, y) in enumerate(sample) if self.concept_class.value(best, x) == y]

    def compress(self, sample: LabeledSample) -> CompressionOutput:
        positions = self.correct_positions(sample)
        inner = self.realizable.compress(sample.subsequence(positions))
        return CompressionOutput.of(sample, [positions[k] for k in inner.kept], inner.bits)

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        return self.realizable.reconstruct(pairs, bits)

    def get_description(self) -> str:
        return f"{self.name}({self.realizable.get_description()})"


def reduce_general(substrate: CompressionScheme, concept_class: FiniteConceptClass) -> ReduceGeneral:
    return ReduceGeneral(substrate, concept_class)


def reduce_proper_or_majority(substrate: CompressionScheme,
                              concept_class: FiniteConceptClass) -> ReduceProperOrMajority:
    return ReduceProperOrMajority(substrate, concept_class)


def reduce_stable(substrate: CompressionScheme, concept_class: FiniteConceptClass) -> ReduceStable:
    return ReduceStable(substrate, concept_class)


def graphdim1_scheme(concept_class: FiniteConceptClass) -> Graphdim1Scheme:
    return Graphdim1Scheme(concept_class)


def piecewise_threshold_inflated_scheme(inflated_class: FiniteConceptClass,
                                        k: int) -> PiecewiseThresholdInflatedScheme:
    return PiecewiseThresholdInflatedScheme(inflated_class, k)


def agnostic_wrap(realizable: CompressionScheme, concept_class: FiniteConceptClass,
                  loss: Loss = ZERO_ONE) -> AgnosticWrap:
    return AgnosticWrap(realizable, concept_class, loss)
