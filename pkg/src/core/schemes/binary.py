"""
Concrete binary compression schemes.

- ProperExhaustiveScheme: smallest subsequence whose first consistent concept fits the sample
- MajorityBoostScheme: multiplicative-weights boosting, majority-vote reconstruction
- ThresholdStableScheme: boundary points of threshold families, optionally per block
- VersionSpaceStableScheme: minimal pairs pinning the per-block consistent patterns
- SoaScheme: mistake-driven compression with the standard optimal algorithm
"""

import logging
import math
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.config import BOOST_GAMMA, BOOST_ROUND_FACTOR, DimensionLimits
from src.core.bitcodec import BitReader, BitWriter
from src.core.dimensions import LittlestoneOracle, vc_dimension
from src.core.errors import (
    BudgetExceededError,
    ConstructionError,
    DecodeError,
    LabelSpaceMismatchError,
    SchemeFailureError,
)
from src.core.predictors import ConceptPredictor, MajorityPredictor, Predictor, RulePredictor
from src.core.schemes.base import (
    MAJORITY_VOTE,
    PROPER,
    STABLE,
    CompressionOutput,
    CompressionScheme,
    first_positions,
)
from src.data.concept_data import FiniteConceptClass, LabeledSample, Pair

logger = logging.getLogger(__name__)


def _require_binary(concept_class: FiniteConceptClass, name: str) -> None:
    if not concept_class.labels.is_binary:
        raise ConstructionError(f"{name} needs a binary class, got {concept_class.labels.kind}")


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


def _has_cover(uncovered: int, masks: Sequence[int], slots: int) -> bool:
    """Whether at most `slots` of the masks cover every bit of `uncovered`."""
    if uncovered == 0:
        return True
    if slots == 0:
        return False
    lowest = uncovered & -uncovered
    useful = [m & uncovered for m in masks if m & uncovered]
    if not useful or _popcount(uncovered) > slots * max(_popcount(m) for m in useful):
        return False
    for mask in _undominated([m for m in useful if m & lowest]):
        if _has_cover(uncovered & ~mask, useful, slots - 1):
            return True
    return False


def _undominated(masks: Sequence[int]) -> List[int]:
    unique = sorted(set(masks), key=_popcount, reverse=True)
    kept: List[int] = []
    for mask in unique:
        if not any(mask | other == other for other in kept):
            kept.append(mask)
    return kept


def lexicographic_min_cover(universe: int, masks: Sequence[int],
                            budget: Optional[int] = None) -> Optional[Tuple[int, ...]]:
    """
    Lexicographically-first smallest set of mask indices covering the universe.

    Args:
        universe: Bitmask of the elements to cover
        masks: Candidate masks, in the order that defines "lexicographic"
        budget: Largest cover size to try (None for no limit)

    Returns:
        Sorted tuple of indices, or None if no cover fits the budget
    """
    if universe == 0:
        return ()
    candidates: List[int] = []
    seen = set()
    for i, mask in enumerate(masks):
        mask &= universe
        if mask and mask not in seen:
            seen.add(mask)
            candidates.append(i)
    cover_masks = [masks[i] & universe for i in candidates]
    limit = len(candidates) if budget is None else min(budget, len(candidates))
    size = next((k for k in range(1, limit + 1) if _has_cover(universe, cover_masks, k)), None)
    if size is None:
        return None
    chosen: List[int] = []
    uncovered, start = universe, 0
    for slot in range(size):
        for j in range(start, len(candidates)):
            rest = uncovered & ~cover_masks[j]
            if _has_cover(rest, cover_masks[j + 1:], size - slot - 1):
                chosen.append(candidates[j])
                uncovered, start = rest, j + 1
                break
    return tuple(chosen)


class ProperExhaustiveScheme(CompressionScheme):
    """
    Proper scheme keeping the lexicographically-first smallest subsequence T
    whose canonically-first consistent concept is correct on the whole sample.
    """

    name = "proper"
    flags = frozenset({PROPER})

    def __init__(self, concept_class: FiniteConceptClass, budget: int):
        _require_binary(concept_class, self.name)
        if budget < 1:
            raise ConstructionError(f"Budget must be at least 1, got {budget}")
        super().__init__(concept_class)
        self.size_budget = budget

    def compress(self, sample: LabeledSample) -> CompressionOutput:
        consistent = self._realizing_mask(sample)
        target = int(np.flatnonzero(consistent)[0])
        # Every concept before the target must be ruled out by some kept pair.
        universe = (1 << target) - 1
        table = self.concept_class.table
        masks = []
        for x, y in sample:
            wrong = np.flatnonzero(table[:target, x] != y)
            masks.append(sum(1 << int(c) for c in wrong))
        cover = lexicographic_min_cover(universe, masks, self.size_budget)
        if cover is None:
            raise BudgetExceededError(f"No subsequence of size <= {self.size_budget} reproduces the sample")
        return CompressionOutput.of(sample, cover)

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        if bits:
            raise DecodeError(f"{self.name} uses no bits, got {len(bits)}")
        index = self.concept_class.first_consistent(pairs)
        if index is None:
            raise SchemeFailureError("Kept pairs are inconsistent with every concept")
        return ConceptPredictor(self.concept_class, index)


class MajorityBoostScheme(CompressionScheme):
    """
    Boosting scheme with majority-vote reconstruction.

    Runs exactly T = ceil(32 ln |S|) rounds. Each round's weak hypothesis is
    the first consistent concept of a support of at most d_VC + 1 sample
    examples. Concepts are tried by decreasing weighted accuracy (ties by
    index); the first one reaching 1/2 + gamma for which such a support
    exists is taken, with the support chosen as the smallest set of examples
    it labels correctly that rules out every earlier concept,
    lexicographically first in weight-rank order. Correct examples are then
    down-weighted by (1/2 - gamma) / (1/2 + gamma).

    A round without an admissible concept, or a final majority (ties
    predict 0) that errs on the sample, raises SchemeFailureError.

    Bits: gamma code of the round count, then one membership bit per kept
    pair for every round.
    """

    name = "boost"
    flags = frozenset({MAJORITY_VOTE})

    def __init__(self, concept_class: FiniteConceptClass):
        _require_binary(concept_class, self.name)
        super().__init__(concept_class)
        self.support_size = vc_dimension(concept_class, DimensionLimits.unbounded()).value + 1
        self.decay = (Fraction(1, 2) - BOOST_GAMMA) / (Fraction(1, 2) + BOOST_GAMMA)

    @staticmethod
    def rounds_for(n: int) -> int:
        return max(1, math.ceil(BOOST_ROUND_FACTOR * math.log(n))) if n > 0 else 0

    def _weak_learner(self, pairs: Sequence[Pair]) -> int:
        index = self.concept_class.first_consistent(pairs)
        if index is None:
            raise SchemeFailureError("Weak learner found no concept consistent with its support")
        return index

    def _support_for(self, concept: int, correct: np.ndarray, ranking: Sequence[int],
                     pinned: Dict[int, bool]) -> Optional[Tuple[int, ...]]:
        """Sample positions whose first consistent concept is `concept`, or None past the budget."""
        if pinned.get(concept) is False:
            return None
        universe = (1 << concept) - 1
        ruled_out = ~correct[:concept]
        usable = correct[concept]
        # Every earlier concept must be wrong somewhere `concept` is right
        if not ruled_out[:, usable].any(axis=1).all():
            pinned[concept] = False
            return None
        masks = [sum(1 << int(c) for c in np.flatnonzero(ruled_out[:, i])) if usable[i] else 0
                 for i in ranking]
        cover = lexicographic_min_cover(universe, masks, self.support_size)
        pinned[concept] = cover is not None
        if cover is None:
            return None
        return tuple(sorted(ranking[j] for j in cover))

    def _round(self, correct: np.ndarray, weights: List[Fraction],
               pinned: Dict[int, bool]) -> Tuple[Tuple[int, ...], int]:
        ranking = sorted(range(len(weights)), key=lambda i: (-weights[i], i))
        target = (Fraction(1, 2) + BOOST_GAMMA) * sum(weights)
        accuracy = [sum((w for w, ok in zip(weights, row) if ok), Fraction(0)) for row in correct]
        for concept in sorted(range(len(accuracy)), key=lambda c: (-accuracy[c], c)):
            if accuracy[concept] < target:
                break
            support = self._support_for(concept, correct, ranking, pinned)
            if support is not None:
                return support, concept
        raise SchemeFailureError(
            f"No concept of weighted accuracy >= 1/2+{BOOST_GAMMA} is the first consistent concept "
            f"of {self.support_size} examples")

    def compress(self, sample: LabeledSample) -> CompressionOutput:
        self._realizing_mask(sample)
        n = len(sample)
        rounds = self.rounds_for(n)
        xs = [x for x, _ in sample]
        ys = np.array([int(y) for _, y in sample], dtype=np.int64)
        correct = self.concept_class.table[:, xs] == ys
        weights = [Fraction(1)] * n
        pinned: Dict[int, bool] = {}
        supports: List[Tuple[int, ...]] = []
        concepts: List[int] = []
        for _ in range(rounds):
            support, concept = self._round(correct, weights, pinned)
            supports.append(support)
            concepts.append(concept)
            weights = [w * self.decay if ok else w for w, ok in zip(weights, correct[concept])]
        if concepts:
            ones = self.concept_class.table[concepts][:, xs].sum(axis=0)
            wrong = np.flatnonzero((2 * ones > rounds).astype(np.int64) != ys)
            if wrong.size:
                raise SchemeFailureError(
                    f"Majority of {rounds} boosting rounds errs at sample position {int(wrong[0])}")
        logger.debug("Boosting ran %d rounds on %d examples (%d distinct hypotheses)",
                     rounds, n, len(set(concepts)))
        kept = sorted(set(i for support in supports for i in support))
        slot = {position: j for j, position in enumerate(kept)}
        writer = BitWriter()
        writer.write_gamma(len(supports) + 1)
        for support in supports:
            members = set(slot[i] for i in support)
            writer.write_bits("".join("1" if j in members else "0" for j in range(len(kept))))
        return CompressionOutput.of(sample, kept, writer.getvalue())

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> MajorityPredictor:
        reader = BitReader(bits)
        rounds = reader.read_gamma() - 1
        concepts = []
        for _ in range(rounds):
            membership = reader.read_bits(len(pairs))
            support = [pair for pair, bit in zip(pairs, membership) if bit == "1"]
            concepts.append(self._weak_learner(support))
        reader.expect_end()
        return MajorityPredictor(self.concept_class, concepts)


def _monotone_orientation(block_table: np.ndarray) -> Optional[str]:
    if block_table.shape[1] < 2:
        return "increasing"
    steps = np.diff(block_table, axis=1)
    if (steps >= 0).all():
        return "increasing"
    if (steps <= 0).all():
        return "decreasing"
    return None


def _blocks(concept_class: FiniteConceptClass, blocks) -> Tuple[Tuple[int, ...], ...]:
    if blocks is None:
        return (tuple(range(concept_class.n_points)),)
    blocks = tuple(tuple(int(x) for x in block) for block in blocks)
    covered = sorted(x for block in blocks for x in block)
    if covered != list(range(concept_class.n_points)):
        raise ConstructionError("Blocks must partition the domain")
    return blocks


class ThresholdStableScheme(CompressionScheme):
    """
    Stable proper scheme for threshold families.

    Within each block (default: the whole domain in index order), keeps the
    last point labeled with the "low" label and the first point labeled with
    the "high" label, where the orientation of the family decides which label
    comes first.
    """

    name = "threshold"
    flags = frozenset({PROPER, STABLE})

    def __init__(self, concept_class: FiniteConceptClass, blocks: Optional[Sequence[Sequence[int]]] = None):
        _require_binary(concept_class, self.name)
        super().__init__(concept_class)
        self.blocks = _blocks(concept_class, blocks)
        self.orientations = []
        for block in self.blocks:
            orientation = _monotone_orientation(concept_class.table[:, list(block)])
            if orientation is None:
                raise ConstructionError(f"Class is not a threshold family on block {block}")
            self.orientations.append(orientation)
        self.size_budget = 2 * len(self.blocks)

    def compress(self, sample: LabeledSample) -> CompressionOutput:
        self._realizing_mask(sample)
        chosen: List[Pair] = []
        for block, orientation in zip(self.blocks, self.orientations):
            rank = {x: r for r, x in enumerate(block)}
            first_label = 0 if orientation == "increasing" else 1
            inside = [(x, y) for x, y in sample if x in rank]
            low = [p for p in inside if p[1] == first_label]
            high = [p for p in inside if p[1] != first_label]
            if low:
                chosen.append(max(low, key=lambda p: rank[p[0]]))
            if high:
                chosen.append(min(high, key=lambda p: rank[p[0]]))
        return CompressionOutput.of(sample, first_positions(sample, chosen))

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        if bits:
            raise DecodeError(f"{self.name} uses no bits, got {len(bits)}")
        index = self.concept_class.first_consistent(pairs)
        if index is None:
            raise SchemeFailureError("Kept pairs are inconsistent with every concept")
        return ConceptPredictor(self.concept_class, index)


class VersionSpaceStableScheme(CompressionScheme):
    """
    Stable proper scheme for any binary class.

    For each block, keeps the canonically-first smallest set of distinct
    sample pairs that rules out exactly the block patterns the whole sample
    rules out. Canonical order is (point, label), so the result ignores
    sample positions and is unchanged when non-kept examples are removed.
    """

    name = "version-space"
    flags = frozenset({PROPER, STABLE})

    def __init__(self, concept_class: FiniteConceptClass, blocks: Optional[Sequence[Sequence[int]]] = None):
        _require_binary(concept_class, self.name)
        super().__init__(concept_class)
        self.blocks = _blocks(concept_class, blocks)
        self.patterns = [np.unique(concept_class.table[:, list(block)], axis=0) for block in self.blocks]

    def _block_pairs(self, sample: LabeledSample, block: Tuple[int, ...], patterns: np.ndarray) -> List[Pair]:
        local = {x: j for j, x in enumerate(block)}
        distinct = sorted({(x, int(y)) for x, y in sample if x in local})
        if not distinct:
            return []
        agrees = [patterns[:, local[x]] == y for x, y in distinct]
        consistent = np.logical_and.reduce(agrees)
        universe = sum(1 << int(p) for p in np.flatnonzero(~consistent))
        masks = [sum(1 << int(p) for p in np.flatnonzero(~a)) for a in agrees]
        cover = lexicographic_min_cover(universe, masks)
        return [distinct[i] for i in cover]

    def compress(self, sample: LabeledSample) -> CompressionOutput:
        self._realizing_mask(sample)
        chosen: List[Pair] = []
        for block, patterns in zip(self.blocks, self.patterns):
            chosen.extend(self._block_pairs(sample, block, patterns))
        return CompressionOutput.of(sample, first_positions(sample, chosen))

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        if bits:
            raise DecodeError(f"{self.name} uses no bits, got {len(bits)}")
        index = self.concept_class.first_consistent(pairs)
        if index is None:
            raise SchemeFailureError("Kept pairs are inconsistent with every concept")
        return ConceptPredictor(self.concept_class, index)


class SoaScheme(CompressionScheme):
    """
    Mistake-driven compression with the standard optimal algorithm.

    The predictor for a kept set T returns the stored label on kept points,
    the unanimous label of the version space when there is one, and
    otherwise the label whose restricted version space has the larger
    Littlestone dimension (ties predict 1). Compression adds the first
    mistaken example in sample order until none remain.
    """

    name = "soa"
    flags = frozenset()

    def __init__(self, concept_class: FiniteConceptClass):
        _require_binary(concept_class, self.name)
        super().__init__(concept_class)
        self.oracle = LittlestoneOracle(concept_class)
        self.size_budget = self.oracle.dimension(self.oracle.full)

    def _predictions(self, pairs: Sequence[Pair]) -> Tuple[int, ...]:
        stored: Dict[int, int] = {x: int(y) for x, y in pairs}
        version_space = self.oracle.mask_of(np.flatnonzero(self.concept_class.consistent_mask(pairs)))
        if version_space == 0:
            raise SchemeFailureError("Kept pairs are inconsistent with every concept")
        outputs = []
        for x in range(self.concept_class.n_points):
            if x in stored:
                outputs.append(stored[x])
                continue
            zero = self.oracle.restrict(version_space, x, 0)
            one = self.oracle.restrict(version_space, x, 1)
            if not one or not zero:
                outputs.append(1 if one else 0)
            else:
                outputs.append(1 if self.oracle.dimension(one) >= self.oracle.dimension(zero) else 0)
        return tuple(outputs)

    def compress(self, sample: LabeledSample) -> CompressionOutput:
        self._realizing_mask(sample)
        kept: List[int] = []
        while True:
            outputs = self._predictions([sample[i] for i in kept])
            mistake = next((i for i, (x, y) in enumerate(sample) if outputs[x] != y), None)
            if mistake is None:
                break
            kept.append(mistake)
            logger.debug("SOA mistake %d at position %d", len(kept), mistake)
        return CompressionOutput.of(sample, kept)

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        if bits:
            raise DecodeError(f"{self.name} uses no bits, got {len(bits)}")
        return RulePredictor(self._predictions(pairs), "soa")


def proper_exhaustive_scheme(concept_class: FiniteConceptClass, budget: int) -> ProperExhaustiveScheme:
    return ProperExhaustiveScheme(concept_class, budget)


def majority_boost_scheme(concept_class: FiniteConceptClass) -> MajorityBoostScheme:
    return MajorityBoostScheme(concept_class)


def threshold_stable_scheme(concept_class: FiniteConceptClass, blocks=None) -> ThresholdStableScheme:
    return ThresholdStableScheme(concept_class, blocks)


def version_space_stable_scheme(concept_class: FiniteConceptClass, blocks=None) -> VersionSpaceStableScheme:
    return VersionSpaceStableScheme(concept_class, blocks)


def soa_scheme(concept_class: FiniteConceptClass) -> SoaScheme:
    return SoaScheme(concept_class)
