"""
Adversarially robust compression.

Each sample point x_i may be replaced by any z in its perturbation set U(x_i).
Robust schemes run a binary scheme on the perturbation-inflated sample
S_U = {(z, y_i) : z in U(x_i)}:
- ReduceRobust: sub-index bits locate each kept z inside U(x_i)
- ReduceRobustStable: stable substrates, kept originals only
- twin_class: embeds a partial class as a robust problem over a doubled domain
"""

import logging
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.core.bitcodec import origins_overhead, pack_origins, unpack_origins
from src.core.concepts import Loss
from src.core.errors import AssumptionViolationError, ConstructionError, DecodeError, EmptySampleError
from src.core.naming_utils import twin_name
from src.core.predictors import Predictor
from src.core.rational import ceil_log2
from src.core.reductions.common import Reduction, ReductionTrace, group_origins
from src.core.schemes.base import STABLE, CompressionOutput, CompressionScheme
from src.data.concept_data import (
    UNDEFINED,
    FiniteConceptClass,
    FiniteDomain,
    LabeledSample,
    LabelSpace,
    Pair,
    PartialFiniteClass,
    PerturbationMap,
)

logger = logging.getLogger(__name__)


class RobustZeroOneLoss(Loss):
    """Fraction of sample points with some perturbation the predictor gets wrong."""

    name = "robustZeroOne"

    def __init__(self, perturbation: PerturbationMap):
        self.perturbation = perturbation

    def evaluate(self, predictor: Predictor, sample: LabeledSample) -> Fraction:
        if len(sample) == 0:
            raise EmptySampleError("robust loss needs a non-empty sample")
        mistakes = sum(1 for x, y in sample if any(predictor.predict(z) != y for z in self.perturbation[x]))
        return Fraction(mistakes, len(sample))


def _check_perturbation(concept_class: FiniteConceptClass, perturbation: PerturbationMap) -> None:
    if perturbation.size != concept_class.n_points:
        raise ConstructionError(
            f"Perturbation map covers {perturbation.size} points, class has {concept_class.n_points}")


def robust_mask(concept_class: FiniteConceptClass, sample: LabeledSample,
                perturbation: PerturbationMap) -> np.ndarray:
    """Concepts correct on every perturbation of every sample point."""
    _check_perturbation(concept_class, perturbation)
    return concept_class.consistent_mask(inflate_robust(sample, perturbation).pairs)


def is_robustly_realizable(concept_class: FiniteConceptClass, sample: LabeledSample,
                           perturbation: PerturbationMap) -> Optional[int]:
    """Canonically-first robustly consistent concept, or None."""
    hits = np.flatnonzero(robust_mask(concept_class, sample, perturbation))
    return int(hits[0]) if hits.size else None


def inflate_robust(sample: LabeledSample, perturbation: PerturbationMap) -> LabeledSample:
    """S_U in canonical order: sample order major, perturbation order minor."""
    return LabeledSample(tuple((z, y) for x, y in sample for z in perturbation[x]))


def _inflated_origins(sample: LabeledSample, perturbation: PerturbationMap) -> List[Tuple[int, int]]:
    return [(i, k) for i, (x, _) in enumerate(sample) for k in range(len(perturbation[x]))]


class ReduceRobust(Reduction):
    """
    Robust compression from any binary scheme.

    Each kept inflated pair (z, y_i) is stored as the original pair plus
    the index of z within U(x_i).
    """

    name = "robust-general"

    def __init__(self, substrate: CompressionScheme, concept_class: FiniteConceptClass,
                 perturbation: PerturbationMap):
        super().__init__(substrate, concept_class)
        _check_perturbation(concept_class, perturbation)
        self._require_width(concept_class.n_points)
        self.perturbation = perturbation
        self.width = ceil_log2(perturbation.max_size)

    def trace(self, sample: LabeledSample) -> ReductionTrace:
        sample.validate(self.concept_class.domain, self.concept_class.labels)
        origins_of = _inflated_origins(sample, self.perturbation)
        inner = self.substrate.compress(inflate_robust(sample, self.perturbation))
        origins, groups = group_origins(inner.kept, lambda p: origins_of[p])
        bits = pack_origins(groups, self.width, inner.bits)
        output = CompressionOutput.of(sample, origins, bits)
        bound = inner.size * (1 + self.width) + origins_overhead(groups, inner.bits)
        return ReductionTrace(output, inner, bound)

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        groups, inner_bits = unpack_origins(bits, len(pairs), self.width)
        rebuilt = []
        for (x, y), group in zip(pairs, groups):
            options = self.perturbation[x]
            for k in group:
                if k >= len(options):
                    raise DecodeError(f"Perturbation index {k} out of range for point {x}")
                rebuilt.append((options[k], y))
        return self.substrate.reconstruct(rebuilt, inner_bits)


class ReduceRobustStable(Reduction):
    """
    Robust compression from a stable binary scheme, with no index bits.

    Each kept inflated pair (z, y) is traced back to the canonically-first
    distinct original pair (x, y) with z in U(x); reconstruction re-inflates
    those pairs and reruns the substrate.
    """

    name = "robust-stable"
    flags = frozenset({STABLE})

    def __init__(self, substrate: CompressionScheme, concept_class: FiniteConceptClass,
                 perturbation: PerturbationMap):
        super().__init__(substrate, concept_class)
        _check_perturbation(concept_class, perturbation)
        self._require_width(concept_class.n_points)
        self._require_flags(STABLE)
        self.perturbation = perturbation

    def trace(self, sample: LabeledSample) -> ReductionTrace:
        sample.validate(self.concept_class.domain, self.concept_class.labels)
        inner = self.substrate.compress(inflate_robust(sample, self.perturbation))
        distinct = sorted(set(sample.pairs), key=lambda p: (p[0], Fraction(p[1])))
        chosen = set()
        for z, y in inner.pairs:
            source = next(((x, label) for x, label in distinct
                           if label == y and z in self.perturbation[x]), None)
            if source is None:
                raise AssumptionViolationError("Kept pair has no source in the sample", witness={"pair": (z, y)})
            chosen.add(source)
        first = {}
        for position, pair in enumerate(sample):
            if pair in chosen:
                first.setdefault(pair, position)
        positions = sorted(first.values())
        self._replay_stable(inflate_robust(sample.subsequence(positions), self.perturbation), inner)
        output = CompressionOutput.of(sample, positions, inner.bits)
        return ReductionTrace(output, inner, inner.size)

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        replay = self.substrate.compress(inflate_robust(LabeledSample(tuple(pairs)), self.perturbation))
        if replay.bits != bits:
            raise AssumptionViolationError("Replayed substrate bits differ from the stored ones",
                                           witness={"stored": bits, "replayed": replay.bits})
        return self.substrate.reconstruct_output(replay)


def twin_class(partial_class: PartialFiniteClass) -> Tuple[FiniteConceptClass, PerturbationMap]:
    """
    Total binary class over a doubled domain from a partial class.

    Point x keeps index x and its twin x' gets index n + x. On its support
    a concept takes c(x) at both twins; off its support it takes 0 at x and
    1 at x'. Twins perturb into each other.
    """
    names = partial_class.domain.names
    n = len(names)
    twins = []
    taken = set(names)
    for name in names:
        twin = twin_name(name, taken)
        taken.add(twin)
        twins.append(twin)
    table = partial_class.table
    defined = table != UNDEFINED
    left = np.where(defined, table, 0)
    right = np.where(defined, table, 1)
    domain = FiniteDomain(tuple(names) + tuple(twins))
    total = FiniteConceptClass(domain=domain, labels=LabelSpace.binary(),
                               table=np.concatenate([left, right], axis=1), names=partial_class.names)
    perturbation = PerturbationMap(tuple((x, n + x) for x in range(n)) * 2)
    logger.debug("twin class over %d points from %d partial concepts", 2 * n, partial_class.n_concepts)
    return total, perturbation


def reduce_robust(substrate: CompressionScheme, concept_class: FiniteConceptClass,
                  perturbation: PerturbationMap) -> ReduceRobust:
    return ReduceRobust(substrate, concept_class, perturbation)


def reduce_robust_stable(substrate: CompressionScheme, concept_class: FiniteConceptClass,
                         perturbation: PerturbationMap) -> ReduceRobustStable:
    return ReduceRobustStable(substrate, concept_class, perturbation)
