"""
Regression to binary reductions.

A real-valued class C is turned into the threshold class
g_c(x, y) = 1[c(x) <= y] over X x Y_eps, where Y_eps is an exact rational
grid of spacing eps. Samples are inflated the same way:
S_eps = {((x_i, y), 1[y_i <= y]) : y in Y_eps}.

Schemes:
- ReduceEpsLinf: any substrate, grid-index bits per kept pair, lInf loss <= eps
- reduce_eps_lp: ReduceEpsLinf at the certified tolerance eps^(1/p)
- ReduceMajorityRegression: proper or majority-vote substrates on bracket pairs
- ReduceStableRegression: stable substrates, no grid bits
- ExactViaMulticlass: attained values as a multiclass label set
- AgnosticRegression: ERM relabelling followed by a realizable scheme
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.core.bitcodec import BitReader, BitWriter, gamma_length, origins_overhead, pack_origins, unpack_origins
from src.core.concepts import L_INF, LInfLoss, Loss, LpLoss, erm
from src.core.errors import (
    AssumptionViolationError,
    ConstructionError,
    DecodeError,
    LabelSpaceMismatchError,
    UnrealizableSampleError,
)
from src.core.predictors import Predictor, RulePredictor
from src.core.rational import ceil_log2, certified_root, exact_root
from src.core.reductions.common import Reduction, ReductionTrace, first_firing, group_origins
from src.core.schemes.base import MAJORITY_VOTE, PROPER, STABLE, CompressionOutput, CompressionScheme
from src.data.concept_data import FiniteConceptClass, InflatedDomain, LabeledSample, LabelSpace, Pair

logger = logging.getLogger(__name__)

SubstrateFactory = Callable[[FiniteConceptClass], CompressionScheme]


@dataclass(frozen=True)
class EpsGrid:
    """
    Sorted exact grid {0, eps, 2 eps, ..., floor(1/eps) eps} union {1}.

    Attributes:
        eps: Grid spacing, a rational in (0, 1)
        values: Grid values in increasing order
    """
    eps: Fraction
    values: Tuple[Fraction, ...]

    def __len__(self) -> int:
        return len(self.values)

    def ceiling_index(self, y: Fraction) -> int:
        """Index of the smallest grid value >= y."""
        for j, value in enumerate(self.values):
            if value >= y:
                return j
        raise LabelSpaceMismatchError(f"Label {y} exceeds the grid maximum 1")


def make_eps_grid(eps) -> EpsGrid:
    """
    Build the eps-grid.

    Raises:
        ConstructionError: If eps is not a rational in (0, 1)
    """
    if isinstance(eps, float):
        raise ConstructionError(f"eps must be an exact rational, got float {eps}")
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise ConstructionError(f"eps must lie in (0, 1), got {eps}")
    steps = int(1 / eps)
    values = sorted({eps * c for c in range(steps + 1)} | {Fraction(1)})
    return EpsGrid(eps=eps, values=tuple(values))


def class_leq(concept_class: FiniteConceptClass, grid: EpsGrid) -> FiniteConceptClass:
    """
    Threshold class g_c(x, y) = 1[c(x) <= y] over X x grid.

    Concepts whose threshold rows coincide on the grid are merged, keeping
    the first. Every row is checked to be non-decreasing in y.

    Raises:
        LabelSpaceMismatchError: If the class is not real-valued
    """
    if not concept_class.labels.is_real:
        raise LabelSpaceMismatchError(f"class_leq needs a realGrid class, got {concept_class.labels.kind}")
    labels = concept_class.labels
    lookup = np.array([[int(v <= g) for g in grid.values] for v in labels.values], dtype=np.int64)
    table = lookup[concept_class.table]
    if (np.diff(table, axis=2) < 0).any():
        concept, x = np.argwhere((np.diff(table, axis=2) < 0).any(axis=2))[0]
        raise AssumptionViolationError("Threshold row is not monotone in y",
                                       witness={"concept": concept_class.names[concept], "point": int(x)})
    flat = table.reshape(concept_class.n_concepts, -1)
    _, first = np.unique(flat, axis=0, return_index=True)
    keep = sorted(int(i) for i in first)
    domain = InflatedDomain.over(concept_class.domain, grid.values)
    return FiniteConceptClass(domain=domain, labels=LabelSpace.binary(), table=flat[keep],
                              names=tuple(concept_class.names[i] for i in keep))


def inflate_sample_eps(sample: LabeledSample, grid: EpsGrid) -> LabeledSample:
    """S_eps in canonical order: sample order major, grid order minor."""
    width = len(grid)
    return LabeledSample(tuple(
        (x * width + j, int(Fraction(y) <= g)) for x, y in sample for j, g in enumerate(grid.values)
    ))


def _grid_predictor(inflated: Predictor, grid: EpsGrid, n_points: int, description: str) -> RulePredictor:
    """Smallest grid value whose threshold prediction is 1, or 1 when none fires."""
    width = len(grid)
    outputs = []
    for x in range(n_points):
        j = first_firing(inflated, x * width, width)
        outputs.append(grid.values[j] if j >= 0 else Fraction(1))
    return RulePredictor(outputs, description)


class _GridReduction(Reduction):
    """Shared construction checks for the threshold-class reductions."""

    def __init__(self, substrate: CompressionScheme, concept_class: FiniteConceptClass, eps):
        super().__init__(substrate, concept_class)
        if not concept_class.labels.is_real:
            raise LabelSpaceMismatchError(f"{self.name} needs a realGrid class")
        self.grid = make_eps_grid(eps)
        self.eps = self.grid.eps
        self._require_width(concept_class.n_points * len(self.grid))

    def _validated(self, sample: LabeledSample) -> LabeledSample:
        sample.validate(self.concept_class.domain, self.concept_class.labels)
        return sample

    def _predictor(self, inflated: Predictor) -> RulePredictor:
        return _grid_predictor(inflated, self.grid, self.concept_class.n_points, self.get_description())


class ReduceEpsLinf(_GridReduction):
    """
    lInf eps-approximate compression from any threshold-class substrate.

    Each kept inflated pair is stored as its original pair plus the grid index.
    """

    name = "regression-linf"

    def __init__(self, substrate: CompressionScheme, concept_class: FiniteConceptClass, eps):
        super().__init__(substrate, concept_class, eps)
        self.width = ceil_log2(len(self.grid))

    def trace(self, sample: LabeledSample) -> ReductionTrace:
        self._validated(sample)
        count = len(self.grid)
        inner = self.substrate.compress(inflate_sample_eps(sample, self.grid))
        origins, groups = group_origins(inner.kept, lambda p: divmod(p, count))
        bits = pack_origins(groups, self.width, inner.bits)
        output = CompressionOutput.of(sample, origins, bits)
        bound_width = ceil_log2(int(1 / self.eps) + 2)
        bound = inner.size * (1 + bound_width) + origins_overhead(groups, inner.bits)
        return ReductionTrace(output, inner, bound)

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        groups, inner_bits = unpack_origins(bits, len(pairs), self.width)
        count = len(self.grid)
        rebuilt = []
        for (x, y), group in zip(pairs, groups):
            for j in group:
                if j >= count:
                    raise DecodeError(f"Grid index {j} out of range for {count} grid values")
                rebuilt.append((x * count + j, int(Fraction(y) <= self.grid.values[j])))
        return self._predictor(self.substrate.reconstruct(rebuilt, inner_bits))


def lp_tolerance(eps, p) -> Fraction:
    """
    Largest usable lInf tolerance for an lp target.

    The exact root eps^(1/p) when it is rational, otherwise the largest
    unit fraction below its certified lower bound.
    """
    eps, p = Fraction(eps), Fraction(p)
    if p < 1:
        raise LabelSpaceMismatchError(f"lp loss needs p >= 1, got {p}")
    base = eps ** p.denominator
    root = exact_root(base, p.numerator)
    if root is not None:
        return root
    lo, _ = certified_root(base, p.numerator)
    if lo <= 0:
        raise ConstructionError(f"eps^(1/p) for eps={eps}, p={p} is below the certified precision")
    return Fraction(1, -(-lo.denominator // lo.numerator))


def reduce_eps_lp(factory: SubstrateFactory, concept_class: FiniteConceptClass, eps, p) -> ReduceEpsLinf:
    """
    lp eps-approximate compression via the lInf reduction at eps^(1/p).

    Args:
        factory: Builds the substrate for the threshold class at the inner tolerance
        concept_class: realGrid class
        eps: Target lp loss
        p: Exponent, an integer or rational >= 1
    """
    tolerance = lp_tolerance(eps, p)
    logger.debug("lp reduction: eps=%s p=%s uses lInf tolerance %s", eps, p, tolerance)
    thresholds = class_leq(concept_class, make_eps_grid(tolerance))
    return ReduceEpsLinf(factory(thresholds), concept_class, tolerance)


class ReduceMajorityRegression(_GridReduction):
    """
    Proper or majority-vote substrates on bracket pairs.

    For each sample point the substrate sees ((x, y+), 1) for the smallest
    grid value y+ >= y_i and ((x, y-), 0) for the largest grid value y- < y_i
    when one exists. Two bits per kept original record which brackets were kept.
    """

    name = "regression-majority"

    def __init__(self, substrate: CompressionScheme, concept_class: FiniteConceptClass, eps):
        super().__init__(substrate, concept_class, eps)
        self._require_flags(PROPER, MAJORITY_VOTE)

    def brackets(self, pairs: Sequence[Pair]) -> List[Tuple[int, Pair]]:
        """(original index, inflated pair) for every bracket, in sample order."""
        width = len(self.grid)
        brackets = []
        for i, (x, y) in enumerate(pairs):
            high = self.grid.ceiling_index(Fraction(y))
            if high > 0:
                brackets.append((i, (x * width + high - 1, 0)))
            brackets.append((i, (x * width + high, 1)))
        return brackets

    def trace(self, sample: LabeledSample) -> ReductionTrace:
        self._validated(sample)
        brackets = self.brackets(sample.pairs)
        inner = self.substrate.compress(LabeledSample(tuple(pair for _, pair in brackets)))
        flags = {}
        for position in inner.kept:
            origin, (_, z) = brackets[position]
            flags.setdefault(origin, [False, False])[z] = True
        writer = BitWriter()
        for origin in sorted(flags):
            writer.write_flag(flags[origin][0])
            writer.write_flag(flags[origin][1])
        writer.write_gamma(len(inner.bits) + 1)
        writer.write_bits(inner.bits)
        output = CompressionOutput.of(sample, sorted(flags), writer.getvalue())
        bound = 3 * inner.size + gamma_length(len(inner.bits) + 1)
        return ReductionTrace(output, inner, bound)

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        reader = BitReader(bits)
        chosen = [(reader.read_flag(), reader.read_flag()) for _ in pairs]
        inner_bits = reader.read_bits(reader.read_gamma() - 1)
        reader.expect_end()
        rebuilt = []
        for (keep_low, keep_high), bracket_pairs in zip(chosen, self._brackets_by_origin(pairs)):
            for _, (p, z) in bracket_pairs:
                if (z == 0 and keep_low) or (z == 1 and keep_high):
                    rebuilt.append((p, z))
            if keep_low and not any(z == 0 for _, (_, z) in bracket_pairs):
                raise DecodeError("Bits mark a lower bracket that does not exist")
        inflated = self.substrate.reconstruct(rebuilt, inner_bits)
        self._check_monotone(inflated)
        return self._predictor(inflated)

    def _brackets_by_origin(self, pairs: Sequence[Pair]) -> List[List[Tuple[int, Pair]]]:
        grouped: List[List[Tuple[int, Pair]]] = [[] for _ in pairs]
        for origin, pair in self.brackets(pairs):
            grouped[origin].append((origin, pair))
        return grouped

    def _check_monotone(self, inflated: Predictor) -> None:
        width = len(self.grid)
        for x in range(self.concept_class.n_points):
            row = [inflated.predict(x * width + j) for j in range(width)]
            if any(a > b for a, b in zip(row, row[1:])):
                raise AssumptionViolationError(
                    "Reconstruction is not monotone in y",
                    witness={"point": self.concept_class.domain.names[x], "row": row})


class ReduceStableRegression(_GridReduction):
    """
    Stable substrates: keep the original pair of every point the substrate keeps.

    Reconstruction re-inflates the kept pairs over the whole grid and reruns
    the substrate compressor.
    """

    name = "regression-stable"
    flags = frozenset({STABLE})

    def __init__(self, substrate: CompressionScheme, concept_class: FiniteConceptClass, eps):
        super().__init__(substrate, concept_class, eps)
        self._require_flags(STABLE)

    def trace(self, sample: LabeledSample) -> ReductionTrace:
        self._validated(sample)
        width = len(self.grid)
        inner = self.substrate.compress(inflate_sample_eps(sample, self.grid))
        points = {p // width for p, _ in inner.pairs}
        first = {}
        for position, (x, _) in enumerate(sample):
            if x in points:
                first.setdefault(x, position)
        positions = sorted(first.values())
        self._replay_stable(inflate_sample_eps(sample.subsequence(positions), self.grid), inner)
        output = CompressionOutput.of(sample, positions, inner.bits)
        return ReductionTrace(output, inner, inner.size)

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        replay = self.substrate.compress(inflate_sample_eps(LabeledSample(tuple(pairs)), self.grid))
        if replay.bits != bits:
            raise AssumptionViolationError("Replayed substrate bits differ from the stored ones",
                                           witness={"stored": bits, "replayed": replay.bits})
        return self._predictor(self.substrate.reconstruct_output(replay))


class ExactViaMulticlass(CompressionScheme):
    """
    Exact compression of a realGrid class through its attained values.

    The attained values become the labels 0..k-1 of a multiclass class
    (m = max(2, k)), compressed by a multiclass scheme.
    """

    name = "regression-exact"

    def __init__(self, factory: Callable[[FiniteConceptClass], CompressionScheme],
                 concept_class: FiniteConceptClass):
        super().__init__(concept_class)
        if not concept_class.labels.is_real:
            raise LabelSpaceMismatchError("exact_via_multiclass needs a realGrid class")
        attained = sorted(int(v) for v in np.unique(concept_class.table))
        self.values = tuple(concept_class.labels.value(v) for v in attained)
        remap = np.zeros(concept_class.labels.count, dtype=np.int64)
        remap[attained] = np.arange(len(attained))
        self.multiclass = FiniteConceptClass(
            domain=concept_class.domain,
            labels=LabelSpace.multiclass(max(2, len(attained))),
            table=remap[concept_class.table],
            names=concept_class.names,
        )
        self.inner = factory(self.multiclass)
        self.size_budget = self.inner.size_budget

    def to_multiclass(self, pairs: Sequence[Pair]) -> Tuple[Pair, ...]:
        mapped = []
        for x, y in pairs:
            try:
                mapped.append((x, self.values.index(Fraction(y))))
            except ValueError:
                raise UnrealizableSampleError(f"Label {y} is not attained by any concept") from None
        return tuple(mapped)

    def compress(self, sample: LabeledSample) -> CompressionOutput:
        sample.validate(self.concept_class.domain, self.concept_class.labels)
        inner = self.inner.compress(LabeledSample(self.to_multiclass(sample.pairs)))
        return CompressionOutput.of(sample, inner.kept, inner.bits)

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        try:
            mapped = self.to_multiclass(pairs)
        except UnrealizableSampleError as exc:
            raise DecodeError(str(exc)) from None
        predictor = self.inner.reconstruct(mapped, bits)
        outputs = [self.values[v] if v < len(self.values) else self.values[0] for v in predictor.values()]
        return RulePredictor(outputs, self.get_description())

    def get_description(self) -> str:
        return f"{self.name}({self.inner.get_description()})"


class AgnosticRegression(CompressionScheme):
    """
    Agnostic eps-approximate compression.

    ERM picks c; the sample is relabelled with c's values, which a realizable
    scheme then compresses. The relabelled values of kept points travel as
    label-index bits ahead of the inner bits.
    """

    name = "regression-agnostic"

    def __init__(self, factory: Callable[[FiniteConceptClass, Fraction], CompressionScheme],
                 concept_class: FiniteConceptClass, eps, loss: Loss = L_INF):
        super().__init__(concept_class)
        if not isinstance(loss, (LInfLoss, LpLoss)):
            raise LabelSpaceMismatchError(f"agnostic regression supports lInf and lp losses, got {loss}")
        self.eps = Fraction(eps)
        self.loss = loss
        self.tolerance = self.eps if isinstance(loss, LInfLoss) else self.eps / loss.p
        self.inner = factory(concept_class, self.tolerance)
        self.width = ceil_log2(concept_class.labels.count)

    def relabel(self, sample: LabeledSample) -> Tuple[LabeledSample, Optional[int]]:
        if len(sample) == 0:
            return sample, None
        best, best_loss = erm(self.concept_class, sample, self.loss)
        logger.debug("agnostic regression ERM %s with %s loss %s", self.concept_class.names[best],
                     self.loss, best_loss)
        return LabeledSample(tuple((x, self.concept_class.value(best, x)) for x, _ in sample)), best

    def compress(self, sample: LabeledSample) -> CompressionOutput:
        relabelled, _ = self.relabel(sample)
        inner = self.inner.compress(relabelled)
        writer = BitWriter()
        for position in inner.kept:
            writer.write_uint(self.concept_class.labels.index_of(relabelled[position][1]), self.width)
        writer.write_gamma(len(inner.bits) + 1)
        writer.write_bits(inner.bits)
        return CompressionOutput.of(sample, inner.kept, writer.getvalue())

    def reconstruct(self, pairs: Sequence[Pair], bits: str) -> Predictor:
        reader = BitReader(bits)
        labels = self.concept_class.labels
        relabelled = []
        for x, _ in pairs:
            index = reader.read_uint(self.width)
            if index >= labels.count:
                raise DecodeError(f"Label index {index} out of range")
            relabelled.append((x, labels.value(index)))
        inner_bits = reader.read_bits(reader.read_gamma() - 1)
        reader.expect_end()
        return self.inner.reconstruct(relabelled, inner_bits)

    def get_description(self) -> str:
        return f"{self.name}({self.inner.get_description()})"


def reduce_eps_linf(substrate: CompressionScheme, concept_class: FiniteConceptClass, eps) -> ReduceEpsLinf:
    return ReduceEpsLinf(substrate, concept_class, eps)


def reduce_majority_regression(substrate: CompressionScheme, concept_class: FiniteConceptClass,
                               eps) -> ReduceMajorityRegression:
    return ReduceMajorityRegression(substrate, concept_class, eps)


def reduce_stable_regression(substrate: CompressionScheme, concept_class: FiniteConceptClass,
                             eps) -> ReduceStableRegression:
    return ReduceStableRegression(substrate, concept_class, eps)


def exact_via_multiclass(factory: Callable[[FiniteConceptClass], CompressionScheme],
                         concept_class: FiniteConceptClass) -> ExactViaMulticlass:
    return ExactViaMulticlass(factory, concept_class)


def agnostic_regression(factory: Callable[[FiniteConceptClass, Fraction], CompressionScheme],
                        concept_class: FiniteConceptClass, eps, loss: Loss = L_INF) -> AgnosticRegression:
    return AgnosticRegression(factory, concept_class, eps, loss)
