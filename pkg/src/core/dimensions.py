"""
Brute-force oracles for combinatorial dimensions.

Every oracle returns a DimensionReport carrying a witness that
verify_witness can re-check:
- vc_dimension: shattered point sets of binary classes
- graph_dimension: G-shattering with witness labels
- pseudo_dimension: shattering of 1[c(x) <= y] with witness thresholds
- partial_vc_dimension: shattering inside concept supports
- littlestone_dimension: version-space game, witness is a mistake tree

The set searches run level by level and only extend sets that are already
shattered; shattering is hereditary, so nothing is missed.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.config import DimensionLimits
from src.core.errors import LabelSpaceMismatchError
from src.data.concept_data import UNDEFINED, FiniteConceptClass, PartialFiniteClass

logger = logging.getLogger(__name__)

VC = "vc"
GRAPH = "graph"
PSEUDO = "pseudo"
LITTLESTONE = "littlestone"
PARTIAL = "partial"


@dataclass(frozen=True)
class DimensionReport:
    """
    Result of a dimension oracle.

    Attributes:
        kind: Which dimension was computed
        value: The dimension (exact when exhaustive)
        points: Witness point indices
        labels: Witness label indices (graph) or threshold indices (pseudo)
        exhaustive: False when a cap stopped the search early
        tree: Mistake tree witness for the Littlestone dimension
    """
    kind: str
    value: int
    points: Tuple[int, ...] = ()
    labels: Optional[Tuple[int, ...]] = None
    exhaustive: bool = True
    tree: Optional[Dict[str, Any]] = field(default=None, compare=False)

    def to_dict(self, concept_class=None) -> Dict[str, Any]:
        names = concept_class.domain.names if concept_class is not None else None
        witness: Dict[str, Any] = {"points": [names[p] if names else p for p in self.points]}
        if self.labels is not None:
            if concept_class is not None and hasattr(concept_class, "labels"):
                witness["labels"] = [concept_class.labels.format(concept_class.labels.value(v))
                                     for v in self.labels]
            else:
                witness["labels"] = list(self.labels)
        if self.tree is not None:
            witness["tree"] = _tree_to_dict(self.tree, names)
        return {"kind": self.kind, "value": self.value, "witness": witness, "exhaustive": self.exhaustive}


def _tree_to_dict(tree, names):
    if tree is None:
        return None
    point = tree["point"]
    return {"point": names[point] if names else point,
            "children": [_tree_to_dict(child, names) for child in tree["children"]]}


def _require_binary(concept_class: FiniteConceptClass, what: str) -> None:
    if not concept_class.labels.is_binary:
        raise LabelSpaceMismatchError(f"{what} needs a binary class, got {concept_class.labels.kind}")


class _ShatterSearch:
    """
    Level-wise search over item sets, one item per distinct point.

    Each item is (point, witness, indicator column); `active` maps a tuple of
    points to the rows that take part in the pattern count.
    """

    def __init__(self, items: List[Tuple[int, Optional[int], np.ndarray]], n_rows: int,
                 defined: Optional[np.ndarray], limits: DimensionLimits):
        self.items = items
        self.n_rows = n_rows
        self.defined = defined
        self.limits = limits

    def _rows(self, points: Sequence[int]) -> np.ndarray:
        if self.defined is None:
            return np.ones(self.n_rows, dtype=bool)
        return self.defined[:, list(points)].all(axis=1)

    def shattered(self, chosen: Sequence[int]) -> bool:
        k = len(chosen)
        rows = self._rows([self.items[i][0] for i in chosen])
        if rows.sum() < 2 ** k:
            return False
        columns = np.stack([self.items[i][2][rows] for i in chosen], axis=1).astype(np.int64)
        codes = columns @ (1 << np.arange(k, dtype=np.int64))
        return len(np.unique(codes)) == 2 ** k

    def run(self) -> Tuple[Tuple[int, ...], bool]:
        max_size = self.limits.max_set_size
        level = [(i,) for i in range(len(self.items)) if self.shattered((i,))]
        best: Tuple[int, ...] = ()
        size = 1
        while level:
            best = level[0]
            if max_size is not None and size >= max_size:
                # A capped search is exhaustive only if nothing extends the last level.
                return best, not any(self._extensions(level))
            level = list(self._extensions(level))
            size += 1
            logger.debug("Shatter search level %d: %d sets", size, len(level))
        return best, True

    def _extensions(self, level):
        for chosen in level:
            last = self.items[chosen[-1]][0]
            for i, item in enumerate(self.items):
                if item[0] > last and self.shattered(chosen + (i,)):
                    yield chosen + (i,)


def _searchable_points(n_points: int, limits: DimensionLimits) -> Tuple[range, bool]:
    if limits.max_points is not None and n_points > limits.max_points:
        return range(limits.max_points), False
    return range(n_points), True


def _run(kind: str, items, n_rows, defined, limits, points_complete) -> DimensionReport:
    best, complete = _ShatterSearch(items, n_rows, defined, limits).run()
    points = tuple(items[i][0] for i in best)
    witness = None if kind in (VC, PARTIAL) else tuple(items[i][1] for i in best)
    report = DimensionReport(kind=kind, value=len(best), points=points, labels=witness,
                             exhaustive=complete and points_complete)
    logger.debug("%s dimension %d (exhaustive=%s)", kind, report.value, report.exhaustive)
    return report


def vc_dimension(concept_class: FiniteConceptClass,
                 limits: DimensionLimits = DimensionLimits()) -> DimensionReport:
    """
    VC dimension of a binary class.

    Raises:
        LabelSpaceMismatchError: If the class is not binary
    """
    _require_binary(concept_class, "VC dimension")
    points, complete = _searchable_points(concept_class.n_points, limits)
    items = [(x, None, concept_class.table[:, x] == 1) for x in points]
    return _run(VC, items, concept_class.n_concepts, None, limits, complete)


def graph_dimension(concept_class: FiniteConceptClass,
                    limits: DimensionLimits = DimensionLimits()) -> DimensionReport:
    """
    Graph dimension; witness labels range over labels attained at each point.
    """
    points, complete = _searchable_points(concept_class.n_points, limits)
    items = []
    for x in points:
        column = concept_class.table[:, x]
        for y in np.unique(column):
            items.append((x, int(y), column == y))
    return _run(GRAPH, items, concept_class.n_concepts, None, limits, complete)


def pseudo_dimension(concept_class: FiniteConceptClass,
                     limits: DimensionLimits = DimensionLimits()) -> DimensionReport:
    """
    Pseudo-dimension of a real-grid class; thresholds range over attained values.

    Raises:
        LabelSpaceMismatchError: If the class is not real-valued
    """
    if not concept_class.labels.is_real:
        raise LabelSpaceMismatchError("Pseudo-dimension needs a realGrid class")
    points, complete = _searchable_points(concept_class.n_points, limits)
    items = []
    for x in points:
        column = concept_class.table[:, x]
        for t in np.unique(column):
            items.append((x, int(t), column <= t))
    return _run(PSEUDO, items, concept_class.n_concepts, None, limits, complete)


def partial_vc_dimension(partial_class: PartialFiniteClass,
                         limits: DimensionLimits = DimensionLimits()) -> DimensionReport:
    """VC dimension of a partial class, counting only concepts defined on the whole set."""
    points, complete = _searchable_points(partial_class.n_points, limits)
    items = [(x, None, partial_class.table[:, x] == 1) for x in points]
    defined = partial_class.table != UNDEFINED
    return _run(PARTIAL, items, partial_class.n_concepts, defined, limits, complete)


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


class LittlestoneOracle:
    """
    Littlestone dimension of version spaces of a binary class.

    Version spaces are bitmasks over concept indices; the memo table lives
    on the instance.
    """

    def __init__(self, concept_class: FiniteConceptClass):
        _require_binary(concept_class, "Littlestone dimension")
        self.concept_class = concept_class
        self.full = (1 << concept_class.n_concepts) - 1
        self.ones = [self._mask(np.flatnonzero(concept_class.table[:, x] == 1))
                     for x in range(concept_class.n_points)]
        self._memo: Dict[int, int] = {}

    @staticmethod
    def _mask(indices) -> int:
        mask = 0
        for i in indices:
            mask |= 1 << int(i)
        return mask

    def mask_of(self, concepts) -> int:
        return self._mask(concepts)

    def restrict(self, version_space: int, point: int, label: int) -> int:
        ones = version_space & self.ones[point]
        return ones if label == 1 else version_space & ~ones

    def dimension(self, version_space: int) -> int:
        if version_space in self._memo:
            return self._memo[version_space]
        count = _popcount(version_space)
        if count <= 1:
            return 0
        bound = int(math.floor(math.log2(count)))
        best = 0
        for x in range(self.concept_class.n_points):
            one = version_space & self.ones[x]
            if one == 0 or one == version_space:
                continue
            zero = version_space & ~one
            first, second = sorted((zero, one), key=_popcount)
            value = self.dimension(first)
            if value + 1 <= best:
                continue
            value = 1 + min(value, self.dimension(second))
            if value > best:
                best = value
                if best == bound:
                    break
        self._memo[version_space] = best
        return best

    def tree(self, version_space: int, depth: int) -> Optional[Dict[str, Any]]:
        """A complete mistake tree of the given depth inside the version space."""
        if depth == 0:
            return None
        for x in range(self.concept_class.n_points):
            one = version_space & self.ones[x]
            zero = version_space & ~one
            if one and zero and min(self.dimension(zero), self.dimension(one)) >= depth - 1:
                return {"point": x, "children": [self.tree(zero, depth - 1), self.tree(one, depth - 1)]}
        raise AssertionError(f"No mistake tree of depth {depth} in version space {version_space:#x}")


def littlestone_dimension(concept_class: FiniteConceptClass) -> DimensionReport:
    """Littlestone dimension of a binary class with a mistake-tree witness."""
    oracle = LittlestoneOracle(concept_class)
    if concept_class.n_concepts == 0:
        return DimensionReport(kind=LITTLESTONE, value=0)
    value = oracle.dimension(oracle.full)
    tree = oracle.tree(oracle.full, value)
    return DimensionReport(kind=LITTLESTONE, value=value, tree=tree)


def _tree_valid(oracle: LittlestoneOracle, version_space: int, tree, depth: int) -> bool:
    if depth == 0:
        return tree is None and version_space != 0
    if tree is None:
        return False
    x = tree["point"]
    zero, one = (oracle.restrict(version_space, x, b) for b in (0, 1))
    if not zero or not one:
        return False
    return all(_tree_valid(oracle, vs, child, depth - 1)
               for vs, child in zip((zero, one), tree["children"]))


def verify_witness(target, report: DimensionReport) -> bool:
    """
    Re-check that a report's witness certifies its value.

    Args:
        target: The FiniteConceptClass (or PartialFiniteClass) the report came from
        report: Report to verify
    """
    if report.kind == LITTLESTONE:
        oracle = LittlestoneOracle(target)
        if target.n_concepts == 0:
            return report.value == 0
        return _tree_valid(oracle, oracle.full, report.tree, report.value)
    if len(report.points) != report.value or len(set(report.points)) != report.value:
        return False
    table = target.table
    if report.kind in (VC, PARTIAL):
        columns = [table[:, x] == 1 for x in report.points]
    elif report.kind == GRAPH:
        columns = [table[:, x] == y for x, y in zip(report.points, report.labels)]
    elif report.kind == PSEUDO:
        columns = [table[:, x] <= t for x, t in zip(report.points, report.labels)]
    else:
        raise ValueError(f"Unknown dimension kind '{report.kind}'")
    if report.value == 0:
        return True
    items = [(x, None, column) for x, column in zip(report.points, columns)]
    defined = table != UNDEFINED if report.kind == PARTIAL else None
    search = _ShatterSearch(items, table.shape[0], defined, DimensionLimits.unbounded())
    return search.shattered(tuple(range(len(items))))
