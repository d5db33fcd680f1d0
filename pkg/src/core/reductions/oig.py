"""
One-inclusion graph predictor for robust binary classification.

Vertices are the label patterns, on a multiset of points, of concepts that
are constant on the perturbation set of every one of those points. Two
patterns are joined when they differ in exactly one coordinate. Points are
sorted first, so the graph does not depend on the order of the sample.

An acyclic graph is a forest; rooting each tree at its smallest vertex and
pointing every edge at the parent gives out-degree at most 1. Cyclic graphs
are oriented by repeatedly peeling a minimum-degree vertex and pointing its
remaining edges away from it.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.config import DEFAULT_LOO_TRIALS
from src.core.errors import LabelSpaceMismatchError, UnrealizableSampleError
from src.data.concept_data import FiniteConceptClass, LabeledSample, PerturbationMap

logger = logging.getLogger(__name__)

FOREST = "forest"
PEELING = "peeling"

Edge = Tuple[int, int, int]


@dataclass
class OneInclusionGraph:
    """
    Attributes:
        points: Sorted point multiset; coordinate i is points[i]
        vertices: Realizable patterns in lexicographic order
        edges: (u, v, coordinate) with u < v
        acyclic: True when the graph is a forest
    """
    points: Tuple[int, ...]
    vertices: Tuple[Tuple[int, ...], ...]
    edges: List[Edge] = field(default_factory=list)
    acyclic: bool = True

    def __post_init__(self):
        self.index = {pattern: i for i, pattern in enumerate(self.vertices)}

    def edge_between(self, u: int, v: int) -> Optional[int]:
        u, v = min(u, v), max(u, v)
        for e, (a, b, _) in enumerate(self.edges):
            if a == u and b == v:
                return e
        return None


@dataclass
class Orientation:
    """Head vertex of every edge plus the resulting out-degrees."""
    mode: str
    heads: List[int]
    out_degree: List[int]

    @property
    def max_out_degree(self) -> int:
        return max(self.out_degree, default=0)


def _robust_rows(concept_class: FiniteConceptClass, perturbation: PerturbationMap,
                 points: Sequence[int]) -> np.ndarray:
    table = concept_class.table
    mask = np.ones(concept_class.n_concepts, dtype=bool)
    for p in set(points):
        block = table[:, list(perturbation[p])]
        mask &= block.min(axis=1) == block.max(axis=1)
    return mask


def build_one_inclusion_graph(concept_class: FiniteConceptClass, perturbation: PerturbationMap,
                              points: Sequence[int]) -> OneInclusionGraph:
    """
    One-inclusion graph of a binary class on a point multiset.

    Raises:
        LabelSpaceMismatchError: If the class is not binary
    """
    if not concept_class.labels.is_binary:
        raise LabelSpaceMismatchError("The one-inclusion graph needs a binary class")
    ordered = tuple(sorted(int(p) for p in points))
    rows = concept_class.table[_robust_rows(concept_class, perturbation, ordered)][:, list(ordered)]
    patterns = np.unique(rows, axis=0) if len(rows) else np.zeros((0, len(ordered)), dtype=np.int64)
    graph = OneInclusionGraph(points=ordered, vertices=tuple(tuple(int(v) for v in row) for row in patterns))

    parent = list(range(len(graph.vertices)))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for coordinate in range(len(ordered)):
        partners: Dict[Tuple[int, ...], List[int]] = {}
        for i, pattern in enumerate(graph.vertices):
            partners.setdefault(pattern[:coordinate] + pattern[coordinate + 1:], []).append(i)
        for group in partners.values():
            if len(group) == 2:
                u, v = group
                graph.edges.append((u, v, coordinate))
                ru, rv = find(u), find(v)
                if ru == rv:
                    graph.acyclic = False
                else:
                    parent[ru] = rv
    logger.debug("one-inclusion graph: %d vertices, %d edges, acyclic=%s",
                 len(graph.vertices), len(graph.edges), graph.acyclic)
    return graph


def orient_graph(graph: OneInclusionGraph) -> Orientation:
    """Orient a one-inclusion graph; forests get out-degree at most 1."""
    n = len(graph.vertices)
    adjacency: List[List[int]] = [[] for _ in range(n)]
    for e, (u, v, _) in enumerate(graph.edges):
        adjacency[u].append(e)
        adjacency[v].append(e)
    heads = [-1] * len(graph.edges)
    out_degree = [0] * n

    if graph.acyclic:
        seen = [False] * n
        for root in range(n):
            if seen[root]:
                continue
            seen[root] = True
            queue = [root]
            while queue:
                u = queue.pop(0)
                for e in adjacency[u]:
                    a, b, _ = graph.edges[e]
                    child = b if a == u else a
                    if seen[child]:
                        continue
                    seen[child] = True
                    heads[e] = u
                    out_degree[child] += 1
                    queue.append(child)
        return Orientation(FOREST, heads, out_degree)

    remaining = [len(adjacency[u]) for u in range(n)]
    removed = [False] * n
    for _ in range(n):
        u = min((v for v in range(n) if not removed[v]), key=lambda v: (remaining[v], v))
        for e in adjacency[u]:
            if heads[e] != -1:
                continue
            a, b, _ = graph.edges[e]
            other = b if a == u else a
            heads[e] = other
            out_degree[u] += 1
            remaining[other] -= 1
        removed[u] = True
    logger.debug("peeling orientation: max out-degree %d", max(out_degree, default=0))
    return Orientation(PEELING, heads, out_degree)


def _predict_coordinate(graph: OneInclusionGraph, orientation: Orientation,
                        known: Sequence[int], coordinate: int) -> int:
    candidates = []
    for w in (0, 1):
        pattern = tuple(known[:coordinate]) + (w,) + tuple(known[coordinate + 1:])
        candidates.append(graph.index.get(pattern))
    zero, one = candidates
    if zero is not None and one is not None:
        edge = graph.edge_between(zero, one)
        return graph.vertices[orientation.heads[edge]][coordinate]
    if one is not None:
        return 1
    if zero is not None:
        return 0
    raise UnrealizableSampleError("No robustly realizable completion of the sample")


def _known_labels(sample: LabeledSample) -> Dict[int, int]:
    known: Dict[int, int] = {}
    for x, y in sample:
        if known.setdefault(x, int(y)) != int(y):
            raise UnrealizableSampleError(f"Point {x} carries conflicting labels")
    return known


def oig_predict(concept_class: FiniteConceptClass, perturbation: PerturbationMap,
                sample: LabeledSample, z: int) -> int:
    """
    One-inclusion graph prediction for test point z.

    Raises:
        UnrealizableSampleError: If no vertex completes the sample
    """
    known = _known_labels(sample)
    graph = build_one_inclusion_graph(concept_class, perturbation, sample.points + (z,))
    if not graph.vertices:
        raise UnrealizableSampleError("The one-inclusion graph has no vertices")
    if z in known:
        return known[z]
    coordinate = graph.points.index(z)
    labels = [0 if p == z else known[p] for p in graph.points]
    return _predict_coordinate(graph, orient_graph(graph), labels, coordinate)


@dataclass(frozen=True)
class LooEstimate:
    """
    Leave-one-out error of the one-inclusion graph predictor.

    Attributes:
        mean, std: Monte-Carlo estimate over random held-out permutations
        exact: Average over every held-out coordinate
        bound: 1/n for n training points
        trials: Number of permutations drawn
        acyclic: Whether the graph was a forest
        max_out_degree: Of the orientation used
    """
    mean: float
    std: float
    exact: Fraction
    bound: Fraction
    trials: int
    acyclic: bool
    max_out_degree: int

    @property
    def within_bound(self) -> bool:
        """Monte-Carlo mean within three standard errors of 1/n."""
        return self.mean <= float(self.bound) + 3 * self.std / max(self.trials, 1) ** 0.5

    def to_dict(self):
        return {"mean": self.mean, "std": self.std, "exact": str(self.exact), "bound": str(self.bound),
                "trials": self.trials, "acyclic": self.acyclic, "max_out_degree": self.max_out_degree}


def leave_one_out_error(concept_class: FiniteConceptClass, perturbation: PerturbationMap,
                        sample: LabeledSample, trials: int = DEFAULT_LOO_TRIALS, seed=0) -> LooEstimate:
    """
    Held-out error of the predictor over random permutations of a sample.

    Each permutation holds out its last example and predicts it from the
    others. The graph on all points is shared across trials.

    Args:
        sample: n + 1 robustly realizable examples
        seed: int or numpy SeedSequence
    """
    if len(sample) < 2:
        raise UnrealizableSampleError("Leave-one-out needs at least two examples")
    known = _known_labels(sample)
    graph = build_one_inclusion_graph(concept_class, perturbation, sample.points)
    orientation = orient_graph(graph)
    labels = [known[p] for p in graph.points]
    if tuple(labels) not in graph.index:
        raise UnrealizableSampleError("Sample labels are not robustly realizable")
    mistakes = np.array([
        int(_predict_coordinate(graph, orientation, labels, i) != labels[i]) for i in range(len(labels))
    ])
    # Sample order maps onto sorted coordinates; duplicates share their mistake value.
    per_example = np.array([mistakes[graph.points.index(x)] for x in sample.points])
    rng = np.random.default_rng(seed)
    held = np.array([rng.permutation(len(sample))[-1] for _ in range(trials)])
    outcomes = per_example[held] if trials else np.zeros(0)
    n = len(sample) - 1
    return LooEstimate(
        mean=float(outcomes.mean()) if trials else 0.0,
        std=float(outcomes.std()) if trials else 0.0,
        exact=Fraction(int(per_example.sum()), len(sample)),
        bound=Fraction(1, n),
        trials=trials,
        acyclic=graph.acyclic,
        max_out_degree=orientation.max_out_degree,
    )