"""
Seeded corpus of finite concept classes.

Each corpus entry names a generator and its parameters. Entry i draws from
its own PRNG stream, SeedSequence(seed, spawn_key=(i,)), so adding or
reordering entries never changes the classes generated by the others.

Generators and the property each one declares (re-checked by the
dimension oracles right after generation):
- thresholds(n): c_t(x) = 1[x <= t], t = -1..n-1; VC 1, Littlestone floor(log2(n+1))
- intervals(n): 1[a <= x <= b] plus the empty concept; VC min(2, n)
- fullCube(n): all 2^n binary functions; VC n
- randomMulticlass(n, m, rows): distinct random rows over m labels
- kPiecewise(n, m, k, nested): at most k constant pieces; graph dim <= 2k,
  or <= 1 for the nested prefix family
- stepReal(n, q): h * 1[x <= t] plus zero; pseudo-dimension 1 when q = 1 or n = 1, else 2
- randomReal(n, q, rows): distinct random rows over the 1/q grid
- treePartial(depth): path concepts on a complete binary tree; partial VC 1
- twinFromPartial(source): twin class of a partial class, with its perturbation map
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np

from src.config import DEFAULT_SEED, DimensionLimits
from src.core.dimensions import (
    graph_dimension,
    littlestone_dimension,
    partial_vc_dimension,
    pseudo_dimension,
    vc_dimension,
)
from src.core.errors import GenerationError
from src.core.naming_utils import ensure_unique_name
from src.core.reductions.robust import twin_class
from src.data.concept_data import (
    UNDEFINED,
    FiniteConceptClass,
    FiniteDomain,
    LabelSpace,
    PartialFiniteClass,
    PerturbationMap,
)

logger = logging.getLogger(__name__)

WINDOW = "window"
DIMENSION_KEYS = ("vc", "graph", "pseudo", "littlestone")

AnyClass = Union[FiniteConceptClass, PartialFiniteClass]


@dataclass
class CorpusEntry:
    """
    One generator call.

    Attributes:
        generator: Generator name, a key of GENERATORS
        params: Keyword arguments for the generator
        perturb: Optional perturbation, e.g. {"window": 2}
    """
    generator: str
    params: Dict[str, Any] = field(default_factory=dict)
    perturb: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"generator": self.generator, "params": dict(self.params)}
        if self.perturb is not None:
            data["perturb"] = dict(self.perturb)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'CorpusEntry':
        return cls(generator=data["generator"], params=dict(data.get("params", {})),
                   perturb=data.get("perturb"))


@dataclass
class CorpusSpec:
    """Seed plus the ordered list of corpus entries."""
    seed: int = DEFAULT_SEED
    entries: List[CorpusEntry] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {"seed": self.seed, "entries": [e.to_dict() for e in self.entries]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'CorpusSpec':
        return cls(seed=int(data.get("seed", DEFAULT_SEED)),
                   entries=[CorpusEntry.from_dict(e) for e in data.get("entries", [])])


@dataclass
class CorpusItem:
    """
    A generated class with everything the suites need to know about it.

    Attributes:
        name: Unique display name
        concept_class: Total class (None for a bare partial class)
        partial: Source partial class, when there is one
        perturbation: Perturbation map for robust entries
        dims: Oracle values for vc / graph / pseudo / littlestone (None when undefined)
    """
    name: str
    generator: str
    params: Dict[str, Any]
    concept_class: Optional[FiniteConceptClass] = None
    partial: Optional[PartialFiniteClass] = None
    perturbation: Optional[PerturbationMap] = None
    dims: Dict[str, Optional[int]] = field(default_factory=dict)

    @property
    def kind(self) -> str:
        if self.concept_class is None:
            return "partial"
        return self.concept_class.labels.kind

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "generator": self.generator, "params": self.params,
                "kind": self.kind, "dims": self.dims}


# Generators

def _ordered_domain(n: int) -> FiniteDomain:
    if n < 1:
        raise GenerationError(f"Domain size must be positive, got {n}", witness={"n": n})
    return FiniteDomain.of_size(n)


def _distinct_rows(rng: np.random.Generator, rows: int, n: int, values: int) -> np.ndarray:
    if rows < 1 or values ** n < rows:
        raise GenerationError(f"Cannot draw {rows} distinct rows over {values}^{n} functions",
                              witness={"rows": rows, "n": n, "values": values})
    seen: Dict[tuple, None] = {}
    attempts = 0
    while len(seen) < rows:
        row = tuple(int(v) for v in rng.integers(0, values, size=n))
        seen.setdefault(row, None)
        attempts += 1
        if attempts > 100 * rows:
            raise GenerationError("Random row generation did not converge", witness={"rows": len(seen)})
    return np.array(list(seen), dtype=np.int64)


def thresholds(rng, n: int) -> FiniteConceptClass:
    """c_t(x) = 1[x <= t] in order t = -1..n-1; the t = -1 concept is named 'empty'."""
    table = [[int(x <= t) for x in range(n)] for t in range(-1, n)]
    names = ("empty",) + tuple(f"t{t}" for t in range(n))
    return FiniteConceptClass(_ordered_domain(n), LabelSpace.binary(), np.array(table).reshape(n + 1, n),
                              names=names)


def intervals(rng, n: int) -> FiniteConceptClass:
    table = [[0] * n]
    names = ["empty"]
    for a in range(n):
        for b in range(a, n):
            table.append([int(a <= x <= b) for x in range(n)])
            names.append(f"[{a},{b}]")
    return FiniteConceptClass(_ordered_domain(n), LabelSpace.binary(), np.array(table), names=tuple(names))


def full_cube(rng, n: int) -> FiniteConceptClass:
    table = list(itertools.product((0, 1), repeat=n))
    return FiniteConceptClass(_ordered_domain(n), LabelSpace.binary(), np.array(table))


def random_multiclass(rng, n: int, m: int, rows: int) -> FiniteConceptClass:
    return FiniteConceptClass(_ordered_domain(n), LabelSpace.multiclass(m), _distinct_rows(rng, rows, n, m))


def k_piecewise(rng, n: int, m: int, k: int, nested: bool = False) -> FiniteConceptClass:
    """
    Free mode: every function with at most k constant pieces whose labels are
    pairwise distinct. Nested mode: prefixes of a fixed profile, with label 0
    after the prefix; the profile splits the domain evenly into k - 1 pieces
    labeled 1..k-1.
    """
    domain = _ordered_domain(n)
    if k < 1 or m < 2:
        raise GenerationError("kPiecewise needs k >= 1 and m >= 2", witness={"k": k, "m": m})
    if nested:
        if k < 2 or m < k:
            raise GenerationError("nested kPiecewise needs 2 <= k <= m", witness={"k": k, "m": m})
        profile = [1 + (x * (k - 1)) // n for x in range(n)]
        table = [[profile[x] if x <= t else 0 for x in range(n)] for t in range(-1, n)]
        names = tuple(f"prefix{t + 1}" for t in range(-1, n))
        return FiniteConceptClass(domain, LabelSpace.multiclass(m), np.array(table), names=names)
    table = []
    for pieces in range(1, min(k, m, n) + 1):
        for starts in itertools.combinations(range(1, n), pieces - 1):
            bounds = (0,) + starts + (n,)
            for labels in itertools.permutations(range(m), pieces):
                row = []
                for j, label in enumerate(labels):
                    row.extend([label] * (bounds[j + 1] - bounds[j]))
                table.append(row)
    return FiniteConceptClass(domain, LabelSpace.multiclass(m), np.array(table))


def step_real(rng, n: int, q: int) -> FiniteConceptClass:
    table = [[0] * n]
    names = ["zero"]
    for t in range(n):
        for h in range(1, q + 1):
            table.append([h if x <= t else 0 for x in range(n)])
            names.append(f"step{t}h{h}")
    return FiniteConceptClass(_ordered_domain(n), LabelSpace.real_grid(q), np.array(table), names=tuple(names))


def random_real(rng, n: int, q: int, rows: int) -> FiniteConceptClass:
    return FiniteConceptClass(_ordered_domain(n), LabelSpace.real_grid(q), _distinct_rows(rng, rows, n, q + 1))


def tree_partial(rng, depth: int) -> PartialFiniteClass:
    """
    Nodes of the complete binary tree of the given depth, heap-ordered and
    named 'v' + path bits. Concept c_u is defined on the root-to-u path:
    1 at an ancestor when the path turns right there, 0 at u itself.
    """
    if depth < 1:
        raise GenerationError(f"treePartial needs depth >= 1, got {depth}", witness={"depth": depth})
    paths = [""]
    level = [""]
    for _ in range(depth - 1):
        level = [p + b for p in level for b in "01"]
        paths.extend(level)
    index = {p: i for i, p in enumerate(paths)}
    table = np.full((len(paths), len(paths)), UNDEFINED, dtype=np.int64)
    for u, path in enumerate(paths):
        for j in range(len(path)):
            table[u, index[path[:j]]] = int(path[j])
        table[u, u] = 0
    return PartialFiniteClass(FiniteDomain(tuple("v" + p for p in paths)), table,
                              names=tuple("c_v" + p for p in paths))


GENERATORS: Dict[str, Callable[..., AnyClass]] = {
    "thresholds": thresholds,
    "intervals": intervals,
    "fullCube": full_cube,
    "randomMulticlass": random_multiclass,
    "kPiecewise": k_piecewise,
    "stepReal": step_real,
    "randomReal": random_real,
    "treePartial": tree_partial,
}

TWIN_FROM_PARTIAL = "twinFromPartial"


def window_perturbation(n: int, size: int) -> PerturbationMap:
    """U(x) = the size consecutive points starting at x, clipped at the end."""
    if size < 1:
        raise GenerationError(f"Window size must be positive, got {size}", witness={"window": size})
    return PerturbationMap(tuple(tuple(range(x, min(x + size, n))) for x in range(n)))


# Declared properties

def _expect(item: CorpusItem, condition: bool, message: str, report) -> None:
    if not condition:
        raise GenerationError(f"{item.name}: {message}", witness=report.to_dict())


def _check_declared(item: CorpusItem) -> None:
    params = item.params
    unbounded = DimensionLimits.unbounded()
    if item.generator == "thresholds":
        _expect(item, item.dims["vc"] == min(1, params["n"]), "VC dimension is not 1",
                vc_dimension(item.concept_class, unbounded))
        expected = int(math.floor(math.log2(params["n"] + 1)))
        _expect(item, item.dims["littlestone"] == expected, f"Littlestone dimension is not {expected}",
                littlestone_dimension(item.concept_class))
    elif item.generator == "intervals":
        _expect(item, item.dims["vc"] == min(2, params["n"]), "VC dimension is not 2",
                vc_dimension(item.concept_class, unbounded))
    elif item.generator == "fullCube":
        _expect(item, item.dims["vc"] == params["n"], "cube is not shattered",
                vc_dimension(item.concept_class, unbounded))
    elif item.generator == "kPiecewise":
        bound = 1 if params.get("nested") else 2 * params["k"]
        report = graph_dimension(item.concept_class, DimensionLimits(max_points=None, max_set_size=bound + 1))
        _expect(item, report.value <= bound, f"graph dimension exceeds {bound}", report)
    elif item.generator == "stepReal":
        expected = 1 if params["q"] == 1 or params["n"] == 1 else 2
        _expect(item, item.dims["pseudo"] == expected, f"pseudo-dimension is not {expected}",
                pseudo_dimension(item.concept_class, unbounded))
    if item.partial is not None:
        report = partial_vc_dimension(item.partial, unbounded)
        _expect(item, report.value == 1, "partial VC dimension is not 1", report)


def class_dimensions(concept_class: FiniteConceptClass,
                     limits: DimensionLimits = DimensionLimits.unbounded()) -> Dict[str, Optional[int]]:
    """Oracle values reported in every run row; None where a dimension does not apply."""
    labels = concept_class.labels
    return {
        "vc": vc_dimension(concept_class, limits).value if labels.is_binary else None,
        "graph": graph_dimension(concept_class, limits).value,
        "pseudo": pseudo_dimension(concept_class, limits).value if labels.is_real else None,
        "littlestone": littlestone_dimension(concept_class).value if labels.is_binary else None,
    }


def _entry_name(entry: CorpusEntry) -> str:
    if entry.generator == TWIN_FROM_PARTIAL:
        source = CorpusEntry.from_dict(entry.params["source"])
        name = f"twin[{_entry_name(source)}]"
    else:
        args = ",".join(f"{k}={v}" for k, v in entry.params.items())
        name = f"{entry.generator}({args})"
    if entry.perturb is not None:
        name += f"+window({entry.perturb[WINDOW]})"
    return name


def _build(entry: CorpusEntry, rng: np.random.Generator, name: str) -> CorpusItem:
    if entry.generator == TWIN_FROM_PARTIAL:
        source = CorpusEntry.from_dict(entry.params["source"])
        partial = _build(source, rng, name).partial
        if partial is None:
            raise GenerationError(f"{name}: twin source is not a partial class", witness=source.to_dict())
        total, perturbation = twin_class(partial)
        return CorpusItem(name, entry.generator, entry.params, total, partial, perturbation)
    try:
        generator = GENERATORS[entry.generator]
    except KeyError:
        raise GenerationError(f"Unknown generator '{entry.generator}'", witness=entry.to_dict()) from None
    try:
        generated = generator(rng, **entry.params)
    except TypeError as exc:
        raise GenerationError(f"{name}: bad parameters: {exc}", witness=entry.to_dict()) from None
    if isinstance(generated, PartialFiniteClass):
        return CorpusItem(name, entry.generator, entry.params, partial=generated)
    return CorpusItem(name, entry.generator, entry.params, concept_class=generated)


def generate_entry(spec: CorpusSpec, index: int, name: Optional[str] = None) -> CorpusItem:
    """
    Generate entry `index` of a spec from its own PRNG stream.

    Raises:
        GenerationError: If the generator fails or its declared property does not hold
    """
    entry = spec.entries[index]
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(index,)))
    item = _build(entry, rng, name or _entry_name(entry))
    if entry.perturb is not None:
        if item.concept_class is None:
            raise GenerationError(f"{item.name}: perturbations need a total class", witness=entry.to_dict())
        item.perturbation = window_perturbation(item.concept_class.n_points, int(entry.perturb[WINDOW]))
    if item.concept_class is not None:
        item.dims = class_dimensions(item.concept_class)
    else:
        item.dims = dict.fromkeys(DIMENSION_KEYS)
    _check_declared(item)
    logger.debug("generated %s: %s", item.name, item.dims)
    return item


def generate_corpus(spec: CorpusSpec) -> List[CorpusItem]:
    """Generate every entry of a spec, with unique names."""
    items = []
    taken: List[str] = []
    for index, entry in enumerate(spec.entries):
        name = ensure_unique_name(_entry_name(entry), taken)
        taken.append(name)
        items.append(generate_entry(spec, index, name))
    logger.info("generated %d corpus classes", len(items))
    return items


def default_corpus_spec(seed: int = DEFAULT_SEED) -> CorpusSpec:
    """
    Desk-scale corpus: domains of at most 12 points, at most 5 labels and
    at most 200 concepts per class.
    """
    entries = [CorpusEntry("thresholds", {"n": n}) for n in (4, 6, 8, 10)]
    entries += [CorpusEntry("intervals", {"n": n}) for n in (5, 6, 8)]
    entries += [CorpusEntry("fullCube", {"n": n}) for n in (2, 3, 4)]
    entries += [CorpusEntry("randomMulticlass", {"n": n, "m": m, "rows": rows})
                for n, m, rows in ((4, 3, 10), (5, 3, 12), (5, 5, 20), (6, 3, 20),
                                   (6, 4, 24), (7, 3, 30), (7, 5, 30), (8, 4, 40))]
    entries += [CorpusEntry("kPiecewise", {"n": n, "m": m, "k": k})
                for n, m, k in ((8, 3, 2), (10, 3, 2), (6, 4, 2), (6, 3, 3))]
    entries += [CorpusEntry("kPiecewise", {"n": n, "m": m, "k": k, "nested": True})
                for n, m, k in ((6, 3, 2), (8, 3, 3), (10, 4, 4), (12, 3, 3))]
    entries += [CorpusEntry("stepReal", {"n": n, "q": q}) for n in (4, 6, 8) for q in (1, 2, 4)]
    entries += [CorpusEntry("randomReal", {"n": n, "q": q, "rows": rows})
                for n, q, rows in ((4, 2, 10), (5, 2, 15), (5, 4, 20), (6, 4, 25), (6, 2, 20),
                                   (4, 4, 20), (7, 2, 20), (7, 4, 30), (5, 1, 12), (6, 1, 16), (8, 2, 24))]
    entries += [CorpusEntry("treePartial", {"depth": d}) for d in (3, 4)]
    entries += [CorpusEntry(TWIN_FROM_PARTIAL, {"source": {"generator": "treePartial", "params": {"depth": d}}})
                for d in (3, 4)]
    entries += [CorpusEntry("thresholds", {"n": 10}, perturb={WINDOW: m}) for m in (2, 8)]
    entries += [CorpusEntry("intervals", {"n": 8}, perturb={WINDOW: 2}),
                CorpusEntry("fullCube", {"n": 4}, perturb={WINDOW: 2})]
    return CorpusSpec(seed=seed, entries=entries)
