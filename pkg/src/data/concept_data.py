"""
Core data models for scompress.

This module defines the fundamental data structures used throughout the library:
- FiniteDomain: ordered, named domain points
- InflatedDomain: (point, label) pairs over a base domain
- LabelSpace: binary, finite multiclass, or exact rational grid labels
- FiniteConceptClass: explicit concept table, one row per concept
- PartialFiniteClass: binary table with undefined ('*') entries
- LabeledSample: ordered sequence of (point, label) pairs
- PerturbationMap: per-point finite perturbation sets
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.errors import (
    InvalidClassError,
    LabelSpaceMismatchError,
    FileFormatError,
)


Label = Union[int, Fraction]
Pair = Tuple[int, Label]

BINARY = "binary"
MULTICLASS = "multiclass"
REAL_GRID = "realGrid"

UNDEFINED = -1


@dataclass(frozen=True)
class FiniteDomain:
    """Ordered finite domain; point i has name names[i]."""
    names: Tuple[str, ...]

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        object.__setattr__(self, "names", names)
        if not names:
            raise InvalidClassError("Domain must contain at least one point")
        if len(set(names)) != len(names):
            raise InvalidClassError(f"Domain point names must be unique: {names}")

    @classmethod
    def of_size(cls, n: int) -> 'FiniteDomain':
        """Domain with points named '0'..'n-1'."""
        return cls(tuple(str(i) for i in range(n)))

    @property
    def size(self) -> int:
        return len(self.names)

    def index_of(self, name: str) -> int:
        """
        Look up a point index by name.

        Raises:
            LabelSpaceMismatchError: If the name is not a domain point
        """
        try:
            return self.names.index(str(name))
        except ValueError:
            raise LabelSpaceMismatchError(f"Unknown domain point '{name}'") from None

    def contains(self, point: int) -> bool:
        return isinstance(point, (int, np.integer)) and 0 <= point < self.size

    def to_dict(self) -> List[str]:
        return list(self.names)


@dataclass(frozen=True)
class InflatedDomain(FiniteDomain):
    """
    Domain of (x, y) pairs over a base domain and an ordered label list.

    Pairs are ordered lexicographically by (point index, label index), so
    pair (x, j) has index x * width + j.
    """
    base: FiniteDomain = None
    values: Tuple[Label, ...] = ()

    @classmethod
    def over(cls, base: FiniteDomain, values: Sequence[Label]) -> 'InflatedDomain':
        values = tuple(values)
        names = tuple(f"({x},{_format_value(v)})" for x in base.names for v in values)
        return cls(names=names, base=base, values=values)

    @property
    def width(self) -> int:
        return len(self.values)

    def index(self, x: int, j: int) -> int:
        return x * self.width + j

    def pair(self, i: int) -> Tuple[int, int]:
        """Return (base point, label index) of inflated point i."""
        return divmod(i, self.width)

    def block(self, x: int) -> range:
        """Inflated indices of the pairs sharing base point x."""
        return range(x * self.width, (x + 1) * self.width)


@dataclass(frozen=True)
class LabelSpace:
    """
    Typed label space.

    Attributes:
        kind: 'binary', 'multiclass' or 'realGrid'
        size: m for multiclass (2 for binary), denominator q for realGrid
    """
    kind: str = BINARY
    size: int = 2

    def __post_init__(self):
        if self.kind == BINARY:
            if self.size != 2:
                raise InvalidClassError(f"Binary label space has size 2, got {self.size}")
        elif self.kind == MULTICLASS:
            if self.size < 2:
                raise InvalidClassError(f"Multiclass label space needs m >= 2, got {self.size}")
        elif self.kind == REAL_GRID:
            if self.size < 1:
                raise InvalidClassError(f"Real grid needs q >= 1, got {self.size}")
        else:
            raise InvalidClassError(f"Unknown label space kind '{self.kind}'")

    @classmethod
    def binary(cls) -> 'LabelSpace':
        return cls(BINARY, 2)

    @classmethod
    def multiclass(cls, m: int) -> 'LabelSpace':
        return cls(MULTICLASS, m)

    @classmethod
    def real_grid(cls, q: int) -> 'LabelSpace':
        return cls(REAL_GRID, q)

    @property
    def is_binary(self) -> bool:
        return self.kind == BINARY

    @property
    def is_real(self) -> bool:
        return self.kind == REAL_GRID

    @property
    def count(self) -> int:
        """Number of table label values."""
        return self.size + 1 if self.is_real else self.size

    @property
    def values(self) -> Tuple[Label, ...]:
        if self.is_real:
            return tuple(Fraction(i, self.size) for i in range(self.size + 1))
        return tuple(range(self.size))

    def value(self, index: int) -> Label:
        if self.is_real:
            return Fraction(int(index), self.size)
        return int(index)

    def index_of(self, value: Label) -> Optional[int]:
        """Table index of a label value, or None when the value is not in the space."""
        if self.is_real:
            if not isinstance(value, (int, Fraction)) or isinstance(value, bool):
                return None
            scaled = Fraction(value) * self.size
            if scaled.denominator != 1 or not 0 <= scaled <= self.size:
                return None
            return int(scaled)
        if isinstance(value, Fraction):
            if value.denominator != 1:
                return None
            value = int(value)
        if isinstance(value, (int, np.integer)) and not isinstance(value, bool) and 0 <= value < self.size:
            return int(value)
        return None

    def check_sample_label(self, value: Label) -> None:
        """
        Validate a sample label.

        Real-grid samples may carry any rational in [0, 1]; other spaces
        only accept their own labels.

        Raises:
            LabelSpaceMismatchError: If the label does not fit
        """
        if self.is_real:
            if isinstance(value, bool) or not isinstance(value, (int, Fraction)):
                raise LabelSpaceMismatchError(f"Real labels must be exact rationals, got {value!r}")
            if not 0 <= value <= 1:
                raise LabelSpaceMismatchError(f"Real label {value} outside [0, 1]")
        elif self.index_of(value) is None:
            raise LabelSpaceMismatchError(f"Label {value!r} not in {self.kind}({self.size})")

    def parse(self, raw: Any) -> Label:
        """Parse a JSON label ('i/q' strings for real grids)."""
        if self.is_real:
            try:
                return Fraction(str(raw))
            except (ValueError, ZeroDivisionError):
                raise FileFormatError(f"Invalid rational label {raw!r}") from None
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise FileFormatError(f"Invalid integer label {raw!r}")
        return raw

    def format(self, value: Label) -> Any:
        """Format a label for JSON."""
        return _format_value(value) if self.is_real else int(value)

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == BINARY:
            return {"kind": BINARY}
        if self.kind == MULTICLASS:
            return {"kind": MULTICLASS, "m": self.size}
        return {"kind": REAL_GRID, "q": self.size}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'LabelSpace':
        kind = data.get("kind")
        if kind == BINARY:
            return cls.binary()
        if kind == MULTICLASS:
            return cls.multiclass(int(data["m"]))
        if kind == REAL_GRID:
            return cls.real_grid(int(data["q"]))
        raise FileFormatError(f"Unknown label space {data!r}")


def _format_value(value: Label) -> str:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return str(value)


def _frozen_table(table: Any, columns: int) -> np.ndarray:
    array = np.array(table, dtype=np.int64)
    if array.size == 0:
        array = array.reshape(0, columns)
    if array.ndim != 2:
        raise InvalidClassError(f"Concept table must be two-dimensional, got shape {array.shape}")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class FiniteConceptClass:
    """
    Explicit finite concept class.

    The table stores label indices (see LabelSpace.value). Row order is the
    canonical concept order used for every tie-break.

    Attributes:
        domain: Domain the concepts are defined on
        labels: Label space of the table entries
        table: Label-index matrix, one row per concept
        names: Unique concept identifiers, defaults to 'c0', 'c1', ...
    """
    domain: FiniteDomain
    labels: LabelSpace
    table: np.ndarray
    names: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        table = _frozen_table(self.table, self.domain.size)
        object.__setattr__(self, "table", table)
        if table.shape[1] != self.domain.size:
            raise InvalidClassError(
                f"Table has {table.shape[1]} columns but the domain has {self.domain.size} points")
        if table.size and (table.min() < 0 or table.max() >= self.labels.count):
            raise InvalidClassError(f"Table entries must lie in the {self.labels.kind} label space")
        if len(table) > 1 and len(np.unique(table, axis=0)) != len(table):
            raise InvalidClassError("Concept table contains duplicate rows")
        names = tuple(self.names) or tuple(f"c{i}" for i in range(len(table)))
        if len(names) != len(table) or len(set(names)) != len(names):
            raise InvalidClassError("Concept names must be unique, one per row")
        object.__setattr__(self, "names", names)

    @property
    def n_concepts(self) -> int:
        return self.table.shape[0]

    @property
    def n_points(self) -> int:
        return self.table.shape[1]

    def value(self, concept: int, point: int) -> Label:
        return self.labels.value(self.table[concept, point])

    def row_values(self, concept: int) -> Tuple[Label, ...]:
        return tuple(self.labels.value(v) for v in self.table[concept])

    def consistent_mask(self, pairs: Sequence[Pair]) -> np.ndarray:
        """Boolean mask of the concepts that agree with every (point, label) pair."""
        mask = np.ones(self.n_concepts, dtype=bool)
        for point, label in pairs:
            index = self.labels.index_of(label)
            if index is None:
                return np.zeros(self.n_concepts, dtype=bool)
            mask &= self.table[:, point] == index
        return mask

    def first_consistent(self, pairs: Sequence[Pair]) -> Optional[int]:
        """Canonically-first concept consistent with the pairs, or None."""
        hits = np.flatnonzero(self.consistent_mask(pairs))
        return int(hits[0]) if hits.size else None

    def restrict(self, concepts: Sequence[int]) -> 'FiniteConceptClass':
        """Subclass made of the given concepts, keeping their order."""
        concepts = list(concepts)
        return FiniteConceptClass(
            domain=self.domain,
            labels=self.labels,
            table=self.table[concepts] if concepts else np.zeros((0, self.n_points), dtype=np.int64),
            names=tuple(self.names[c] for c in concepts),
        )

    def to_dict(self) -> Dict[str, Any]:
        """Convert to the JSON concept-class format."""
        return {
            "domain": self.domain.to_dict(),
            "labels": self.labels.to_dict(),
            "concepts": {
                name: [self.labels.format(self.labels.value(v)) for v in row]
                for name, row in zip(self.names, self.table)
            },
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'FiniteConceptClass':
        """Create from the JSON concept-class format."""
        try:
            domain = FiniteDomain(tuple(data["domain"]))
            labels = LabelSpace.from_dict(data["labels"])
            concepts = data["concepts"]
        except (KeyError, TypeError) as exc:
            raise FileFormatError(f"Missing concept-class field: {exc}") from None
        rows = []
        for name, row in concepts.items():
            if len(row) != domain.size:
                raise FileFormatError(f"Concept '{name}' has {len(row)} labels for {domain.size} points")
            indices = [labels.index_of(labels.parse(v)) for v in row]
            if any(i is None for i in indices):
                raise FileFormatError(f"Concept '{name}' has labels outside the label space")
            rows.append(indices)
        return cls(domain=domain, labels=labels, table=np.array(rows, dtype=np.int64).reshape(len(rows), domain.size),
                   names=tuple(concepts.keys()))


@dataclass(frozen=True, eq=False)
class PartialFiniteClass:
    """
    Binary partial concept class; UNDEFINED (-1) marks '*' entries.

    Every concept must be defined on at least one point.
    """
    domain: FiniteDomain
    table: np.ndarray
    names: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        table = _frozen_table(self.table, self.domain.size)
        object.__setattr__(self, "table", table)
        if table.shape[1] != self.domain.size:
            raise InvalidClassError("Partial table width does not match the domain")
        if table.size and (table.min() < UNDEFINED or table.max() > 1):
            raise InvalidClassError("Partial table entries must be 0, 1 or '*'")
        if table.size and not (table != UNDEFINED).any(axis=1).all():
            raise InvalidClassError("Every partial concept needs a non-empty support")
        if len(table) > 1 and len(np.unique(table, axis=0)) != len(table):
            raise InvalidClassError("Partial table contains duplicate rows")
        names = tuple(self.names) or tuple(f"c{i}" for i in range(len(table)))
        if len(names) != len(table) or len(set(names)) != len(names):
            raise InvalidClassError("Concept names must be unique, one per row")
        object.__setattr__(self, "names", names)

    @property
    def n_concepts(self) -> int:
        return self.table.shape[0]

    @property
    def n_points(self) -> int:
        return self.table.shape[1]

    def support(self, concept: int) -> np.ndarray:
        return self.table[concept] != UNDEFINED

    def to_dict(self) -> Dict[str, Any]:
        return {
            "domain": self.domain.to_dict(),
            "labels": {"kind": "partial"},
            "concepts": {
                name: ["*" if v == UNDEFINED else int(v) for v in row]
                for name, row in zip(self.names, self.table)
            },
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PartialFiniteClass':
        try:
            domain = FiniteDomain(tuple(data["domain"]))
            concepts = data["concepts"]
        except (KeyError, TypeError) as exc:
            raise FileFormatError(f"Missing partial-class field: {exc}") from None
        rows = []
        for name, row in concepts.items():
            if len(row) != domain.size or any(v not in (0, 1, "*") for v in row):
                raise FileFormatError(f"Partial concept '{name}' is malformed")
            rows.append([UNDEFINED if v == "*" else v for v in row])
        return cls(domain=domain, table=np.array(rows, dtype=np.int64).reshape(len(rows), domain.size),
                   names=tuple(concepts.keys()))


@dataclass(frozen=True)
class LabeledSample:
    """Ordered sequence of (point, label) pairs; repeats are allowed."""
    pairs: Tuple[Pair, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((int(x), y) for x, y in self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[Pair]:
        return iter(self.pairs)

    def __getitem__(self, position: int) -> Pair:
        return self.pairs[position]

    @property
    def points(self) -> Tuple[int, ...]:
        return tuple(x for x, _ in self.pairs)

    @property
    def labels(self) -> Tuple[Label, ...]:
        return tuple(y for _, y in self.pairs)

    def subsequence(self, positions: Sequence[int]) -> 'LabeledSample':
        return LabeledSample(tuple(self.pairs[i] for i in positions))

    def validate(self, domain: FiniteDomain, labels: LabelSpace) -> None:
        """
        Check every pair against a domain and label space.

        Raises:
            LabelSpaceMismatchError: On a foreign point or label
        """
        for x, y in self.pairs:
            if not domain.contains(x):
                raise LabelSpaceMismatchError(f"Point {x} is outside the domain of size {domain.size}")
            labels.check_sample_label(y)

    def to_list(self, domain: FiniteDomain, labels: LabelSpace) -> List[List[Any]]:
        return [[domain.names[x], labels.format(y)] for x, y in self.pairs]

    @classmethod
    def from_list(cls, data: List[Any], domain: FiniteDomain, labels: LabelSpace) -> 'LabeledSample':
        pairs = []
        for entry in data:
            if not isinstance(entry, (list, tuple)) or len(entry) != 2:
                raise FileFormatError(f"Sample entries must be [point, label], got {entry!r}")
            point, raw = entry
            x = point if isinstance(point, int) and not isinstance(point, bool) else domain.index_of(point)
            pairs.append((x, labels.parse(raw)))
        sample = cls(tuple(pairs))
        sample.validate(domain, labels)
        return sample


@dataclass(frozen=True)
class PerturbationMap:
    """
    Finite perturbation sets U(x), stored sorted by point index.

    Every point belongs to its own perturbation set.
    """
    sets: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        sets = tuple(tuple(sorted(set(int(z) for z in s))) for s in self.sets)
        object.__setattr__(self, "sets", sets)
        n = len(sets)
        for x, s in enumerate(sets):
            if x not in s:
                raise InvalidClassError(f"Point {x} is missing from its own perturbation set")
            if any(not 0 <= z < n for z in s):
                raise InvalidClassError(f"Perturbation set of {x} leaves the domain: {s}")

    @classmethod
    def identity(cls, n: int) -> 'PerturbationMap':
        return cls(tuple((x,) for x in range(n)))

    @property
    def size(self) -> int:
        return len(self.sets)

    @property
    def max_size(self) -> int:
        """M = max_x |U(x)|."""
        return max(len(s) for s in self.sets)

    def __getitem__(self, x: int) -> Tuple[int, ...]:
        return self.sets[x]

    def to_dict(self, domain: FiniteDomain) -> Dict[str, List[str]]:
        return {domain.names[x]: [domain.names[z] for z in s] for x, s in enumerate(self.sets)}

    @classmethod
    def from_dict(cls, data: Dict[str, List[str]], domain: FiniteDomain) -> 'PerturbationMap':
        sets = [None] * domain.size
        for name, members in data.items():
            sets[domain.index_of(name)] = tuple(domain.index_of(z) for z in members)
        missing = [domain.names[x] for x, s in enumerate(sets) if s is None]
        if missing:
            raise FileFormatError(f"Perturbation map has no entry for {missing}")
        return cls(tuple(sets))
