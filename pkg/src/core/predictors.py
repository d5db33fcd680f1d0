"""
Predictors returned by reconstruction.

A predictor is a total, deterministic map from the points of a finite domain
to labels. Three realizations exist:
- ConceptPredictor: a reference to one row of a concept table
- MajorityPredictor: the pointwise majority of a stored concept list
- RulePredictor: a stored table produced by a reconstruction rule
"""

from typing import Sequence, Tuple

import numpy as np

from src.data.concept_data import FiniteConceptClass, Label


class Predictor:
    """Base class for predictors over a finite domain."""

    kind = "predictor"

    @property
    def size(self) -> int:
        """Number of domain points the predictor is defined on."""
        raise NotImplementedError

    def predict(self, point: int) -> Label:
        """Label assigned to a domain point."""
        raise NotImplementedError

    def values(self) -> Tuple[Label, ...]:
        """Predictions on every domain point, in domain order."""
        return tuple(self.predict(x) for x in range(self.size))

    def get_description(self) -> str:
        return self.kind


class ConceptPredictor(Predictor):
    """Predictor that is a concept of a class."""

    kind = "concept"

    def __init__(self, concept_class: FiniteConceptClass, index: int):
        self.concept_class = concept_class
        self.index = index

    @property
    def size(self) -> int:
        return self.concept_class.n_points

    def predict(self, point: int) -> Label:
        return self.concept_class.value(self.index, point)

    def get_description(self) -> str:
        return f"concept {self.concept_class.names[self.index]}"


class MajorityPredictor(Predictor):
    """
    Pointwise majority over a list of binary concepts; ties predict 0.

    The concept list may repeat concepts and is exposed as `concepts`.
    """

    kind = "majority"

    def __init__(self, concept_class: FiniteConceptClass, concepts: Sequence[int]):
        self.concept_class = concept_class
        self.concepts = tuple(int(c) for c in concepts)
        votes = concept_class.table[list(self.concepts)].sum(axis=0) if self.concepts else \
            np.zeros(concept_class.n_points, dtype=np.int64)
        self._outputs = tuple(int(2 * v > len(self.concepts)) for v in votes)

    @property
    def size(self) -> int:
        return self.concept_class.n_points

    def predict(self, point: int) -> Label:
        return self._outputs[point]

    def get_description(self) -> str:
        return f"majority of {len(self.concepts)} concepts"


class RulePredictor(Predictor):
    """Predictor stored as its full output table."""

    kind = "rule"

    def __init__(self, outputs: Sequence[Label], description: str = "rule"):
        self._outputs = tuple(outputs)
        self.description = description

    @property
    def size(self) -> int:
        return len(self._outputs)

    def predict(self, point: int) -> Label:
        return self._outputs[point]

    def values(self) -> Tuple[Label, ...]:
        return self._outputs

    def get_description(self) -> str:
        return self.description
