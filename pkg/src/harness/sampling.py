"""
Seeded sample drawing for the suites.

Every sample has its own PRNG stream, keyed by (entry, suite, sample), so a
suite row can be reproduced on its own from the global seed.
"""

import logging
from fractions import Fraction
from typing import Optional

import numpy as np

from src.core.errors import EmptyClassError, UnrealizableSampleError
from src.data.concept_data import FiniteConceptClass, LabeledSample, PerturbationMap

logger = logging.getLogger(__name__)

PLAIN = "plain"
ROBUST = "robust"
NOISY = "noisy"
MODES = (PLAIN, ROBUST, NOISY)

SUITE_KEYS = {
    "dims-identities": 0,
    "multiclass": 1,
    "regression": 2,
    "robust": 3,
    "stability": 4,
    "agnostic": 5,
}


def sample_seed(seed: int, entry: int, suite: str, index: int) -> np.random.SeedSequence:
    """PRNG stream of sample `index` drawn by `suite` for corpus entry `entry`."""
    return np.random.SeedSequence(seed, spawn_key=(entry, SUITE_KEYS[suite], index))


def _robust_points(concept_class: FiniteConceptClass, concept: int, perturbation: PerturbationMap) -> np.ndarray:
    row = concept_class.table[concept]
    return np.array([x for x in range(concept_class.n_points)
                     if len(set(row[list(perturbation[x])])) == 1], dtype=np.int64)


def _flip(concept_class: FiniteConceptClass, index: int, rng: np.random.Generator) -> int:
    count = concept_class.labels.count
    return int((index + 1 + rng.integers(count - 1)) % count)


def sample_realizable(concept_class: FiniteConceptClass, n: int, seed=0, mode: str = PLAIN,
                      perturbation: Optional[PerturbationMap] = None,
                      rate: Fraction = Fraction(0)) -> LabeledSample:
    """
    Draw n points uniformly with replacement and label them by a seeded-uniform concept.

    Args:
        concept_class: Class to sample from
        n: Number of examples
        seed: int or numpy SeedSequence
        mode: 'plain'; 'robust' (points only where the concept is constant on
            U(x), so the sample is robustly realizable); 'noisy' (exactly
            floor(rate * n) seeded positions get a different label)
        perturbation: Required for robust mode
        rate: Noise rate for noisy mode

    Raises:
        EmptyClassError: If the class has no concepts
        UnrealizableSampleError: In robust mode when no concept is constant on any U(x)
    """
    if n < 0:
        raise ValueError(f"Sample size must be non-negative, got {n}")
    if mode not in MODES:
        raise ValueError(f"Unknown sampling mode '{mode}'")
    if concept_class.n_concepts == 0:
        raise EmptyClassError("Cannot sample from an empty class")
    rng = np.random.default_rng(seed)
    concept = int(rng.integers(concept_class.n_concepts))
    if n == 0:
        return LabeledSample()

    if mode == ROBUST:
        if perturbation is None:
            raise ValueError("Robust sampling needs a perturbation map")
        candidates = _robust_points(concept_class, concept, perturbation)
        if not candidates.size:
            usable = [c for c in range(concept_class.n_concepts)
                      if _robust_points(concept_class, c, perturbation).size]
            if not usable:
                raise UnrealizableSampleError("No concept is constant on any perturbation set")
            concept = usable[int(rng.integers(len(usable)))]
            candidates = _robust_points(concept_class, concept, perturbation)
        points = candidates[rng.integers(candidates.size, size=n)]
    else:
        points = rng.integers(concept_class.n_points, size=n)

    indices = [int(concept_class.table[concept, x]) for x in points]
    if mode == NOISY:
        flips = int(Fraction(rate) * n)
        for position in rng.choice(n, size=flips, replace=False):
            indices[int(position)] = _flip(concept_class, indices[int(position)], rng)
    labels = concept_class.labels
    return LabeledSample(tuple((int(x), labels.value(j)) for x, j in zip(points, indices)))
