"""
Verifiers for compression-scheme claims.

- verify_validity: consistency (or epsilon-approximation) and size budget per sample
- verify_stability: compress(T) == compress(S) for subsequences kept(S) <= T <= S
- verify_flag: proper / majority-vote structure of reconstructions
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.config import STABILITY_EXHAUSTIVE_GAP, STABILITY_RANDOM_SUBSETS
from src.core.concepts import ZERO_ONE, Loss, empirical_loss, loss_upper
from src.core.errors import CompressionError
from src.core.predictors import MajorityPredictor
from src.core.schemes.base import MAJORITY_VOTE, PROPER, CompressionOutput, CompressionScheme
from src.data.concept_data import FiniteConceptClass, LabeledSample

logger = logging.getLogger(__name__)


@dataclass
class SampleCheck:
    """Outcome of one sample in a validity run."""
    index: int
    size: Optional[int] = None
    loss: Optional[Any] = None
    loss_ok: bool = False
    size_ok: bool = False
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.loss_ok and self.size_ok

    def to_dict(self) -> Dict[str, Any]:
        return {"index": self.index, "size": self.size, "loss": None if self.loss is None else str(self.loss),
                "loss_ok": self.loss_ok, "size_ok": self.size_ok, "error": self.error}


@dataclass
class ValidityReport:
    """Per-sample validity results."""
    scheme: str
    checks: List[SampleCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[SampleCheck]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {"scheme": self.scheme, "passed": self.passed, "samples": len(self.checks),
                "failures": [c.to_dict() for c in self.failures]}


def verify_validity(scheme: CompressionScheme, concept_class: FiniteConceptClass,
                    corpus: Sequence[LabeledSample], loss: Loss = ZERO_ONE,
                    eps: Fraction = Fraction(0)) -> ValidityReport:
    """
    Check every sample: loss of the reconstruction <= eps and size within budget.

    Errors raised by the scheme are recorded as failures, not propagated.
    """
    report = ValidityReport(scheme=scheme.get_description())
    for index, sample in enumerate(corpus):
        check = SampleCheck(index=index)
        try:
            output = scheme.compress(sample)
            predictor = scheme.reconstruct_output(output)
            check.size = output.size
            check.size_ok = scheme.size_budget is None or output.size <= scheme.size_budget
            check.loss = empirical_loss(predictor, sample, loss, concept_class.labels) if len(sample) else Fraction(0)
            check.loss_ok = loss_upper(check.loss) <= eps
        except CompressionError as exc:
            check.error = f"{type(exc).__name__}: {exc}"
        report.checks.append(check)
    logger.debug("Validity of %s: %d/%d passed", scheme.name, len(report.checks) - len(report.failures),
                 len(report.checks))
    return report


@dataclass
class StabilityReport:
    """Result of a stability check on one sample."""
    passed: bool
    checked: int
    exhaustive: bool
    witness: Optional[List[int]] = None
    expected: Optional[CompressionOutput] = None
    actual: Optional[CompressionOutput] = None

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "checked": self.checked, "exhaustive": self.exhaustive,
                "witness": self.witness,
                "expected": None if self.expected is None else self.expected.to_dict(),
                "actual": None if self.actual is None else self.actual.to_dict()}


def verify_stability(scheme: CompressionScheme, sample: LabeledSample, seed: int = 0) -> StabilityReport:
    """
    Compare compress(T) with compress(S) for subsequences T between kept(S) and S.

    All such T are tried when the gap has at most 12 positions, otherwise 256
    seeded random ones. Outputs are compared as multisets of pairs plus bits.
    """
    expected = scheme.compress(sample)
    kept = set(expected.kept)
    gap = [i for i in range(len(sample)) if i not in kept]
    exhaustive = len(gap) <= STABILITY_EXHAUSTIVE_GAP
    if exhaustive:
        subsets = (combo for r in range(len(gap) + 1) for combo in itertools.combinations(gap, r))
    else:
        rng = np.random.default_rng(seed)
        subsets = ([g for g, keep in zip(gap, rng.integers(0, 2, len(gap))) if keep]
                   for _ in range(STABILITY_RANDOM_SUBSETS))
    checked = 0
    for extra in subsets:
        positions = sorted(kept.union(extra))
        subsample = sample.subsequence(positions)
        try:
            actual = scheme.compress(subsample)
        except CompressionError as exc:
            logger.debug("Stability witness raised %s", exc)
            return StabilityReport(False, checked + 1, exhaustive, positions, expected, None)
        checked += 1
        if actual.key() != expected.key():
            return StabilityReport(False, checked, exhaustive, positions, expected, actual)
    return StabilityReport(True, checked, exhaustive)


@dataclass
class FlagReport:
    """Result of checking a capability flag over a corpus."""
    flag: str
    passed: bool
    structural_failure: bool = False
    failures: List[int] = field(default_factory=list)
    message: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {"flag": self.flag, "passed": self.passed, "structural_failure": self.structural_failure,
                "failures": self.failures, "message": self.message}


def verify_flag(scheme: CompressionScheme, flag: str, concept_class: FiniteConceptClass,
                corpus: Sequence[LabeledSample]) -> FlagReport:
    """
    Check a proper or majority-vote claim on every corpus sample.

    proper: the reconstruction equals some concept pointwise.
    majorityVote: the reconstruction exposes its concept list and the
    pointwise majority recomputed from the table matches it.

    Errors raised by the scheme count as failed samples.
    """
    if flag not in (PROPER, MAJORITY_VOTE):
        raise ValueError(f"Unknown flag '{flag}'")
    rows = {concept_class.row_values(c) for c in range(concept_class.n_concepts)}
    failures = []
    errors: List[str] = []
    for index, sample in enumerate(corpus):
        try:
            predictor = scheme.reconstruct_output(scheme.compress(sample))
        except CompressionError as exc:
            failures.append(index)
            errors.append(f"sample {index}: {type(exc).__name__}: {exc}")
            continue
        if flag == PROPER:
            if predictor.values() not in rows:
                failures.append(index)
            continue
        if not isinstance(predictor, MajorityPredictor):
            return FlagReport(flag, False, structural_failure=True,
                              message=f"{scheme.name} reconstruction exposes no concept list")
        table = concept_class.table[list(predictor.concepts)]
        majority = tuple(int(2 * v > len(predictor.concepts)) for v in table.sum(axis=0))
        if majority != predictor.values():
            failures.append(index)
    return FlagReport(flag, not failures, failures=failures, message="; ".join(errors))
