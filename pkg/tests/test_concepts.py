"""
Tests for the data model, losses and ERM.

Run with: python -m pytest tests/
"""

import pytest
import sys
import os
from fractions import Fraction

import numpy as np
from hypothesis import given, strategies as st

# Add src to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.core.concepts import L_INF, ZERO_ONE, LpLoss, empirical_loss, erm, is_realizable, loss_upper
from src.core.errors import (
    EmptyClassError,
    EmptySampleError,
    InvalidClassError,
    LabelSpaceMismatchError,
)
from src.core.predictors import ConceptPredictor, MajorityPredictor, RulePredictor
from src.core.rational import LossInterval, ceil_log2, certified_power, certified_root, exact_root
from src.data import FiniteConceptClass, FiniteDomain, LabeledSample, LabelSpace, PerturbationMap
from src.core.naming_utils import ensure_unique_name, slug, twin_name
from src.harness.corpus import thresholds


def make_thresholds(n=4):
    return thresholds(np.random.default_rng(0), n)


def make_real_class():
    """Two concepts over {0, 1/2, 1} on two points."""
    return FiniteConceptClass(FiniteDomain.of_size(2), LabelSpace.real_grid(2), np.array([[0, 2], [1, 1]]))


def test_label_space_values():
    """Test label values and their table indices."""
    grid = LabelSpace.real_grid(4)
    assert grid.count == 5
    assert grid.values[-1] == 1
    assert grid.index_of(Fraction(1, 2)) == 2
    assert grid.index_of(Fraction(1, 3)) is None
    assert LabelSpace.binary().index_of(True) is None
    assert LabelSpace.multiclass(3).index_of(2) == 2
    assert LabelSpace.multiclass(3).index_of(3) is None


def test_label_space_rejects_bad_sizes():
    """Test label space construction invariants."""
    with pytest.raises(InvalidClassError):
        LabelSpace.multiclass(1)
    with pytest.raises(InvalidClassError):
        LabelSpace.real_grid(0)
    with pytest.raises(InvalidClassError):
        LabelSpace("ternary", 3)


def test_class_rejects_duplicate_rows():
    """Test that duplicate concepts are rejected."""
    with pytest.raises(InvalidClassError):
        FiniteConceptClass(FiniteDomain.of_size(2), LabelSpace.binary(), np.array([[0, 1], [0, 1]]))


def test_class_rejects_foreign_labels():
    """Test that table entries must lie in the label space."""
    with pytest.raises(InvalidClassError):
        FiniteConceptClass(FiniteDomain.of_size(2), LabelSpace.binary(), np.array([[0, 2]]))


def test_domain_names_must_be_unique():
    """Test the domain name invariant."""
    with pytest.raises(InvalidClassError):
        FiniteDomain(("a", "a"))


def test_consistent_mask_and_first_consistent():
    """Test consistency queries on thresholds."""
    concept_class = make_thresholds(4)
    pairs = [(1, 1), (2, 0)]
    mask = concept_class.consistent_mask(pairs)
    assert mask.tolist() == [False, False, True, False, False]
    assert concept_class.first_consistent(pairs) == 2
    assert concept_class.first_consistent([(0, 0), (3, 1)]) is None
    # A label outside the space matches nothing
    assert not concept_class.consistent_mask([(0, 5)]).any()


def test_restrict_keeps_order_and_names():
    """Test restricting a class to some of its concepts."""
    concept_class = make_thresholds(4)
    sub = concept_class.restrict([3, 1])
    assert sub.names == ("t2", "t0")
    assert sub.table.tolist() == [[1, 1, 1, 0], [1, 0, 0, 0]]


def test_perturbation_map_invariants():
    """Test that every point belongs to its own perturbation set."""
    perturbation = PerturbationMap(((0, 1), (1,), (2, 0)))
    assert perturbation.max_size == 2
    assert perturbation[2] == (0, 2)
    with pytest.raises(InvalidClassError):
        PerturbationMap(((1,), (1,)))
    with pytest.raises(InvalidClassError):
        PerturbationMap(((0, 3), (1,)))


def test_sample_validation():
    """Test that samples are checked against domain and labels."""
    concept_class = make_real_class()
    LabeledSample(((0, Fraction(1, 3)),)).validate(concept_class.domain, concept_class.labels)
    with pytest.raises(LabelSpaceMismatchError):
        LabeledSample(((0, Fraction(3, 2)),)).validate(concept_class.domain, concept_class.labels)
    with pytest.raises(LabelSpaceMismatchError):
        LabeledSample(((5, 0),)).validate(concept_class.domain, concept_class.labels)


def test_zero_one_loss():
    """Test the empirical zero-one loss."""
    concept_class = make_thresholds(4)
    sample = LabeledSample(((1, 0), (0, 1), (3, 0)))
    assert empirical_loss(ConceptPredictor(concept_class, 0), sample) == Fraction(1, 3)
    assert empirical_loss(ConceptPredictor(concept_class, 1), sample) == 0


def test_lp_and_linf_losses():
    """Test exact lp and lInf losses on real labels."""
    labels = LabelSpace.real_grid(2)
    predictor = RulePredictor([Fraction(1, 2), Fraction(0)])
    sample = LabeledSample(((0, Fraction(0)), (1, Fraction(1))))
    assert empirical_loss(predictor, sample, LpLoss(2), labels) == Fraction(5, 8)
    assert empirical_loss(predictor, sample, LpLoss(1), labels) == Fraction(3, 4)
    assert empirical_loss(predictor, sample, L_INF, labels) == 1


def test_rational_exponent_gives_interval():
    """Test that non-integer p gives a certified interval."""
    labels = LabelSpace.real_grid(4)
    predictor = RulePredictor([Fraction(1, 4)])
    value = empirical_loss(predictor, LabeledSample(((0, Fraction(0)),)), LpLoss(Fraction(3, 2)), labels)
    assert isinstance(value, LossInterval)
    assert value.lo == value.hi == Fraction(1, 8)
    assert loss_upper(value) == Fraction(1, 8)


def test_loss_errors():
    """Test loss preconditions."""
    concept_class = make_thresholds(3)
    predictor = ConceptPredictor(concept_class, 0)
    with pytest.raises(LabelSpaceMismatchError):
        LpLoss(Fraction(1, 2))
    with pytest.raises(LabelSpaceMismatchError):
        empirical_loss(predictor, LabeledSample(((0, 1),)), L_INF)
    with pytest.raises(EmptySampleError):
        empirical_loss(predictor, LabeledSample(), ZERO_ONE)


def test_rule_predictor_loss_checks_sample_labels():
    """Test that lp/lInf on a rule predictor still need real-valued sample labels."""
    predictor = RulePredictor([1, 0])
    with pytest.raises(LabelSpaceMismatchError):
        empirical_loss(predictor, LabeledSample(((0, 1), (1, 1))), L_INF)
    with pytest.raises(LabelSpaceMismatchError):
        empirical_loss(predictor, LabeledSample(((0, 1),)), LpLoss(2))
    assert empirical_loss(predictor, LabeledSample(((0, 1), (1, 1))), ZERO_ONE) == Fraction(1, 2)
    real = RulePredictor([Fraction(1, 2), Fraction(0)])
    assert empirical_loss(real, LabeledSample(((0, Fraction(0)), (1, Fraction(1, 4)))), L_INF) == Fraction(1, 2)


def test_erm_ties_go_to_first_concept():
    """Test that ERM breaks ties by concept order."""
    concept_class = make_thresholds(4)
    sample = LabeledSample(((0, 1), (0, 0)))
    assert erm(concept_class, sample) == (0, Fraction(1, 2))


def test_erm_real_valued():
    """Test ERM under the lInf loss."""
    concept_class = make_real_class()
    sample = LabeledSample(((0, Fraction(1, 2)), (1, Fraction(1, 2))))
    best, loss = erm(concept_class, sample, L_INF)
    assert best == 1 and loss == 0


def test_erm_errors():
    """Test ERM preconditions."""
    concept_class = make_thresholds(3)
    with pytest.raises(EmptyClassError):
        erm(concept_class.restrict([]), LabeledSample(((0, 1),)))
    with pytest.raises(EmptySampleError):
        erm(concept_class, LabeledSample())
    with pytest.raises(LabelSpaceMismatchError):
        erm(concept_class, LabeledSample(((0, 1),)), LpLoss(1))


def test_is_realizable():
    """Test realizability returns the first consistent concept."""
    concept_class = make_thresholds(4)
    assert is_realizable(concept_class, LabeledSample(((0, 1), (1, 0)))) == 1
    assert is_realizable(concept_class, LabeledSample(((1, 1), (0, 0)))) is None
    assert is_realizable(concept_class, LabeledSample(((2, 0), (2, 1)))) is None


def test_thresholds_on_ten_points():
    """Test c_t(x) = 1[x <= t] with the empty concept first."""
    concept_class = make_thresholds(10)
    assert concept_class.n_concepts == 11
    assert concept_class.names[0] == "empty"
    assert concept_class.row_values(3) == tuple(int(x <= 2) for x in range(10))
    assert concept_class.names[3] == "t2"

    assert is_realizable(concept_class, LabeledSample(((2, 1), (7, 0)))) == 3
    assert is_realizable(concept_class, LabeledSample(((2, 0), (2, 1)))) is None
    best, loss = erm(concept_class, LabeledSample(((1, 0), (3, 1), (8, 1))))
    assert (concept_class.names[best], loss) == ("t8", Fraction(1, 3))
    assert concept_class.row_values(best) == tuple(int(x <= 8) for x in range(10))


def test_majority_predictor_ties_predict_zero():
    """Test the pointwise majority and its tie rule."""
    concept_class = make_thresholds(2)
    predictor = MajorityPredictor(concept_class, [0, 2])
    assert predictor.values() == (0, 0)
    assert MajorityPredictor(concept_class, [2, 2, 0]).values() == (1, 1)


def test_bit_widths_and_roots():
    """Test ceil_log2 and exact roots."""
    assert [ceil_log2(n) for n in (1, 2, 3, 4, 5, 8, 9)] == [0, 1, 2, 2, 3, 3, 4]
    with pytest.raises(ValueError):
        ceil_log2(0)
    assert exact_root(Fraction(1, 4), 2) == Fraction(1, 2)
    assert exact_root(Fraction(8, 27), 3) == Fraction(2, 3)
    assert exact_root(2, 2) is None


def test_certified_root_brackets():
    """Test that the certified root brackets sqrt(2) tightly."""
    lo, hi = certified_root(2, 2)
    assert lo < hi
    assert lo ** 2 <= 2 <= hi ** 2
    assert hi - lo <= Fraction(1, 2 ** 40)


@given(st.fractions(min_value=0, max_value=1, max_denominator=50),
       st.sampled_from([Fraction(3, 2), Fraction(5, 3), Fraction(7, 4)]))
def test_certified_power_encloses_value(value, exponent):
    """Property: certified powers enclose value**exponent."""
    interval = certified_power(value, exponent)
    k = exponent.denominator
    assert interval.lo <= interval.hi
    assert interval.lo ** k <= value ** exponent.numerator <= interval.hi ** k


def test_naming_helpers():
    """Test collision suffixes, twin names and file slugs."""
    assert ensure_unique_name("t1", ["t0"]) == "t1"
    assert ensure_unique_name("t1", ["t1", "t1_1"]) == "t1_2"
    assert ensure_unique_name("t_1", ["t_1"]) == "t_2"
    assert twin_name("v0", ["v", "v0"]) == "v0'"
    assert twin_name("v", ["v", "v'"]) == "v'_1"
    assert slug("thresholds(n=4)+window(2)") == "thresholds-n-4-window-2"
    assert slug("()") == "entry"
