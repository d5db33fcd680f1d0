"""
Tests for the dimension oracles and their witnesses.

Run with: python -m pytest tests/
"""

import pytest
import sys
import os
import math

import numpy as np
from hypothesis import given, settings, strategies as st

# Add src to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.config import DimensionLimits
from src.core.dimensions import (
    LITTLESTONE,
    VC,
    DimensionReport,
    graph_dimension,
    littlestone_dimension,
    partial_vc_dimension,
    pseudo_dimension,
    verify_witness,
    vc_dimension,
)
from src.core.errors import LabelSpaceMismatchError
from src.core.reductions import inflate_class
from src.data import FiniteConceptClass, FiniteDomain, LabelSpace
from src.harness.corpus import full_cube, intervals, k_piecewise, step_real, thresholds, tree_partial

UNBOUNDED = DimensionLimits.unbounded()
RNG = np.random.default_rng(0)


@pytest.mark.parametrize("n", [1, 3, 4, 7, 10])
def test_thresholds_vc_and_littlestone(n):
    """Test VC 1 and Littlestone floor(log2(n+1)) for thresholds."""
    concept_class = thresholds(RNG, n)
    vc = vc_dimension(concept_class, UNBOUNDED)
    ld = littlestone_dimension(concept_class)
    assert vc.value == 1
    assert ld.value == int(math.floor(math.log2(n + 1)))
    assert verify_witness(concept_class, vc)
    assert verify_witness(concept_class, ld)


def test_intervals_and_cube():
    """Test VC dimension of intervals and the full cube."""
    assert vc_dimension(intervals(RNG, 5), UNBOUNDED).value == 2
    cube = full_cube(RNG, 3)
    report = vc_dimension(cube, UNBOUNDED)
    assert report.value == 3 and report.points == (0, 1, 2)
    assert littlestone_dimension(cube).value == 3


def test_graph_dimension_equals_inflated_vc():
    """Test graph dimension against the VC dimension of the inflated class."""
    concept_class = k_piecewise(RNG, n=5, m=3, k=2)
    graph = graph_dimension(concept_class, UNBOUNDED)
    assert graph.value == vc_dimension(inflate_class(concept_class), UNBOUNDED).value
    assert verify_witness(concept_class, graph)


def test_nested_piecewise_has_graph_dimension_one():
    """Test the nested prefix family."""
    concept_class = k_piecewise(RNG, n=8, m=3, k=3, nested=True)
    assert graph_dimension(concept_class, UNBOUNDED).value == 1


def test_pseudo_dimension_of_steps():
    """Test pseudo-dimension of step functions with one and two heights."""
    binary_steps = step_real(RNG, n=4, q=1)
    report = pseudo_dimension(binary_steps, UNBOUNDED)
    assert report.value == 1
    assert verify_witness(binary_steps, report)
    # Two heights: (h, h) and (h, 0) patterns shatter a pair, triples give only 7 patterns
    two_heights = step_real(RNG, n=4, q=2)
    report = pseudo_dimension(two_heights, UNBOUNDED)
    assert report.value == 2
    assert verify_witness(two_heights, report)


def test_partial_vc_of_tree():
    """Test partial VC dimension 1 of the tree paths."""
    partial = tree_partial(RNG, depth=3)
    report = partial_vc_dimension(partial, UNBOUNDED)
    assert report.value == 1
    assert verify_witness(partial, report)


def test_oracles_reject_wrong_label_spaces():
    """Test label-space preconditions."""
    multiclass = k_piecewise(RNG, n=4, m=3, k=2)
    with pytest.raises(LabelSpaceMismatchError):
        vc_dimension(multiclass)
    with pytest.raises(LabelSpaceMismatchError):
        littlestone_dimension(multiclass)
    with pytest.raises(LabelSpaceMismatchError):
        pseudo_dimension(multiclass)


def test_capped_search_is_marked_non_exhaustive():
    """Test that a set-size cap that cuts the search is reported."""
    cube = full_cube(RNG, 3)
    report = vc_dimension(cube, DimensionLimits(max_points=None, max_set_size=1))
    assert report.value == 1
    assert not report.exhaustive
    thresholds_report = vc_dimension(thresholds(RNG, 5), DimensionLimits(max_points=None, max_set_size=1))
    assert thresholds_report.exhaustive


def test_point_cap_is_marked_non_exhaustive():
    """Test that a point cap is reported."""
    report = vc_dimension(thresholds(RNG, 6), DimensionLimits(max_points=3, max_set_size=None))
    assert report.value == 1
    assert not report.exhaustive


def test_limits_reject_non_positive_caps():
    """Test DimensionLimits validation."""
    with pytest.raises(ValueError):
        DimensionLimits(max_points=0)


def test_verify_witness_rejects_forged_reports():
    """Test that forged witnesses fail verification."""
    concept_class = thresholds(RNG, 4)
    assert not verify_witness(concept_class, DimensionReport(kind=VC, value=2, points=(0, 1)))
    assert not verify_witness(concept_class, DimensionReport(kind=VC, value=2, points=(1, 1)))
    ld = littlestone_dimension(concept_class)
    assert not verify_witness(concept_class, DimensionReport(kind=LITTLESTONE, value=ld.value + 1, tree=ld.tree))


def test_report_to_dict_uses_names():
    """Test the JSON form of a report."""
    cube = full_cube(RNG, 2)
    payload = vc_dimension(cube, UNBOUNDED).to_dict(cube)
    assert payload == {"kind": "vc", "value": 2, "witness": {"points": ["0", "1"]}, "exhaustive": True}


def test_empty_class_littlestone():
    """Test the Littlestone dimension of an empty class."""
    empty = FiniteConceptClass(FiniteDomain.of_size(2), LabelSpace.binary(), np.zeros((0, 2), dtype=np.int64))
    report = littlestone_dimension(empty)
    assert report.value == 0
    assert verify_witness(empty, report)


binary_tables = st.integers(1, 4).flatmap(
    lambda n: st.sets(st.tuples(*[st.integers(0, 1)] * n), min_size=1, max_size=2 ** n))


@settings(max_examples=60, deadline=None)
@given(binary_tables)
def test_vc_at_most_littlestone_at_most_log(rows):
    """Property: VC <= Littlestone <= log2 |C|, with verified witnesses."""
    rows = sorted(rows)
    concept_class = FiniteConceptClass(FiniteDomain.of_size(len(rows[0])), LabelSpace.binary(), np.array(rows))
    vc = vc_dimension(concept_class, UNBOUNDED)
    ld = littlestone_dimension(concept_class)
    assert vc.value <= ld.value <= math.floor(math.log2(len(rows)))
    assert verify_witness(concept_class, vc)
    assert verify_witness(concept_class, ld)
    assert graph_dimension(concept_class, UNBOUNDED).value == vc.value
