"""
Tests for the multiclass to binary reductions.

Run with: python -m pytest tests/
"""

import pytest
import sys
import os
from fractions import Fraction

import numpy as np

# Add src to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.core.concepts import empirical_loss
from src.core.errors import ConstructionError, DecodeError
from src.core.reductions import (
    AgnosticWrap,
    Graphdim1Scheme,
    PiecewiseThresholdInflatedScheme,
    ReduceGeneral,
    ReduceProperOrMajority,
    ReduceStable,
    inflate_class,
    inflate_sample,
)
from src.core.predictors import MajorityPredictor
from src.core.schemes.base import PROPER, STABLE, CompressionScheme
from src.core.schemes.binary import (
    MajorityBoostScheme,
    ProperExhaustiveScheme,
    SoaScheme,
    VersionSpaceStableScheme,
)
from src.core.schemes.verification import verify_stability, verify_validity
from src.data import FiniteConceptClass, LabeledSample, LabelSpace
from src.harness import sample_realizable
from src.harness.corpus import full_cube, k_piecewise, thresholds

RNG = np.random.default_rng(0)


def make_piecewise():
    return k_piecewise(RNG, n=5, m=3, k=2)


def realizable_samples(concept_class, count=4, n=6):
    return [sample_realizable(concept_class, n, seed=s) for s in range(count)]


def per_point_blocks(inflated):
    return [list(inflated.domain.block(x)) for x in range(inflated.domain.base.size)]


class RecordingScheme(CompressionScheme):
    """Pass-through substrate that records what its reconstruct side receives."""

    def __init__(self, inner):
        super().__init__(inner.concept_class)
        self.inner = inner
        self.name = inner.name
        self.flags = inner.flags
        self.size_budget = inner.size_budget
        self.seen = []
        self.replayed = []

    def compress(self, sample):
        self.replayed.append(tuple(sample.pairs))
        return self.inner.compress(sample)

    def reconstruct(self, pairs, bits):
        self.seen.append((tuple(pairs), bits))
        return self.inner.reconstruct(pairs, bits)


def test_inflate_class_and_sample():
    """Test the indicator class and the inflated sample order."""
    concept_class = make_piecewise()
    inflated = inflate_class(concept_class)
    assert inflated.n_points == 15
    assert inflated.labels.is_binary
    assert inflated.names == concept_class.names
    # Concept constant 2 fires exactly at label index 2 of every point
    constant = concept_class.table.tolist().index([2] * 5)
    assert inflated.table[constant].tolist() == [0, 0, 1] * 5

    sample = LabeledSample(((1, 2), (0, 0)))
    assert inflate_sample(sample, LabelSpace.multiclass(3)).pairs == (
        (3, 0), (4, 0), (5, 1), (0, 1), (1, 0), (2, 0))


def test_general_reduction_with_soa():
    """Test the general reduction on a non-proper substrate."""
    concept_class = make_piecewise()
    scheme = ReduceGeneral(SoaScheme(inflate_class(concept_class)), concept_class)
    assert scheme.width == 2
    for sample in realizable_samples(concept_class):
        trace = scheme.trace(sample)
        assert trace.within_bound
        predictor = scheme.reconstruct_output(trace.output)
        assert empirical_loss(predictor, sample) == 0


def test_general_reduction_with_version_space():
    """Test validity through the verifier."""
    concept_class = make_piecewise()
    scheme = ReduceGeneral(VersionSpaceStableScheme(inflate_class(concept_class)), concept_class)
    report = verify_validity(scheme, concept_class, realizable_samples(concept_class))
    assert report.passed


def test_general_reduction_rejects_truncated_bits():
    """Test that damaged bits raise a decode error."""
    concept_class = make_piecewise()
    scheme = ReduceGeneral(SoaScheme(inflate_class(concept_class)), concept_class)
    sample = LabeledSample(((0, 1), (4, 2)))
    output = scheme.compress(sample)
    with pytest.raises(DecodeError):
        scheme.reconstruct(output.pairs, output.bits[:-1])


def test_proper_or_majority_reduction():
    """Test the positive-pair reduction with proper and boosting substrates."""
    concept_class = make_piecewise()
    inflated = inflate_class(concept_class)
    samples = realizable_samples(concept_class)
    proper = ReduceProperOrMajority(ProperExhaustiveScheme(inflated, inflated.n_points), concept_class)
    boosted = ReduceProperOrMajority(MajorityBoostScheme(inflated), concept_class)
    for scheme in (proper, boosted):
        for sample in samples:
            trace = scheme.trace(sample)
            assert trace.output.size == trace.substrate.size
            assert empirical_loss(scheme.reconstruct_output(trace.output), sample) == 0


def test_proper_or_majority_requires_flag():
    """Test that unflagged substrates are refused."""
    concept_class = make_piecewise()
    with pytest.raises(ConstructionError):
        ReduceProperOrMajority(SoaScheme(inflate_class(concept_class)), concept_class)


def test_substrate_must_cover_inflated_domain():
    """Test the substrate domain check."""
    concept_class = make_piecewise()
    with pytest.raises(ConstructionError):
        ReduceGeneral(SoaScheme(thresholds(RNG, 5)), concept_class)


def test_stable_reduction_with_blocked_version_space():
    """Test the stable reduction keeps no bits and stays stable."""
    concept_class = make_piecewise()
    inflated = inflate_class(concept_class)
    scheme = ReduceStable(VersionSpaceStableScheme(inflated, per_point_blocks(inflated)), concept_class)
    assert STABLE in scheme.flags
    for seed, sample in enumerate(realizable_samples(concept_class)):
        trace = scheme.trace(sample)
        assert trace.output.bits == ""
        assert trace.within_bound
        assert empirical_loss(scheme.reconstruct_output(trace.output), sample) == 0
        assert verify_stability(scheme, sample, seed=seed).passed


def test_stable_reduction_with_piecewise_thresholds():
    """Test the piecewise-threshold substrate and its 2k budget."""
    concept_class = make_piecewise()
    substrate = PiecewiseThresholdInflatedScheme(inflate_class(concept_class), k=2)
    assert substrate.size_budget == 4
    scheme = ReduceStable(substrate, concept_class)
    sample = LabeledSample(((0, 1), (3, 2), (1, 1), (4, 2), (2, 1)))
    output = scheme.compress(sample)
    # Ends of the label-1 run {0, 2} and the label-2 run {3, 4}
    assert output.kept == (0, 1, 3, 4)
    predictor = scheme.reconstruct_output(output)
    assert predictor.values() == (1, 1, 1, 2, 2)


def test_stable_reduction_requires_stable_substrate():
    """Test that non-stable substrates are refused."""
    concept_class = make_piecewise()
    inflated = inflate_class(concept_class)
    with pytest.raises(ConstructionError):
        ReduceStable(ProperExhaustiveScheme(inflated, 3), concept_class)


def test_piecewise_substrate_needs_inflated_domain():
    """Test the domain check of the piecewise-threshold scheme."""
    with pytest.raises(ConstructionError):
        PiecewiseThresholdInflatedScheme(thresholds(RNG, 4), k=2)


def test_graphdim1_keeps_one_pair():
    """Test the size-1 scheme on nested prefixes."""
    concept_class = k_piecewise(RNG, n=8, m=3, k=3, nested=True)
    scheme = Graphdim1Scheme(concept_class)
    sample = LabeledSample(((2, 1), (5, 0)))
    output, walk = scheme.compress_with_trace(sample)
    assert output.kept == (0,)
    assert walk.points[0] == 2
    predictor = scheme.reconstruct_output(output)
    assert predictor.values() == (1, 1, 1, 0, 0, 0, 0, 0)
    report = verify_validity(scheme, concept_class, realizable_samples(concept_class, count=8))
    assert report.passed


def test_graphdim1_empty_output_when_first_concept_fits():
    """Test that samples agreeing with the first concept keep nothing."""
    concept_class = k_piecewise(RNG, n=8, m=3, k=3, nested=True)
    scheme = Graphdim1Scheme(concept_class)
    output = scheme.compress(LabeledSample(((3, 0), (6, 0))))
    assert output.size == 0
    assert scheme.reconstruct_output(output).values() == concept_class.row_values(0)


def test_graphdim1_refuses_larger_graph_dimension():
    """Test the graph-dimension precondition."""
    with pytest.raises(ConstructionError):
        Graphdim1Scheme(full_cube(RNG, 2))


def test_agnostic_wrap_matches_erm_loss():
    """Test agnostic compression on a noisy threshold sample."""
    concept_class = thresholds(RNG, 6)
    scheme = AgnosticWrap(VersionSpaceStableScheme(concept_class), concept_class)
    assert scheme.flags == frozenset({PROPER})
    # Every concept errs once; the all-zero concept comes first
    sample = LabeledSample(((1, 0), (2, 1), (3, 0), (4, 0)))
    assert scheme.correct_positions(sample) == [0, 2, 3]
    output = scheme.compress(sample)
    assert output.kept == (0,)
    assert empirical_loss(scheme.reconstruct_output(output), sample) == Fraction(1, 4)


def test_reconstruct_sees_only_kept_pairs():
    """Test that substrates reconstruct from the kept pairs and bits alone."""
    concept_class = make_piecewise()
    inflated = inflate_class(concept_class)
    width = concept_class.labels.count
    reductions = [
        ReduceGeneral(RecordingScheme(SoaScheme(inflated)), concept_class),
        ReduceProperOrMajority(RecordingScheme(MajorityBoostScheme(inflated)), concept_class),
        ReduceStable(RecordingScheme(VersionSpaceStableScheme(inflated, per_point_blocks(inflated))),
                     concept_class),
    ]
    for scheme in reductions:
        recorder = scheme.substrate
        for sample in realizable_samples(concept_class):
            trace = scheme.trace(sample)
            recorder.seen.clear()
            recorder.replayed.clear()
            scheme.reconstruct_output(trace.output)
            kept_points = {x for x, _ in trace.output.pairs}
            assert len(recorder.seen) == 1
            pairs, bits = recorder.seen[0]
            assert sorted(pairs) == sorted(trace.substrate.pairs)
            assert bits == trace.substrate.bits
            assert {p // width for p, _ in pairs} <= kept_points
            # Stable reconstruction may rerun the compressor, but only on kept points
            for replay in recorder.replayed:
                assert {p // width for p, _ in replay} <= kept_points


def test_boosted_majority_fires_once_per_point():
    """Test that the inflated majority has at most one 1 in each point's label block."""
    concept_class = make_piecewise()
    inflated = inflate_class(concept_class)
    scheme = ReduceProperOrMajority(MajorityBoostScheme(inflated), concept_class)
    width = concept_class.labels.count
    for sample in realizable_samples(concept_class, count=6):
        output = scheme.compress(sample)
        majority = scheme.inflated_predictor(output.pairs, output.bits)
        assert isinstance(majority, MajorityPredictor)
        for x in range(concept_class.n_points):
            fired = [majority.predict(x * width + j) for j in range(width)]
            assert sum(fired) <= 1


def test_proper_or_majority_size_ignores_label_count():
    """Test that the compressed size is the same with 8 and with 64 labels."""
    base = make_piecewise()
    samples = realizable_samples(base)
    sizes = {}
    for m in (8, 64):
        concept_class = FiniteConceptClass(base.domain, LabelSpace.multiclass(m), base.table, names=base.names)
        inflated = inflate_class(concept_class)
        for substrate in (ProperExhaustiveScheme(inflated, inflated.n_points), MajorityBoostScheme(inflated)):
            scheme = ReduceProperOrMajority(substrate, concept_class)
            sizes[m, substrate.name] = [scheme.compress(sample).size for sample in samples]
    assert sizes[8, "proper"] == sizes[64, "proper"]
    assert sizes[8, "boost"] == sizes[64, "boost"]
