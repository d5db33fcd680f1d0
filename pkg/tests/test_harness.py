"""
Tests for corpus generation, seeded sampling, run reports and the suites.

Run with: python -m pytest tests/
"""

import pytest
import sys
import os
import csv
import json
from fractions import Fraction

import numpy as np

# Add src to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.config import (
    AGNOSTIC_SAMPLES,
    GRAPHDIM1_SAMPLES,
    LP_EXPONENTS,
    MULTICLASS_SAMPLES,
    OIG_INSTANCES,
    REGRESSION_SAMPLES,
    ROBUST_SAMPLES,
)
from src.core.errors import EmptyClassError, GenerationError
from src.core.schemes.binary import ThresholdStableScheme
from src.core.schemes.verification import verify_stability, verify_validity
from src.data import LabeledSample
from src.harness import (
    CSV_COLUMNS,
    CorpusEntry,
    CorpusSpec,
    RunReport,
    RunRow,
    SabotagedScheme,
    UnstableScheme,
    default_corpus_spec,
    generate_corpus,
    generate_entry,
    run_suite,
    sample_realizable,
    sample_seed,
    window_perturbation,
)
from src.harness.corpus import thresholds
from src.harness.sampling import NOISY, ROBUST

RNG = np.random.default_rng(0)


def small_spec(seed=7):
    return CorpusSpec(seed=seed, entries=[
        CorpusEntry("thresholds", {"n": 4}),
        CorpusEntry("randomMulticlass", {"n": 4, "m": 3, "rows": 6}),
        CorpusEntry("stepReal", {"n": 3, "q": 2}),
    ])


def test_generate_entry_is_deterministic():
    """Test that an entry depends only on the seed and its index."""
    spec = small_spec()
    first = generate_entry(spec, 1)
    again = generate_entry(spec, 1)
    assert np.array_equal(first.concept_class.table, again.concept_class.table)
    assert first.name == "randomMulticlass(n=4,m=3,rows=6)"
    # Entries before it do not shift its stream
    shorter = CorpusSpec(seed=spec.seed, entries=[spec.entries[0], spec.entries[1]])
    assert np.array_equal(generate_entry(shorter, 1).concept_class.table, first.concept_class.table)


def test_generated_dimensions():
    """Test the oracle values attached to corpus items."""
    items = generate_corpus(small_spec())
    assert items[0].dims == {"vc": 1, "graph": 1, "pseudo": None, "littlestone": 2}
    assert items[2].dims["pseudo"] == 2
    assert items[2].kind == "realGrid"


def test_unknown_generator_and_bad_parameters():
    """Test the generation error paths."""
    with pytest.raises(GenerationError):
        generate_entry(CorpusSpec(entries=[CorpusEntry("spirals", {"n": 3})]), 0)
    with pytest.raises(GenerationError):
        generate_entry(CorpusSpec(entries=[CorpusEntry("thresholds", {"size": 3})]), 0)
    with pytest.raises(GenerationError):
        window_perturbation(4, 0)


def test_corpus_spec_round_trip():
    """Test the dict form of the default corpus."""
    spec = default_corpus_spec(seed=3)
    assert CorpusSpec.from_dict(spec.to_dict()) == spec
    assert spec.entries[-1].perturb == {"window": 2}


def test_twin_and_perturbed_entries():
    """Test the robust corpus entries."""
    spec = CorpusSpec(seed=1, entries=[
        CorpusEntry("twinFromPartial", {"source": {"generator": "treePartial", "params": {"depth": 2}}}),
        CorpusEntry("thresholds", {"n": 5}, perturb={"window": 2}),
    ])
    twin, window = generate_corpus(spec)
    assert twin.name == "twin[treePartial(depth=2)]"
    assert twin.partial is not None and twin.perturbation.max_size == 2
    assert window.name == "thresholds(n=5)+window(2)"
    assert window.perturbation == window_perturbation(5, 2)


def test_sample_realizable_plain():
    """Test that plain samples are labeled by one concept."""
    concept_class = thresholds(RNG, 6)
    sample = sample_realizable(concept_class, 8, seed=4)
    assert len(sample) == 8
    rows = [concept_class.row_values(c) for c in range(concept_class.n_concepts)]
    assert any(all(row[x] == y for x, y in sample) for row in rows)
    assert sample_realizable(concept_class, 8, seed=4) == sample
    assert len(sample_realizable(concept_class, 0)) == 0


def test_sample_realizable_robust():
    """Test that robust samples avoid points where the concept changes inside U(x)."""
    concept_class = thresholds(RNG, 6)
    perturbation = window_perturbation(6, 3)
    for seed in range(5):
        sample = sample_realizable(concept_class, 6, seed=seed, mode=ROBUST, perturbation=perturbation)
        assert any(
            all(len({concept_class.row_values(c)[z] for z in perturbation[x]}) == 1
                and concept_class.row_values(c)[x] == y for x, y in sample)
            for c in range(concept_class.n_concepts))
    with pytest.raises(ValueError):
        sample_realizable(concept_class, 3, mode=ROBUST)


def test_sample_realizable_noisy():
    """Test that noisy mode flips exactly floor(rate * n) labels."""
    concept_class = thresholds(RNG, 6)
    clean = sample_realizable(concept_class, 8, seed=2)
    noisy = sample_realizable(concept_class, 8, seed=2, mode=NOISY, rate=Fraction(1, 4))
    assert [x for x, _ in noisy] == [x for x, _ in clean]
    assert sum(a != b for (_, a), (_, b) in zip(clean, noisy)) == 2


def test_sample_realizable_errors():
    """Test the argument checks."""
    concept_class = thresholds(RNG, 3)
    with pytest.raises(ValueError):
        sample_realizable(concept_class, -1)
    with pytest.raises(ValueError):
        sample_realizable(concept_class, 2, mode="adversarial")
    with pytest.raises(EmptyClassError):
        sample_realizable(concept_class.restrict([]), 2)


def test_sample_seed_streams_differ():
    """Test that each (entry, suite, sample) key has its own stream."""
    a = np.random.default_rng(sample_seed(1, 0, "multiclass", 0)).integers(1 << 30)
    b = np.random.default_rng(sample_seed(1, 0, "multiclass", 1)).integers(1 << 30)
    c = np.random.default_rng(sample_seed(1, 0, "multiclass", 0)).integers(1 << 30)
    assert a != b
    assert a == c


def test_run_report_files(tmp_path):
    """Test the sorted CSV and the JSON summary."""
    report = RunReport(suite="stability", seed=5)
    report.rows.append(RunRow("b", "s", 1, size=2, loss="0", bound_ok=True, dims={"vc": 1}))
    report.rows.append(RunRow("a", "s", 0, size=1, loss="1/2", bound_ok=False, passed=False,
                              witness={"error": "loss"}))
    csv_path, json_path = report.write(tmp_path / "out")

    with open(csv_path, encoding="utf-8", newline="") as f:
        rows = list(csv.DictReader(f))
    assert tuple(rows[0].keys()) == CSV_COLUMNS
    assert [r["class"] for r in rows] == ["a", "b"]
    assert rows[0]["bound_ok"] == "false"
    assert rows[0]["stable_ok"] == ""
    assert rows[1]["vc"] == "1"

    data = json.loads(json_path.read_text(encoding="utf-8"))
    assert data["failures"] == 1
    assert data["passed"] is False
    assert data["first_failure"]["witness"] == {"error": "loss"}


def test_fixtures_are_rejected():
    """Test that the verifiers catch the negative-control schemes."""
    concept_class = thresholds(RNG, 6)
    scheme = ThresholdStableScheme(concept_class)
    samples = [LabeledSample(((0, 1), (1, 1), (4, 0), (5, 0))), LabeledSample(((2, 1), (3, 0), (5, 0)))]
    assert verify_validity(scheme, concept_class, samples).passed
    assert not verify_validity(SabotagedScheme(scheme), concept_class, samples).passed
    unstable = UnstableScheme(scheme)
    assert not verify_stability(unstable, samples[0]).passed
    # The parity bit is stripped again before reconstruction
    output = unstable.compress(samples[0])
    assert output.bits.endswith("0")
    assert unstable.reconstruct_output(output).values() == scheme.reconstruct_output(scheme.compress(samples[0])).values()


def test_stability_suite_on_thresholds(tmp_path):
    """Test a small stability run, including the negative controls."""
    spec = CorpusSpec(seed=11, entries=[CorpusEntry("thresholds", {"n": 5})])
    report = run_suite("stability", spec, out_dir=tmp_path)
    assert report.passed
    schemes = {row.scheme for row in report.rows}
    assert {"control/sabotaged", "control/unstable"} <= schemes
    assert (tmp_path / "stability.csv").exists()
    assert (tmp_path / "stability.json").exists()


def test_injected_fault_fails_the_suite():
    """Test that running the fixtures as schemes produces failed rows."""
    spec = CorpusSpec(seed=11, entries=[CorpusEntry("thresholds", {"n": 5})])
    report = run_suite("stability", spec, inject_fault=True)
    assert not report.passed
    assert report.first_failure().scheme.startswith("fault/")


def test_dims_identities_suite():
    """Test the graph = inflated VC identity on a binary class."""
    spec = CorpusSpec(seed=2, entries=[CorpusEntry("thresholds", {"n": 4}), CorpusEntry("fullCube", {"n": 2})])
    report = run_suite("dims-identities", spec)
    assert report.passed
    assert len(report.rows) == 2


def rows_by_scheme(report):
    grouped = {}
    for row in report.rows:
        grouped.setdefault(row.scheme, []).append(row)
    return grouped


def test_multiclass_suite_on_small_corpus():
    """Test the multiclass suite rows, including boosting and the size-1 scheme."""
    spec = CorpusSpec(seed=5, entries=[
        CorpusEntry("kPiecewise", {"n": 5, "m": 3, "k": 2}),
        CorpusEntry("kPiecewise", {"n": 6, "m": 3, "k": 2, "nested": True}),
        CorpusEntry("thresholds", {"n": 4}),
    ])
    report = run_suite("multiclass", spec)
    assert report.passed, report.first_failure()
    grouped = rows_by_scheme(report)
    assert len(grouped["multiclass-proper-majority(boost)"]) == MULTICLASS_SAMPLES
    assert len(grouped["graphdim1"]) == 2 * GRAPHDIM1_SAMPLES
    assert len(grouped["multiclass-stable(piecewise-threshold)"]) == MULTICLASS_SAMPLES
    for row in report.rows:
        assert row.size is not None and row.loss == "0" and row.bound_ok
        assert row.witness is None


def test_regression_suite_on_small_corpus():
    """Test the regression suite, its sample count and the eps-invariance rows."""
    spec = CorpusSpec(seed=5, entries=[CorpusEntry("stepReal", {"n": 3, "q": 2})])
    report = run_suite("regression", spec)
    assert report.passed, report.first_failure()
    grouped = rows_by_scheme(report)
    for label in ("regression-majority/eps-invariance", "regression-stable/eps-invariance"):
        assert len(grouped[label]) == REGRESSION_SAMPLES
        assert all(row.bound_ok for row in grouped[label])
    approximate = [name for name in grouped if "/eps=1/4/" in name]
    assert len(approximate) == 3 + len(LP_EXPONENTS)
    for name in approximate:
        rows = grouped[name]
        assert len(rows) == REGRESSION_SAMPLES
        assert all(Fraction(row.loss) <= Fraction(1, 4) for row in rows)


def test_default_regression_run_covers_300_samples():
    """Test that the default corpus draws at least 300 regression samples."""
    real = [e for e in default_corpus_spec().entries if e.generator in ("stepReal", "randomReal")]
    assert REGRESSION_SAMPLES >= 15
    assert len(real) * REGRESSION_SAMPLES >= 300


def test_robust_suite_on_small_corpus():
    """Test the robust suite, the window invariance rows and leave-one-out rows."""
    spec = CorpusSpec(seed=5, entries=[
        CorpusEntry("thresholds", {"n": 8}, perturb={"window": 2}),
        CorpusEntry("twinFromPartial", {"source": {"generator": "treePartial", "params": {"depth": 2}}}),
    ])
    report = run_suite("robust", spec)
    assert report.passed, report.first_failure()
    grouped = rows_by_scheme(report)
    assert len(grouped["robust-stable/M-invariance"]) == ROBUST_SAMPLES
    assert all(row.class_name == "thresholds(n=8)+window(2)" for row in grouped["robust-stable/M-invariance"])
    loo = grouped["oig/leave-one-out"]
    assert len(loo) == OIG_INSTANCES
    assert all(row.class_name == "twin[treePartial(depth=2)]" and row.size <= 1 for row in loo)
    assert all(Fraction(row.loss) <= 1 for row in loo)


def test_agnostic_suite_on_small_corpus():
    """Test that agnostic losses stay within the ERM loss (plus eps for regression)."""
    spec = CorpusSpec(seed=5, entries=[
        CorpusEntry("thresholds", {"n": 5}),
        CorpusEntry("stepReal", {"n": 3, "q": 2}),
    ])
    report = run_suite("agnostic", spec)
    assert report.passed, report.first_failure()
    by_class = {}
    for row in report.rows:
        by_class.setdefault(row.class_name, set()).add(row.scheme)
    assert len(by_class["thresholds(n=5)"]) == 1
    assert len(by_class["stepReal(n=3,q=2)"]) == 3
    assert len(report.rows) == 4 * AGNOSTIC_SAMPLES


def test_negative_control_rows_pass_only_when_rejected():
    """Test the control rows of the stability suite and the failing fault rows."""
    spec = CorpusSpec(seed=11, entries=[CorpusEntry("thresholds", {"n": 5})])
    report = run_suite("stability", spec)
    grouped = rows_by_scheme(report)
    assert grouped["control/sabotaged"][0].passed and grouped["control/sabotaged"][0].bound_ok
    assert grouped["control/unstable"][0].passed and grouped["control/unstable"][0].stable_ok is False
    faulty = run_suite("stability", spec, inject_fault=True)
    failed = [row for row in faulty.rows if not row.passed]
    assert failed and all(row.scheme.startswith("fault/") for row in failed)
    assert all(row.witness for row in failed)


def test_unknown_suite():
    """Test the suite-name check."""
    with pytest.raises(ValueError):
        run_suite("everything", small_spec())


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
