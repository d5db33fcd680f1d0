"""
Tests for the JSON file formats.

Run with: python -m pytest tests/
"""

import pytest
import sys
import os
import json
from fractions import Fraction

import numpy as np

# Add src to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.core.errors import FileFormatError, InvalidClassError, LabelSpaceMismatchError
from src.data import ClassDeserializer, ClassSerializer, LabeledSample, PartialFiniteClass, validate_class_file
from src.data.file_io import PARTIAL_KIND
from src.harness import window_perturbation
from src.harness.corpus import step_real, thresholds, tree_partial

RNG = np.random.default_rng(0)


def test_save_and_load_class(tmp_path):
    """Test saving and reloading a binary class."""
    concept_class = thresholds(RNG, 3)
    path = tmp_path / "nested" / "thresholds.json"
    ClassSerializer.save(concept_class, path)

    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["domain"] == ["0", "1", "2"]
    assert data["labels"] == {"kind": "binary"}
    assert data["concepts"]["t1"] == [1, 1, 0]
    assert data["concepts"]["empty"] == [0, 0, 0]

    loaded = ClassDeserializer.load(path)
    assert loaded.names == concept_class.names
    assert np.array_equal(loaded.table, concept_class.table)


def test_real_labels_are_written_as_fractions(tmp_path):
    """Test the 'i/q' label format of real-grid classes."""
    concept_class = step_real(RNG, n=2, q=2)
    path = tmp_path / "step.json"
    ClassSerializer.save(concept_class, path)
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["labels"] == {"kind": "realGrid", "q": 2}
    assert data["concepts"]["step1h1"] == ["1/2", "1/2"]
    assert ClassDeserializer.load(path).labels == concept_class.labels


def test_partial_class_round_trip(tmp_path):
    """Test the '*' encoding of undefined entries."""
    partial = tree_partial(RNG, depth=2)
    path = tmp_path / "tree.json"
    ClassSerializer.save(partial, path)
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["labels"] == {"kind": PARTIAL_KIND}
    assert data["concepts"]["c_v0"] == [0, 0, "*"]
    loaded = ClassDeserializer.load(path)
    assert isinstance(loaded, PartialFiniteClass)
    assert np.array_equal(loaded.table, partial.table)


def test_samples_file_and_bare_sample(tmp_path):
    """Test sample sets and single bare samples."""
    concept_class = step_real(RNG, n=3, q=4)
    samples = [LabeledSample(((0, Fraction(1, 4)), (2, Fraction(0)))), LabeledSample(((1, Fraction(1)),))]
    path = tmp_path / "samples.json"
    ClassSerializer.save_samples(samples, concept_class.domain, concept_class.labels, path)
    assert ClassDeserializer.load_samples(path, concept_class.domain, concept_class.labels) == samples

    bare = tmp_path / "bare.json"
    ClassSerializer.save_sample(samples[0], concept_class.domain, concept_class.labels, bare)
    assert json.loads(bare.read_text(encoding="utf-8")) == [["0", "1/4"], ["2", "0/1"]]
    assert ClassDeserializer.load_samples(bare, concept_class.domain, concept_class.labels) == samples[:1]
    assert ClassDeserializer.load_sample(bare, concept_class.domain, concept_class.labels) == samples[0]


def test_sample_with_unknown_point_is_rejected(tmp_path):
    """Test that samples naming foreign points fail."""
    concept_class = thresholds(RNG, 3)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps([["7", 1]]), encoding="utf-8")
    with pytest.raises(LabelSpaceMismatchError):
        ClassDeserializer.load_sample(path, concept_class.domain, concept_class.labels)


def test_perturbation_round_trip(tmp_path):
    """Test saving and loading a perturbation map."""
    concept_class = thresholds(RNG, 4)
    perturbation = window_perturbation(4, 2)
    path = tmp_path / "perturb.json"
    ClassSerializer.save_perturbation(perturbation, concept_class.domain, path)
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["0"] == ["0", "1"]
    assert data["3"] == ["3"]
    assert ClassDeserializer.load_perturbation(path, concept_class.domain) == perturbation


def test_perturbation_must_cover_every_point(tmp_path):
    """Test that a missing U(x) entry is reported."""
    concept_class = thresholds(RNG, 2)
    path = tmp_path / "perturb.json"
    path.write_text(json.dumps({"0": ["0", "1"]}), encoding="utf-8")
    with pytest.raises(FileFormatError):
        ClassDeserializer.load_perturbation(path, concept_class.domain)


def test_malformed_class_files(tmp_path):
    """Test the error paths of class loading."""
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(FileFormatError):
        ClassDeserializer.load(broken)

    short_row = tmp_path / "short.json"
    short_row.write_text(json.dumps({"domain": ["a", "b"], "labels": {"kind": "binary"},
                                     "concepts": {"c": [0]}}), encoding="utf-8")
    with pytest.raises(FileFormatError):
        ClassDeserializer.load(short_row)

    duplicate = tmp_path / "duplicate.json"
    duplicate.write_text(json.dumps({"domain": ["a"], "labels": {"kind": "binary"},
                                     "concepts": {"c": [0], "d": [0]}}), encoding="utf-8")
    with pytest.raises(InvalidClassError):
        ClassDeserializer.load(duplicate)

    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"domain": ["a"], "labels": {"kind": "ternary"},
                                   "concepts": {"c": [0]}}), encoding="utf-8")
    with pytest.raises(FileFormatError):
        ClassDeserializer.load(unknown)


def test_validate_class_file(tmp_path):
    """Test the boolean validity check."""
    good = tmp_path / "good.json"
    ClassSerializer.save(thresholds(RNG, 2), good)
    bad = tmp_path / "bad.json"
    bad.write_text("[]", encoding="utf-8")
    assert validate_class_file(good)
    assert not validate_class_file(bad)
    assert not validate_class_file(tmp_path / "missing.json")
    assert not validate_class_file(tmp_path)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
