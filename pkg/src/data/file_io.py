"""
File I/O system for scompress.

All files are UTF-8 JSON:
- concept class: {"domain": [names], "labels": {...}, "concepts": {name: [labels]}}
  (labels {"kind": "partial"} with '*' entries for partial classes)
- sample: [[point, label], ...]
- sample set: {"samples": [sample, ...]}
- perturbation map: {point: [points], ...}
"""

import json
from pathlib import Path
from typing import Any, List, Union

from src.core.errors import CompressionError, FileFormatError
from .concept_data import (
    FiniteConceptClass,
    FiniteDomain,
    LabeledSample,
    LabelSpace,
    PartialFiniteClass,
    PerturbationMap,
)

PARTIAL_KIND = "partial"

AnyClass = Union[FiniteConceptClass, PartialFiniteClass]


def _read_json(filepath) -> Any:
    try:
        with open(filepath, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{filepath} is not valid JSON: {exc}") from None


def _write_json(payload: Any, filepath) -> None:
    path = Path(filepath)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(payload, f, indent=2, sort_keys=False)
        f.write("\n")


class ClassSerializer:
    """Serializes concept classes, samples and perturbation maps to JSON."""

    @staticmethod
    def save(concept_class: AnyClass, filepath) -> None:
        """
        Save a total or partial concept class.

        Args:
            concept_class: Class to save
            filepath: Path to save the file

        Raises:
            IOError: If file cannot be written
        """
        _write_json(concept_class.to_dict(), filepath)

    @staticmethod
    def save_sample(sample: LabeledSample, domain: FiniteDomain, labels: LabelSpace, filepath) -> None:
        _write_json(sample.to_list(domain, labels), filepath)

    @staticmethod
    def save_samples(samples: List[LabeledSample], domain: FiniteDomain, labels: LabelSpace, filepath) -> None:
        _write_json({"samples": [s.to_list(domain, labels) for s in samples]}, filepath)

    @staticmethod
    def save_perturbation(perturbation: PerturbationMap, domain: FiniteDomain, filepath) -> None:
        _write_json(perturbation.to_dict(domain), filepath)


class ClassDeserializer:
    """Loads concept classes, samples and perturbation maps from JSON."""

    @staticmethod
    def load(filepath) -> AnyClass:
        """
        Load a concept class, total or partial depending on its label kind.

        Raises:
            FileFormatError: If the payload is malformed
        """
        data = _read_json(filepath)
        if not isinstance(data, dict):
            raise FileFormatError(f"{filepath}: concept-class file must hold a JSON object")
        if isinstance(data.get("labels"), dict) and data["labels"].get("kind") == PARTIAL_KIND:
            return PartialFiniteClass.from_dict(data)
        return FiniteConceptClass.from_dict(data)

    @staticmethod
    def load_sample(filepath, domain: FiniteDomain, labels: LabelSpace) -> LabeledSample:
        data = _read_json(filepath)
        if not isinstance(data, list):
            raise FileFormatError(f"{filepath}: sample file must hold a JSON list of [point, label] pairs")
        return LabeledSample.from_list(data, domain, labels)

    @staticmethod
    def load_samples(filepath, domain: FiniteDomain, labels: LabelSpace) -> List[LabeledSample]:
        """
        Load a sample set; a single bare sample is accepted as a set of one.
        """
        data = _read_json(filepath)
        if isinstance(data, dict) and isinstance(data.get("samples"), list):
            entries = data["samples"]
        elif isinstance(data, list) and (not data or _looks_like_pair(data[0])):
            entries = [data]
        elif isinstance(data, list):
            entries = data
        else:
            raise FileFormatError(f"{filepath}: expected {{'samples': [...]}} or a sample list")
        return [LabeledSample.from_list(entry, domain, labels) for entry in entries]

    @staticmethod
    def load_perturbation(filepath, domain: FiniteDomain) -> PerturbationMap:
        data = _read_json(filepath)
        if not isinstance(data, dict):
            raise FileFormatError(f"{filepath}: perturbation file must map points to point lists")
        return PerturbationMap.from_dict(data, domain)


def _looks_like_pair(entry: Any) -> bool:
    return isinstance(entry, list) and len(entry) == 2 and not isinstance(entry[0], list)


def validate_class_file(filepath) -> bool:
    """
    Validate that a file holds a loadable concept class.

    Args:
        filepath: Path to check

    Returns:
        True if valid, False otherwise
    """
    try:
        path = Path(filepath)
        if not path.exists() or not path.is_file():
            return False
        ClassDeserializer.load(path)
        return True
    except (OSError, CompressionError):
        return False
