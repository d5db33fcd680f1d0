"""Data module for scompress."""
from .concept_data import (
    BINARY,
    MULTICLASS,
    REAL_GRID,
    UNDEFINED,
    FiniteConceptClass,
    FiniteDomain,
    InflatedDomain,
    LabeledSample,
    LabelSpace,
    PartialFiniteClass,
    PerturbationMap,
)
from .file_io import ClassDeserializer, ClassSerializer, validate_class_file

__all__ = [
    'BINARY',
    'MULTICLASS',
    'REAL_GRID',
    'UNDEFINED',
    'FiniteConceptClass',
    'FiniteDomain',
    'InflatedDomain',
    'LabeledSample',
    'LabelSpace',
    'PartialFiniteClass',
    'PerturbationMap',
    'ClassSerializer',
    'ClassDeserializer',
    'validate_class_file',
]
