"""
Corpus generation, seeded sampling and the verification suites.
"""

from .corpus import (
    GENERATORS,
    CorpusEntry,
    CorpusItem,
    CorpusSpec,
    class_dimensions,
    default_corpus_spec,
    generate_corpus,
    generate_entry,
    window_perturbation,
)
from .fixtures import SabotagedScheme, UnstableScheme
from .report import CSV_COLUMNS, RunReport, RunRow
from .sampling import MODES, sample_realizable, sample_seed
from .suites import SUITES, run_suite

__all__ = [
    'GENERATORS', 'CorpusEntry', 'CorpusItem', 'CorpusSpec', 'class_dimensions',
    'default_corpus_spec', 'generate_corpus', 'generate_entry', 'window_perturbation',
    'SabotagedScheme', 'UnstableScheme',
    'CSV_COLUMNS', 'RunReport', 'RunRow',
    'MODES', 'sample_realizable', 'sample_seed',
    'SUITES', 'run_suite',
]
