"""
Compression schemes.

Exports:
- CompressionOutput, CompressionScheme and capability flags
- Concrete binary schemes
- Scheme verifiers
"""

from .base import MAJORITY_VOTE, PROPER, STABLE, CompressionOutput, CompressionScheme, first_positions
from .binary import (
    MajorityBoostScheme,
    ProperExhaustiveScheme,
    SoaScheme,
    ThresholdStableScheme,
    VersionSpaceStableScheme,
    lexicographic_min_cover,
    majority_boost_scheme,
    proper_exhaustive_scheme,
    soa_scheme,
    threshold_stable_scheme,
    version_space_stable_scheme,
)
from .verification import (
    FlagReport,
    StabilityReport,
    ValidityReport,
    verify_flag,
    verify_stability,
    verify_validity,
)

__all__ = [
    'MAJORITY_VOTE', 'PROPER', 'STABLE', 'CompressionOutput', 'CompressionScheme', 'first_positions',
    'MajorityBoostScheme', 'ProperExhaustiveScheme', 'SoaScheme', 'ThresholdStableScheme',
    'VersionSpaceStableScheme', 'lexicographic_min_cover', 'majority_boost_scheme',
    'proper_exhaustive_scheme', 'soa_scheme', 'threshold_stable_scheme', 'version_space_stable_scheme',
    'FlagReport', 'StabilityReport', 'ValidityReport', 'verify_flag', 'verify_stability', 'verify_validity',
]
