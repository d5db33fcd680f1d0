"""
Configuration constants and settings for scompress.

Holds the fixed parameters of the concrete schemes and verifiers plus the
small settings objects built from command-line flags:
- DimensionLimits: exhaustive-search caps for the dimension oracles
- HarnessSettings: global run settings (seed, jobs, output directory)
"""

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional


# Boosting substrate
BOOST_GAMMA = Fraction(1, 16)
BOOST_ROUND_FACTOR = 32

# Stability verification
STABILITY_EXHAUSTIVE_GAP = 12
STABILITY_RANDOM_SUBSETS = 256

# Certified rational root bounding, in bits of precision
ROOT_PRECISION_BITS = 40

# Leave-one-out estimation
DEFAULT_LOO_TRIALS = 2000

DEFAULT_SEED = 20240601


@dataclass(frozen=True)
class DimensionLimits:
    """
    Caps for the exhaustive dimension searches.

    Attributes:
        max_points: Only the first max_points domain points are searched
            when the domain is larger (None means no cap)
        max_set_size: Largest candidate set size examined (None means no cap)
    """
    max_points: Optional[int] = 20
    max_set_size: Optional[int] = 6

    def __post_init__(self):
        """Reject non-positive caps."""
        for name in ("max_points", "max_set_size"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f"{name} must be positive, got {value}")

    @classmethod
    def unbounded(cls) -> 'DimensionLimits':
        """Limits that never cap the search."""
        return cls(max_points=None, max_set_size=None)


@dataclass(frozen=True)
class HarnessSettings:
    """Global settings shared by every CLI subcommand."""
    seed: int = DEFAULT_SEED
    jobs: int = 1
    out_dir: Path = Path("results")

    def __post_init__(self):
        if self.jobs < 1:
            raise ValueError(f"jobs must be at least 1, got {self.jobs}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


# Suite sizes, per corpus class
MULTICLASS_SAMPLES = 10
GRAPHDIM1_SAMPLES = 30
REGRESSION_SAMPLES = 16
ROBUST_SAMPLES = 12
STABILITY_SAMPLES = 4
AGNOSTIC_SAMPLES = 16
OIG_INSTANCES = 3

# Largest sample drawn by the stability suite keeps the exhaustive check small
STABILITY_MAX_SAMPLE = 8

AGNOSTIC_NOISE_RATE = Fraction(1, 4)
REGRESSION_EPS = (Fraction(1, 4), Fraction(1, 16))
INVARIANCE_EPS = (Fraction(1, 4), Fraction(1, 16), Fraction(1, 64))
LP_EXPONENTS = (1, 2)
INVARIANCE_WINDOWS = (2, 8)
