"""
Generate example class, sample and perturbation files for scompress.

This script writes small JSON inputs for trying out the CLI subcommands.
"""

import sys
from pathlib import Path

import numpy as np

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent))

from src.config import DEFAULT_SEED
from src.data import ClassSerializer
from src.harness import generate_corpus, sample_realizable, window_perturbation
from src.harness.corpus import CorpusEntry, CorpusSpec, k_piecewise, step_real, thresholds, tree_partial
from src.harness.sampling import ROBUST

OUT_DIR = Path("sample_files")


def create_threshold_files():
    """Thresholds on 8 points, a window perturbation and two samples."""
    rng = np.random.default_rng(DEFAULT_SEED)
    concept_class = thresholds(rng, n=8)
    perturbation = window_perturbation(8, 2)

    ClassSerializer.save(concept_class, OUT_DIR / "thresholds8.json")
    ClassSerializer.save_perturbation(perturbation, concept_class.domain, OUT_DIR / "window2.json")

    samples = [sample_realizable(concept_class, 6, seed=DEFAULT_SEED + i) for i in range(2)]
    ClassSerializer.save_sample(samples[0], concept_class.domain, concept_class.labels,
                                OUT_DIR / "thresholds8.sample.json")
    ClassSerializer.save_samples(samples, concept_class.domain, concept_class.labels,
                                 OUT_DIR / "thresholds8.samples.json")

    robust = [sample_realizable(concept_class, 5, seed=DEFAULT_SEED + i, mode=ROBUST,
                                perturbation=perturbation) for i in range(2)]
    ClassSerializer.save_samples(robust, concept_class.domain, concept_class.labels,
                                 OUT_DIR / "thresholds8.robust.json")
    print(f"Created threshold files in {OUT_DIR}")
    return concept_class


def create_multiclass_files():
    """Functions with at most 2 constant pieces over 3 labels, plus samples."""
    rng = np.random.default_rng(DEFAULT_SEED)
    concept_class = k_piecewise(rng, n=8, m=3, k=2)
    ClassSerializer.save(concept_class, OUT_DIR / "piecewise8.json")
    samples = [sample_realizable(concept_class, 6, seed=DEFAULT_SEED + i) for i in range(3)]
    ClassSerializer.save_samples(samples, concept_class.domain, concept_class.labels,
                                 OUT_DIR / "piecewise8.samples.json")
    print("Created multiclass files")
    return concept_class


def create_regression_files():
    """Step functions with values in {0, 1/4, ..., 1}."""
    rng = np.random.default_rng(DEFAULT_SEED)
    concept_class = step_real(rng, n=6, q=4)
    ClassSerializer.save(concept_class, OUT_DIR / "step6.json")
    samples = [sample_realizable(concept_class, 5, seed=DEFAULT_SEED + i) for i in range(3)]
    ClassSerializer.save_samples(samples, concept_class.domain, concept_class.labels,
                                 OUT_DIR / "step6.samples.json")
    print("Created regression files")
    return concept_class


def create_partial_files():
    """Depth-3 tree partial class and its twin encoding."""
    rng = np.random.default_rng(DEFAULT_SEED)
    ClassSerializer.save(tree_partial(rng, depth=3), OUT_DIR / "tree3.partial.json")

    spec = CorpusSpec(seed=DEFAULT_SEED, entries=[
        CorpusEntry("twinFromPartial", {"source": CorpusEntry("treePartial", {"depth": 3}).to_dict()}),
    ])
    twin = generate_corpus(spec)[0]
    ClassSerializer.save(twin.concept_class, OUT_DIR / "tree3.twin.json")
    ClassSerializer.save_perturbation(twin.perturbation, twin.concept_class.domain,
                                      OUT_DIR / "tree3.twin.perturb.json")
    sample = sample_realizable(twin.concept_class, 4, seed=DEFAULT_SEED, mode=ROBUST,
                               perturbation=twin.perturbation)
    ClassSerializer.save_sample(sample, twin.concept_class.domain, twin.concept_class.labels,
                                OUT_DIR / "tree3.twin.sample.json")
    print("Created partial-class files")


def main():
    """Generate all example files."""
    print("Generating example classes and samples...")
    OUT_DIR.mkdir(parents=True, exist_ok=True)

    create_threshold_files()
    create_multiclass_files()
    create_regression_files()
    create_partial_files()

    print(f"\nDone! Example files created in {OUT_DIR}/.")
    print("Try for instance:")
    print(f"  python main.py dim --class {OUT_DIR}/thresholds8.json --which littlestone")
    print(f"  python main.py reduce multiclass --class {OUT_DIR}/piecewise8.json "
          f"--samples {OUT_DIR}/piecewise8.samples.json --mode stable")


if __name__ == "__main__":
    main()
