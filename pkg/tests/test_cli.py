"""
Tests for the scompress command line.

Run with: python -m pytest tests/
"""

import pytest
import sys
import os
import json

import numpy as np

# Add src to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.cli import create_parser, main
from src.data import ClassSerializer, LabeledSample, PerturbationMap
from src.harness.corpus import full_cube, k_piecewise, step_real, thresholds

RNG = np.random.default_rng(0)


def write_json(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def save_class(concept_class, path):
    ClassSerializer.save(concept_class, path)
    return str(path)


def small_spec(tmp_path):
    return write_json(tmp_path / "spec.json", {"seed": 11, "entries": [
        {"generator": "thresholds", "params": {"n": 5}}]})


def test_parser_defaults():
    """Test the global options and a subcommand default."""
    args = create_parser().parse_args(["dim", "--class", "c.json"])
    assert args.seed is None
    assert args.jobs == 1
    assert args.which == "vc"


def test_dim_command(tmp_path, capsys):
    """Test the VC dimension of a small cube."""
    path = save_class(full_cube(RNG, 3), tmp_path / "cube.json")
    assert main(["dim", "--class", path, "--which", "vc"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["value"] == 3
    assert payload["verified"] is True


def test_compress_command(tmp_path, capsys):
    """Test a threshold scheme run on one sample."""
    path = save_class(thresholds(RNG, 4), tmp_path / "thresholds.json")
    sample = write_json(tmp_path / "sample.json", [["3", 0], ["0", 1]])
    assert main(["compress", "--class", path, "--scheme", "threshold", "--sample", sample]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["loss"] == "0"


def test_reduce_multiclass_command(tmp_path, capsys):
    """Test the stable multiclass reduction over a sample set."""
    path = save_class(k_piecewise(RNG, n=5, m=3, k=2), tmp_path / "piecewise.json")
    samples = write_json(tmp_path / "samples.json", [[["0", 1], ["3", 2]], [["1", 0]]])
    code = main(["reduce", "multiclass", "--class", path, "--samples", samples, "--mode", "stable"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert len(payload["rows"]) == 2
    assert all(row["consistent"] and row["bound_ok"] for row in payload["rows"])


def test_reduce_regression_command(tmp_path, capsys):
    """Test the lInf reduction with the default threshold substrate."""
    concept_class = step_real(RNG, n=3, q=4)
    path = save_class(concept_class, tmp_path / "step.json")
    samples = tmp_path / "samples.json"
    ClassSerializer.save_samples([LabeledSample(((0, concept_class.row_values(5)[0]),))],
                                 concept_class.domain, concept_class.labels, samples)
    code = main(["reduce", "regression", "--class", path, "--samples", str(samples), "--eps", "1/4"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["rows"][0]["consistent"]


def test_lp_mode_needs_exponent(tmp_path):
    """Test that lp mode without --p is invalid input."""
    path = save_class(step_real(RNG, n=2, q=2), tmp_path / "step.json")
    samples = write_json(tmp_path / "samples.json", [])
    assert main(["reduce", "regression", "--class", path, "--samples", samples, "--mode", "lp"]) == 2


def test_oig_command(tmp_path, capsys):
    """Test a single one-inclusion graph prediction."""
    concept_class = thresholds(RNG, 4)
    path = save_class(concept_class, tmp_path / "thresholds.json")
    perturb = tmp_path / "perturb.json"
    ClassSerializer.save_perturbation(PerturbationMap.identity(4), concept_class.domain, perturb)
    sample = write_json(tmp_path / "sample.json", [["0", 1], ["3", 0]])
    code = main(["oig", "--class", path, "--perturb", str(perturb), "--sample", sample, "--test-point", "1"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["prediction"] in (0, "0")


def test_corpus_command(tmp_path):
    """Test that the corpus files and manifest are written."""
    code = main(["--out-dir", str(tmp_path), "corpus", "--spec", small_spec(tmp_path)])
    assert code == 0
    manifest = json.loads((tmp_path / "corpus" / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["spec"]["seed"] == 11
    entry = manifest["classes"][0]
    assert entry["file"] == "thresholds-n-5.json"
    assert (tmp_path / "corpus" / entry["file"]).exists()


def test_suite_command_exit_codes(tmp_path, capsys):
    """Test exit code 0 on a passing suite and 1 with an injected fault."""
    spec = small_spec(tmp_path)
    out = tmp_path / "results"
    assert main(["--out-dir", str(out), "suite", "stability", "--spec", spec]) == 0
    assert json.loads(capsys.readouterr().out)["passed"] is True
    assert (out / "stability.csv").exists()
    assert main(["--out-dir", str(out), "suite", "stability", "--spec", spec, "--inject-fault"]) == 1


def test_invalid_input_exit_code(tmp_path, capsys):
    """Test that unreadable and mismatched inputs exit with 2."""
    assert main(["dim", "--class", str(tmp_path / "missing.json")]) == 2
    path = save_class(thresholds(RNG, 3), tmp_path / "thresholds.json")
    assert main(["dim", "--class", path, "--which", "pseudo"]) == 2
    assert "error:" in capsys.readouterr().err


def test_unknown_subcommand_exits():
    """Test argparse rejection of unknown commands."""
    with pytest.raises(SystemExit):
        main(["shuffle"])


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
