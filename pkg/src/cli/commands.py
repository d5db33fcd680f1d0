"""
Command-line surface of scompress.

Subcommands:
- dim: one dimension oracle on a class file
- compress: a binary scheme on a sample file
- reduce multiclass | regression | robust: the reductions on a sample-set file
- oig: one-inclusion graph prediction or leave-one-out estimate
- corpus: write the generated corpus as JSON files plus a manifest
- suite: run a verification suite and write its CSV / JSON report

Exit codes: 0 when every assertion held, 1 when a suite assertion failed,
2 on invalid input (any CompressionError).
"""

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.config import DEFAULT_LOO_TRIALS, DEFAULT_SEED, DimensionLimits, HarnessSettings
from src.core.concepts import L_INF, ZERO_ONE, LpLoss, empirical_loss, loss_upper
from src.core.dimensions import (
    GRAPH,
    LITTLESTONE,
    PARTIAL,
    PSEUDO,
    VC,
    graph_dimension,
    littlestone_dimension,
    partial_vc_dimension,
    pseudo_dimension,
    verify_witness,
    vc_dimension,
)
from src.core.errors import CompressionError, LabelSpaceMismatchError
from src.core.naming_utils import slug
from src.core.reductions import (
    Reduction,
    RobustZeroOneLoss,
    agnostic_regression,
    class_leq,
    exact_via_multiclass,
    graphdim1_scheme,
    inflate_class,
    leave_one_out_error,
    make_eps_grid,
    oig_predict,
    piecewise_threshold_inflated_scheme,
    reduce_eps_linf,
    reduce_eps_lp,
    reduce_general,
    reduce_majority_regression,
    reduce_proper_or_majority,
    reduce_robust,
    reduce_robust_stable,
    reduce_stable,
    reduce_stable_regression,
)
from src.core.schemes import (
    STABLE,
    CompressionScheme,
    majority_boost_scheme,
    proper_exhaustive_scheme,
    soa_scheme,
    threshold_stable_scheme,
    version_space_stable_scheme,
)
from src.data import (
    ClassDeserializer,
    ClassSerializer,
    FiniteConceptClass,
    InflatedDomain,
    LabeledSample,
    PartialFiniteClass,
)
from src.harness import SUITES, CorpusSpec, default_corpus_spec, generate_corpus, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_INPUT = 2

SUBSTRATES = ("proper", "boost", "threshold", "version-space", "soa")


def setup_logging(verbose: bool = False) -> None:
    """Log to stderr; DEBUG with -v, WARNING otherwise."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )


def _emit(payload: Any) -> None:
    print(json.dumps(payload, indent=2, default=str))


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}") from None


def _total_class(path) -> FiniteConceptClass:
    loaded = ClassDeserializer.load(path)
    if isinstance(loaded, PartialFiniteClass):
        raise LabelSpaceMismatchError(f"{path} holds a partial class; this command needs a total one")
    return loaded


def _blocks(concept_class: FiniteConceptClass) -> Optional[List[List[int]]]:
    domain = concept_class.domain
    if not isinstance(domain, InflatedDomain):
        return None
    return [list(domain.block(x)) for x in range(domain.base.size)]


def build_substrate(name: str, concept_class: FiniteConceptClass, budget: Optional[int] = None,
                    per_block: bool = False) -> CompressionScheme:
    """
    Binary scheme by CLI name.

    Args:
        per_block: Run threshold / version-space schemes per base point of an inflated domain
    """
    blocks = _blocks(concept_class) if per_block else None
    if name == "proper":
        return proper_exhaustive_scheme(concept_class, budget or concept_class.n_points)
    if name == "boost":
        return majority_boost_scheme(concept_class)
    if name == "threshold":
        return threshold_stable_scheme(concept_class, blocks)
    if name == "version-space":
        return version_space_stable_scheme(concept_class, blocks)
    if name == "soa":
        return soa_scheme(concept_class)
    raise ValueError(f"Unknown substrate '{name}'")


def _run_samples(scheme: CompressionScheme, samples: List[LabeledSample], loss, concept_class,
                 limit: Fraction = Fraction(0)) -> List[Dict[str, Any]]:
    rows = []
    for index, sample in enumerate(samples):
        if isinstance(scheme, Reduction):
            trace = scheme.trace(sample)
            output, bound_ok = trace.output, trace.within_bound
        else:
            output = scheme.compress(sample)
            bound_ok = scheme.size_budget is None or output.size <= scheme.size_budget
        predictor = scheme.reconstruct_output(output)
        value = empirical_loss(predictor, sample, loss, concept_class.labels) if len(sample) else Fraction(0)
        rows.append({"sample": index, "size": output.size, "loss": str(value),
                     "consistent": loss_upper(value) <= limit, "bound_ok": bound_ok,
                     "output": output.to_dict(concept_class)})
    return rows


# Commands

def cmd_dim(args, settings: HarnessSettings) -> int:
    loaded = ClassDeserializer.load(args.class_file)
    limits = DimensionLimits(max_points=args.max_points, max_set_size=args.max_set_size)
    if args.which == PARTIAL:
        if not isinstance(loaded, PartialFiniteClass):
            raise LabelSpaceMismatchError("partial VC dimension needs a partial class file")
        report = partial_vc_dimension(loaded, limits)
    elif isinstance(loaded, PartialFiniteClass):
        raise LabelSpaceMismatchError(f"{args.which} dimension needs a total class file")
    elif args.which == VC:
        report = vc_dimension(loaded, limits)
    elif args.which == GRAPH:
        report = graph_dimension(loaded, limits)
    elif args.which == PSEUDO:
        report = pseudo_dimension(loaded, limits)
    else:
        report = littlestone_dimension(loaded)
    payload = report.to_dict(loaded)
    payload["verified"] = verify_witness(loaded, report)
    _emit(payload)
    return EXIT_OK


def cmd_compress(args, settings: HarnessSettings) -> int:
    concept_class = _total_class(args.class_file)
    sample = ClassDeserializer.load_sample(args.sample, concept_class.domain, concept_class.labels)
    scheme = build_substrate(args.scheme, concept_class, args.budget)
    output = scheme.compress(sample)
    predictor = scheme.reconstruct_output(output)
    payload = output.to_dict(concept_class)
    payload["loss"] = str(empirical_loss(predictor, sample, ZERO_ONE)) if len(sample) else "0"
    payload["scheme"] = scheme.get_description()
    _emit(payload)
    return EXIT_OK


def _multiclass_scheme(args, concept_class: FiniteConceptClass) -> CompressionScheme:
    if args.mode == "graphdim1":
        return graphdim1_scheme(concept_class)
    inflated = inflate_class(concept_class)
    if args.substrate == "piecewise":
        substrate = piecewise_threshold_inflated_scheme(inflated, args.k)
    else:
        substrate = build_substrate(args.substrate, inflated, args.budget, per_block=args.mode == "stable")
    if args.mode == "general":
        return reduce_general(substrate, concept_class)
    if args.mode == "proper-majority":
        return reduce_proper_or_majority(substrate, concept_class)
    return reduce_stable(substrate, concept_class)


def _regression_scheme(args, concept_class: FiniteConceptClass):
    eps = args.eps

    def substrate_for(threshold_class):
        return build_substrate(args.substrate, threshold_class, args.budget, per_block=True)

    if args.mode == "exact":
        def multiclass_scheme(mc):
            inner = build_substrate(args.substrate, inflate_class(mc), args.budget, per_block=True)
            return reduce_stable(inner, mc) if STABLE in inner.flags else reduce_general(inner, mc)
        return exact_via_multiclass(multiclass_scheme, concept_class), L_INF, Fraction(0)
    if args.mode == "lp":
        return reduce_eps_lp(substrate_for, concept_class, eps, args.p), LpLoss(args.p), eps
    if args.mode == "agnostic":
        loss = L_INF if args.p is None else LpLoss(args.p)

        def factory(c, delta):
            inner = substrate_for(class_leq(c, make_eps_grid(delta)))
            if STABLE in inner.flags:
                return reduce_stable_regression(inner, c, delta)
            return reduce_eps_linf(inner, c, delta)
        return agnostic_regression(factory, concept_class, eps, loss), loss, None
    substrate = substrate_for(class_leq(concept_class, make_eps_grid(eps)))
    builders = {"linf": reduce_eps_linf, "majority": reduce_majority_regression, "stable": reduce_stable_regression}
    return builders[args.mode](substrate, concept_class, eps), L_INF, eps


def cmd_reduce(args, settings: HarnessSettings) -> int:
    concept_class = _total_class(args.class_file)
    samples = ClassDeserializer.load_samples(args.samples, concept_class.domain, concept_class.labels)
    limit = Fraction(0)
    if args.target == "multiclass":
        scheme, loss = _multiclass_scheme(args, concept_class), ZERO_ONE
    elif args.target == "regression":
        scheme, loss, limit = _regression_scheme(args, concept_class)
    else:
        perturbation = ClassDeserializer.load_perturbation(args.perturb, concept_class.domain)
        substrate = build_substrate(args.substrate, concept_class, args.budget)
        build = reduce_robust if args.mode == "general" else reduce_robust_stable
        scheme, loss = build(substrate, concept_class, perturbation), RobustZeroOneLoss(perturbation)
    if limit is None:
        rows = _run_samples(scheme, samples, loss, concept_class, limit=Fraction(1))
        for row in rows:
            row.pop("consistent")
    else:
        rows = _run_samples(scheme, samples, loss, concept_class, limit)
    _emit({"scheme": scheme.get_description(), "rows": rows})
    return EXIT_OK


def cmd_oig(args, settings: HarnessSettings) -> int:
    concept_class = _total_class(args.class_file)
    perturbation = ClassDeserializer.load_perturbation(args.perturb, concept_class.domain)
    sample = ClassDeserializer.load_sample(args.sample, concept_class.domain, concept_class.labels)
    if args.test_point is not None:
        z = concept_class.domain.index_of(args.test_point)
        label = oig_predict(concept_class, perturbation, sample, z)
        _emit({"test_point": args.test_point, "prediction": label})
    else:
        estimate = leave_one_out_error(concept_class, perturbation, sample, args.trials, settings.seed)
        _emit(estimate.to_dict())
    return EXIT_OK


def _load_spec(path: Optional[str], seed: Optional[int]) -> CorpusSpec:
    if path is None:
        spec = default_corpus_spec()
    else:
        with open(path, 'r', encoding='utf-8') as f:
            spec = CorpusSpec.from_dict(json.load(f))
    if seed is not None:
        spec.seed = seed
    return spec


def cmd_corpus(args, settings: HarnessSettings) -> int:
    spec = _load_spec(args.spec, args.seed)
    items = generate_corpus(spec)
    out = Path(settings.out_dir) / "corpus"
    manifest = {"spec": spec.to_dict(), "classes": []}
    for item in items:
        entry = item.to_dict()
        name = slug(item.name)
        source = item.concept_class if item.concept_class is not None else item.partial
        ClassSerializer.save(source, out / f"{name}.json")
        entry["file"] = f"{name}.json"
        if item.partial is not None and item.concept_class is not None:
            ClassSerializer.save(item.partial, out / f"{name}.partial.json")
            entry["partial_file"] = f"{name}.partial.json"
        if item.perturbation is not None:
            ClassSerializer.save_perturbation(item.perturbation, item.concept_class.domain,
                                              out / f"{name}.perturb.json")
            entry["perturb_file"] = f"{name}.perturb.json"
        manifest["classes"].append(entry)
    with open(out / "manifest.json", 'w', encoding='utf-8') as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"Wrote {len(items)} classes to {out}")
    return EXIT_OK


def cmd_suite(args, settings: HarnessSettings) -> int:
    spec = _load_spec(args.spec, args.seed)
    report = run_suite(args.name, spec, settings.out_dir, jobs=settings.jobs, inject_fault=args.inject_fault)
    summary = report.summary()
    _emit({k: v for k, v in summary.items() if k != "first_failure"})
    if not report.passed:
        print(json.dumps(summary["first_failure"], indent=2, default=str), file=sys.stderr)
        return EXIT_ASSERTION
    return EXIT_OK


def create_parser() -> argparse.ArgumentParser:
    """Create the scompress argument parser."""
    parser = argparse.ArgumentParser(prog="scompress",
                                     description="Sample compression schemes and reductions on finite classes")
    parser.add_argument("--seed", type=int, default=None, help=f"Global seed (default {DEFAULT_SEED})")
    parser.add_argument("--jobs", type=int, default=1, help="Worker processes for suites")
    parser.add_argument("--out-dir", default="results", help="Directory for corpus and suite output")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging on stderr")
    subparsers = parser.add_subparsers(dest="command", required=True)

    dim_parser = subparsers.add_parser("dim", help="Compute a combinatorial dimension")
    dim_parser.add_argument("--class", dest="class_file", required=True)
    dim_parser.add_argument("--which", choices=(VC, GRAPH, PSEUDO, LITTLESTONE, PARTIAL), default=VC)
    dim_parser.add_argument("--max-set-size", type=int, default=DimensionLimits.max_set_size)
    dim_parser.add_argument("--max-points", type=int, default=DimensionLimits.max_points)
    dim_parser.set_defaults(handler=cmd_dim)

    compress_parser = subparsers.add_parser("compress", help="Run a binary compression scheme")
    compress_parser.add_argument("--class", dest="class_file", required=True)
    compress_parser.add_argument("--scheme", choices=SUBSTRATES, required=True)
    compress_parser.add_argument("--sample", required=True)
    compress_parser.add_argument("--budget", type=int, default=None, help="Size budget of the proper scheme")
    compress_parser.set_defaults(handler=cmd_compress)

    reduce_parser = subparsers.add_parser("reduce", help="Run a reduction to binary compression")
    targets = reduce_parser.add_subparsers(dest="target", required=True)
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--class", dest="class_file", required=True)
    shared.add_argument("--samples", required=True)
    shared.add_argument("--budget", type=int, default=None)

    multiclass = targets.add_parser("multiclass", parents=[shared])
    multiclass.add_argument("--substrate", choices=SUBSTRATES + ("piecewise",), default="version-space")
    multiclass.add_argument("--mode", choices=("general", "proper-majority", "stable", "graphdim1"),
                            default="general")
    multiclass.add_argument("--k", type=int, default=2, help="Pieces of the piecewise substrate")

    regression = targets.add_parser("regression", parents=[shared])
    regression.add_argument("--substrate", choices=SUBSTRATES, default="threshold")
    regression.add_argument("--mode", choices=("linf", "lp", "majority", "stable", "exact", "agnostic"),
                            default="linf")
    regression.add_argument("--eps", type=_rational, default=Fraction(1, 4))
    regression.add_argument("--p", type=_rational, default=None)

    robust = targets.add_parser("robust", parents=[shared])
    robust.add_argument("--perturb", required=True)
    robust.add_argument("--substrate", choices=SUBSTRATES, default="version-space")
    robust.add_argument("--mode", choices=("general", "stable"), default="general")
    reduce_parser.set_defaults(handler=cmd_reduce)

    oig_parser = subparsers.add_parser("oig", help="One-inclusion graph prediction")
    oig_parser.add_argument("--class", dest="class_file", required=True)
    oig_parser.add_argument("--perturb", required=True)
    oig_parser.add_argument("--sample", required=True)
    oig_parser.add_argument("--test-point", default=None, help="Predict this point; omit for leave-one-out")
    oig_parser.add_argument("--trials", type=int, default=DEFAULT_LOO_TRIALS)
    oig_parser.set_defaults(handler=cmd_oig)

    corpus_parser = subparsers.add_parser("corpus", help="Write the generated corpus as JSON files")
    corpus_parser.add_argument("--spec", default=None, help="Corpus spec JSON (default corpus when omitted)")
    corpus_parser.set_defaults(handler=cmd_corpus)

    suite_parser = subparsers.add_parser("suite", help="Run a verification suite")
    suite_parser.add_argument("name", choices=SUITES)
    suite_parser.add_argument("--spec", default=None)
    suite_parser.add_argument("--inject-fault", action="store_true",
                              help="Run the negative-control fixtures as ordinary schemes")
    suite_parser.set_defaults(handler=cmd_suite)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one subcommand and return its exit code."""
    parser = create_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    try:
        settings = HarnessSettings(seed=DEFAULT_SEED if args.seed is None else args.seed,
                                   jobs=args.jobs, out_dir=Path(args.out_dir))
        if args.command == "reduce" and args.target == "regression" and args.mode == "lp" and args.p is None:
            raise LabelSpaceMismatchError("lp mode needs --p")
        return args.handler(args, settings)
    except (CompressionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
