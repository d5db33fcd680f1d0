"""
End-to-end verification suites.

Each suite walks the corpus, draws seeded samples, runs the schemes it is
responsible for and records one RunRow per (class, scheme, sample):
- dims-identities: inflated VC = graph dimension, threshold VC = pseudo-dimension,
  graph dimension <= 4 * pseudo-dimension
- multiclass: the multiclass reductions, graphdim1 and SOA on realizable samples
- regression: the eps-approximate reductions, exact compression and eps-invariance
- robust: robust reductions, M-invariance and the one-inclusion graph
- stability: stability of every stable scheme plus the negative controls
- agnostic: ERM wrappers on noisy samples

Work is split per corpus class; with jobs > 1 classes run in a process pool.
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from src.config import (
    AGNOSTIC_NOISE_RATE,
    AGNOSTIC_SAMPLES,
    DEFAULT_LOO_TRIALS,
    GRAPHDIM1_SAMPLES,
    INVARIANCE_EPS,
    INVARIANCE_WINDOWS,
    LP_EXPONENTS,
    MULTICLASS_SAMPLES,
    OIG_INSTANCES,
    REGRESSION_EPS,
    REGRESSION_SAMPLES,
    ROBUST_SAMPLES,
    STABILITY_MAX_SAMPLE,
    STABILITY_SAMPLES,
    DimensionLimits,
)
from src.core.concepts import L_INF, ZERO_ONE, Loss, LpLoss, empirical_loss, erm, loss_upper
from src.core.dimensions import (
    graph_dimension,
    partial_vc_dimension,
    pseudo_dimension,
    verify_witness,
    vc_dimension,
)
from src.core.errors import CompressionError
from src.core.rational import LossInterval
from src.core.reductions import (
    Reduction,
    RobustZeroOneLoss,
    agnostic_regression,
    agnostic_wrap,
    class_leq,
    exact_via_multiclass,
    graphdim1_scheme,
    inflate_class,
    inflate_sample,
    leave_one_out_error,
    make_eps_grid,
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
    CompressionScheme,
    majority_boost_scheme,
    soa_scheme,
    threshold_stable_scheme,
    verify_stability,
    verify_validity,
    version_space_stable_scheme,
)
from src.data.concept_data import FiniteConceptClass, LabeledSample
from src.harness.corpus import CorpusItem, CorpusSpec, generate_corpus, window_perturbation
from src.harness.fixtures import SabotagedScheme, UnstableScheme
from src.harness.report import RunReport, RunRow
from src.harness.sampling import NOISY, PLAIN, ROBUST, sample_realizable, sample_seed

logger = logging.getLogger(__name__)

DIMS_IDENTITIES = "dims-identities"
MULTICLASS = "multiclass"
REGRESSION = "regression"
ROBUST_SUITE = "robust"
STABILITY = "stability"
AGNOSTIC = "agnostic"

SUITES = (DIMS_IDENTITIES, MULTICLASS, REGRESSION, ROBUST_SUITE, STABILITY, AGNOSTIC)


class _Context:
    """Seeded sample drawing and row bookkeeping for one corpus class."""

    def __init__(self, suite: str, index: int, item: CorpusItem, seed: int):
        self.suite = suite
        self.index = index
        self.item = item
        self.seed = seed
        self.rows: List[RunRow] = []

    def draw(self, sample: int, mode: str = PLAIN, max_size: Optional[int] = None,
             rate: Fraction = Fraction(0), perturbation=None, min_size: int = 1) -> LabeledSample:
        concept_class = self.item.concept_class
        cap = max_size or 2 * concept_class.n_points
        size_seed, sample_seed_ = sample_seed(self.seed, self.index, self.suite, sample).spawn(2)
        n = int(np.random.default_rng(size_seed).integers(min_size, max(cap, min_size) + 1))
        return sample_realizable(concept_class, n, sample_seed_, mode,
                                 perturbation or self.item.perturbation, rate)

    def row(self, scheme: str, sample: int, **values) -> RunRow:
        row = RunRow(class_name=self.item.name, scheme=scheme, sample=sample, dims=dict(self.item.dims), **values)
        self.rows.append(row)
        if not row.passed:
            logger.warning("%s: %s sample %d failed: %s", self.item.name, scheme, sample, row.witness)
        return row


def _sample_witness(sample: LabeledSample, concept_class: FiniteConceptClass) -> List[Any]:
    return sample.to_list(concept_class.domain, concept_class.labels)


def _check_scheme(ctx: _Context, label: str, index: int, sample: LabeledSample, scheme: CompressionScheme,
                  loss: Loss = ZERO_ONE, limit: Fraction = Fraction(0), stability: bool = False,
                  concept_class: Optional[FiniteConceptClass] = None,
                  compress: Optional[Callable] = None) -> RunRow:
    """
    Compress, reconstruct and check loss <= limit plus the size bound.

    Reductions are checked against their per-run bound; other schemes
    against their size budget. Errors become failed rows.
    """
    concept_class = concept_class or scheme.concept_class
    start = time.perf_counter()
    witness: Dict[str, Any] = {}
    size, loss_text, bound_ok, stable_ok = None, "", None, None
    try:
        if isinstance(scheme, Reduction):
            trace = scheme.trace(sample)
            output, bound_ok = trace.output, trace.within_bound
            witness["trace"] = trace.to_dict()
        else:
            output = compress(sample) if compress else scheme.compress(sample)
            bound_ok = scheme.size_budget is None or output.size <= scheme.size_budget
        size = output.size
        predictor = scheme.reconstruct_output(output)
        value = empirical_loss(predictor, sample, loss, concept_class.labels) if len(sample) else Fraction(0)
        loss_text = str(value)
        loss_ok = loss_upper(value) <= limit
        if stability:
            report = verify_stability(scheme, sample, seed=index)
            stable_ok = report.passed
            if not report.passed:
                witness["stability"] = report.to_dict()
        passed = loss_ok and bound_ok and stable_ok is not False
        if not passed:
            witness.update({"output": output.to_dict(concept_class), "limit": str(limit), "loss": loss_text})
    except CompressionError as exc:
        passed = False
        witness["error"] = f"{type(exc).__name__}: {exc}"
        if getattr(exc, "witness", None) is not None:
            witness["detail"] = exc.witness
    elapsed = (time.perf_counter() - start) * 1000
    if passed:
        witness = None
    else:
        witness["scheme"] = scheme.get_description()
        witness["sample"] = _sample_witness(sample, concept_class)
    return ctx.row(label, index, size=size, loss=loss_text, bound_ok=bound_ok, stable_ok=stable_ok,
                   wall_time_ms=elapsed, passed=passed, witness=witness)


def _blocks(concept_class: FiniteConceptClass) -> List[List[int]]:
    domain = concept_class.domain
    return [list(domain.block(x)) for x in range(domain.base.size)]


def _is_plain_total(item: CorpusItem) -> bool:
    return item.concept_class is not None and item.perturbation is None


# Suites

def _dims_identities(ctx: _Context) -> None:
    item = ctx.item
    limits = DimensionLimits.unbounded()
    if item.concept_class is None:
        report = partial_vc_dimension(item.partial, limits)
        ok = verify_witness(item.partial, report)
        ctx.row("partial-vc", 0, size=report.value, bound_ok=ok, passed=ok,
                witness=None if ok else report.to_dict(item.partial))
        return
    concept_class = item.concept_class
    start = time.perf_counter()
    graph = graph_dimension(concept_class, limits)
    inflated = vc_dimension(inflate_class(concept_class), limits)
    ok = graph.value == inflated.value and verify_witness(concept_class, graph)
    ctx.row("identity/graph=vc-inflated", 0, size=graph.value, bound_ok=ok, passed=ok,
            wall_time_ms=(time.perf_counter() - start) * 1000,
            witness=None if ok else {"graph": graph.to_dict(concept_class), "inflated_vc": inflated.to_dict()})
    if not concept_class.labels.is_real:
        return
    start = time.perf_counter()
    pseudo = pseudo_dimension(concept_class, limits)
    q = concept_class.labels.size
    leq = class_leq(concept_class, make_eps_grid(Fraction(1, max(q, 2))))
    threshold_vc = vc_dimension(leq, limits)
    ok = pseudo.value == threshold_vc.value and verify_witness(concept_class, pseudo)
    ctx.row("identity/pseudo=vc-leq", 0, size=pseudo.value, bound_ok=ok, passed=ok,
            wall_time_ms=(time.perf_counter() - start) * 1000,
            witness=None if ok else {"pseudo": pseudo.to_dict(concept_class), "threshold_vc": threshold_vc.to_dict()})
    ok = graph.value <= 4 * pseudo.value
    ctx.row("inequality/graph<=4pseudo", 0, size=graph.value, bound_ok=ok, passed=ok,
            witness=None if ok else {"graph": graph.value, "pseudo": pseudo.value})


def _multiclass(ctx: _Context) -> None:
    item = ctx.item
    if not _is_plain_total(item) or item.concept_class.labels.is_real:
        return
    concept_class = item.concept_class
    inflated = inflate_class(concept_class)
    blocks = _blocks(inflated)
    schemes = [
        reduce_general(soa_scheme(inflated), concept_class),
        reduce_proper_or_majority(version_space_stable_scheme(inflated), concept_class),
        reduce_stable(version_space_stable_scheme(inflated, blocks), concept_class),
    ]
    if concept_class.labels.is_binary:
        schemes.append(reduce_proper_or_majority(majority_boost_scheme(inflated), concept_class))
    if item.generator == "kPiecewise" and not item.params.get("nested"):
        schemes.append(reduce_stable(piecewise_threshold_inflated_scheme(inflated, item.params["k"]),
                                     concept_class))
    binary_soa = soa_scheme(concept_class) if concept_class.labels.is_binary else None
    for index in range(MULTICLASS_SAMPLES):
        sample = ctx.draw(index)
        for scheme in schemes:
            _check_scheme(ctx, scheme.get_description(), index, sample, scheme)
        if binary_soa is not None:
            _check_scheme(ctx, "soa", index, sample, binary_soa)
    if item.dims.get("graph") is not None and item.dims["graph"] <= 1:
        scheme = graphdim1_scheme(concept_class)
        for index in range(MULTICLASS_SAMPLES, MULTICLASS_SAMPLES + GRAPHDIM1_SAMPLES):
            sample = ctx.draw(index)
            _check_scheme(ctx, "graphdim1", index, sample, scheme,
                          compress=lambda s: scheme.compress_with_trace(s)[0])


def _regression(ctx: _Context) -> None:
    item = ctx.item
    if not _is_plain_total(item) or not item.concept_class.labels.is_real:
        return
    concept_class = item.concept_class
    exact = exact_via_multiclass(
        lambda mc: reduce_stable(version_space_stable_scheme(inflate_class(mc), _blocks(inflate_class(mc))), mc),
        concept_class)
    samples = [ctx.draw(index) for index in range(REGRESSION_SAMPLES)]
    for eps in REGRESSION_EPS:
        leq = class_leq(concept_class, make_eps_grid(eps))
        blocks = _blocks(leq)
        schemes = [
            (reduce_eps_linf(version_space_stable_scheme(leq, blocks), concept_class, eps), L_INF),
            (reduce_majority_regression(threshold_stable_scheme(leq, blocks), concept_class, eps), L_INF),
            (reduce_stable_regression(threshold_stable_scheme(leq, blocks), concept_class, eps), L_INF),
        ]
        for p in LP_EXPONENTS:
            lp = reduce_eps_lp(lambda t: version_space_stable_scheme(t, _blocks(t)), concept_class, eps, p)
            schemes.append((lp, LpLoss(p)))
        for index, sample in enumerate(samples):
            for scheme, loss in schemes:
                label = f"{scheme.get_description()}/eps={eps}/{loss}"
                _check_scheme(ctx, label, index, sample, scheme, loss=loss, limit=eps)
    for index, sample in enumerate(samples):
        _check_scheme(ctx, exact.get_description(), index, sample, exact, loss=L_INF)
    if 4 % concept_class.labels.size == 0:
        for index, sample in enumerate(samples):
            _eps_invariance(ctx, index, sample)


def _eps_invariance(ctx: _Context, index: int, sample: LabeledSample) -> None:
    """Kept-counts and sizes of the majority and stable reductions do not depend on eps."""
    concept_class = ctx.item.concept_class
    for build, label in ((reduce_majority_regression, "regression-majority"),
                         (reduce_stable_regression, "regression-stable")):
        start = time.perf_counter()
        measured = {}
        try:
            for eps in INVARIANCE_EPS:
                leq = class_leq(concept_class, make_eps_grid(eps))
                output = build(threshold_stable_scheme(leq, _blocks(leq)), concept_class, eps).compress(sample)
                measured[str(eps)] = (len(output.kept), output.size)
            ok = len(set(measured.values())) == 1
            witness = None if ok else {"kept_and_size": measured}
        except CompressionError as exc:
            ok, witness = False, {"error": f"{type(exc).__name__}: {exc}"}
        first = next(iter(measured.values()), (None, None))
        ctx.row(f"{label}/eps-invariance", index, size=first[1], bound_ok=ok, passed=ok,
                wall_time_ms=(time.perf_counter() - start) * 1000, witness=witness)


def _robust(ctx: _Context) -> None:
    item = ctx.item
    if item.concept_class is None or item.perturbation is None:
        return
    concept_class, perturbation = item.concept_class, item.perturbation
    loss = RobustZeroOneLoss(perturbation)
    schemes = [
        reduce_robust(version_space_stable_scheme(concept_class), concept_class, perturbation),
        reduce_robust_stable(version_space_stable_scheme(concept_class), concept_class, perturbation),
    ]
    for index in range(ROBUST_SAMPLES):
        sample = ctx.draw(index, mode=ROBUST)
        for scheme in schemes:
            _check_scheme(ctx, scheme.get_description(), index, sample, scheme, loss=loss)
    if item.generator == "thresholds":
        _window_invariance(ctx)
    if item.partial is not None:
        _one_inclusion(ctx)


def _window_invariance(ctx: _Context) -> None:
    """Stable robust sizes agree across window sizes on samples drawn under the widest window."""
    concept_class = ctx.item.concept_class
    n = concept_class.n_points
    windows = {m: window_perturbation(n, m) for m in INVARIANCE_WINDOWS}
    widest = windows[max(INVARIANCE_WINDOWS)]
    for index in range(ROBUST_SAMPLES, 2 * ROBUST_SAMPLES):
        sample = ctx.draw(index, mode=ROBUST, perturbation=widest)
        start = time.perf_counter()
        try:
            measured = {}
            for m, perturbation in windows.items():
                scheme = reduce_robust_stable(threshold_stable_scheme(concept_class), concept_class, perturbation)
                output = scheme.compress(sample)
                measured[m] = len(output.kept)
            ok = len(set(measured.values())) == 1
            witness = None if ok else {"kept": measured, "sample": _sample_witness(sample, concept_class)}
        except CompressionError as exc:
            ok, measured = False, {}
            witness = {"error": f"{type(exc).__name__}: {exc}", "sample": _sample_witness(sample, concept_class)}
        ctx.row("robust-stable/M-invariance", index, size=next(iter(measured.values()), None),
                bound_ok=ok, passed=ok, wall_time_ms=(time.perf_counter() - start) * 1000, witness=witness)


def _one_inclusion(ctx: _Context) -> None:
    concept_class, perturbation = ctx.item.concept_class, ctx.item.perturbation
    for index in range(2 * ROBUST_SAMPLES, 2 * ROBUST_SAMPLES + OIG_INSTANCES):
        sample = ctx.draw(index, mode=ROBUST, min_size=4, max_size=7)
        start = time.perf_counter()
        loo_seed = sample_seed(ctx.seed, ctx.index, ctx.suite, index).spawn(3)[2]
        try:
            estimate = leave_one_out_error(concept_class, perturbation, sample, DEFAULT_LOO_TRIALS, loo_seed)
            ok = (estimate.acyclic and estimate.max_out_degree <= 1
                  and estimate.exact <= estimate.bound and estimate.within_bound)
            witness = None if ok else dict(estimate.to_dict(), sample=_sample_witness(sample, concept_class))
            ctx.row("oig/leave-one-out", index, size=estimate.max_out_degree, loss=str(estimate.exact),
                    bound_ok=ok, passed=ok, wall_time_ms=(time.perf_counter() - start) * 1000, witness=witness)
        except CompressionError as exc:
            ctx.row("oig/leave-one-out", index, bound_ok=False, passed=False,
                    witness={"error": f"{type(exc).__name__}: {exc}",
                             "sample": _sample_witness(sample, concept_class)})


def _stability(ctx: _Context, inject_fault: bool = False) -> None:
    item = ctx.item
    if item.concept_class is None:
        return
    concept_class = item.concept_class
    cap = min(2 * concept_class.n_points, STABILITY_MAX_SAMPLE)
    if item.perturbation is not None:
        scheme = reduce_robust_stable(version_space_stable_scheme(concept_class), concept_class, item.perturbation)
        loss = RobustZeroOneLoss(item.perturbation)
        for index in range(STABILITY_SAMPLES):
            sample = ctx.draw(index, mode=ROBUST, max_size=cap)
            _check_scheme(ctx, scheme.get_description(), index, sample, scheme, loss=loss, stability=True)
        return
    if concept_class.labels.is_real:
        leq = class_leq(concept_class, make_eps_grid(REGRESSION_EPS[0]))
        scheme = reduce_stable_regression(threshold_stable_scheme(leq, _blocks(leq)), concept_class,
                                          REGRESSION_EPS[0])
        for index in range(STABILITY_SAMPLES):
            sample = ctx.draw(index, max_size=cap)
            _check_scheme(ctx, scheme.get_description(), index, sample, scheme, loss=L_INF,
                          limit=REGRESSION_EPS[0], stability=True)
        return
    inflated = inflate_class(concept_class)
    schemes = [reduce_stable(version_space_stable_scheme(inflated, _blocks(inflated)), concept_class)]
    piecewise = None
    if item.generator == "kPiecewise" and not item.params.get("nested"):
        piecewise = piecewise_threshold_inflated_scheme(inflated, item.params["k"])
        schemes.append(reduce_stable(piecewise, concept_class))
    threshold = threshold_stable_scheme(concept_class) if item.generator == "thresholds" else None
    samples = [ctx.draw(index, max_size=cap) for index in range(STABILITY_SAMPLES)]
    for index, sample in enumerate(samples):
        for scheme in schemes:
            _check_scheme(ctx, scheme.get_description(), index, sample, scheme, stability=True)
        if piecewise is not None:
            _check_scheme(ctx, piecewise.get_description(), index, inflate_sample(sample, concept_class.labels),
                          piecewise, stability=True)
        if threshold is not None:
            _check_scheme(ctx, threshold.get_description(), index, sample, threshold, stability=True)
    if threshold is not None:
        _negative_controls(ctx, threshold, samples, inject_fault)


def _negative_controls(ctx: _Context, scheme: CompressionScheme, samples: Sequence[LabeledSample],
                       inject_fault: bool) -> None:
    """
    The verifiers must reject the fixtures. With inject_fault the fixtures are
    also run as ordinary schemes, which makes the suite fail.
    """
    concept_class = scheme.concept_class
    sabotaged, unstable = SabotagedScheme(scheme), UnstableScheme(scheme)
    validity = verify_validity(sabotaged, concept_class, samples)
    unstable_reports = [verify_stability(unstable, s, seed=i) for i, s in enumerate(samples)]
    rejected = not all(r.passed for r in unstable_reports)
    ctx.row("control/sabotaged", 0, bound_ok=not validity.passed, passed=not validity.passed,
            witness=None if not validity.passed else {"error": "sabotaged reconstruction passed validity"})
    ctx.row("control/unstable", 0, stable_ok=not rejected, passed=rejected,
            witness=None if rejected else {"error": "unstable scheme passed every stability check"})
    if not inject_fault:
        return
    for index, sample in enumerate(samples):
        _check_scheme(ctx, "fault/sabotaged", index, sample, sabotaged)
        _check_scheme(ctx, "fault/unstable", index, sample, unstable, stability=True)


def _agnostic(ctx: _Context) -> None:
    item = ctx.item
    if not _is_plain_total(item):
        return
    concept_class = item.concept_class
    if concept_class.labels.is_real:
        eps = REGRESSION_EPS[0]

        def factory(c, delta):
            leq = class_leq(c, make_eps_grid(delta))
            return reduce_stable_regression(threshold_stable_scheme(leq, _blocks(leq)), c, delta)

        pairs = [(agnostic_regression(factory, concept_class, eps, loss), loss)
                 for loss in (L_INF, LpLoss(1), LpLoss(2))]
    else:
        eps = Fraction(0)
        if concept_class.labels.is_binary:
            realizable = version_space_stable_scheme(concept_class)
        else:
            inflated = inflate_class(concept_class)
            realizable = reduce_stable(version_space_stable_scheme(inflated, _blocks(inflated)), concept_class)
        pairs = [(agnostic_wrap(realizable, concept_class), ZERO_ONE)]
    for index in range(AGNOSTIC_SAMPLES):
        sample = ctx.draw(index, mode=NOISY, rate=AGNOSTIC_NOISE_RATE)
        for scheme, loss in pairs:
            _, best = erm(concept_class, sample, loss)
            lower = best.lo if isinstance(best, LossInterval) else best
            _check_scheme(ctx, f"{scheme.get_description()}/{loss}", index, sample, scheme,
                          loss=loss, limit=lower + eps)


def _run_item(suite: str, index: int, item: CorpusItem, seed: int, inject_fault: bool) -> List[RunRow]:
    ctx = _Context(suite, index, item, seed)
    if suite == DIMS_IDENTITIES:
        _dims_identities(ctx)
    elif suite == MULTICLASS:
        _multiclass(ctx)
    elif suite == REGRESSION:
        _regression(ctx)
    elif suite == ROBUST_SUITE:
        _robust(ctx)
    elif suite == STABILITY:
        _stability(ctx, inject_fault)
    elif suite == AGNOSTIC:
        _agnostic(ctx)
    logger.info("%s: %s done (%d rows)", suite, item.name, len(ctx.rows))
    return ctx.rows


def run_suite(suite: str, spec: CorpusSpec, out_dir=None, jobs: int = 1,
              inject_fault: bool = False) -> RunReport:
    """
    Run a suite over a corpus and optionally write <suite>.csv / <suite>.json.

    Args:
        suite: One of SUITES
        spec: Corpus to generate
        out_dir: Output directory; nothing is written when None
        jobs: Worker processes (1 runs in-process)
        inject_fault: Run the negative-control fixtures as ordinary schemes

    Raises:
        ValueError: On an unknown suite name
        GenerationError: If a corpus class lacks its declared property
    """
    if suite not in SUITES:
        raise ValueError(f"Unknown suite '{suite}', expected one of {', '.join(SUITES)}")
    items = generate_corpus(spec)
    report = RunReport(suite=suite, seed=spec.seed)
    args = [(suite, i, item, spec.seed, inject_fault) for i, item in enumerate(items)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for rows in pool.map(_run_item, *zip(*args)):
                report.rows.extend(rows)
    else:
        for arguments in args:
            report.rows.extend(_run_item(*arguments))
    logger.info("%s: %d rows, %d failures", suite, len(report.rows), len(report.failures))
    if out_dir is not None:
        report.write(Path(out_dir))
    return report
