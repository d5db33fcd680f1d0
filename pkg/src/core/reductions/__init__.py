"""
Reductions from multiclass, regression and robust compression to binary compression.
"""

from .common import Reduction, ReductionTrace
from .multiclass import (
    AgnosticWrap,
    Graphdim1Scheme,
    PiecewiseThresholdInflatedScheme,
    ReduceGeneral,
    ReduceProperOrMajority,
    ReduceStable,
    agnostic_wrap,
    graphdim1_scheme,
    inflate_class,
    inflate_sample,
    piecewise_threshold_inflated_scheme,
    reduce_general,
    reduce_proper_or_majority,
    reduce_stable,
)
from .oig import (
    LooEstimate,
    OneInclusionGraph,
    Orientation,
    build_one_inclusion_graph,
    leave_one_out_error,
    oig_predict,
    orient_graph,
)
from .regression import (
    AgnosticRegression,
    EpsGrid,
    ExactViaMulticlass,
    ReduceEpsLinf,
    ReduceMajorityRegression,
    ReduceStableRegression,
    agnostic_regression,
    class_leq,
    exact_via_multiclass,
    inflate_sample_eps,
    lp_tolerance,
    make_eps_grid,
    reduce_eps_linf,
    reduce_eps_lp,
    reduce_majority_regression,
    reduce_stable_regression,
)
from .robust import (
    ReduceRobust,
    ReduceRobustStable,
    RobustZeroOneLoss,
    inflate_robust,
    is_robustly_realizable,
    reduce_robust,
    reduce_robust_stable,
    robust_mask,
    twin_class,
)

__all__ = [
    'Reduction', 'ReductionTrace',
    'AgnosticWrap', 'Graphdim1Scheme', 'PiecewiseThresholdInflatedScheme', 'ReduceGeneral',
    'ReduceProperOrMajority', 'ReduceStable', 'agnostic_wrap', 'graphdim1_scheme', 'inflate_class',
    'inflate_sample', 'piecewise_threshold_inflated_scheme', 'reduce_general', 'reduce_proper_or_majority',
    'reduce_stable',
    'LooEstimate', 'OneInclusionGraph', 'Orientation', 'build_one_inclusion_graph', 'leave_one_out_error',
    'oig_predict', 'orient_graph',
    'AgnosticRegression', 'EpsGrid', 'ExactViaMulticlass', 'ReduceEpsLinf', 'ReduceMajorityRegression',
    'ReduceStableRegression', 'agnostic_regression', 'class_leq', 'exact_via_multiclass',
    'inflate_sample_eps', 'lp_tolerance', 'make_eps_grid', 'reduce_eps_linf', 'reduce_eps_lp',
    'reduce_majority_regression', 'reduce_stable_regression',
    'ReduceRobust', 'ReduceRobustStable', 'RobustZeroOneLoss', 'inflate_robust', 'is_robustly_realizable',
    'reduce_robust', 'reduce_robust_stable', 'robust_mask', 'twin_class',
]
