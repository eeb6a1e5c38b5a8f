"""Majority-vote merging of dependent uncertainty sets."""

from .derandomize import (
    Decision,
    EstimatorBatch,
    StabilizationTracker,
    hulc_buckets,
    hulc_interval,
    lower_median,
    mom,
    momom,
    running_median,
)
from .estimators import MedianOfMeans, VoteMerger, merge
from .intervals import Interval, IntervalUnion, VoteProfile, WeightedFamily, build_profile, normalize, superlevel
from .pvalues import duality_check, ruger, ruger_median, ruger_randomized
from .risk import (
    LabelSetFamily,
    LossSpec,
    gamma_calibrate,
    merge_loss_table,
    risk_merge_majority,
    risk_merge_weighted,
)
from .sequential import SequentialMerger, merge_confidence_sequences, merge_exchangeable, merge_permuted
from .simulation import (
    ExperimentConfig,
    ExperimentReport,
    private_hoeffding_interval,
    randomized_response,
    run_experiment,
)
from .vote import (
    CoverageBound,
    MergeOutcome,
    Rule,
    binom_quantile,
    coverage_bounds,
    median_of_midpoints,
    merge_independent,
    merge_majority,
    merge_nested_aware,
    merge_randomized,
    merge_randomized_union,
    merge_tau,
    merge_weighted,
)

__all__ = [
    "binom_quantile",
    "build_profile",
    "coverage_bounds",
    "CoverageBound",
    "Decision",
    "duality_check",
    "EstimatorBatch",
    "ExperimentConfig",
    "ExperimentReport",
    "gamma_calibrate",
    "hulc_buckets",
    "hulc_interval",
    "Interval",
    "IntervalUnion",
    "LabelSetFamily",
    "LossSpec",
    "lower_median",
    "median_of_midpoints",
    "MedianOfMeans",
    "merge",
    "merge_confidence_sequences",
    "merge_exchangeable",
    "merge_independent",
    "merge_loss_table",
    "merge_majority",
    "merge_nested_aware",
    "merge_permuted",
    "merge_randomized",
    "merge_randomized_union",
    "merge_tau",
    "merge_weighted",
    "MergeOutcome",
    "mom",
    "momom",
    "normalize",
    "private_hoeffding_interval",
    "randomized_response",
    "risk_merge_majority",
    "risk_merge_weighted",
    "ruger",
    "ruger_median",
    "ruger_randomized",
    "Rule",
    "run_experiment",
    "running_median",
    "SequentialMerger",
    "StabilizationTracker",
    "superlevel",
    "VoteMerger",
    "VoteProfile",
    "WeightedFamily",
]

__version__ = "0.1.0"
