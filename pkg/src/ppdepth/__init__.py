"""Rank temporal point-process observations by statistical depth.

Observations (sorted event times on [0, T]) are smoothed into curves
with a Gaussian kernel, compared with an L^p distance on the curves,
scored with h-depth or its center-based variant, and summarized by a
center event vector that minimizes the sum of squared distances.

Quick tour::

    from ppdepth import (KernelSpec, simulate_hpp, DepthConfig, rank,
                         SsdObjective, combined_center)

    spec = KernelSpec(c1=1.0, c2=10.0, T=100.0)
    sample = simulate_hpp(0.045, T=100.0, n=100, seed=7)
    report = rank(sample, DepthConfig(), spec)
    center = combined_center(SsdObjective(sample, spec), seed=7)
"""
from ._backend import backend_name
from .analysis import (
    ClassifierConfig,
    EvalReport,
    Segment,
    classify_by_depth,
    cross_validate,
    full_window_config,
    run_ranking_experiment,
    slice_segment,
)
from .center import (
    AnnealResult,
    AnnealSchedule,
    CenterEstimate,
    DimensionBound,
    LineSearchResult,
    SgdConfig,
    SsdObjective,
    combined_center,
    dimension_bound,
    kernel_mass_floor,
    line_search,
    rjmcmc_anneal,
    ssd,
    ssd_gradient,
)
from .depth import (
    FIXED,
    H_DEPTH,
    MODIFIED_BAND_DEPTH,
    MODIFIED_H_DEPTH,
    PROPORTIONAL_TO_T,
    DepthConfig,
    DepthEntry,
    DepthReport,
    h_depth,
    modified_band_depth,
    modified_h_depth,
    rank,
)
from .errors import DataValidationError, NumericalError
from .kernel import KernelSpec, PropernessReport, check_properness, evaluate
from .process import (
    IntensitySpec,
    PointProcess,
    load_processes,
    save_processes,
    simulate_hpp,
    simulate_ipp,
)
from .smoothing import (
    SmoothedCurve,
    gram_cross_integral,
    lp_distance,
    pairwise_distances,
    smooth,
    squared_l2_distance,
)

__version__ = "0.1.0"

__all__ = [
    "AnnealResult",
    "AnnealSchedule",
    "CenterEstimate",
    "ClassifierConfig",
    "DataValidationError",
    "DepthConfig",
    "DepthEntry",
    "DepthReport",
    "DimensionBound",
    "EvalReport",
    "FIXED",
    "H_DEPTH",
    "IntensitySpec",
    "KernelSpec",
    "MODIFIED_BAND_DEPTH",
    "MODIFIED_H_DEPTH",
    "PROPORTIONAL_TO_T",
    "LineSearchResult",
    "NumericalError",
    "PointProcess",
    "PropernessReport",
    "Segment",
    "SgdConfig",
    "SmoothedCurve",
    "SsdObjective",
    "backend_name",
    "check_properness",
    "classify_by_depth",
    "combined_center",
    "cross_validate",
    "dimension_bound",
    "evaluate",
    "full_window_config",
    "gram_cross_integral",
    "h_depth",
    "kernel_mass_floor",
    "line_search",
    "load_processes",
    "lp_distance",
    "modified_band_depth",
    "modified_h_depth",
    "pairwise_distances",
    "rank",
    "rjmcmc_anneal",
    "run_ranking_experiment",
    "save_processes",
    "simulate_hpp",
    "simulate_ipp",
    "slice_segment",
    "smooth",
    "squared_l2_distance",
    "ssd",
    "ssd_gradient",
    "__version__",
]
