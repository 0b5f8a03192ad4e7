"""Robust least-squares regression over mini-batches with adversarially corrupted responses.

Per-batch heuristic hard thresholding (:mod:`robust_lsq.hrr`), majority-based
consolidation of batch estimates (:mod:`robust_lsq.consolidation`), and the
distributed (:mod:`robust_lsq.drlr`) and online (:mod:`robust_lsq.orlr`)
pipelines built from them.
"""
from ._backend import HAS_COMPILED
from .batch_model import (
    GroundTruth,
    MiniBatch,
    ResidualVector,
    as_coefficients,
    index_set,
    predict,
    residual_magnitudes,
    restrict,
)
from .consolidation import (
    DominatingSet,
    EstimatePool,
    MedianConfig,
    consolidate,
    dominating_set,
    estimate_distance,
    geometric_median,
    pivot_batch,
)
from .datagen import Layout, SynthSpec, gen_batches, gen_ground_truth, generate, inject_corruption
from .drlr import DrlrReport, drlr_fit
from .errors import (
    CapabilityError,
    ConfigError,
    ContractError,
    DataFormatError,
    NumericalError,
    RobustLsqError,
)
from .hrr import (
    HrrConfig,
    HrrResult,
    hard_threshold,
    heuristic_size,
    hrr_fit,
    least_squares_subset,
    ssc_sss_constants,
    tau_o,
)
from .metrics import baseline_hrr_avg, baseline_ols_avg, l2_error, mae
from .orlr import OrlrState, orlr_init, orlr_stream, orlr_update

__version__ = "0.1.0"
