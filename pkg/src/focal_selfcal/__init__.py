"""Two-view focal-length self-calibration from the fundamental matrix.

Closed-form (polynomial-ratio and equal-focal) recovery, a prior-guided
iterative solver that stays on the Kruppa constraint manifold, robust
F estimation with a real-focal rejection hook, synthetic benchmarks and
evaluation metrics.
"""

from .closed_form import (
    FocalSquaredRatio,
    bougnoux,
    rfc_check,
    sturm_equal_focal,
    translate_f_to_origin,
)
from .epipolar import (
    FundamentalMatrix,
    Intrinsics,
    RelativePose,
    SvdF,
    decompose_pose,
    f_from_cameras,
    is_valid_essential,
    kruppa_derivatives,
    kruppa_residuals,
    normalize_f,
)
from .exceptions import (
    CheiralityAmbiguous,
    DegenerateFormula,
    DegenerateSample,
    FocalSelfCalError,
    FrustumEmpty,
    InvalidPrior,
    NoModelFound,
    NoRealFocal,
    NoRealSolution,
    RankDeficient,
    SolverFailure,
    TooFewPoints,
)
from .metrics import EvalRecord, focal_error, mean_average_accuracy, pose_error
from .quartic import BivariateQuartic, select_multipliers, solve_quartic_system
from .ransac import (
    Correspondence,
    RansacConfig,
    RansacReport,
    eight_point_refit,
    ransac_f,
    sampson_error,
    seven_point,
)
from .solver import (
    CalibrationResult,
    PriorConfig,
    build_iteration_system,
    calibrate,
    calibrate_equal_focal,
)
from .synth import SceneConfig, SweepSpec, SyntheticScene, generate_scene, run_sweep

__version__ = "0.1.0"

__all__ = [
    "BivariateQuartic",
    "CalibrationResult",
    "CheiralityAmbiguous",
    "Correspondence",
    "DegenerateFormula",
    "DegenerateSample",
    "EvalRecord",
    "FocalSelfCalError",
    "FocalSquaredRatio",
    "FrustumEmpty",
    "FundamentalMatrix",
    "Intrinsics",
    "InvalidPrior",
    "NoModelFound",
    "NoRealFocal",
    "NoRealSolution",
    "PriorConfig",
    "RankDeficient",
    "RansacConfig",
    "RansacReport",
    "RelativePose",
    "SceneConfig",
    "SolverFailure",
    "SvdF",
    "SweepSpec",
    "SyntheticScene",
    "TooFewPoints",
    "bougnoux",
    "build_iteration_system",
    "calibrate",
    "calibrate_equal_focal",
    "decompose_pose",
    "eight_point_refit",
    "f_from_cameras",
    "focal_error",
    "generate_scene",
    "is_valid_essential",
    "kruppa_derivatives",
    "kruppa_residuals",
    "mean_average_accuracy",
    "normalize_f",
    "pose_error",
    "ransac_f",
    "rfc_check",
    "run_sweep",
    "sampson_error",
    "select_multipliers",
    "seven_point",
    "solve_quartic_system",
    "sturm_equal_focal",
    "translate_f_to_origin",
]
