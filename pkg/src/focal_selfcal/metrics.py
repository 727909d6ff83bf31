"""Evaluation metrics: relative focal error, pose error, and mAA.

Failed estimations are scored f_err = 1 and p_err = 180 degrees by
policy so that aggregate comparisons remain total.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .epipolar import RelativePose

FAILURE_FOCAL_ERROR = 1.0
FAILURE_POSE_ERROR = 180.0


@dataclass(frozen=True)
class EvalRecord:
    """Per-trial error record for one estimator."""

    f1_err: float
    f2_err: float
    p_err: float
    success: bool


def focal_error(f_est: float, f_gt: float) -> float:
    """Relative focal error |f_est - f_gt| / max(f_est, f_gt)."""
    if f_gt <= 0.0 or f_est <= 0.0 or not np.isfinite(f_est):
        return FAILURE_FOCAL_ERROR
    return abs(f_est - f_gt) / max(f_est, f_gt)


def pose_error(
    est: RelativePose, gt: RelativePose, sign_agnostic_t: bool = True
) -> float:
    """Max of rotation and translation angular errors, in degrees.

    Translation is compared as a direction; with sign_agnostic_t the
    minimum over +/- t_est is taken (the sign from F alone is ambiguous
    until cheirality is applied).
    """
    r_rel = est.rotation @ gt.rotation.T
    cos_r = (np.trace(r_rel) - 1.0) / 2.0
    rot_err = np.degrees(np.arccos(np.clip(cos_r, -1.0, 1.0)))

    t_est = np.asarray(est.translation, dtype=float)
    t_gt = np.asarray(gt.translation, dtype=float)
    n_est = np.linalg.norm(t_est)
    n_gt = np.linalg.norm(t_gt)
    if n_est == 0.0 or n_gt == 0.0:
        trans_err = 0.0
    else:
        cos_t = float(t_est @ t_gt) / (n_est * n_gt)
        if sign_agnostic_t:
            cos_t = abs(cos_t)
        trans_err = np.degrees(np.arccos(np.clip(cos_t, -1.0, 1.0)))
    return float(max(rot_err, trans_err))


def mean_average_accuracy(
    errors: list[float] | np.ndarray, max_threshold: float, n_bins: int
) -> float:
    """Mean over thresholds t_j = j * max/n of the fraction of errors < t_j.

    Conventional settings: pose max 10 or 20 degrees with 1-degree bins;
    focal max 0.1 or 0.2 with 0.01-wide bins. An empty list scores 0.
    """
    if max_threshold <= 0.0:
        raise ValueError("max_threshold must be positive")
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    errs = np.asarray(errors, dtype=float)
    if errs.size == 0:
        return 0.0
    thresholds = max_threshold * np.arange(1, n_bins + 1) / n_bins
    fractions = np.mean(errs[None, :] < thresholds[:, None], axis=1)
    return float(np.mean(fractions))
