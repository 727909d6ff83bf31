"""Fundamental-matrix estimation from point correspondences.

Minimal 7-point solver, 8-point least-squares refit, Sampson scoring
and a seeded RANSAC loop. The loop optionally rejects candidate models
whose implied squared focal lengths are non-positive (the real-focal
check) before any scoring work is spent on them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .closed_form import rfc_check, translate_f_to_origin
from .epipolar import FundamentalMatrix, normalize_f
from .exceptions import DegenerateSample, NoModelFound, RankDeficient, TooFewPoints

SAMPLE_SIZE = 7


@dataclass(frozen=True)
class Correspondence:
    """A pair of matched pixel coordinates."""

    x1: tuple[float, float]
    x2: tuple[float, float]

    def __post_init__(self) -> None:
        coords = (*self.x1, *self.x2)
        if not all(np.isfinite(coords)):
            raise ValueError("correspondence coordinates must be finite")


@dataclass(frozen=True)
class RansacConfig:
    """Knobs for the RANSAC loop."""

    threshold: float = 3.0
    max_iterations: int = 1000
    seed: int = 0
    rfc_enabled: bool = False
    rfc_principal_points: tuple[tuple[float, float], tuple[float, float]] = (
        (0.0, 0.0),
        (0.0, 0.0),
    )
    confidence: float = 1.0
    lo_enabled: bool = True

    def __post_init__(self) -> None:
        if self.threshold <= 0.0:
            raise ValueError("threshold must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0.0 < self.confidence <= 1.0:
            raise ValueError("confidence must be in (0, 1]")


@dataclass(frozen=True)
class RansacReport:
    """Outcome of one ransac_f run, including work counters."""

    best_f: FundamentalMatrix
    inlier_mask: np.ndarray
    iterations_run: int
    models_generated: int
    models_rejected_rfc: int
    score_evaluations: int

    def __post_init__(self) -> None:
        if self.models_rejected_rfc > self.models_generated:
            raise ValueError("rejected count exceeds generated count")

    @property
    def inlier_count(self) -> int:
        return int(np.count_nonzero(self.inlier_mask))


def _points(correspondences: list[Correspondence]) -> tuple[np.ndarray, np.ndarray]:
    p1 = np.array([c.x1 for c in correspondences], dtype=float)
    p2 = np.array([c.x2 for c in correspondences], dtype=float)
    return p1, p2


def _hartley_transform(pts: np.ndarray) -> np.ndarray:
    """Similarity moving the centroid to the origin and RMS radius to sqrt(2)."""
    centroid = pts.mean(axis=0)
    rms = np.sqrt(np.mean(np.sum((pts - centroid) ** 2, axis=1)))
    if rms <= 1e-12:
        raise DegenerateSample("all points coincide; cannot normalize")
    s = np.sqrt(2.0) / rms
    return np.array(
        [
            [s, 0.0, -s * centroid[0]],
            [0.0, s, -s * centroid[1]],
            [0.0, 0.0, 1.0],
        ]
    )


def _design_matrix(p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
    x1, y1 = p1[:, 0], p1[:, 1]
    x2, y2 = p2[:, 0], p2[:, 1]
    return np.column_stack(
        [x2 * x1, x2 * y1, x2, y2 * x1, y2 * y1, y2, x1, y1, np.ones_like(x1)]
    )


def _apply_transform(t: np.ndarray, pts: np.ndarray) -> np.ndarray:
    h = np.column_stack([pts, np.ones(len(pts))]) @ t.T
    return h[:, :2] / h[:, 2:3]


def _det_cubic(fa: np.ndarray, fb: np.ndarray) -> np.ndarray:
    """Coefficients (low to high in alpha) of det(alpha*Fa + (1-alpha)*Fb)."""
    # det is cubic in alpha; interpolate through four evaluation points.
    xs = np.array([-1.0, 0.0, 1.0, 2.0])
    ys = np.array([np.linalg.det(x * fa + (1.0 - x) * fb) for x in xs])
    return np.polynomial.polynomial.polyfit(xs, ys, 3)


def seven_point(sample: list[Correspondence]) -> list[FundamentalMatrix]:
    """1-3 fundamental matrices fitting exactly seven correspondences.

    Null-space pencil of the Hartley-normalized design matrix, real roots
    of the cubic determinant constraint, denormalized and canonicalized.
    """
    if len(sample) != SAMPLE_SIZE:
        raise ValueError("seven_point requires exactly 7 correspondences")
    p1, p2 = _points(sample)
    t1 = _hartley_transform(p1)
    t2 = _hartley_transform(p2)
    a = _design_matrix(_apply_transform(t1, p1), _apply_transform(t2, p2))
    _, s, vt = np.linalg.svd(a)
    if s[6] <= 1e-9 * s[0]:
        raise DegenerateSample("design matrix rank < 7")
    fa = vt[7].reshape(3, 3)
    fb = vt[8].reshape(3, 3)

    coeffs = _det_cubic(fa, fb)
    roots = np.roots(coeffs[::-1]) if np.any(np.abs(coeffs[1:]) > 0) else np.array([])
    models: list[FundamentalMatrix] = []
    for r in roots:
        if abs(r.imag) > 1e-10 * (1.0 + abs(r.real)):
            continue
        alpha = float(r.real)
        fn = alpha * fa + (1.0 - alpha) * fb
        try:
            models.append(normalize_f(t2.T @ fn @ t1))
        except RankDeficient:
            continue
    if not models:
        raise DegenerateSample("no real root of the determinant cubic")
    return models


def eight_point_refit(inliers: list[Correspondence]) -> FundamentalMatrix:
    """Direct linear least-squares F from >= 8 correspondences."""
    if len(inliers) < 8:
        raise TooFewPoints("eight_point_refit requires at least 8 correspondences")
    p1, p2 = _points(inliers)
    t1 = _hartley_transform(p1)
    t2 = _hartley_transform(p2)
    a = _design_matrix(_apply_transform(t1, p1), _apply_transform(t2, p2))
    _, s, vt = np.linalg.svd(a)
    if s[7] <= 1e-12 * s[0]:
        raise DegenerateSample("design matrix rank < 8")
    fn = vt[8].reshape(3, 3)
    try:
        return normalize_f(t2.T @ fn @ t1)
    except RankDeficient as exc:
        raise DegenerateSample("refit produced a rank-deficient matrix") from exc


def sampson_error(f: FundamentalMatrix, c: Correspondence) -> float:
    """First-order geometric error of a correspondence, in pixels squared."""
    x1 = np.array([c.x1[0], c.x1[1], 1.0])
    x2 = np.array([c.x2[0], c.x2[1], 1.0])
    fx1 = f.m @ x1
    ftx2 = f.m.T @ x2
    num = float(x2 @ fx1) ** 2
    den = fx1[0] ** 2 + fx1[1] ** 2 + ftx2[0] ** 2 + ftx2[1] ** 2
    if den == 0.0:
        return float("inf")
    return num / den


def _sampson_all(f: FundamentalMatrix, p1h: np.ndarray, p2h: np.ndarray) -> np.ndarray:
    fx1 = p1h @ f.m.T
    ftx2 = p2h @ f.m
    num = np.sum(p2h * fx1, axis=1) ** 2
    den = fx1[:, 0] ** 2 + fx1[:, 1] ** 2 + ftx2[:, 0] ** 2 + ftx2[:, 1] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), np.inf)
    return out


def ransac_f(correspondences: list[Correspondence], cfg: RansacConfig) -> RansacReport:
    """Seeded RANSAC over 7-point models with Sampson inlier scoring.

    When cfg.rfc_enabled, each candidate is translated to the configured
    principal points and rejected before scoring if either implied
    squared focal is non-positive; score_evaluations counts only the
    point evaluations of surviving candidates.
    """
    n = len(correspondences)
    if n < SAMPLE_SIZE:
        raise TooFewPoints("at least 7 correspondences required")
    rng = np.random.default_rng(cfg.seed)
    p1, p2 = _points(correspondences)
    p1h = np.column_stack([p1, np.ones(n)])
    p2h = np.column_stack([p2, np.ones(n)])
    thr2 = cfg.threshold**2
    pp1, pp2 = cfg.rfc_principal_points

    best_f: FundamentalMatrix | None = None
    best_mask = np.zeros(n, dtype=bool)
    best_count = -1
    models_generated = 0
    models_rejected = 0
    score_evaluations = 0
    iterations_run = 0

    for _ in range(cfg.max_iterations):
        iterations_run += 1
        idx = rng.choice(n, size=SAMPLE_SIZE, replace=False)
        try:
            models = seven_point([correspondences[i] for i in idx])
        except DegenerateSample:
            continue
        for model in models:
            models_generated += 1
            if cfg.rfc_enabled:
                try:
                    centered = translate_f_to_origin(model, pp1, pp2)
                except RankDeficient:
                    models_rejected += 1
                    continue
                if not rfc_check(centered):
                    models_rejected += 1
                    continue
            errs = _sampson_all(model, p1h, p2h)
            score_evaluations += n
            mask = errs < thr2
            count = int(np.count_nonzero(mask))
            if count > best_count:
                best_count = count
                best_mask = mask
                best_f = model
        if (
            cfg.confidence < 1.0
            and best_count > 0
            and iterations_run >= _iterations_needed(cfg.confidence, best_count, n)
        ):
            break

    if best_f is None or best_count < SAMPLE_SIZE:
        raise NoModelFound("no candidate model survived sampling and rejection")

    if cfg.lo_enabled and best_count >= 8:
        try:
            refit = eight_point_refit(
                [c for c, keep in zip(correspondences, best_mask) if keep]
            )
        except (DegenerateSample, TooFewPoints):
            refit = None
        if refit is not None:
            errs = _sampson_all(refit, p1h, p2h)
            score_evaluations += n
            mask = errs < thr2
            if int(np.count_nonzero(mask)) >= best_count:
                best_f = refit
                best_mask = mask

    return RansacReport(
        best_f=best_f,
        inlier_mask=best_mask,
        iterations_run=iterations_run,
        models_generated=models_generated,
        models_rejected_rfc=models_rejected,
        score_evaluations=score_evaluations,
    )


def _iterations_needed(confidence: float, inlier_count: int, n: int) -> float:
    """Standard RANSAC iteration bound for the current best inlier ratio."""
    ratio = inlier_count / n
    p_good = ratio**SAMPLE_SIZE
    if p_good >= 1.0:
        return 1.0
    if p_good <= 0.0:
        return float("inf")
    return np.log(1.0 - confidence) / np.log(1.0 - p_good)
