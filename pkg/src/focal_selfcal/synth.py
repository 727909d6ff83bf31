"""Synthetic two-view scenes and parameter-sweep experiments.

A scene is parameterized by (theta, y): camera 1 sits at the origin
looking down +z; camera 2 sits at (1200, y, 600), rotated 60 degrees
about its y-axis and then theta degrees about its x-axis. theta = 0 and
y = 0 makes the two principal axes coplanar (intersecting), which is
the degenerate configuration for closed-form focal recovery.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .closed_form import bougnoux, sturm_equal_focal, translate_f_to_origin
from .epipolar import FundamentalMatrix, Intrinsics, f_from_cameras
from .exceptions import FocalSelfCalError, FrustumEmpty, TooFewPoints
from .metrics import focal_error
from .ransac import Correspondence, RansacConfig, ransac_f
from .solver import PriorConfig, calibrate, calibrate_equal_focal

# World-space depth range for sampling points in front of camera 1.
# Camera 2 sits ~1342 world units away; this band keeps the two view
# frusta overlapping for every swept (theta, y).
DEPTH_RANGE = (900.0, 1500.0)


@dataclass(frozen=True)
class SceneConfig:
    """Ground-truth geometry and noise levels of one synthetic scene."""

    theta: float = 0.0
    y: float = 0.0
    f1: float = 600.0
    f2: float = 400.0
    image_size: tuple[int, int] = (640, 480)
    n_points: int = 100
    sigma_n: float = 0.0
    sigma_p: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class SyntheticScene:
    """Generated correspondences plus the ground truth that made them."""

    config: SceneConfig
    k1: Intrinsics
    k2: Intrinsics
    r2: np.ndarray
    t2: np.ndarray
    correspondences: list[Correspondence]
    gt_f: FundamentalMatrix
    assumed_pp: tuple[tuple[float, float], tuple[float, float]]


def _rot_x(deg: float) -> np.ndarray:
    a = np.deg2rad(deg)
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _rot_y(deg: float) -> np.ndarray:
    a = np.deg2rad(deg)
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def camera2_pose(cfg: SceneConfig) -> tuple[np.ndarray, np.ndarray]:
    """World-to-camera rotation and translation of the second camera."""
    center = np.array([1200.0, cfg.y, 600.0])
    r2 = _rot_x(cfg.theta) @ _rot_y(60.0)
    return r2, -r2 @ center


def principal_axes_distance(cfg: SceneConfig) -> float:
    """Shortest distance between the two cameras' principal axes."""
    c1 = np.zeros(3)
    d1 = np.array([0.0, 0.0, 1.0])
    r2, t2 = camera2_pose(cfg)
    c2 = -r2.T @ t2
    d2 = r2.T @ np.array([0.0, 0.0, 1.0])
    cross = np.cross(d1, d2)
    denom = np.linalg.norm(cross)
    if denom < 1e-12:
        # Parallel axes: point-to-line distance.
        return float(np.linalg.norm(np.cross(c2 - c1, d1)))
    return float(abs((c2 - c1) @ cross) / denom)


def is_degenerate_config(cfg: SceneConfig, tol: float = 1e-9) -> bool:
    """True when the principal axes are coplanar (they intersect)."""
    return principal_axes_distance(cfg) <= tol


def _project(k: Intrinsics, r: np.ndarray, t: np.ndarray, pts: np.ndarray):
    cam = pts @ r.T + t
    depths = cam[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        pix = (cam[:, :2] / cam[:, 2:3]) * k.f + np.asarray(k.c)
    return pix, depths


def generate_scene(cfg: SceneConfig) -> SyntheticScene:
    """Sample mutually visible points and project them with noise.

    Points are drawn uniformly inside camera 1's frustum at depths in
    DEPTH_RANGE and rejection-sampled for visibility in camera 2.
    Pixel noise (sigma_n) perturbs the measurements; principal-point
    noise (sigma_p) perturbs only the ASSUMED principal points handed
    to downstream estimators, never the true cameras.
    """
    w, h = cfg.image_size
    center = (w / 2.0, h / 2.0)
    k1 = Intrinsics(cfg.f1, center)
    k2 = Intrinsics(cfg.f2, center)
    r2, t2 = camera2_pose(cfg)
    rng = np.random.default_rng(cfg.seed)

    pts: list[np.ndarray] = []
    pix1: list[np.ndarray] = []
    pix2: list[np.ndarray] = []
    max_attempts = 10 * cfg.n_points
    attempts = 0
    while len(pts) < cfg.n_points and attempts < max_attempts:
        attempts += 1
        depth = rng.uniform(*DEPTH_RANGE)
        u = rng.uniform(0.0, w)
        v = rng.uniform(0.0, h)
        p = np.array(
            [(u - center[0]) / cfg.f1 * depth, (v - center[1]) / cfg.f1 * depth, depth]
        )
        q2, d2 = _project(k2, r2, t2, p[None, :])
        if d2[0] <= 0.0:
            continue
        x2 = q2[0]
        if not (0.0 <= x2[0] <= w and 0.0 <= x2[1] <= h):
            continue
        pts.append(p)
        pix1.append(np.array([u, v]))
        pix2.append(x2)
    if len(pts) < cfg.n_points:
        raise FrustumEmpty(
            f"only {len(pts)} of {cfg.n_points} mutually visible points "
            f"found in {max_attempts} attempts"
        )

    p1 = np.array(pix1)
    p2 = np.array(pix2)
    if cfg.sigma_n > 0.0:
        p1 = p1 + rng.normal(0.0, cfg.sigma_n, p1.shape)
        p2 = p2 + rng.normal(0.0, cfg.sigma_n, p2.shape)
    if cfg.sigma_p > 0.0:
        pp1 = tuple(np.asarray(center) + rng.normal(0.0, cfg.sigma_p, 2))
        pp2 = tuple(np.asarray(center) + rng.normal(0.0, cfg.sigma_p, 2))
    else:
        pp1, pp2 = center, center

    correspondences = [
        Correspondence(tuple(a), tuple(b)) for a, b in zip(p1, p2)
    ]
    gt_f = f_from_cameras(k1, k2, r2, t2)
    return SyntheticScene(
        config=cfg,
        k1=k1,
        k2=k2,
        r2=r2,
        t2=t2,
        correspondences=correspondences,
        gt_f=gt_f,
        assumed_pp=(pp1, pp2),
    )


@dataclass(frozen=True)
class SweepSpec:
    """One varied parameter, its values, and the estimators to run."""

    parameter: str  # theta | y | sigma_n | sigma_p | f_prior | weight_ratio | eps
    values: tuple[float, ...]
    trials: int
    base: SceneConfig = field(default_factory=SceneConfig)
    estimators: tuple[str, ...] = ("calibrate", "bougnoux")
    use_gt_f: bool = True
    f_priors: tuple[float, float] = (700.0, 400.0)
    w_f: float = 5e-4
    eps: float = 1e-6

    def __post_init__(self) -> None:
        known = {"theta", "y", "sigma_n", "sigma_p", "f_prior", "weight_ratio", "eps"}
        if self.parameter not in known:
            raise ValueError(f"unknown sweep parameter {self.parameter!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class SweepRow:
    """One (estimator, parameter value, trial) outcome."""

    sweep_param: str
    value: float
    trial: int
    estimator: str
    f1_est: float
    f2_est: float
    f1_err: float
    f2_err: float
    iterations: int
    converged: bool
    status: str
    degenerate: bool


def _scene_config_for(spec: SweepSpec, value: float, trial: int) -> SceneConfig:
    cfg = spec.base
    stream = np.random.SeedSequence(
        [cfg.seed, int(round(1e6 * value)) & 0x7FFFFFFF, trial]
    )
    overrides: dict = {"seed": int(stream.generate_state(1)[0])}
    if spec.parameter in ("theta", "y", "sigma_n", "sigma_p"):
        overrides[spec.parameter] = value
    return replace(cfg, **overrides)


def _solver_settings(spec: SweepSpec, value: float):
    f_priors = spec.f_priors
    w_f = spec.w_f
    eps = spec.eps
    if spec.parameter == "f_prior":
        f_priors = (value, value)
    elif spec.parameter == "weight_ratio":
        w_f = value
    elif spec.parameter == "eps":
        eps = value
    return f_priors, w_f, eps


def _run_trial(spec: SweepSpec, value: float, trial: int) -> list[SweepRow]:
    cfg = _scene_config_for(spec, value, trial)
    rows: list[SweepRow] = []
    meta = dict(
        sweep_param=spec.parameter,
        value=value,
        trial=trial,
        degenerate=is_degenerate_config(cfg),
    )

    def fail_row(estimator: str, status: str) -> SweepRow:
        return SweepRow(
            estimator=estimator,
            f1_est=float("nan"),
            f2_est=float("nan"),
            f1_err=1.0,
            f2_err=1.0,
            iterations=0,
            converged=False,
            status=status,
            **meta,
        )

    try:
        scene = generate_scene(cfg)
    except FrustumEmpty:
        return [fail_row(e, "frustum_empty") for e in spec.estimators]

    if spec.use_gt_f:
        f_est = scene.gt_f
    else:
        try:
            report = ransac_f(
                scene.correspondences,
                RansacConfig(seed=cfg.seed, max_iterations=500, confidence=0.999),
            )
            f_est = report.best_f
        except (TooFewPoints, FocalSelfCalError):
            return [fail_row(e, "ransac_failed") for e in spec.estimators]

    pp1, pp2 = scene.assumed_pp
    f_priors, w_f, eps = _solver_settings(spec, value)

    for estimator in spec.estimators:
        try:
            if estimator == "calibrate":
                prior = PriorConfig(
                    f_prior=f_priors, c_prior=(pp1, pp2), w_f=(w_f, w_f)
                )
                res = calibrate(f_est, prior, eps=eps)
                rows.append(
                    SweepRow(
                        estimator=estimator,
                        f1_est=res.intrinsics[0].f,
                        f2_est=res.intrinsics[1].f,
                        f1_err=focal_error(res.intrinsics[0].f, cfg.f1),
                        f2_err=focal_error(res.intrinsics[1].f, cfg.f2),
                        iterations=res.iterations,
                        converged=res.converged,
                        status="ok",
                        **meta,
                    )
                )
            elif estimator == "calibrate_equal_focal":
                prior = PriorConfig(
                    f_prior=(f_priors[0], f_priors[0]),
                    c_prior=(pp1, pp2),
                    w_f=(w_f, w_f),
                )
                res = calibrate_equal_focal(f_est, prior, eps=eps)
                rows.append(
                    SweepRow(
                        estimator=estimator,
                        f1_est=res.intrinsics[0].f,
                        f2_est=res.intrinsics[1].f,
                        f1_err=focal_error(res.intrinsics[0].f, cfg.f1),
                        f2_err=focal_error(res.intrinsics[1].f, cfg.f2),
                        iterations=res.iterations,
                        converged=res.converged,
                        status="ok",
                        **meta,
                    )
                )
            elif estimator == "bougnoux":
                centered = translate_f_to_origin(f_est, pp1, pp2)
                r1, r2 = bougnoux(centered)
                if not (r1.positive and r2.positive):
                    rows.append(fail_row(estimator, "imaginary_focal"))
                    continue
                f1e = float(np.sqrt(r1.value))
                f2e = float(np.sqrt(r2.value))
                rows.append(
                    SweepRow(
                        estimator=estimator,
                        f1_est=f1e,
                        f2_est=f2e,
                        f1_err=focal_error(f1e, cfg.f1),
                        f2_err=focal_error(f2e, cfg.f2),
                        iterations=0,
                        converged=True,
                        status="ok",
                        **meta,
                    )
                )
            elif estimator == "sturm":
                centered = translate_f_to_origin(f_est, pp1, pp2)
                fe = sturm_equal_focal(centered)
                rows.append(
                    SweepRow(
                        estimator=estimator,
                        f1_est=fe,
                        f2_est=fe,
                        f1_err=focal_error(fe, cfg.f1),
                        f2_err=focal_error(fe, cfg.f2),
                        iterations=0,
                        converged=True,
                        status="ok",
                        **meta,
                    )
                )
            else:
                raise ValueError(f"unknown estimator {estimator!r}")
        except FocalSelfCalError as exc:
            rows.append(fail_row(estimator, type(exc).__name__))
    return rows


def _max_workers() -> int:
    env = os.environ.get("FOCAL_SELFCAL_THREADS", "0")
    try:
        n = int(env)
    except ValueError:
        n = 0
    if n <= 0:
        return os.cpu_count() or 1
    return n


def run_sweep(spec: SweepSpec, parallel: bool = False) -> list[SweepRow]:
    """All (value, trial) rows of a sweep; deterministic given the spec.

    Each trial derives its RNG stream from (base seed, value, trial), so
    parallel and serial execution produce identical tables.
    """
    tasks = [(value, trial) for value in spec.values for trial in range(spec.trials)]
    if parallel and _max_workers() > 1:
        with ProcessPoolExecutor(max_workers=_max_workers()) as pool:
            chunks = list(
                pool.map(_run_trial, [spec] * len(tasks), *zip(*tasks), chunksize=4)
            )
    else:
        chunks = [_run_trial(spec, value, trial) for value, trial in tasks]
    return [row for chunk in chunks for row in chunk]
