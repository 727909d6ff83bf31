"""Shared helpers for the test suite."""

import numpy as np
import pytest

from focal_selfcal.epipolar import FundamentalMatrix, Intrinsics, f_from_cameras


def rot_x(deg: float) -> np.ndarray:
    a = np.deg2rad(deg)
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(deg: float) -> np.ndarray:
    a = np.deg2rad(deg)
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def make_f(
    f1: float = 600.0,
    f2: float = 400.0,
    theta: float = 0.0,
    y: float = 300.0,
    c1: tuple = (320.0, 240.0),
    c2: tuple = (320.0, 240.0),
) -> tuple[FundamentalMatrix, Intrinsics, Intrinsics, np.ndarray, np.ndarray]:
    """Ground-truth F for the standard two-camera configuration."""
    k1 = Intrinsics(f1, c1)
    k2 = Intrinsics(f2, c2)
    center = np.array([1200.0, y, 600.0])
    r2 = rot_x(theta) @ rot_y(60.0)
    t2 = -r2 @ center
    return f_from_cameras(k1, k2, r2, t2), k1, k2, r2, t2


def random_config(rng: np.random.Generator) -> tuple[float, float]:
    """A random non-degenerate (theta, y).

    Besides the parameter-box filter (|y| >= 100 or |theta| >= 5), rejects
    configurations whose principal axes pass within 100 units of each other:
    the axes re-intersect along a diagonal locus y ~ -15 * theta, so closeness
    to degeneracy is not captured by per-parameter thresholds alone.
    """
    from focal_selfcal.synth import SceneConfig, principal_axes_distance

    while True:
        theta = float(rng.uniform(-15.0, 15.0))
        y = float(rng.uniform(-300.0, 300.0))
        if (abs(y) >= 100.0 or abs(theta) >= 5.0) and principal_axes_distance(
            SceneConfig(theta=theta, y=y)
        ) >= 100.0:
            return theta, y


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
