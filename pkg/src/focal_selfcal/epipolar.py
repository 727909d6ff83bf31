"""Two-view epipolar geometry core.

Convention used throughout the package: the epipolar constraint is
x2^T F x1 = 0, i.e. F maps points of image 1 to epipolar lines in image 2.
For cameras K1 [I | 0] and K2 [R | t] this gives F ~ K2^-T [t]x R K1^-1,
and the calibrated matrix consistent with that convention is
E = K2^T F K1 ~ [t]x R. The Kruppa residuals below vanish exactly on
matrices built this way; self-consistency is asserted by tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import CheiralityAmbiguous, RankDeficient

RANK_TOL = 1e-9


@dataclass(frozen=True)
class SvdF:
    """SVD factors of a rank-2 fundamental matrix F = U diag(s1, s2, 0) V^T."""

    u: np.ndarray  # 3x3, columns u1, u2, u3
    v: np.ndarray  # 3x3, columns v1, v2, v3
    sigma1: float
    sigma2: float

    def reconstruct(self) -> np.ndarray:
        d = np.diag([self.sigma1, self.sigma2, 0.0])
        return self.u @ d @ self.v.T


@dataclass(frozen=True)
class FundamentalMatrix:
    """Canonicalized rank-2 fundamental matrix with cached SVD.

    Invariants: unit Frobenius norm, exact rank 2 (smallest singular value
    truncated to zero), and the largest-magnitude element is positive.
    """

    m: np.ndarray
    svd: SvdF

    @property
    def sigma1(self) -> float:
        return self.svd.sigma1

    @property
    def sigma2(self) -> float:
        return self.svd.sigma2


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics: focal length f (pixels) and principal point (u, v)."""

    f: float
    c: tuple[float, float] = (0.0, 0.0)

    def k(self) -> np.ndarray:
        u, v = self.c
        return np.array([[self.f, 0.0, u], [0.0, self.f, v], [0.0, 0.0, 1.0]])

    def omega(self) -> np.ndarray:
        """Dual image of the absolute conic, K K^T."""
        k = self.k()
        return k @ k.T


@dataclass(frozen=True)
class RelativePose:
    """Rotation plus unit translation direction (scale is unrecoverable)."""

    rotation: np.ndarray
    translation: np.ndarray


def skew(t: np.ndarray) -> np.ndarray:
    return np.array(
        [[0.0, -t[2], t[1]], [t[2], 0.0, -t[0]], [-t[1], t[0], 0.0]]
    )


def normalize_f(raw: np.ndarray) -> FundamentalMatrix:
    """Canonicalize a 3x3 matrix into a FundamentalMatrix.

    Truncates the smallest singular value to zero, rescales to unit
    Frobenius norm and flips the sign so the largest-magnitude element is
    positive. Raises RankDeficient when sigma2/sigma1 < 1e-9.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.shape != (3, 3):
        raise ValueError("fundamental matrix must be 3x3")
    if not np.all(np.isfinite(raw)) or np.linalg.norm(raw) == 0.0:
        raise ValueError("fundamental matrix must be finite and non-zero")

    u, s, vt = np.linalg.svd(raw)
    if s[1] / s[0] < RANK_TOL:
        raise RankDeficient(
            f"two largest singular values degenerate: {s[0]:.3e}, {s[1]:.3e}"
        )
    scale = np.hypot(s[0], s[1])
    m = u @ np.diag([s[0] / scale, s[1] / scale, 0.0]) @ vt
    flat = np.abs(m).ravel()
    if m.ravel()[int(np.argmax(flat))] < 0.0:
        m = -m
        u = -u
    m.setflags(write=False)
    svd = SvdF(u=u, v=vt.T, sigma1=s[0] / scale, sigma2=s[1] / scale)
    return FundamentalMatrix(m=m, svd=svd)


def f_from_cameras(
    k1: Intrinsics, k2: Intrinsics, rotation: np.ndarray, translation: np.ndarray
) -> FundamentalMatrix:
    """Fundamental matrix of cameras K1 [I | 0] and K2 [R | t]."""
    raw = (
        np.linalg.inv(k2.k()).T
        @ skew(np.asarray(translation, dtype=float))
        @ np.asarray(rotation, dtype=float)
        @ np.linalg.inv(k1.k())
    )
    return normalize_f(raw)


def kruppa_residuals(
    f: FundamentalMatrix | SvdF, k1: Intrinsics, k2: Intrinsics
) -> tuple[float, float]:
    """The two independent Kruppa equation residuals.

    kappa1 = s1 (v1' w1 v1)(u1' w2 u2) + s2 (v1' w1 v2)(u2' w2 u2)
    kappa2 = s1 (v1' w1 v2)(u1' w2 u1) + s2 (v2' w1 v2)(u1' w2 u2)

    with w_i the dual absolute conic of camera i and (u_i, v_i, s_i) the
    SVD factors of F. Both vanish iff K2^T F K1 is a valid essential matrix.
    """
    svd = f.svd if isinstance(f, FundamentalMatrix) else f
    w1 = k1.omega()
    w2 = k2.omega()
    v1, v2 = svd.v[:, 0], svd.v[:, 1]
    u1, u2 = svd.u[:, 0], svd.u[:, 1]
    s1, s2 = svd.sigma1, svd.sigma2
    kappa1 = s1 * (v1 @ w1 @ v1) * (u1 @ w2 @ u2) + s2 * (v1 @ w1 @ v2) * (
        u2 @ w2 @ u2
    )
    kappa2 = s1 * (v1 @ w1 @ v2) * (u1 @ w2 @ u1) + s2 * (v2 @ w1 @ v2) * (
        u1 @ w2 @ u2
    )
    return float(kappa1), float(kappa2)


def kruppa_term_scale(
    f: FundamentalMatrix | SvdF, k1: Intrinsics, k2: Intrinsics
) -> float:
    """Magnitude of the largest additive term of the Kruppa residuals.

    Used to turn the raw residuals into a dimensionless quantity.
    """
    svd = f.svd if isinstance(f, FundamentalMatrix) else f
    w1 = k1.omega()
    w2 = k2.omega()
    v1, v2 = svd.v[:, 0], svd.v[:, 1]
    u1, u2 = svd.u[:, 0], svd.u[:, 1]
    s1, s2 = svd.sigma1, svd.sigma2
    terms = [
        s1 * (v1 @ w1 @ v1) * (u1 @ w2 @ u2),
        s2 * (v1 @ w1 @ v2) * (u2 @ w2 @ u2),
        s1 * (v1 @ w1 @ v2) * (u1 @ w2 @ u1),
        s2 * (v2 @ w1 @ v2) * (u1 @ w2 @ u2),
    ]
    return float(max(abs(t) for t in terms))


def _omega_partials(k: Intrinsics) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Partial derivatives of K K^T w.r.t. f, u, v."""
    f = k.f
    u, v = k.c
    d_f = np.array([[2 * f, 0.0, 0.0], [0.0, 2 * f, 0.0], [0.0, 0.0, 0.0]])
    d_u = np.array([[2 * u, v, 1.0], [v, 0.0, 0.0], [1.0, 0.0, 0.0]])
    d_v = np.array([[0.0, u, 0.0], [u, 2 * v, 1.0], [0.0, 1.0, 0.0]])
    return d_f, d_u, d_v


def kruppa_derivatives(
    f: FundamentalMatrix | SvdF, k1: Intrinsics, k2: Intrinsics
) -> np.ndarray:
    """Analytic Jacobian of the Kruppa residuals.

    Returns a (2, 6) array: rows are (kappa1, kappa2), columns are the
    partials w.r.t. (f1, u1, v1, f2, u2, v2). Every entry is an exact
    polynomial expression; verified against finite differences in tests.
    """
    svd = f.svd if isinstance(f, FundamentalMatrix) else f
    w1 = k1.omega()
    w2 = k2.omega()
    v1, v2 = svd.v[:, 0], svd.v[:, 1]
    u1, u2 = svd.u[:, 0], svd.u[:, 1]
    s1, s2 = svd.sigma1, svd.sigma2

    # kappa_j = s1 * A_j * B_j + s2 * C_j * D_j with A, C quadratic forms in
    # w1 and B, D quadratic forms in w2.
    a = [v1 @ w1 @ v1, v1 @ w1 @ v2]
    b = [u1 @ w2 @ u2, u1 @ w2 @ u1]
    c = [v1 @ w1 @ v2, v2 @ w1 @ v2]
    d = [u2 @ w2 @ u2, u1 @ w2 @ u2]

    jac = np.zeros((2, 6))
    for p, dw1 in enumerate(_omega_partials(k1)):
        da = [v1 @ dw1 @ v1, v1 @ dw1 @ v2]
        dc = [v1 @ dw1 @ v2, v2 @ dw1 @ v2]
        for j in range(2):
            jac[j, p] = s1 * da[j] * b[j] + s2 * dc[j] * d[j]
    for p, dw2 in enumerate(_omega_partials(k2)):
        db = [u1 @ dw2 @ u2, u1 @ dw2 @ u1]
        dd = [u2 @ dw2 @ u2, u1 @ dw2 @ u2]
        for j in range(2):
            jac[j, 3 + p] = s1 * a[j] * db[j] + s2 * c[j] * dd[j]
    return jac


def is_valid_essential(
    f: FundamentalMatrix, k1: Intrinsics, k2: Intrinsics, tol: float
) -> bool:
    """True iff E = K2^T F K1 has singular values (s, s, 0) within tol."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    e = k2.k().T @ f.m @ k1.k()
    s = np.linalg.svd(e, compute_uv=False)
    return bool(s[2] / s[0] <= tol and (s[0] - s[1]) / s[0] <= tol)


def _triangulate_depths(
    r: np.ndarray, t: np.ndarray, y1: np.ndarray, y2: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Depths of midpoint-triangulated points in both camera frames.

    y1, y2 are (n, 3) normalized homogeneous rays; camera 1 is [I | 0],
    camera 2 is [R | t].
    """
    n = y1.shape[0]
    z1 = np.empty(n)
    z2 = np.empty(n)
    for i in range(n):
        # DLT triangulation on normalized cameras.
        p1 = np.hstack([np.eye(3), np.zeros((3, 1))])
        p2 = np.hstack([r, t[:, None]])
        a = np.vstack(
            [
                y1[i, 0] * p1[2] - p1[0],
                y1[i, 1] * p1[2] - p1[1],
                y2[i, 0] * p2[2] - p2[0],
                y2[i, 1] * p2[2] - p2[1],
            ]
        )
        _, _, vt = np.linalg.svd(a)
        xh = vt[-1]
        if abs(xh[3]) < 1e-15:
            z1[i] = z2[i] = -1.0
            continue
        x = xh[:3] / xh[3]
        z1[i] = x[2]
        z2[i] = (r @ x + t)[2]
    return z1, z2


def decompose_pose(
    f: FundamentalMatrix,
    k1: Intrinsics,
    k2: Intrinsics,
    correspondences: np.ndarray,
) -> RelativePose:
    """Recover (R, t-direction) from F and intrinsics via cheirality voting.

    correspondences is an (n, 4) array of pixel pairs (x1, y1, x2, y2).
    Among the four essential-matrix decompositions, returns the candidate
    with the most points in front of both cameras; ties break by
    enumeration order (R_a/+t, R_a/-t, R_b/+t, R_b/-t).
    """
    pts = np.asarray(correspondences, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 4 or pts.shape[0] < 1:
        raise ValueError("need an (n, 4) array with n >= 1 correspondences")

    # E with y2^T E y1 = 0 for normalized coordinates y = K^-1 x.
    e = k2.k().T @ f.m @ k1.k()
    u, _, vt = np.linalg.svd(e)
    if np.linalg.det(u) < 0:
        u = -u
    if np.linalg.det(vt) < 0:
        vt = -vt
    w = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    ra = u @ w @ vt
    rb = u @ w.T @ vt
    t = u[:, 2]

    ones = np.ones((pts.shape[0], 1))
    y1 = (np.linalg.inv(k1.k()) @ np.hstack([pts[:, 0:2], ones]).T).T
    y2 = (np.linalg.inv(k2.k()) @ np.hstack([pts[:, 2:4], ones]).T).T

    best = None
    best_votes = -1
    for r, tc in ((ra, t), (ra, -t), (rb, t), (rb, -t)):
        z1, z2 = _triangulate_depths(r, tc, y1, y2)
        votes = int(np.sum((z1 > 0) & (z2 > 0)))
        if votes > best_votes:
            best_votes = votes
            best = (r, tc)
    if best_votes == 0:
        raise CheiralityAmbiguous("no point triangulates in front of both cameras")
    r, tc = best
    return RelativePose(rotation=r, translation=tc / np.linalg.norm(tc))
