"""Closed-form focal-length extraction from a fundamental matrix.

Implements the polynomial-ratio form of the Bougnoux decomposition, the
sign-only real-focal check (RFC) built on the same polynomials, and the
equal-focal closed form obtained from the Kruppa residuals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .epipolar import FundamentalMatrix, Intrinsics, kruppa_residuals, normalize_f
from .exceptions import DegenerateFormula, NoRealFocal

DEGENERACY_TOL = 1e-15


@dataclass(frozen=True)
class FocalSquaredRatio:
    """A squared focal length as an undivided polynomial ratio."""

    numerator: float
    denominator: float

    @property
    def value(self) -> float:
        return self.numerator / self.denominator

    @property
    def positive(self) -> bool:
        return self.numerator * self.denominator > 0.0


def translate_f_to_origin(
    f: FundamentalMatrix,
    c1: tuple[float, float],
    c2: tuple[float, float],
) -> FundamentalMatrix:
    """Shift both principal points to the image origin.

    Returns F' = T2^-T F T1^-1 (re-canonicalized) where T_i translates
    c_i to (0, 0); correspondences with the principal points subtracted
    satisfy x2'^T F' x1' = 0.
    """

    def t_inv(c):
        return np.array([[1.0, 0.0, c[0]], [0.0, 1.0, c[1]], [0.0, 0.0, 1.0]])

    raw = t_inv(c2).T @ f.m @ t_inv(c1)
    return normalize_f(raw)


def _bougnoux_ratio(m: np.ndarray) -> FocalSquaredRatio:
    """Polynomial ratio for the squared focal of camera 1 (origin pp)."""
    f11, f12, f13 = m[0]
    f21, f22, f23 = m[1]
    f31, f32, f33 = m[2]
    num_terms = np.array(
        [
            f12 * f13 * f33,
            -(f13**2) * f32,
            f22 * f23 * f33,
            -(f23**2) * f32,
        ]
    )
    den_terms = np.array(
        [
            f11 * f12 * f31 * f33,
            -f11 * f13 * f31 * f32,
            f12**2 * f32 * f33,
            -f12 * f13 * f32**2,
            f21 * f22 * f31 * f33,
            -f21 * f23 * f31 * f32,
            f22**2 * f32 * f33,
            -f22 * f23 * f32**2,
        ]
    )
    num = -f33 * float(np.sum(num_terms))
    den = float(np.sum(den_terms))
    # The denominator is a degree-4 form in the entries of m, so its
    # natural magnitude is ||m||^4; near coplanar principal axes every
    # monomial vanishes and the ratio degrades to 0/0.
    norm4 = float(np.linalg.norm(m)) ** 4
    if abs(den) <= DEGENERACY_TOL * norm4:
        raise DegenerateFormula(
            "squared-focal denominator vanishes (coplanar principal axes)"
        )
    return FocalSquaredRatio(numerator=num, denominator=den)


def bougnoux(f: FundamentalMatrix) -> tuple[FocalSquaredRatio, FocalSquaredRatio]:
    """Squared focal lengths of both cameras as polynomial ratios.

    F must already be translated so both principal points are at the
    origin. No square roots are taken; the caller decides how to handle
    non-positive values. The second camera uses the transposed matrix.
    """
    return _bougnoux_ratio(f.m), _bougnoux_ratio(f.m.T)


def _sign_product(m: np.ndarray) -> float:
    """sign(numerator) * sign(denominator) of the squared-focal ratio."""
    f11, f12, f13 = m[0]
    f21, f22, f23 = m[1]
    f31, f32, f33 = m[2]
    num = -f33 * (
        f12 * f13 * f33 - f13**2 * f32 + f22 * f23 * f33 - f23**2 * f32
    )
    den = (
        f11 * f12 * f31 * f33
        - f11 * f13 * f31 * f32
        + f12**2 * f32 * f33
        - f12 * f13 * f32**2
        + f21 * f22 * f31 * f33
        - f21 * f23 * f31 * f32
        + f22**2 * f32 * f33
        - f22 * f23 * f32**2
    )
    return np.sign(num) * np.sign(den)


def rfc_check(f: FundamentalMatrix) -> bool:
    """Sign-only real-focal check: both squared focals strictly positive.

    Uses only the polynomial evaluations (no division, no SVD). A zero
    numerator or denominator sits on the singularity boundary and is
    treated as a reject.
    """
    return bool(_sign_product(f.m) > 0.0 and _sign_product(f.m.T) > 0.0)


def _kruppa_quadratics(f: FundamentalMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of the Kruppa residuals in x = f^2 for equal focals.

    With w1 = w2 = diag(x, x, 1) each residual is a quadratic in x;
    returns (kappa1, kappa2) as [c0, c1, c2] coefficient arrays
    (kappa = c0 + c1 x + c2 x^2).
    """
    svd = f.svd
    v1, v2 = svd.v[:, 0], svd.v[:, 1]
    u1, u2 = svd.u[:, 0], svd.u[:, 1]
    s1, s2 = svd.sigma1, svd.sigma2

    def lin(a, b):
        # a^T diag(x, x, 1) b = (a0 b0 + a1 b1) x + a2 b2
        return np.array([a[2] * b[2], a[0] * b[0] + a[1] * b[1]])

    def quad(p, q, s):
        # s * (p0 + p1 x)(q0 + q1 x)
        return s * np.array([p[0] * q[0], p[0] * q[1] + p[1] * q[0], p[1] * q[1]])

    k1 = quad(lin(v1, v1), lin(u1, u2), s1) + quad(lin(v1, v2), lin(u2, u2), s2)
    k2 = quad(lin(v1, v2), lin(u1, u1), s1) + quad(lin(v2, v2), lin(u1, u2), s2)
    return k1, k2


def _kruppa_outer_quadratic(f: FundamentalMatrix) -> np.ndarray:
    """Coefficients in x = f^2 of the outer Kruppa term equality.

    kappa3 = s1^2 (v1' w v1)(u1' w u1) - s2^2 (v2' w v2)(u2' w u2) with
    w = diag(x, x, 1). Unlike the two cross-term residuals, kappa3 does
    not vanish identically at w = I, so its roots exclude the spurious
    x = 1 solution the cross terms always admit.
    """
    svd = f.svd
    v1, v2 = svd.v[:, 0], svd.v[:, 1]
    u1, u2 = svd.u[:, 0], svd.u[:, 1]
    s1, s2 = svd.sigma1, svd.sigma2

    def lin(a, b):
        return np.array([a[2] * b[2], a[0] * b[0] + a[1] * b[1]])

    def quad(p, q, s):
        return s * np.array([p[0] * q[0], p[0] * q[1] + p[1] * q[0], p[1] * q[1]])

    return quad(lin(v1, v1), lin(u1, u1), s1**2) - quad(
        lin(v2, v2), lin(u2, u2), s2**2
    )


def sturm_equal_focal(f: FundamentalMatrix) -> float:
    """Closed-form shared focal length from F with origin principal points.

    Substituting w1 = w2 = diag(f^2, f^2, 1) turns each Kruppa residual
    into a quadratic in x = f^2. Candidate roots come from the outer-term
    quadratic (which does not admit the spurious x = 1 root of the cross
    terms); among its real positive roots the one minimizing the combined
    normalized cross-term residual is returned as sqrt(x).
    """
    k1, k2 = _kruppa_quadratics(f)
    k3 = _kruppa_outer_quadratic(f)
    if abs(k3[2]) <= 1e-15 * np.max(np.abs(k3)):
        raise NoRealFocal("outer Kruppa quadratic is degenerate")

    roots = np.roots(k3[::-1])
    real_pos = [
        float(r.real)
        for r in np.atleast_1d(roots)
        if abs(r.imag) <= 1e-8 * (1.0 + abs(r.real)) and r.real > 0.0
    ]
    if not real_pos:
        raise NoRealFocal("no real positive squared focal")

    def cross_residual(x: float) -> float:
        total = 0.0
        for q in (k1, k2):
            val = q[0] + q[1] * x + q[2] * x * x
            scale = abs(q[0]) + abs(q[1] * x) + abs(q[2] * x * x)
            total += abs(val) / max(scale, 1e-300)
        return total

    best = min(real_pos, key=cross_residual)
    return float(np.sqrt(best))


def equal_focal_residual_scale(f: FundamentalMatrix, focal: float) -> float:
    """Sum of normalized Kruppa residual magnitudes at a shared focal."""
    k = Intrinsics(focal, (0.0, 0.0))
    r1, r2 = kruppa_residuals(f, k, k)
    from .epipolar import kruppa_term_scale

    return (abs(r1) + abs(r2)) / kruppa_term_scale(f, k, k)
