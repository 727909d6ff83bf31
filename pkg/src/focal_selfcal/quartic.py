"""Bivariate degree-4 polynomial systems and their real roots.

The per-iteration constraint system of the prior solver consists of two
total-degree-4 polynomials in the Lagrange multipliers (l1, l2). Such a
system has up to 16 isolated solutions. Real roots are extracted by
Sylvester-resultant elimination: the resultant (a univariate polynomial of
degree <= 16) is interpolated from determinant evaluations on a complex
circle, its real roots come from the balanced companion matrix inside
numpy's root finder, and each candidate is completed by back-substitution
and polished with damped Newton steps on the 2x2 system.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .exceptions import NoRealSolution, SolverFailure

RESIDUAL_GATE = 1e-8
# Multiple roots of the resultant surface as complex pairs with imaginary
# parts up to ~sqrt(machine epsilon); accept generously and let the
# post-polish residual gate reject false positives.
REAL_EIG_TOL = 1e-4
COEFF_TRIM = 1e-12


@dataclass(frozen=True)
class BivariateQuartic:
    """Polynomial sum_{a+b<=4} coeffs[a, b] * l1^a * l2^b.

    coeffs is a (5, 5) array; entries with a + b > 4 must be zero.
    """

    coeffs: np.ndarray = field()

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (5, 5):
            raise ValueError("coefficient array must be 5x5")
        for a in range(5):
            for b in range(5):
                if a + b > 4 and c[a, b] != 0.0:
                    raise ValueError("total degree must be <= 4")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __call__(self, l1, l2):
        return npoly.polyval2d(l1, l2, self.coeffs)

    def grad(self, l1: float, l2: float) -> tuple[float, float]:
        d1 = npoly.polyval2d(l1, l2, npoly.polyder(self.coeffs, axis=0))
        d2 = npoly.polyval2d(l1, l2, npoly.polyder(self.coeffs, axis=1))
        return float(d1), float(d2)

    def max_abs_coeff(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def scaled(self) -> "BivariateQuartic":
        m = self.max_abs_coeff()
        if m == 0.0:
            raise ValueError("polynomial is identically zero")
        return BivariateQuartic(self.coeffs / m)


def _effective_degree(cols: np.ndarray) -> int:
    """Highest index whose coefficient column is not numerically zero."""
    mags = np.max(np.abs(cols), axis=0)
    top = np.max(mags)
    if top == 0.0:
        return -1
    nz = np.nonzero(mags > COEFF_TRIM * top)[0]
    return int(nz[-1]) if nz.size else -1


def _sylvester_det(p_cols: np.ndarray, q_cols: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Determinant of the Sylvester matrix in l2 at each sample of l1.

    p_cols/q_cols are (5, m+1)/(5, n+1) arrays: column d holds the l1
    coefficient vector of the l2^d term.
    """
    m = p_cols.shape[1] - 1
    n = q_cols.shape[1] - 1
    size = m + n
    # Evaluate every coefficient polynomial at all sample points.
    powers = xs[:, None] ** np.arange(5)[None, :]  # (k, 5)
    p_vals = powers @ p_cols  # (k, m+1)
    q_vals = powers @ q_cols  # (k, n+1)
    k = xs.shape[0]
    mats = np.zeros((k, size, size), dtype=xs.dtype)
    for r in range(n):
        mats[:, r, r : r + m + 1] = p_vals[:, ::-1]
    for r in range(m):
        mats[:, n + r, r : r + n + 1] = q_vals[:, ::-1]
    return np.linalg.det(mats)


def _real_roots(coeffs_low_to_high: np.ndarray) -> np.ndarray:
    """Real roots of a univariate polynomial given ascending coefficients."""
    c = np.asarray(coeffs_low_to_high, dtype=float)
    top = np.max(np.abs(c))
    if top == 0.0:
        return np.array([])
    c = c / top
    nz = np.nonzero(np.abs(c) > COEFF_TRIM)[0]
    if nz.size == 0 or nz[-1] == 0:
        return np.array([])
    c = c[: nz[-1] + 1]
    roots = np.roots(c[::-1])
    keep = np.abs(roots.imag) <= REAL_EIG_TOL * (1.0 + np.abs(roots.real))
    return np.unique(roots[keep].real)


def _newton_polish(
    p: BivariateQuartic, q: BivariateQuartic, l1: float, l2: float, steps: int = 4
) -> tuple[float, float]:
    """Damped Newton iterations on the 2x2 system (p, q)."""
    for _ in range(steps):
        r = np.array([p(l1, l2), q(l1, l2)])
        jac = np.array([p.grad(l1, l2), q.grad(l1, l2)])
        try:
            delta = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            return l1, l2
        base = np.sum(np.abs(r))
        alpha = 1.0
        for _ in range(4):
            cand = (l1 + alpha * delta[0], l2 + alpha * delta[1])
            if abs(p(*cand)) + abs(q(*cand)) < base:
                l1, l2 = cand
                break
            alpha *= 0.5
    return l1, l2


def _resultant_coeffs(
    p: BivariateQuartic, q: BivariateQuartic, axis: int
) -> np.ndarray | None:
    """Ascending coefficients of the resultant eliminating the other axis.

    axis = 0 keeps l1 (eliminates l2), axis = 1 keeps l2. Returns None when
    either polynomial has no dependence on the eliminated variable.
    """
    pc = p.coeffs if axis == 0 else p.coeffs.T
    qc = q.coeffs if axis == 0 else q.coeffs.T
    dm = _effective_degree(pc)
    dn = _effective_degree(qc)
    # dm/dn == 0 is fine (Res(p, q) = p^dn), but the axis carries no
    # information when neither polynomial depends on the eliminated variable.
    if dm < 0 or dn < 0 or dm + dn < 1:
        return None
    pc = pc[:, : dm + 1]
    qc = qc[:, : dn + 1]
    n_samples = 32  # resultant degree is at most 16
    xs = np.exp(2j * np.pi * np.arange(n_samples) / n_samples)
    dets = _sylvester_det(pc.astype(complex), qc.astype(complex), xs)
    coeffs = (np.fft.fft(dets) / n_samples)[:17]
    return coeffs.real


def _variable_scale(p: BivariateQuartic, q: BivariateQuartic) -> float:
    """Per-instance scale of the multiplier variables.

    The calibration systems have coefficient magnitudes growing steeply
    with total degree (the multipliers' natural scale is far from 1).
    Substituting l -> s * l' with s fit to the magnitude-vs-degree slope
    balances the coefficients and keeps the resultant interpolation
    well conditioned.
    """
    mags = np.zeros(5)
    for c in (p.coeffs, q.coeffs):
        for a in range(5):
            for b in range(5 - a):
                d = a + b
                mags[d] = max(mags[d], abs(c[a, b]))
    degs = np.nonzero(mags > 0.0)[0]
    if degs.size < 2:
        return 1.0
    # Least-squares slope of log-magnitude vs total degree.
    x = degs.astype(float)
    y = np.log(mags[degs])
    slope = np.polyfit(x, y, 1)[0]
    s = float(np.exp(-slope))
    return min(max(s, 1e-30), 1e30)


def _rescale_vars(p: BivariateQuartic, s: float) -> BivariateQuartic:
    powers = s ** (np.arange(5)[:, None] + np.arange(5)[None, :])
    return BivariateQuartic(p.coeffs * powers)


def solve_quartic_system(
    kappa1: BivariateQuartic, kappa2: BivariateQuartic
) -> list[tuple[float, float]]:
    """All real common roots of two bivariate quartics.

    Both polynomials are scaled to unit max coefficient; a root is accepted
    when the scaled residual |k1| + |k2| <= 1e-8. At most 16 pairs are
    returned (best residuals first when over-complete candidates collapse).
    """
    p = kappa1.scaled()
    q = kappa2.scaled()
    var_scale = _variable_scale(p, q)
    ps = _rescale_vars(p, var_scale).scaled()
    qs = _rescale_vars(q, var_scale).scaled()

    candidates: list[tuple[float, float]] = []
    used_any_axis = False
    for axis in (0, 1):
        res = _resultant_coeffs(ps, qs, axis)
        if res is None:
            continue
        used_any_axis = True
        # A legitimate resultant can be uniformly tiny even for unit-max
        # inputs, so normalize it before root finding and let the residual
        # gate reject garbage roots from a truly vanishing resultant.
        top = np.max(np.abs(res))
        if top == 0.0:
            continue
        res = res / top
        for a in _real_roots(res):
            # Univariate slices along the eliminated variable.
            if axis == 0:
                s1 = npoly.polyval(a, ps.coeffs)  # coefficients in l2
                s2 = npoly.polyval(a, qs.coeffs)
            else:
                s1 = npoly.polyval(a, ps.coeffs.T)
                s2 = npoly.polyval(a, qs.coeffs.T)
            for b in np.concatenate([_real_roots(s1), _real_roots(s2)]):
                pair = (a, b) if axis == 0 else (b, a)
                candidates.append(pair)
    if not used_any_axis:
        raise SolverFailure(
            "system has no bivariate structure to eliminate (degenerate input)"
        )
    # The origin is always cheap to test and covers the already-consistent
    # case where both residuals vanish at the current point.
    candidates.append((0.0, 0.0))

    # Polishing, the residual gate and deduplication all happen in the
    # variable-scaled units where coefficients are balanced; roots are
    # mapped back to original multiplier units on return.
    roots: list[tuple[float, float]] = []
    residuals: list[float] = []
    for l1, l2 in candidates:
        l1, l2 = _newton_polish(ps, qs, float(l1), float(l2))
        resid = abs(ps(l1, l2)) + abs(qs(l1, l2))
        if resid > RESIDUAL_GATE:
            continue
        duplicate = False
        for idx, (r1, r2) in enumerate(roots):
            tol = 1e-7 * (1.0 + max(abs(r1), abs(r2)))
            if abs(r1 - l1) <= tol and abs(r2 - l2) <= tol:
                if resid < residuals[idx]:
                    roots[idx] = (l1, l2)
                    residuals[idx] = resid
                duplicate = True
                break
        if not duplicate:
            roots.append((l1, l2))
            residuals.append(resid)

    if not roots:
        raise NoRealSolution("no real common root passed the residual gate")
    if len(roots) > 16:
        order = np.argsort(residuals)[:16]
        roots = [roots[i] for i in order]
    return [(r1 * var_scale, r2 * var_scale) for r1, r2 in roots]


def select_multipliers(roots: list[tuple[float, float]]) -> tuple[float, float]:
    """Root with minimal |l1| + |l2|; ties break lexicographically."""
    if not roots:
        raise ValueError("root list must be nonempty")
    return min(roots, key=lambda r: (abs(r[0]) + abs(r[1]), r[0], r[1]))
