"""Prior-weighted, Kruppa-constrained focal length and principal point solver.

Starting from the priors, each iteration freezes the Kruppa derivatives at
the current estimate, expresses the parameter updates as linear functions
of two Lagrange multipliers, substitutes them into the Kruppa residuals
(yielding two bivariate quartics), solves that system, and picks the root
with minimal |l1| + |l2|. Every iterate therefore satisfies the Kruppa
constraints by construction.

Pixel quantities are internally rescaled: F is conjugated by
diag(s, s, 1) and all priors divided by s (the largest prior magnitude),
which maps the constraint manifold exactly and keeps the degree-4
coefficients well conditioned. Disable with normalize_units=False to work
in raw pixel units.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .epipolar import (
    FundamentalMatrix,
    Intrinsics,
    SvdF,
    kruppa_derivatives,
    normalize_f,
)
from .exceptions import InvalidPrior, NoRealSolution, SolverFailure
from .quartic import BivariateQuartic, select_multipliers, solve_quartic_system

DEFAULT_EPS = 1e-6
DEFAULT_MAXITER = 50
DEFAULT_W_F = 5e-4
DEFAULT_W_C = 1.0


@dataclass(frozen=True)
class PriorConfig:
    """Focal and principal-point priors with their cost weights."""

    f_prior: tuple[float, float]
    c_prior: tuple[tuple[float, float], tuple[float, float]]
    w_f: tuple[float, float] = (DEFAULT_W_F, DEFAULT_W_F)
    w_c: tuple[float, float] = (DEFAULT_W_C, DEFAULT_W_C)

    def __post_init__(self):
        if min(self.f_prior) <= 0:
            raise InvalidPrior("focal priors must be positive")
        if min(self.w_f) <= 0 or min(self.w_c) <= 0:
            raise InvalidPrior("weights must be positive")

    @classmethod
    def from_image_sizes(
        cls,
        size1: tuple[int, int],
        size2: tuple[int, int] | None = None,
        w_f: float = DEFAULT_W_F,
        w_c: float = DEFAULT_W_C,
    ) -> "PriorConfig":
        """Default priors: 1.2 x the maximum image dimension, image centers."""
        size2 = size2 or size1
        return cls(
            f_prior=(1.2 * max(size1), 1.2 * max(size2)),
            c_prior=(
                (size1[0] / 2.0, size1[1] / 2.0),
                (size2[0] / 2.0, size2[1] / 2.0),
            ),
            w_f=(w_f, w_f),
            w_c=(w_c, w_c),
        )


@dataclass(frozen=True)
class IterationTrace:
    """Per-iteration record: cost, multipliers, root list and iterate."""

    cost: float
    multipliers: tuple[float, float]
    roots: list[tuple[float, float]]
    params: tuple[float, ...]


@dataclass(frozen=True)
class CalibrationResult:
    intrinsics: tuple[Intrinsics, Intrinsics]
    iterations: int
    final_cost: float
    converged: bool
    history: list[IterationTrace] = field(default_factory=list)


@dataclass(frozen=True)
class UpdateMap:
    """Linear map (l1, l2) -> parameter update, anchored at the priors.

    Parameter order matches `columns`; update_p = l1 * l[0, p] + l2 * l[1, p]
    and the new parameter value is prior_p + update_p.
    """

    l: np.ndarray  # (2, n_params)
    priors: np.ndarray  # (n_params,)
    weights: np.ndarray  # (n_params,)
    columns: tuple[str, ...]

    def deltas(self, l1: float, l2: float) -> np.ndarray:
        return l1 * self.l[0] + l2 * self.l[1]

    def apply(self, l1: float, l2: float) -> np.ndarray:
        return self.priors + self.deltas(l1, l2)

    def cost(self, l1: float, l2: float) -> float:
        d = self.deltas(l1, l2)
        return float(np.sum(self.weights * d * d))


def _mul2d(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1))
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            if a[i, j] != 0.0:
                out[i : i + b.shape[0], j : j + b.shape[1]] += a[i, j] * b
    return out


def _linear(c0: float, a1: float, a2: float) -> np.ndarray:
    out = np.zeros((2, 2))
    out[0, 0] = c0
    out[1, 0] = a1
    out[0, 1] = a2
    return out


def _omega_polys(f_lin, u_lin, v_lin) -> dict[tuple[int, int], np.ndarray]:
    """Entries of K K^T as (quadratic) polynomials in the multipliers."""
    one = np.array([[1.0]])
    w = {
        (0, 0): _mul2d(f_lin, f_lin) + _mul2d(u_lin, u_lin),
        (0, 1): _mul2d(u_lin, v_lin),
        (0, 2): np.pad(u_lin, ((0, 1), (0, 1))),
        (1, 1): _mul2d(f_lin, f_lin) + _mul2d(v_lin, v_lin),
        (1, 2): np.pad(v_lin, ((0, 1), (0, 1))),
        (2, 2): np.pad(one, ((0, 2), (0, 2))),
    }
    for (r, s) in [(1, 0), (2, 0), (2, 1)]:
        w[(r, s)] = w[(s, r)]
    return w


def _quad_form(a: np.ndarray, b: np.ndarray, w) -> np.ndarray:
    out = np.zeros((3, 3))
    for r in range(3):
        for s in range(3):
            c = a[r] * b[s]
            if c != 0.0:
                out += c * w[(r, s)]
    return out


def _pad5(a: np.ndarray) -> np.ndarray:
    out = np.zeros((5, 5))
    out[: a.shape[0], : a.shape[1]] = a[:5, :5] if a.shape[0] > 5 else a
    return out


def _kruppa_quartics(svd: SvdF, w1, w2) -> tuple[BivariateQuartic, BivariateQuartic]:
    v1, v2 = svd.v[:, 0], svd.v[:, 1]
    u1, u2 = svd.u[:, 0], svd.u[:, 1]
    s1, s2 = svd.sigma1, svd.sigma2
    k1 = s1 * _mul2d(_quad_form(v1, v1, w1), _quad_form(u1, u2, w2)) + s2 * _mul2d(
        _quad_form(v1, v2, w1), _quad_form(u2, u2, w2)
    )
    k2 = s1 * _mul2d(_quad_form(v1, v2, w1), _quad_form(u1, u1, w2)) + s2 * _mul2d(
        _quad_form(v2, v2, w1), _quad_form(u1, u2, w2)
    )
    return BivariateQuartic(_pad5(k1)), BivariateQuartic(_pad5(k2))


_FULL_COLUMNS = ("f1", "u1", "v1", "f2", "u2", "v2")
_EQUAL_COLUMNS = ("f", "u1", "v1", "u2", "v2")


def _state_intrinsics(params: np.ndarray, equal_focal: bool) -> tuple[Intrinsics, Intrinsics]:
    if equal_focal:
        f, u1, v1, u2, v2 = params
        return Intrinsics(float(f), (float(u1), float(v1))), Intrinsics(
            float(f), (float(u2), float(v2))
        )
    f1, u1, v1, f2, u2, v2 = params
    return Intrinsics(float(f1), (float(u1), float(v1))), Intrinsics(
        float(f2), (float(u2), float(v2))
    )


def _build_system_params(
    svd: SvdF,
    params_prev: np.ndarray,
    priors_vec: np.ndarray,
    weights_vec: np.ndarray,
    equal_focal: bool,
) -> tuple[BivariateQuartic, BivariateQuartic, UpdateMap]:
    k1_prev, k2_prev = _state_intrinsics(params_prev, equal_focal)
    jac = kruppa_derivatives(svd, k1_prev, k2_prev)  # (2, 6): f1 u1 v1 f2 u2 v2
    if equal_focal:
        # Shared focal: its derivative is the sum of the per-camera partials.
        jac = np.column_stack(
            [jac[:, 0] + jac[:, 3], jac[:, 1], jac[:, 2], jac[:, 4], jac[:, 5]]
        )
        columns = _EQUAL_COLUMNS
    else:
        columns = _FULL_COLUMNS
    lmap = UpdateMap(
        l=jac / weights_vec[None, :],
        priors=priors_vec,
        weights=weights_vec,
        columns=columns,
    )

    def lin(p: int) -> np.ndarray:
        return _linear(priors_vec[p], lmap.l[0, p], lmap.l[1, p])

    if equal_focal:
        f_lin = lin(0)
        w1 = _omega_polys(f_lin, lin(1), lin(2))
        w2 = _omega_polys(f_lin, lin(3), lin(4))
    else:
        w1 = _omega_polys(lin(0), lin(1), lin(2))
        w2 = _omega_polys(lin(3), lin(4), lin(5))
    q1, q2 = _kruppa_quartics(svd, w1, w2)
    return q1, q2, lmap


def build_iteration_system(
    f: FundamentalMatrix | SvdF,
    s_prev: tuple[Intrinsics, Intrinsics],
    priors: PriorConfig,
) -> tuple[BivariateQuartic, BivariateQuartic, UpdateMap]:
    """Per-iteration constraint system in the two Lagrange multipliers.

    Updates are anchored at the priors: f_i = prior + (1/w)(l1 dk1 + l2 dk2)
    with the derivatives evaluated at s_prev. Substituting into the Kruppa
    residuals yields two total-degree-4 polynomials in (l1, l2).
    """
    svd = f.svd if isinstance(f, FundamentalMatrix) else f
    params_prev = np.array(
        [
            s_prev[0].f,
            s_prev[0].c[0],
            s_prev[0].c[1],
            s_prev[1].f,
            s_prev[1].c[0],
            s_prev[1].c[1],
        ]
    )
    priors_vec = np.array(
        [
            priors.f_prior[0],
            priors.c_prior[0][0],
            priors.c_prior[0][1],
            priors.f_prior[1],
            priors.c_prior[1][0],
            priors.c_prior[1][1],
        ]
    )
    weights_vec = np.array(
        [
            priors.w_f[0],
            priors.w_c[0],
            priors.w_c[0],
            priors.w_f[1],
            priors.w_c[1],
            priors.w_c[1],
        ]
    )
    return _build_system_params(svd, params_prev, priors_vec, weights_vec, False)


def _rescaled_f(f: FundamentalMatrix, scale: float) -> FundamentalMatrix:
    s = np.diag([scale, scale, 1.0])
    return normalize_f(s @ f.m @ s)


def _run_iterations(
    f: FundamentalMatrix,
    priors_vec: np.ndarray,
    weights_vec: np.ndarray,
    eps: float,
    maxiter: int,
    equal_focal: bool,
    keep_history: bool,
) -> tuple[np.ndarray, int, float, bool, list[IterationTrace]]:
    svd = f.svd
    params = priors_vec.copy()
    cost_prev: float | None = None
    history: list[IterationTrace] = []
    for k in range(1, maxiter + 1):
        q1, q2, lmap = _build_system_params(
            svd, params, priors_vec, weights_vec, equal_focal
        )
        try:
            roots = solve_quartic_system(q1, q2)
        except (NoRealSolution, SolverFailure):
            # Not-found branch: keep the previous iterate.
            return params, k - 1, cost_prev if cost_prev is not None else 0.0, False, history
        l1, l2 = select_multipliers(roots)
        params = lmap.apply(l1, l2)
        cost = lmap.cost(l1, l2)
        if keep_history:
            history.append(
                IterationTrace(
                    cost=cost,
                    multipliers=(l1, l2),
                    roots=roots,
                    params=tuple(float(p) for p in params),
                )
            )
        if cost_prev is not None:
            if cost == 0.0 and cost_prev == 0.0:
                return params, k, cost, True, history
            if cost > 0.0 and abs(cost - cost_prev) / cost < eps:
                return params, k, cost, True, history
        cost_prev = cost
    return params, maxiter, cost_prev if cost_prev is not None else 0.0, False, history


def _normalization_scale(priors_vec: np.ndarray) -> float:
    return float(max(np.max(np.abs(priors_vec)), 1.0))


def _calibrate_impl(
    f: FundamentalMatrix,
    priors: PriorConfig,
    eps: float,
    maxiter: int,
    equal_focal: bool,
    normalize_units: bool,
    keep_history: bool,
) -> CalibrationResult:
    if eps <= 0:
        raise ValueError("eps must be positive")
    if maxiter < 1:
        raise ValueError("maxiter must be >= 1")

    if equal_focal:
        priors_vec = np.array(
            [
                priors.f_prior[0],
                priors.c_prior[0][0],
                priors.c_prior[0][1],
                priors.c_prior[1][0],
                priors.c_prior[1][1],
            ]
        )
        weights_vec = np.array(
            [
                priors.w_f[0],
                priors.w_c[0],
                priors.w_c[0],
                priors.w_c[1],
                priors.w_c[1],
            ]
        )
    else:
        priors_vec = np.array(
            [
                priors.f_prior[0],
                priors.c_prior[0][0],
                priors.c_prior[0][1],
                priors.f_prior[1],
                priors.c_prior[1][0],
                priors.c_prior[1][1],
            ]
        )
        weights_vec = np.array(
            [
                priors.w_f[0],
                priors.w_c[0],
                priors.w_c[0],
                priors.w_f[1],
                priors.w_c[1],
                priors.w_c[1],
            ]
        )

    scale = _normalization_scale(priors_vec) if normalize_units else 1.0
    f_work = _rescaled_f(f, scale) if scale != 1.0 else f
    params, iterations, cost, converged, history = _run_iterations(
        f_work,
        priors_vec / scale,
        weights_vec,
        eps,
        maxiter,
        equal_focal,
        keep_history,
    )
    if scale != 1.0 and history:
        history = [
            replace(tr, params=tuple(p * scale for p in tr.params)) for tr in history
        ]
    k1, k2 = _state_intrinsics(params * scale, equal_focal)
    return CalibrationResult(
        intrinsics=(k1, k2),
        iterations=iterations,
        final_cost=cost,
        converged=converged,
        history=history,
    )


def calibrate(
    f: FundamentalMatrix,
    priors: PriorConfig,
    eps: float = DEFAULT_EPS,
    maxiter: int = DEFAULT_MAXITER,
    normalize_units: bool = True,
    keep_history: bool = False,
) -> CalibrationResult:
    """Estimate (f1, f2, c1, c2) from F under the given priors.

    Stops when the relative cost change of two consecutive iterations drops
    below eps, or after maxiter iterations (converged=False). If the
    multiplier system has no real solution mid-run, the previous iterate is
    returned with converged=False.
    """
    return _calibrate_impl(f, priors, eps, maxiter, False, normalize_units, keep_history)


def calibrate_equal_focal(
    f: FundamentalMatrix,
    priors: PriorConfig,
    eps: float = DEFAULT_EPS,
    maxiter: int = DEFAULT_MAXITER,
    normalize_units: bool = True,
    keep_history: bool = False,
) -> CalibrationResult:
    """Equal-focal variant: one shared f (prior and weight from camera 1)."""
    return _calibrate_impl(f, priors, eps, maxiter, True, normalize_units, keep_history)
