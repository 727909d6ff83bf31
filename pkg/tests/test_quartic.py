"""Tests for the bivariate quartic system solver against a dense-grid
plus Newton-refinement oracle."""

import numpy as np
import pytest

from focal_selfcal.exceptions import NoRealSolution
from focal_selfcal.quartic import (
    BivariateQuartic,
    select_multipliers,
    solve_quartic_system,
)


def oracle_roots(p: BivariateQuartic, q: BivariateQuartic, box=10.0, n=401):
    """Real common roots inside [-box, box]^2 via grid seeding + Newton.

    Seeds every grid point whose residual is a smallest-percentile value
    and runs vectorized Newton iterations on all seeds at once.
    """
    xs = np.linspace(-box, box, n)
    ps = p.scaled()
    qs = q.scaled()
    npoly = np.polynomial.polynomial
    dpx = npoly.polyder(ps.coeffs, axis=0)
    dpy = npoly.polyder(ps.coeffs, axis=1)
    dqx = npoly.polyder(qs.coeffs, axis=0)
    dqy = npoly.polyder(qs.coeffs, axis=1)
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    vals = np.abs(ps(gx, gy)) + np.abs(qs(gx, gy))
    order = np.argsort(vals.ravel())[:1600]
    x = gx.ravel()[order].copy()
    y = gy.ravel()[order].copy()
    for _ in range(60):
        a = npoly.polyval2d(x, y, dpx)
        b = npoly.polyval2d(x, y, dpy)
        c = npoly.polyval2d(x, y, dqx)
        d = npoly.polyval2d(x, y, dqy)
        r1 = ps(x, y)
        r2 = qs(x, y)
        det = a * d - b * c
        safe = np.abs(det) > 1e-300
        sx = np.where(safe, (d * r1 - b * r2) / np.where(safe, det, 1.0), 0.0)
        sy = np.where(safe, (-c * r1 + a * r2) / np.where(safe, det, 1.0), 0.0)
        x -= sx
        y -= sy
        if np.max(np.hypot(sx, sy)) < 1e-14:
            break
    resid = np.abs(ps(x, y)) + np.abs(qs(x, y))
    keep = (resid <= 1e-9) & (np.abs(x) <= box) & (np.abs(y) <= box)
    found: list[tuple[float, float]] = []
    for xi, yi in zip(x[keep], y[keep]):
        if not any(np.hypot(xi - a, yi - b) < 1e-5 for a, b in found):
            found.append((float(xi), float(yi)))
    return found


class TestHandCases:
    def test_factored_intersection(self):
        # p = (x - 1)(x - 2), q = (y - 3)(y + 3): roots {1,2} x {-3,3}.
        p = BivariateQuartic(
            _embed(np.polynomial.polynomial.polyfromroots([1.0, 2.0]), axis=0)
        )
        q = BivariateQuartic(
            _embed(np.polynomial.polynomial.polyfromroots([-3.0, 3.0]), axis=1)
        )
        roots = solve_quartic_system(p, q)
        expected = {(1.0, -3.0), (1.0, 3.0), (2.0, -3.0), (2.0, 3.0)}
        assert len(roots) == 4
        for r in roots:
            assert any(np.hypot(r[0] - a, r[1] - b) < 1e-8 for a, b in expected)

    def test_linear_system(self):
        # p = x, q = y: unique root at the origin.
        pc = np.zeros((5, 5))
        pc[1, 0] = 1.0
        qc = np.zeros((5, 5))
        qc[0, 1] = 1.0
        roots = solve_quartic_system(BivariateQuartic(pc), BivariateQuartic(qc))
        assert len(roots) == 1
        assert np.hypot(*roots[0]) < 1e-10

    def test_no_real_intersection(self):
        # p = x^2 + 1 has no real roots at all.
        pc = np.zeros((5, 5))
        pc[0, 0] = 1.0
        pc[2, 0] = 1.0
        qc = np.zeros((5, 5))
        qc[0, 1] = 1.0
        with pytest.raises(NoRealSolution):
            solve_quartic_system(BivariateQuartic(pc), BivariateQuartic(qc))


class TestOracleEquivalence:
    def test_random_quartic_pairs(self, rng):
        for _ in range(30):
            p = random_quartic(rng)
            q = random_quartic(rng)
            try:
                solver = solve_quartic_system(p, q)
            except NoRealSolution:
                solver = []
            oracle = oracle_roots(p, q)
            in_box = [r for r in solver if abs(r[0]) <= 10.0 and abs(r[1]) <= 10.0]
            assert len(solver) <= 16
            for a, b in oracle:
                assert any(
                    np.hypot(a - x, b - y) < 1e-6 for x, y in in_box
                ), f"oracle root ({a}, {b}) missed"
            for x, y in in_box:
                assert any(
                    np.hypot(a - x, b - y) < 1e-6 for a, b in oracle
                ), f"solver root ({x}, {y}) not confirmed"


class TestSelectMultipliers:
    def test_picks_minimal_magnitude(self):
        roots = [(3.0, 4.0), (0.1, -0.2), (-1.0, 0.0)]
        assert select_multipliers(roots) == (0.1, -0.2)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            select_multipliers([])


class TestBivariateQuartic:
    def test_degree_enforced(self):
        bad = np.zeros((6, 6))
        bad[5, 5] = 1.0
        with pytest.raises(ValueError):
            BivariateQuartic(bad)

    def test_eval_and_grad(self, rng):
        p = random_quartic(rng)
        x, y = 0.7, -1.3
        h = 1e-6
        gx = (p(x + h, y) - p(x - h, y)) / (2 * h)
        gy = (p(x, y + h) - p(x, y - h)) / (2 * h)
        g = p.grad(x, y)
        assert abs(g[0] - gx) < 1e-5 * (1.0 + abs(gx))
        assert abs(g[1] - gy) < 1e-5 * (1.0 + abs(gy))


def random_quartic(rng):
    coeffs = rng.normal(size=(5, 5))
    a, b = np.meshgrid(np.arange(5), np.arange(5), indexing="ij")
    coeffs[a + b > 4] = 0.0
    return BivariateQuartic(coeffs)


def _embed(univariate, axis):
    coeffs = np.zeros((5, 5))
    if axis == 0:
        coeffs[: len(univariate), 0] = univariate
    else:
        coeffs[0, : len(univariate)] = univariate
    return coeffs
