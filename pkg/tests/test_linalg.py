import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mahaclass.errors import DimensionMismatch, NotPositiveDefinite, TooFewSamples
from mahaclass.linalg import (
    SlidingWindow,
    append_point,
    cholesky,
    fit_gaussian,
    spd_solve,
    window_push,
)


class TestCholesky:
    def test_identity(self):
        np.testing.assert_allclose(cholesky(np.eye(3)), np.eye(3))

    def test_reconstructs_input(self):
        m = np.array([[4.0, 2.0], [2.0, 3.0]])
        l = cholesky(m)
        np.testing.assert_allclose(l, [[2.0, 0.0], [1.0, np.sqrt(2.0)]])
        np.testing.assert_allclose(l @ l.T, m, rtol=1e-12)

    def test_indefinite_raises(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))


class TestFitGaussian:
    def test_one_dim(self):
        m = fit_gaussian([[0.0], [2.0]], ridge=0.0)
        assert m.mean[0] == 1.0
        assert m.cov[0, 0] == 2.0

    def test_zero_scatter_needs_ridge(self):
        m = fit_gaussian([[3.0], [3.0]], ridge=1e-6)
        assert m.mean[0] == 3.0
        assert m.cov[0, 0] == 0.0
        np.testing.assert_allclose(m.chol[0, 0], np.sqrt(1e-6))

    def test_hand_expansion_2d(self):
        m = fit_gaussian([[0, 0], [1, 0], [0, 1]], ridge=0.0)
        np.testing.assert_allclose(m.mean, [1 / 3, 1 / 3])
        np.testing.assert_allclose(m.cov, [[1 / 3, -1 / 6], [-1 / 6, 1 / 3]], rtol=1e-12)

    def test_too_few(self):
        with pytest.raises(TooFewSamples):
            fit_gaussian([[1.0, 2.0]])

    def test_chol_reconstructs(self):
        rng = np.random.default_rng(0)
        pts = rng.normal(size=(20, 4))
        m = fit_gaussian(pts, ridge=1e-6)
        target = m.cov + 1e-6 * np.eye(4)
        err = np.linalg.norm(m.chol @ m.chol.T - target) / np.linalg.norm(target)
        assert err < 1e-10


class TestSpdSolve:
    def test_identity(self):
        m = fit_gaussian(np.vstack([np.eye(3), -np.eye(3)]) * np.sqrt(5 / 2), ridge=0.0)
        np.testing.assert_allclose(m.cov, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(spd_solve(m, np.array([1.0, 2.0, 3.0])),
                                   [1.0, 2.0, 3.0], rtol=1e-10)

    def test_scalar(self):
        m = fit_gaussian([[0.0], [4.0]], ridge=0.0)  # cov [[8]]
        np.testing.assert_allclose(spd_solve(m, np.array([2.0])), [0.25])

    def test_residual(self):
        rng = np.random.default_rng(1)
        pts = rng.normal(size=(50, 5))
        m = fit_gaussian(pts, ridge=1e-6)
        v = rng.normal(size=5)
        w = spd_solve(m, v)
        resid = np.linalg.norm((m.cov + 1e-6 * np.eye(5)) @ w - v)
        assert resid <= 1e-9 * np.linalg.norm(v)

    def test_dimension_mismatch(self):
        m = fit_gaussian([[0.0, 0.0], [1.0, 1.0]])
        with pytest.raises(DimensionMismatch):
            spd_solve(m, np.zeros(3))


class TestAppendPoint:
    def test_append_mean_shrinks_cov(self):
        m = fit_gaussian([[0.0], [2.0]], ridge=0.0)
        m2 = append_point(m, m.mean)
        assert m2.mean[0] == m.mean[0]
        np.testing.assert_allclose(m2.cov[0, 0], m.cov[0, 0] * (m.n - 1) / m.n)

    def test_hand_expansion(self):
        m = fit_gaussian([[0.0], [2.0]], ridge=0.0)
        m2 = append_point(m, np.array([4.0]))
        assert m2.mean[0] == 2.0
        assert m2.cov[0, 0] == 4.0
        assert m2.n == 3

    def test_matches_refit(self):
        rng = np.random.default_rng(2)
        pts = rng.normal(size=(5, 3))
        x = rng.normal(size=3)
        inc = append_point(fit_gaussian(pts, ridge=1e-6), x)
        ref = fit_gaussian(np.vstack([pts, x]), ridge=1e-6)
        np.testing.assert_allclose(inc.mean, ref.mean, rtol=1e-10)
        np.testing.assert_allclose(inc.cov, ref.cov, rtol=1e-10, atol=1e-14)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 100), st.integers(1, 16), st.integers(0, 2**31))
    def test_matches_refit_property(self, n, d, seed):
        rng = np.random.default_rng(seed)
        pts = rng.normal(size=(n, d))
        x = rng.normal(size=d)
        inc = append_point(fit_gaussian(pts, ridge=1e-6), x)
        ref = fit_gaussian(np.vstack([pts, x]), ridge=1e-6)
        np.testing.assert_allclose(inc.mean, ref.mean, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(inc.cov, ref.cov, rtol=1e-10, atol=1e-12)


class TestSlidingWindow:
    def test_under_capacity(self):
        rng = np.random.default_rng(3)
        w = SlidingWindow(capacity=10, dim=2, update_frequency=4)
        a, b = rng.normal(size=(4, 2)), rng.normal(size=(4, 2))
        w.push(a)
        w.push(b)
        assert len(w) == 8
        ref = fit_gaussian(np.vstack([a, b]), ridge=1e-6)
        np.testing.assert_allclose(w.model.mean, ref.mean)
        np.testing.assert_allclose(w.model.cov, ref.cov)

    def test_eviction(self):
        rng = np.random.default_rng(4)
        batches = [rng.normal(size=(4, 2)) for _ in range(3)]
        w = SlidingWindow(capacity=8, dim=2, update_frequency=4)
        for b in batches:
            window_push(w, b)
        ref = fit_gaussian(np.vstack(batches[-2:]), ridge=1e-6)
        np.testing.assert_allclose(w.model.mean, ref.mean)
        np.testing.assert_allclose(w.model.cov, ref.cov)

    def test_empty_batch_noop(self):
        w = SlidingWindow(capacity=8, dim=2, update_frequency=1)
        w.push(np.random.default_rng(5).normal(size=(4, 2)))
        model = w.model
        w.push(np.empty((0, 2)))
        assert w.model is model

    def test_wrong_dimension(self):
        w = SlidingWindow(capacity=8, dim=2)
        with pytest.raises(DimensionMismatch):
            w.push(np.zeros((3, 4)))

    def test_refresh_frequency(self):
        w = SlidingWindow(capacity=100, dim=1, update_frequency=4)
        w.push([[1.0], [2.0]])
        assert w.model is None  # only 2 pushed, refresh at 4
        w.push([[3.0], [4.0]])
        assert w.model is not None
