import numpy as np
import pytest

from conftest import make_model
from mahaclass.betadist import BetaParams, reg_inc_beta
from mahaclass.errors import (
    DegenerateDevSet,
    DimensionMismatch,
    InsufficientSamples,
    ShapeMismatch,
)
from mahaclass.linalg import fit_gaussian
from mahaclass.mahalanobis import (
    NON_TARGET,
    TARGET,
    DecisionThreshold,
    beta_decide,
    calibrate,
    decision_statistic,
    null_beta_params,
    sim_mah,
    sq_mahalanobis,
)


def naive_t(points: np.ndarray, x: np.ndarray) -> float:
    """Decision statistic by brute force: refit with the query included."""
    n = points.shape[0]
    everything = np.vstack([points, x])
    mean = everything.mean(axis=0)
    centered = everything - mean
    cov = centered.T @ centered / n  # n+1 samples, ddof 1
    delta = x - mean
    d2 = float(delta @ np.linalg.solve(cov, delta))
    return (n + 1) / n**2 * d2


class TestSqMahalanobis:
    def test_identity_cov_is_euclidean(self):
        m = make_model(np.zeros(3), np.eye(3), n=10)
        assert sq_mahalanobis(m, np.array([1.0, 2.0, 2.0])) == pytest.approx(9.0)

    def test_zero_at_mean(self):
        m = make_model([2.0, -1.0], [[3.0, 1.0], [1.0, 2.0]], n=10)
        assert sq_mahalanobis(m, np.array([2.0, -1.0])) == 0.0

    def test_diagonal_scaling(self):
        m = make_model([0.0, 0.0], np.diag([4.0, 0.25]), n=10)
        assert sq_mahalanobis(m, np.array([2.0, 1.0])) == pytest.approx(1.0 + 4.0)

    def test_affine_invariance(self):
        rng = np.random.default_rng(7)
        pts = rng.normal(size=(40, 3))
        x = rng.normal(size=3)
        a = rng.normal(size=(3, 3)) + 3 * np.eye(3)
        b = rng.normal(size=3)
        d2 = sq_mahalanobis(fit_gaussian(pts, ridge=0.0), x)
        d2_t = sq_mahalanobis(fit_gaussian(pts @ a.T + b, ridge=0.0), a @ x + b)
        assert d2_t == pytest.approx(d2, rel=1e-9)


class TestSimMah:
    def test_identical_points(self):
        m = make_model(np.zeros(2), np.eye(2), n=10)
        assert sim_mah(m, np.ones(2), np.ones(2)) == 1.0

    def test_unit_distance_per_dim(self):
        # q = d gives exp(-1) regardless of dimension
        for d in (1, 2, 5):
            m = make_model(np.zeros(d), np.eye(d), n=10)
            x = np.zeros(d)
            y = np.full(d, 1.0)
            assert sim_mah(m, x, y) == pytest.approx(np.exp(-1.0), rel=1e-12)

    def test_symmetry_and_range(self):
        rng = np.random.default_rng(8)
        m = fit_gaussian(rng.normal(size=(30, 4)), ridge=1e-6)
        x, y = rng.normal(size=4), rng.normal(size=4)
        assert sim_mah(m, x, y) == pytest.approx(sim_mah(m, y, x), rel=1e-12)
        assert 0.0 < sim_mah(m, x, y) <= 1.0

    def test_shape_mismatch(self):
        m = make_model(np.zeros(2), np.eye(2), n=10)
        with pytest.raises(DimensionMismatch):
            sim_mah(m, np.zeros(2), np.zeros(3))


class TestDecisionStatistic:
    def test_matches_brute_force(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            d = int(rng.integers(1, 6))
            n = int(rng.integers(d + 2, 60))
            pts = rng.normal(size=(n, d))
            x = rng.normal(size=d)
            model = fit_gaussian(pts, ridge=0.0)
            got = decision_statistic(model, x).T
            assert got == pytest.approx(naive_t(pts, x), rel=1e-9)

    def test_query_at_mean(self):
        pts = np.random.default_rng(10).normal(size=(30, 3))
        model = fit_gaussian(pts, ridge=0.0)
        score = decision_statistic(model, model.mean)
        assert score.d2 == pytest.approx(0.0, abs=1e-20)
        assert score.T == pytest.approx(0.0, abs=1e-20)

    def test_statistic_in_unit_interval(self):
        rng = np.random.default_rng(11)
        pts = rng.normal(size=(10, 2))
        model = fit_gaussian(pts, ridge=0.0)
        for scale in (0.1, 1.0, 100.0, 1e6):
            t = decision_statistic(model, scale * np.ones(2)).T
            assert 0.0 <= t <= 1.0

    def test_model_not_mutated(self):
        pts = np.random.default_rng(12).normal(size=(20, 2))
        model = fit_gaussian(pts, ridge=0.0)
        before = (model.mean.copy(), model.cov.copy(), model.n)
        decision_statistic(model, np.array([5.0, 5.0]))
        assert model.n == before[2]
        np.testing.assert_array_equal(model.mean, before[0])
        np.testing.assert_array_equal(model.cov, before[1])

    def test_too_few_samples(self):
        model = fit_gaussian(np.random.default_rng(0).normal(size=(3, 2)), ridge=1e-6)
        with pytest.raises(InsufficientSamples):
            decision_statistic(model, np.zeros(2))


class TestBetaDecide:
    def setup_method(self):
        rng = np.random.default_rng(13)
        self.pts = rng.normal(size=(50, 3))
        self.model = fit_gaussian(self.pts, ridge=0.0)
        self.thr = DecisionThreshold.for_model(self.model, 0.9)

    def test_mean_is_target(self):
        assert beta_decide(self.model, self.model.mean, self.thr) == TARGET

    def test_far_point_is_non_target(self):
        assert beta_decide(self.model, self.model.mean + 100.0, self.thr) == NON_TARGET

    def test_decision_boundary(self):
        # walk outward until the statistic straddles v_beta
        u = np.array([1.0, 0.0, 0.0])
        lo, hi = 0.0, 200.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if decision_statistic(self.model, self.model.mean + mid * u).T < self.thr.v_beta:
                lo = mid
            else:
                hi = mid
        assert beta_decide(self.model, self.model.mean + (lo - 1e-6) * u, self.thr) == TARGET
        assert beta_decide(self.model, self.model.mean + (hi + 1e-6) * u, self.thr) == NON_TARGET

    def test_tie_is_non_target(self):
        # a statistic exactly at the critical value fails the strict test
        x = self.model.mean + np.array([1.0, 1.0, 0.0])
        t = decision_statistic(self.model, x).T
        params = null_beta_params(self.model)
        thr = DecisionThreshold(beta_level=reg_inc_beta(params, t), params=params, v_beta=t)
        assert beta_decide(self.model, x, thr) == NON_TARGET

    def test_threshold_model_mismatch(self):
        other = fit_gaussian(np.random.default_rng(1).normal(size=(80, 3)), ridge=0.0)
        with pytest.raises(ShapeMismatch):
            beta_decide(other, np.zeros(3), self.thr)

    def test_null_params(self):
        p = null_beta_params(self.model)
        assert p == BetaParams(1.5, 23.5)


class TestCalibrate:
    def _dev(self, seed, n_t=40, n_n=40, shift=6.0):
        rng = np.random.default_rng(seed)
        model = fit_gaussian(rng.normal(size=(100, 2)), ridge=0.0)
        dev_t = rng.normal(size=(n_t, 2))
        dev_n = rng.normal(size=(n_n, 2)) + shift
        vectors = np.vstack([dev_t, dev_n])
        labels = np.array([1] * n_t + [0] * n_n)
        return model, vectors, labels

    def test_separable_dev_gets_perfect_f1(self):
        model, vectors, labels = self._dev(14, shift=10.0)
        thr = calibrate(model, vectors, labels)
        preds = np.array([beta_decide(model, v, thr) for v in vectors])
        assert np.array_equal(preds, labels)

    def test_picks_best_candidate(self):
        # the chosen threshold must do at least as well on the dev split as
        # every grid level it competed against
        from mahaclass.betadist import beta_quantile

        model, vectors, labels = self._dev(15, shift=1.5)
        thr = calibrate(model, vectors, labels)
        t_values = np.array([decision_statistic(model, v).T for v in vectors])

        def f1_at(v):
            preds = (t_values < v).astype(int)
            tp = np.sum((preds == 1) & (labels == 1))
            fp = np.sum((preds == 1) & (labels == 0))
            fn = np.sum((preds == 0) & (labels == 1))
            return 2 * tp / (2 * tp + fp + fn) if (2 * tp + fp + fn) else 0.0

        best_grid = max(f1_at(beta_quantile(thr.params, g))
                        for g in np.linspace(0.01, 0.99, 99))
        assert f1_at(thr.v_beta) >= best_grid - 1e-12

    def test_fpr_cap_respected(self):
        model, vectors, labels = self._dev(16, shift=1.0)
        thr = calibrate(model, vectors, labels, objective="f1-fpr-cap", fpr_cap=0.05)
        t_values = np.array([decision_statistic(model, v).T for v in vectors])
        preds = (t_values < thr.v_beta).astype(int)
        fp = np.sum((preds == 1) & (labels == 0))
        tn = np.sum((preds == 0) & (labels == 0))
        assert fp / (fp + tn) <= 0.05

    def test_single_class_dev_raises(self):
        model, vectors, labels = self._dev(17)
        with pytest.raises(DegenerateDevSet):
            calibrate(model, vectors, np.ones_like(labels))

    def test_unknown_objective(self):
        model, vectors, labels = self._dev(18)
        with pytest.raises(ValueError):
            calibrate(model, vectors, labels, objective="accuracy")
