import numpy as np
import pytest

from misscov import (
    CvPlan,
    DataError,
    MissingMechanism,
    SamplerSpec,
    apply_missingness,
    build_masked,
    cv_select,
    grid_bandable,
    grid_sparse,
    model_linear_decay,
    sample_gaussian,
)
from misscov.cv import default_grid
from misscov.estimators import EstimatorOptions, fit, normalize_method

from .conftest import random_masked


class TestGrids:
    def test_bandable_p8(self):
        assert grid_bandable(8, 3) == [1, 2, 4, 8]

    def test_bandable_n1(self):
        assert grid_bandable(50, 1) == [1, 50]

    @pytest.mark.parametrize("N", [1, 2, 7, 20])
    def test_bandable_p2(self, N):
        assert grid_bandable(2, N) == [1, 2]

    def test_bandable_exact_powers(self):
        # 1000 ** (1/3) is 9.999999999999998 in floating point
        assert grid_bandable(1000, 3) == [1, 10, 100, 1000]

    def test_sparse(self):
        g = grid_sparse(4)
        assert len(g) == 17 and g[1] == 0.25 and g[-1] == 4.0
        assert grid_sparse(1) == [0.0, 1.0, 2.0, 3.0, 4.0]

    def test_default_grid_dispatch(self):
        assert default_grid("bt", 8, 3) == [1.0, 2.0, 4.0, 8.0]
        assert default_grid("at-bullet", 8, 1) == [0.0, 1.0, 2.0, 3.0, 4.0]

    def test_invalid(self):
        with pytest.raises(ValueError):
            grid_sparse(0)
        with pytest.raises(ValueError):
            CvPlan(K=1)
        with pytest.raises(ValueError):
            CvPlan(grid=(2.0, 1.0))


class TestSelect:
    def test_singleton(self, rng):
        M = random_masked(rng, 5, 40)
        assert cv_select(M, "bt", CvPlan(grid=(3,))).t_star == 3

    def test_tie_goes_to_smallest(self, rng):
        # k >= p all give the sample covariance, so the risks tie exactly
        M = random_masked(rng, 5, 40)
        res = cv_select(M, "bt", CvPlan(grid=(5, 6, 7)))
        assert res.risks[0] == res.risks[1] == res.risks[2]
        assert res.t_star == 5

    def test_deterministic(self, rng):
        M = random_masked(rng, 10, 60, 0.7)
        a = cv_select(M, "at", CvPlan(N=4, seed=3))
        b = cv_select(M, "at", CvPlan(N=4, seed=3))
        assert a == b

    def test_at_plus_tunes_like_at(self, rng):
        M = random_masked(rng, 8, 50, 0.8)
        assert cv_select(M, "at+", CvPlan(N=2)).t_star == cv_select(M, "at", CvPlan(N=2)).t_star

    def test_banded_truth_avoids_extremes(self):
        rng = np.random.default_rng(11)
        X = sample_gaussian(SamplerSpec(model_linear_decay(60)), 300, rng)
        M = apply_missingness(X, MissingMechanism.mucr(0.8), rng)
        res = cv_select(M, "bt", CvPlan(N=10))
        assert 1 < res.t_star < 60

    def test_diagonal_truth_thresholds(self):
        rng = np.random.default_rng(12)
        X = rng.standard_normal((30, 400))
        M = apply_missingness(X, MissingMechanism.mucr(0.8), rng)
        assert cv_select(M, "at", CvPlan(N=2)).t_star >= 1.0

    def test_too_few_samples(self):
        M = build_masked(np.random.default_rng(0).standard_normal((3, 4)), np.ones((3, 4)))
        with pytest.raises(DataError):
            cv_select(M, "bt", CvPlan(K=5))


class TestFit:
    def test_aliases(self):
        assert normalize_method("bt•") == "bt-bullet"
        assert normalize_method("AT•") == "at-bullet"
        with pytest.raises(ValueError):
            normalize_method("glasso")

    def test_k_clamped(self, rng):
        M = random_masked(rng, 4, 30)
        assert fit(M, "bt", 10).matrix.shape == (4, 4)

    def test_noninteger_k(self, rng):
        with pytest.raises(DataError):
            fit(random_masked(rng, 4, 30), "bd", 1.5)

    def test_at_plus_is_psd(self, rng):
        M = random_masked(rng, 12, 20, 0.5)
        est = fit(M, "at+", 0.5, EstimatorOptions())
        assert np.linalg.eigvalsh(est.matrix)[0] > 0
        assert est.method == "at+"
