import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from lsness.estimator import NESSEstimator, ScalingFit
from lsness.observables import current_matrix, partition_function
from lsness.scalars import ExactScalar


def test_params_round_trip_and_clone():
    est = NESSEstimator(n=4, eps=0.5, mu=-1.0)
    assert est.get_params()["n"] == 4
    other = clone(est).set_params(mu=2.0)
    assert other.mu == 2.0 and est.mu == -1.0


def test_fit_matches_partition_function():
    est = NESSEstimator(n=4, eps=0.7, mu=0.3).fit()
    assert est.partition_function_ == pytest.approx(partition_function(4, 0.7, 0.3), rel=1e-12)
    lean = NESSEstimator(n=4, eps=0.7, mu=0.3, physical=False).fit()
    assert lean.partition_function_ == pytest.approx(est.partition_function_, rel=1e-12)


def test_transform_both_routes_agree():
    obs = [(current_matrix(1, 3), 1), (np.diag([1.0, 0.0, 0.0]), 2)]
    a = NESSEstimator(n=4, eps=1.2, mu=-0.5).fit().transform(obs)
    b = NESSEstimator(n=4, eps=1.2, mu=-0.5, physical=False).fit().transform(obs)
    assert np.allclose(a, b, rtol=1e-10)
    assert np.allclose(NESSEstimator(n=4, eps=1.2, mu=-0.5).fit().predict(obs), a.real)


def test_exact_mode_keeps_polynomials():
    est = NESSEstimator(n=2, eps=None, mode="exact").fit()
    assert est.partition_function_ == 9 + 6 * ExactScalar.eps(2)
    with pytest.raises(ValueError):
        est.transform([(np.identity(3), 1)])


def test_sector_projection():
    est = NESSEstimator(n=3, eps=0.9, sector=3).fit()
    assert est.partition_function_ == pytest.approx(1.0)


def test_unfitted_and_invalid():
    with pytest.raises(NotFittedError):
        NESSEstimator().transform([(np.identity(3), 1)])
    with pytest.raises(ValueError):
        NESSEstimator(mode="symbolic").fit()
    with pytest.raises(ValueError):
        NESSEstimator(physical=False, sector=1).fit()


def test_scaling_fit_recovers_coefficients():
    n = np.arange(4, 12)
    y = 0.3 * n + 2.0 * n * np.log(n) - 1.5
    est = ScalingFit().fit(n, y)
    assert est.beta1_ == pytest.approx(2.0)
    assert est.alpha_ == pytest.approx(0.3)
    assert est.intercept_ == pytest.approx(-1.5)
    assert est.score(n, y) == pytest.approx(1.0)
    bare = ScalingFit(intercept=False).fit(n, 0.3 * n + 2.0 * n * np.log(n))
    assert bare.intercept_ == 0.0 and bare.beta1_ == pytest.approx(2.0)


def test_scaling_fit_needs_four_points():
    with pytest.raises(ValueError):
        ScalingFit().fit([3, 4, 5], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        ScalingFit().fit([1, 2, 3, 4], [1.0, 2.0])
