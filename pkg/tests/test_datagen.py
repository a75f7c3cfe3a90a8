import math

import numpy as np
import pytest
from scipy import stats

from l2infer.datagen import (T5, GaussianModel, Innovation, LinearModel, Model1, Model2,
                             SparseBernoulliModel, gen_gaussian, gen_general_linear, gen_model1,
                             gen_model2, gen_sparse_bernoulli, linear_covariance,
                             model1_coefficients, model1_covariance, model2_covariance,
                             normal_abs_moment)


def test_gaussian_zero_and_identity():
    np.testing.assert_array_equal(gen_gaussian(5, 3, np.zeros((3, 3)), 1), np.zeros((5, 3)))
    X = gen_gaussian(100_000, 3, np.eye(3), 2)
    np.testing.assert_allclose(np.cov(X, rowvar=False), np.eye(3), atol=0.02)


def test_gaussian_reproducible_and_prefix_stable():
    S = np.array([[2.0, 0.5], [0.5, 1.0]])
    a = gen_gaussian(3000, 2, S, 9)
    np.testing.assert_array_equal(a, gen_gaussian(3000, 2, S, 9))
    np.testing.assert_array_equal(a[:10], gen_gaussian(10, 2, S, 9))
    with pytest.raises(ValueError):
        gen_gaussian(5, 3, S, 0)
    with pytest.raises(ValueError):
        gen_gaussian(5, 2, np.diag([1.0, -1.0]), 0)


def test_model1_coefficients():
    c = model1_coefficients(2.0, 5)
    assert c[0] == 1.0 and c[1] == 0.25
    with pytest.raises(ValueError):
        model1_coefficients(0.5, 10)


def test_model1_covariance_examples():
    np.testing.assert_allclose(model1_covariance(2, 2.0, 1, 1.0), [[1.0625, 0.25], [0.25, 1.0625]])
    np.testing.assert_allclose(model1_covariance(4, 3.0, 0, 5 / 3), np.eye(4) * 5 / 3)
    S = model1_covariance(6, 1.5, 3, 1.0)
    assert np.all(S[np.abs(np.subtract.outer(range(6), range(6))) > 3] == 0)


def test_model1_matches_direct_sum():
    K, p = 4, 3
    X = gen_model1(2, p, 2.0, K, Innovation.normal(), seed=5)
    from l2infer import _rng
    xi = _rng.stream(5, _rng.MODEL1, 0, 0).standard_normal((2, p + K))
    c = model1_coefficients(2.0, K)
    direct = np.array([[sum(c[k] * xi[i, j - k + K] for k in range(K + 1)) for j in range(p)]
                       for i in range(2)])
    np.testing.assert_allclose(X, direct, rtol=1e-12)


def test_model1_zero_innovations():
    zero = Innovation.custom(lambda rng, shape: np.zeros(shape), variance=0.0)
    np.testing.assert_array_equal(gen_model1(4, 5, 2.0, 10, zero, 0), np.zeros((4, 5)))


def test_model1_sample_covariance():
    p, K = 10, 50
    n = 100_000
    X = gen_model1(n, p, 2.0, K, T5, seed=3)
    S = model1_covariance(p, 2.0, K, T5.variance)
    prods = X[:, :, None] * X[:, None, :]
    se = prods.std(axis=0) / math.sqrt(n)
    assert np.all(np.abs(prods.mean(axis=0) - S) <= 4 * se)


def test_model1_stationary_lags():
    p, K, n = 20, 30, 10_000
    X = gen_model1(n, p, 2.0, K, Innovation.normal(), seed=8)
    for h in (0, 1, 3):
        lag = np.array([np.mean(X[:, j] * X[:, j + h]) for j in range(p - h)])
        prods = np.stack([X[:, j] * X[:, j + h] for j in range(p - h)])
        se = prods.std(axis=1).max() / math.sqrt(n)
        assert np.ptp(lag) <= 2 * 3 * se


def test_model2_moments_and_formula():
    X = gen_model2(1_000_000 // 4, 4, 0.0, seed=1)
    assert abs(X.mean()) < 0.01
    assert X.var() == pytest.approx(13 / 3, rel=0.01)
    a = 0.5
    np.testing.assert_allclose(model2_covariance(3, a), 13 / 3 * np.eye(3) + 1.5 * np.ones((3, 3)))
    Y = gen_model2(200_000, 3, a, seed=2)
    np.testing.assert_allclose(np.cov(Y, rowvar=False), model2_covariance(3, a), atol=0.06)


def test_model2_per_row_scale_bounds():
    X = gen_model2(50, 2000, 0.0, seed=4)
    sd = X.std(axis=1)
    assert np.all(sd > 1.85) and np.all(sd < math.sqrt(5) + 0.15)


def test_model2_exchangeable_correlations():
    X = gen_model2(100_000, 5, 0.5, seed=6)
    C = np.corrcoef(X, rowvar=False)[np.triu_indices(5, 1)]
    # standard error of a correlation near rho is about (1 - rho^2) / sqrt(n)
    rho = 1.5 / (13 / 3 + 1.5)
    assert np.all(np.abs(C - rho) <= 3 * (1 - rho ** 2) / math.sqrt(100_000) * 1.5)


def test_reproducible_all_models():
    models = [GaussianModel(np.eye(3)), LinearModel(np.ones((3, 3))), Model1(4, 2.0, K=20),
              Model2(4, 0.05), SparseBernoulliModel(10, 1.0)]
    for m in models:
        np.testing.assert_array_equal(m.sample(30, 77), m.sample(30, 77))
        assert not np.array_equal(m.sample(30, 77), m.sample(30, 78))
        assert m.manifest()["model"] == m.name


def test_general_linear():
    inn = Innovation.student_t(7)
    np.testing.assert_array_equal(gen_general_linear(6, np.eye(3), inn, 2),
                                  gen_general_linear(6, np.eye(3), inn, 2))
    np.testing.assert_array_equal(gen_general_linear(6, np.zeros((3, 3)), inn, 2), np.zeros((6, 3)))
    from l2infer import _rng
    xi = inn.draw(_rng.stream(2, _rng.LINEAR, 0, 0), (6, 3))
    np.testing.assert_allclose(gen_general_linear(6, np.eye(3), inn, 2), xi)
    A = np.random.default_rng(0).standard_normal((5, 5)) / 2
    X = gen_general_linear(100_000, A, Innovation.student_t(8, standardize=True), 3)
    np.testing.assert_allclose(np.cov(X, rowvar=False), A @ A.T, atol=0.05)
    np.testing.assert_allclose(linear_covariance(A, T5), 5 / 3 * A @ A.T)


def test_sparse_bernoulli():
    p, beta = 50, 1.0
    ell = p ** beta
    X = gen_sparse_bernoulli(20_000, p, beta, seed=1)
    vals = np.unique(X)
    np.testing.assert_allclose(vals, [-(ell - 1) ** -0.5, (ell - 1) ** 0.5])
    assert abs(X.mean()) < 0.01 and X.var() == pytest.approx(1.0, abs=0.02)
    with pytest.raises(ValueError):
        gen_sparse_bernoulli(5, 3, 0.5)
    with pytest.raises(ValueError):
        gen_sparse_bernoulli(5, 1, 2.0)


def test_innovation_moments():
    assert T5.variance == pytest.approx(5 / 3)
    assert Innovation.student_t(5, standardize=True).variance == 1.0
    assert normal_abs_moment(2) == pytest.approx(1.0)
    assert normal_abs_moment(3) == pytest.approx(2 * math.sqrt(2 / math.pi))
    assert normal_abs_moment(8) == pytest.approx(105.0)
    # student-t absolute moment against scipy's numerical expectation
    for r in (1.0, 2.5, 4.0):
        num = stats.t(6).expect(lambda x: abs(x) ** r)
        assert Innovation.student_t(6).abs_moment(r) == pytest.approx(num, rel=1e-6)
    assert T5.has_moment(4.8) and not T5.has_moment(5.0)
    with pytest.raises(ValueError):
        T5.abs_moment(5.2)
    assert Innovation.normal().nu == pytest.approx(2.0)
    assert T5.nu == pytest.approx(8.0)
    b = Innovation.sparse_bernoulli(4.0)
    # E xi^4 = (ell-1)^2/ell + (1 - 1/ell)/(ell-1)^2 = 9/4 + 1/12
    assert b.abs_moment(2) == pytest.approx(1.0) and b.nu == pytest.approx(9 / 4 + 1 / 12 - 1)


def test_innovation_validation():
    for bad in (dict(kind="student-t", df=2.0), dict(kind="bernoulli-sparse", ell=1.0), dict(kind="x")):
        with pytest.raises(ValueError):
            Innovation(**bad)
