import itertools
import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest
from scipy import stats

import l2infer
from l2infer.calibrate import (CalibrationSpec, block_subsets, default_m, plugin_quantile,
                               plugin_weights, random_subsets, subsample_atoms, subsample_cdf,
                               test_mean)
from l2infer.datagen import gen_gaussian
from l2infer.errors import DegenerateEstimateError
from l2infer.mixture import MixtureLaw, cdf_sup_distance, mixture_quantile
from l2infer.spectral import Spectrum, spectrum_of

SCHEMA = json.loads((Path(l2infer.__file__).parent / "schemas" / "test_report.schema.json").read_text())


def test_default_m():
    assert default_m(200) == 37
    assert default_m(50) == 12


@pytest.mark.parametrize("kwargs", [
    {"method": "bogus"}, {"method": "plugin", "alpha": 0.0}, {"method": "plugin", "alpha": 1.0},
    {"method": "plugin", "n_mc": 999}, {"method": "subsample-blocks", "m": 1},
    {"method": "subsample-random", "J": 0},
])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        CalibrationSpec(**kwargs)


def test_plugin_rank_one_is_chi2():
    rng = np.random.default_rng(0)
    X = np.outer(rng.standard_normal(30), [1.0, -2.0, 0.5])
    w = plugin_weights(X)
    np.testing.assert_allclose(w, [1.0, 0.0, 0.0], atol=1e-7)
    q = plugin_quantile(X, 0.05, n_mc=200_000, seed=1)
    assert q == pytest.approx(stats.chi2.ppf(0.95, 1) - 1.0, abs=0.05)


def test_plugin_deterministic(rng):
    X = rng.standard_normal((20, 6))
    assert plugin_quantile(X, 0.1, 5000, 3) == plugin_quantile(X, 0.1, 5000, 3)


def test_plugin_gram_route_matches(rng):
    X = rng.standard_normal((8, 30))
    Xc = X - X.mean(axis=0)
    lam = np.linalg.eigvalsh(Xc.T @ Xc / 7)
    w = np.sort(np.clip(lam, 0, None))[::-1]
    np.testing.assert_allclose(plugin_weights(X)[:8], (w / np.linalg.norm(w))[:8], atol=1e-12)


def test_plugin_degenerate():
    with pytest.raises(DegenerateEstimateError):
        plugin_quantile(np.ones((5, 3)), 0.05)
    with pytest.raises(ValueError):
        plugin_quantile(np.eye(2), 0.05)


@pytest.mark.slow
def test_plugin_close_to_oracle_gaussian_identity():
    p = n = 200
    oracle = mixture_quantile(MixtureLaw(np.full(p, p ** -0.5)), 0.95)
    close = sum(abs(plugin_quantile(gen_gaussian(n, p, np.eye(p), s), 0.05, seed=s) - oracle) <= 0.15
                for s in range(100))
    assert close >= 90


def test_plugin_law_improves_with_n():
    p = 200
    oracle = np.full(p, p ** -0.5)
    def dist(n):
        return np.mean([cdf_sup_distance(oracle, plugin_weights(gen_gaussian(n, p, np.eye(p), s)), 20_000, s)
                        for s in range(5)])
    assert dist(200) < dist(50)


def test_blocks_bruteforce():
    X = np.array([[1.0, 2.0], [3.0, -1.0], [0.0, 4.0], [2.0, 2.0]])
    xbar = X.mean(axis=0)
    expected = []
    for B in ([0, 1], [2, 3]):
        d = X[B].mean(axis=0) - xbar
        expected.append(2 * d @ d / (1 - 2 / 4))
    F = subsample_cdf(X, "blocks", m=2)
    np.testing.assert_allclose(F.sorted_samples, sorted(expected))
    assert F(-1.0) == 0.0 and F(max(expected) + 1) == 1.0


def test_blocks_ignore_leftovers():
    assert [list(b) for b in block_subsets(7, 3)] == [[0, 1, 2], [3, 4, 5]]


def test_random_single_subset_equals_block(rng):
    X = rng.standard_normal((10, 3))
    blocks = subsample_cdf(X, "blocks", m=5)
    single = subsample_cdf(X, "random", subsets=[np.arange(5)])
    assert single.count == 1
    assert single.sorted_samples[0] == pytest.approx(subsample_atoms(X, [np.arange(5)])[0])
    assert single.sorted_samples[0] in blocks.sorted_samples


def test_random_subsets_properties():
    subs = random_subsets(30, 7, 50, seed=4)
    assert len(subs) == 50
    for A in subs:
        assert len(set(A.tolist())) == 7 and A.min() >= 0 and A.max() < 30
    again = random_subsets(30, 7, 50, seed=4)
    assert all(np.array_equal(a, b) for a, b in zip(subs, again))
    # subset j does not depend on J
    assert np.array_equal(random_subsets(30, 7, 3, seed=4)[2], subs[2])


def test_random_subsets_uniform():
    # each index lands in a 3-subset of 6 with probability 1/2
    counts = np.zeros(6)
    for A in random_subsets(6, 3, 6000, seed=1):
        counts[A] += 1
    np.testing.assert_allclose(counts / 6000, 0.5, atol=0.03)
    # every 3-subset is reachable and roughly equally likely
    seen = {tuple(sorted(A.tolist())) for A in random_subsets(6, 3, 2000, seed=2)}
    assert seen == set(itertools.combinations(range(6), 3))


@pytest.mark.parametrize("m", [1, 10, 12])
def test_subsample_size_errors(m):
    with pytest.raises(ValueError):
        subsample_cdf(np.random.default_rng(0).standard_normal((10, 2)), "blocks", m=m)


def test_subsampling_boundary_rejects():
    # both block atoms and the statistic equal 9/4
    X = np.array([[1.0], [2.0], [0.0], [0.0]])
    r = test_mean(X, spec=CalibrationSpec("subsample-blocks", m=2))
    assert r.statistic == r.cutoff == 2.25
    assert r.reject
    assert r.n_atoms == 2


def test_report_contract_and_schema(rng):
    X = rng.standard_normal((40, 5)) + 0.1
    specs = [CalibrationSpec("plugin", n_mc=5000), CalibrationSpec("subsample-blocks"),
             CalibrationSpec("subsample-random", J=30),
             CalibrationSpec("oracle", n_mc=5000, spectrum=Spectrum(np.ones(5)))]
    for spec in specs:
        r = test_mean(X, np.zeros(5), spec)
        jsonschema.validate(r.to_dict(), SCHEMA)
        assert 0 <= r.p_value_estimate <= 1
        if spec.method.startswith("subsample"):
            assert r.reject == (r.statistic >= r.cutoff)
            assert r.method["m"] == default_m(40)
        else:
            assert r.reject == (r.statistic > r.cutoff)
        assert json.loads(r.to_json())["n"] == 40


def test_oracle_uses_true_scale(rng):
    X = rng.standard_normal((30, 4))
    r = test_mean(X, None, CalibrationSpec("oracle", n_mc=5000, spectrum=spectrum_of(np.eye(4))))
    n = 30
    assert r.statistic == pytest.approx((n * np.sum(X.mean(axis=0) ** 2) - 4) / 2)


def test_oracle_requires_matching_spectrum(rng):
    X = rng.standard_normal((30, 4))
    with pytest.raises(ValueError):
        test_mean(X, None, CalibrationSpec("oracle"))
    with pytest.raises(ValueError):
        test_mean(X, None, CalibrationSpec("oracle", spectrum=Spectrum(np.ones(3))))


def test_mean_shift_detected(rng):
    X = rng.standard_normal((100, 10)) + 1.0
    for method in ("plugin", "subsample-random"):
        assert test_mean(X, None, CalibrationSpec(method)).reject
