import numpy as np
import pytest

from l2infer.datagen import GaussianModel, Model2
from l2infer.simulate import PANELS, qq_panels, run_replicates, simulate_qq


def test_panels_shapes_and_sorted(tmp_path):
    rep = run_replicates(Model2(20, 0.5), 30, 12, seed=3, K=10, J=15)
    assert rep.v_hat.shape == (12, 10) and rep.atoms.shape == (12, 15)
    panels = qq_panels(rep, seed=3)
    for key, table in panels.items():
        assert table.shape == (12, 2)
        assert np.all(np.diff(table[:, 0]) >= 0) and np.all(np.diff(table[:, 1]) >= 0)
    np.testing.assert_array_equal(panels["a"][:, 1], np.sort(rep.R_n))
    np.testing.assert_array_equal(panels["d"][:, 1], np.sort(rep.norm_sq))


def test_single_replicate(tmp_path):
    paths = simulate_qq(GaussianModel(np.eye(5)), 20, 1, 0, tmp_path, K=5, J=4)
    assert len(paths) == 4
    for path, key in zip(paths, sorted(PANELS)):
        lines = open(path).read().splitlines()
        assert lines[0] == ",".join(PANELS[key])
        assert len(lines) == 2


def test_deterministic(tmp_path):
    a = simulate_qq(Model2(10, 0.05), 15, 4, 7, tmp_path / "a", K=5, J=5)
    b = simulate_qq(Model2(10, 0.05), 15, 4, 7, tmp_path / "b", K=5, J=5)
    for x, y in zip(a, b):
        assert open(x).read() == open(y).read()


def test_rn_uses_true_scale():
    rep = run_replicates(GaussianModel(np.eye(4)), 10, 3, seed=1, K=5, J=5)
    assert rep.f1 == pytest.approx(4.0) and rep.f == pytest.approx(2.0)


def test_bad_arguments():
    with pytest.raises(ValueError):
        run_replicates(GaussianModel(np.eye(2)), 10, 0)
    with pytest.raises(ValueError):
        run_replicates(GaussianModel(np.eye(2)), 2, 3)
