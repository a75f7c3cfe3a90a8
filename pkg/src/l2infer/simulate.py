"""Replicated simulation study producing QQ data for four comparisons.

Panel ``a`` pairs draws of ``V`` (true spectrum) with ``R_n``; panel ``b`` pairs
``N(0, 2)`` quantiles with ``R_n``; panel ``c`` pairs pooled plug-in draws
``V_hat`` with ``R_hat_n``; panel ``d`` pairs pooled subsampling atoms with
``n |Xbar|^2``.  Plotting is left to external tools.
"""

import os
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import _rng
from .calibrate import default_m, plugin_weights, random_subsets, subsample_atoms
from .mixture import MixtureLaw, sample_mixture
from .spectral import functional_f_k, normalized_weights, spectrum_of
from .stats import statistic_hat_Rn, statistic_Rn, sum_norm_sq

PANELS = {
    "a": ("V", "R_n"),
    "b": ("normal", "R_n"),
    "c": ("V_hat", "R_hat_n"),
    "d": ("subsample_atom", "n_norm_sq"),
}


@dataclass
class Replicates:
    """Per-replicate statistics of one simulation run."""

    R_n: np.ndarray
    R_hat_n: np.ndarray
    norm_sq: np.ndarray        # n |Xbar|^2
    v_hat: np.ndarray          # reps x K plug-in mixture draws
    atoms: np.ndarray          # reps x J subsampling atoms
    weights: np.ndarray        # normalized true spectrum
    f1: float
    f: float


def replicate_seed(seed, r):
    return _rng.derive_seed(seed, _rng.REPLICATE, r)


def run_replicates(model, n, reps, seed=0, K=100, J=100, m=None):
    """Simulate ``reps`` data sets of size ``n`` from ``model`` and collect the statistics."""
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if n < 3:
        raise ValueError("simulation needs n >= 3")
    Sigma = model.covariance()
    if Sigma is None:
        raise ValueError(f"model {model.name!r} has no analytic covariance")
    s = spectrum_of(Sigma)
    f1, f = functional_f_k(s, 1), functional_f_k(s, 2)
    m = default_m(n) if m is None else int(m)
    R = np.empty(reps)
    Rh = np.empty(reps)
    nsq = np.empty(reps)
    vh = np.empty((reps, K))
    atoms = np.empty((reps, J))
    for r in range(reps):
        rs = replicate_seed(seed, r)
        X = model.sample(n, rs)
        R[r] = statistic_Rn(X, f1, f)
        Rh[r] = statistic_hat_Rn(X)
        nsq[r] = float(sum_norm_sq(X)) / n
        vh[r] = sample_mixture(MixtureLaw(plugin_weights(X), rs), K)
        atoms[r] = subsample_atoms(X, random_subsets(n, m, J, rs))
    return Replicates(R, Rh, nsq, vh, atoms, normalized_weights(s), f1, f)


def _positions(k):
    return (np.arange(1, k + 1) - 0.5) / k


def _paired(reference, statistic):
    """Sorted statistic against reference quantiles at matching plotting positions."""
    y = np.sort(statistic)
    ref = np.asarray(reference).ravel()
    if ref.size == y.size:
        x = np.sort(ref)
    else:
        x = np.quantile(ref, _positions(y.size), method="inverted_cdf")
    return np.column_stack([x, y])


def qq_panels(rep, seed=0):
    """Dict ``panel -> (k x 2)`` array of paired sorted quantiles."""
    k = rep.R_n.size
    V = sample_mixture(MixtureLaw(rep.weights, seed), k)
    normal = stats.norm.ppf(_positions(k), scale=np.sqrt(2.0))
    return {
        "a": _paired(V, rep.R_n),
        "b": _paired(normal, rep.R_n),
        "c": _paired(rep.v_hat, rep.R_hat_n),
        "d": _paired(rep.atoms, rep.norm_sq),
    }


def write_panels(panels, out_dir, prefix="qq"):
    """One headered CSV per panel; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for key, table in sorted(panels.items()):
        path = os.path.join(out_dir, f"{prefix}_{key}.csv")
        np.savetxt(path, table, delimiter=",", header=",".join(PANELS[key]),
                   comments="", fmt="%.17g")
        paths.append(path)
    return paths


def simulate_qq(model, n, reps, seed, out_dir, K=100, J=100, m=None):
    rep = run_replicates(model, n, reps, seed, K=K, J=J, m=m)
    return write_panels(qq_panels(rep, seed), out_dir)
