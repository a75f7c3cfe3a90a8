"""L2 mean-test statistics.

``R_n = (n |Xbar|^2 - f_1) / f`` with known scale, its U-statistic variant
``R~_n`` that drops the diagonal terms, and the studentized ``R^_n`` that plugs
in ``f1_hat`` and ``f_dagger``.  Column sums are accumulated in extended
precision because ``n |Xbar|^2 - f1_hat`` cancels heavily when p is large.
"""

import numpy as np

from .estimate import f1_hat, f_dagger


def as_data(X, mu0=None):
    """Validate an ``n x p`` data matrix and subtract ``mu0`` from every row."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"data must be an n x p matrix with n, p >= 1, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("data contains non-finite entries")
    if mu0 is not None:
        mu0 = np.asarray(mu0, dtype=float).ravel()
        if mu0.size != X.shape[1]:
            raise ValueError(f"mu0 has length {mu0.size}, data has p = {X.shape[1]}")
        X = X - mu0
    return X


def _column_sum(X):
    return np.sum(X.astype(np.longdouble), axis=0)


def sum_norm_sq(X):
    """``|sum_i X_i|^2`` in extended precision."""
    s = _column_sum(X)
    return np.sum(s * s)


def row_norms_sq(X):
    """``sum_i |X_i|^2`` in extended precision."""
    Xl = X.astype(np.longdouble)
    return np.sum(Xl * Xl)


def l2_statistic(X, mu0=None):
    """``n |Xbar - mu0|^2``."""
    X = as_data(X, mu0)
    return float(sum_norm_sq(X) / X.shape[0])


def offdiag_gram_sum(X):
    """``sum_{i != j} X_i^T X_j`` via ``|sum X_i|^2 - sum |X_i|^2``."""
    return float(sum_norm_sq(X) - row_norms_sq(X))


def statistic_Rn(X, f1, f, mu0=None):
    if not f > 0:
        raise ValueError(f"f must be positive, got {f!r}")
    X = as_data(X, mu0)
    n = X.shape[0]
    return float((sum_norm_sq(X) / n - f1) / f)


def statistic_tilde_Rn(X, f, mu0=None):
    if not f > 0:
        raise ValueError(f"f must be positive, got {f!r}")
    X = as_data(X, mu0)
    n = X.shape[0]
    if n < 2:
        raise ValueError("R~_n needs n >= 2")
    return offdiag_gram_sum(X) / ((n - 1) * f)


def statistic_hat_Rn(X, mu0=None):
    """Studentized statistic ``(n |Xbar|^2 - f1_hat) / f_dagger``.

    Raises :class:`~l2infer.errors.DegenerateEstimateError` when ``f_dagger``
    is not positive.
    """
    X = as_data(X, mu0)
    n = X.shape[0]
    if n < 3:
        raise ValueError("R^_n needs n >= 3")
    fd = f_dagger(X)
    numerator = float(sum_norm_sq(X) / n) - f1_hat(X)
    return numerator / fd
