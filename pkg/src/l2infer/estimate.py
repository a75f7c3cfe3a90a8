"""Covariance estimates, ratio-consistent scale estimators and normalized gaps."""

import numpy as np

from .errors import DegenerateEstimateError
from .spectral import check_cov


def _data(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or 0 in X.shape:
        raise ValueError(f"data must be a non-empty n x p matrix, got shape {X.shape}")
    return X


def sample_covariance(X, centered=True):
    """``(n-1)^{-1} sum (X_i - Xbar)(X_i - Xbar)^T`` or, uncentered, ``n^{-1} sum X_i X_i^T``."""
    X = _data(X)
    n = X.shape[0]
    if centered:
        if n < 2:
            raise ValueError("centered sample covariance needs n >= 2")
        Xc = X - X.mean(axis=0)
        S = Xc.T @ Xc / (n - 1)
    else:
        S = X.T @ X / n
    return 0.5 * (S + S.T)


def f1_hat(X):
    """Unbiased trace estimate ``tr(Sigma_hat)`` from the centered covariance."""
    X = _data(X)
    n = X.shape[0]
    if n < 2:
        raise ValueError("f1_hat needs n >= 2")
    Xc = X - X.mean(axis=0)
    return float(np.sum(Xc * Xc) / (n - 1))


def trace_cov_sq(X):
    """``tr(Sigma_hat^2) = |Sigma_hat|_F^2`` for the centered covariance.

    Uses the ``n x n`` Gram matrix when ``p > n``; both routes are exact.
    """
    X = _data(X)
    n, p = X.shape
    if n < 2:
        raise ValueError("needs n >= 2")
    Xc = X - X.mean(axis=0)
    G = Xc @ Xc.T if p > n else Xc.T @ Xc
    return float(np.sum(G * G) / (n - 1) ** 2)


def f_dagger_from_moments(trace_sq, f1, n):
    """``[tr(Sigma_hat^2) - f1_hat^2 / n]^{1/2}``; raises when the bracket is not positive."""
    v = trace_sq - f1 * f1 / n
    if not v > 0:
        raise DegenerateEstimateError(
            f"degenerate variance estimate: tr(S^2) - f1^2/n = {v:.6g} <= 0"
        )
    return float(np.sqrt(v))


def f_dagger(X):
    """Ratio-consistent estimate of ``f = |Sigma|_F``."""
    X = _data(X)
    n = X.shape[0]
    tr2, f1 = trace_cov_sq(X), f1_hat(X)
    # centering round-off leaves ~eps-sized residuals on constant data
    raw = float(np.sum(X * X)) / n
    if tr2 - f1 * f1 / n <= 1e-24 * raw * raw:
        raise DegenerateEstimateError("degenerate variance estimate: sample covariance is (numerically) zero")
    return f_dagger_from_moments(tr2, f1, n)


def _normalize(S, name):
    S = check_cov(S, name)
    f = np.linalg.norm(S, "fro")
    if f == 0:
        raise DegenerateEstimateError(f"{name} is the zero matrix")
    return S / f


def normalized_gap_spectral(S, T):
    """``rho(S / |S|_F - T / |T|_F)``."""
    D = _normalize(S, "S") - _normalize(T, "T")
    return float(np.max(np.abs(np.linalg.eigvalsh(D))))


def normalized_gap_frobenius(S, T):
    """``|S / |S|_F - T / |T|_F|_F``."""
    D = _normalize(S, "S") - _normalize(T, "T")
    return float(np.linalg.norm(D, "fro"))
