"""Testing ``H0: Sigma = Sigma0`` through the L2 norm of centered second moments.

Each observation ``u`` is mapped to the ``p^2`` vector ``W(u) = vec(u u^T - Sigma0)``
(row-major), so ``T_n = |Wbar_n|^2`` is the squared Frobenius distance between
the uncentered sample covariance and ``Sigma0``.  For linear processes
``X = A xi`` the covariance ``Gamma`` of ``W`` is explicit, which gives the
calibrating mixture for ``n T~_n``.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .calibrate import CalibrationSpec, TestReport, plugin_law, test_mean
from .errors import CalibrationLimitError
from .estimate import f_dagger
from .mixture import MixtureLaw, mixture_ecdf
from .spectral import check_cov, functional_f_k, spectrum_of
from .stats import as_data
from .datagen import sym_sqrt

P_MAX = 40


def _check_pair(X, Sigma0):
    X = as_data(X)
    S0 = check_cov(Sigma0, "Sigma0")
    if S0.shape[0] != X.shape[1]:
        raise ValueError(f"Sigma0 is {S0.shape[0]}x{S0.shape[0]} but data has p = {X.shape[1]}")
    return X, S0


def build_W(u, Sigma0):
    """``W(u)`` with entry ``(j, k)`` at position ``j p + k`` equal to ``u_j u_k - sigma0_jk``."""
    u = np.asarray(u, dtype=float).ravel()
    S0 = np.asarray(Sigma0, dtype=float)
    if S0.shape != (u.size, u.size):
        raise ValueError(f"u has length {u.size} but Sigma0 has shape {S0.shape}")
    return (np.outer(u, u) - S0).ravel()


def W_matrix(X, Sigma0):
    """Stack ``W(X_i)`` as an ``n x p^2`` data matrix."""
    X, S0 = _check_pair(X, Sigma0)
    n, p = X.shape
    return (X[:, :, None] * X[:, None, :] - S0).reshape(n, p * p)


def statistic_Tn(X, Sigma0):
    """``sum_{j,k} (sigma_hat_jk - sigma0_jk)^2`` with ``Sigma_hat = X^T X / n``."""
    X, S0 = _check_pair(X, Sigma0)
    D = X.T @ X / X.shape[0] - S0
    return float(np.sum(D * D))


def statistic_tilde_Tn(X, Sigma0):
    """U-statistic ``(n(n-1))^{-1} sum_{i != i'} W_i^T W_i'`` in ``O(n p^2)``."""
    X, S0 = _check_pair(X, Sigma0)
    n = X.shape[0]
    if n < 2:
        raise ValueError("T~_n needs n >= 2")
    S = X.T @ X - n * S0
    total = np.sum(S * S)
    q = np.einsum("ij,ij->i", X, X)
    quad = np.einsum("ij,jk,ik->i", X, S0, X)
    diag = np.sum(q * q) - 2.0 * np.sum(quad) + n * np.sum(S0 * S0)
    return float((total - diag) / (n * (n - 1)))


@dataclass(frozen=True, eq=False)
class GammaMatrix:
    """Covariance of ``W(A xi)`` for i.i.d. unit-variance innovations with ``Var(xi^2) = nu``."""

    A: np.ndarray
    nu: float

    @property
    def p(self):
        return self.A.shape[0]

    @cached_property
    def Sigma(self):
        return self.A @ self.A.T

    @cached_property
    def full(self):
        """``p^2 x p^2`` matrix ``(nu - 2) sum_i a_ji a_ki a_mi a_qi + s_jm s_kq + s_jq s_km``."""
        p, S = self.p, self.Sigma
        P = (self.A[:, None, :] * self.A[None, :, :]).reshape(p * p, -1)
        K = np.kron(S, S)
        # column permutation (m, q) -> (q, m) turns s_jm s_kq into s_jq s_km
        swap = np.arange(p * p).reshape(p, p).T.ravel()
        G = (self.nu - 2.0) * (P @ P.T) + K + K[:, swap]
        return 0.5 * (G + G.T)

    @cached_property
    def factor(self):
        """``G`` with ``W = G omega`` and the diagonal of ``V_W = cov(omega)``."""
        A = self.A
        p, r = A.shape
        cols, var = [], []
        for i in range(r):
            for l in range(i, r):
                if i == l:
                    C = np.outer(A[:, i], A[:, i])
                    var.append(self.nu)
                else:
                    C = np.outer(A[:, i], A[:, l])
                    C = C + C.T
                    var.append(1.0)
                cols.append(C.ravel())
        return np.column_stack(cols), np.asarray(var)

    @cached_property
    def eigenvalues(self):
        """Nonzero spectrum of ``Gamma`` via the ``p(p+1)/2``-dimensional ``V^{1/2} G^T G V^{1/2}``."""
        G, v = self.factor
        r = np.sqrt(v)
        M = (G.T @ G) * r[:, None] * r[None, :]
        return spectrum_of(0.5 * (M + M.T)).eigenvalues

    @cached_property
    def f_W_sq(self):
        """``tr(Gamma^2)``, summed entrywise from the full matrix."""
        return float(np.sum(self.full ** 2))

    def law(self, seed=0):
        theta = self.eigenvalues
        f_W = np.sqrt(np.sum(theta ** 2))
        return MixtureLaw(theta / f_W, seed), float(f_W)


def gamma_linear(A, nu, p_max=P_MAX):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    if nu < 0:
        raise ValueError("nu = Var(xi^2) must be nonnegative")
    if A.shape[0] > p_max:
        raise CalibrationLimitError(
            f"covariance-test calibration limited to small p (p = {A.shape[0]} > p_max = {p_max}); "
            "use subsampling"
        )
    return GammaMatrix(A.copy(), float(nu))


def f_W_bound_check(A, nu, p_max=P_MAX):
    """Return ``(f_W^2, min(2, nu^2/2) f^4, holds)``."""
    g = gamma_linear(A, nu, p_max)
    fw2 = g.f_W_sq
    f = np.linalg.norm(g.Sigma, "fro")
    bound = min(2.0, nu * nu / 2.0) * f ** 4
    return fw2, float(bound), bool(fw2 >= bound * (1.0 - 1e-10))


def fourth_moment_identity_gaussian(Sigma):
    """``E[(X_1^T X_2)^4] = 3 f^4 + 6 f_4^4`` for Gaussian ``X``."""
    s = spectrum_of(Sigma)
    return 3.0 * functional_f_k(s, 2) ** 4 + 6.0 * functional_f_k(s, 4) ** 4


def test_cov(X, Sigma0, spec=None, A=None, nu=2.0, p_max=P_MAX):
    """Test ``H0: Sigma = Sigma0``.

    ``"oracle"`` calibrates ``n T~_n`` with the mixture of ``Gamma`` eigenvalues
    for ``X = A xi`` (``A`` defaults to the symmetric root of ``Sigma0``, ``nu``
    to the Gaussian value 2).  ``"plugin"`` uses the eigenvalues of the sample
    covariance of the ``W_i``.  Subsampling methods calibrate ``n T_n`` by
    subsampling the ``W_i``.
    """
    if spec is None:
        spec = CalibrationSpec("subsample-random")
    X, S0 = _check_pair(X, Sigma0)
    n, p = X.shape
    if spec.method in ("oracle", "plugin") and p > p_max:
        raise CalibrationLimitError(
            f"covariance-test calibration limited to small p (p = {p} > p_max = {p_max}); "
            "use subsampling"
        )
    method = spec.to_dict()
    if spec.method == "oracle":
        A = sym_sqrt(S0) if A is None else np.asarray(A, dtype=float)
        method["nu"] = nu
        law, scale = gamma_linear(A, nu, p_max).law(spec.seed)
    elif spec.method == "plugin":
        W = W_matrix(X, S0)
        law, scale = plugin_law(W, spec.seed), f_dagger(W)
    else:
        W = W_matrix(X, S0)
        report = test_mean(W, None, spec)
        report.p = p
        report.statistic_name = "n_T_n"
        return report
    stat = n * statistic_tilde_Tn(X, S0)
    cdf = mixture_ecdf(law, spec.n_mc)
    cutoff = scale * cdf.quantile(1.0 - spec.alpha)
    pval = float(min(max(1.0 - cdf(stat / scale), 0.0), 1.0))
    return TestReport(stat, float(cutoff), bool(stat > cutoff), pval, method, n, p, "n_T_tilde_n")


test_cov.__test__ = False
