"""Moment constants behind the Gaussian approximation and its rate function.

``K_delta = ||(X^T X - f_1) / f||_q`` and ``D_delta = ||X_1^T X_2 / f||_q`` with
``q = 2 + delta`` control how fast ``R_n`` approaches the chi-square mixture.
This module estimates them by Monte Carlo for generators with known
covariance, evaluates the closed-form bounds available for Gaussian and
linear data, and solves for the rate ``psi_n``.
"""

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy import integrate, optimize, stats

from .datagen import Innovation, normal_abs_moment
from .spectral import functional_f_k, spectrum_of


def _q(delta):
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    return 2.0 + delta


def _norm_with_se(z, q):
    """``(E|z|^q)^{1/q}`` and its delta-method standard error."""
    a = np.abs(z) ** q
    m = float(np.mean(a))
    se_m = float(np.std(a, ddof=1) / math.sqrt(a.size))
    value = m ** (1.0 / q)
    se = value / (q * m) * se_m if m > 0 else 0.0
    return value, se


def _scales(model):
    Sigma = model.covariance()
    if Sigma is None:
        raise ValueError(f"generator {model.name!r} has no analytic covariance")
    s = spectrum_of(Sigma)
    f1, f = functional_f_k(s, 1), functional_f_k(s, 2)
    if f == 0:
        raise ValueError("degenerate generator: f1 = f = 0")
    return np.asarray(Sigma, dtype=float), f1, f


def empirical_K_delta(model, delta, N, seed, return_se=False):
    """Monte Carlo ``(E|(X^T X - f_1)/f|^{2+delta})^{1/(2+delta)}``."""
    q = _q(delta)
    _, f1, f = _scales(model)
    X = model.sample(int(N), seed)
    z = (np.einsum("ij,ij->i", X, X) - f1) / f
    value, se = _norm_with_se(z, q)
    return (value, se) if return_se else value


def empirical_D_delta(model, delta, N, seed, return_se=False):
    """Monte Carlo ``(E|X_1^T X_2 / f|^{2+delta})^{1/(2+delta)}`` over ``N`` independent pairs."""
    q = _q(delta)
    _, _, f = _scales(model)
    X = model.sample(2 * int(N), seed)
    z = np.einsum("ij,ij->i", X[: int(N)], X[int(N):]) / f
    value, se = _norm_with_se(z, q)
    return (value, se) if return_se else value


def empirical_EqX(model, delta, N, seed, return_se=False):
    """Monte Carlo ``E(X^T Sigma X)^{q/2} / f^q``."""
    q = _q(delta)
    Sigma, _, f = _scales(model)
    X = model.sample(int(N), seed)
    v = np.clip(np.einsum("ij,jk,ik->i", X, Sigma, X), 0.0, None) ** (q / 2) / f ** q
    m = float(np.mean(v))
    se = float(np.std(v, ddof=1) / math.sqrt(v.size))
    return (m, se) if return_se else m


def _centered_chi2_abs_moment(r):
    """``E|xi^2 - 1|^r`` for standard normal ``xi`` by adaptive quadrature."""
    def integrand(x):
        return abs(x * x - 1.0) ** r * stats.norm.pdf(x)

    lo, e1 = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-12, epsrel=1e-11)
    hi, e2 = integrate.quad(integrand, 1.0, np.inf, epsabs=1e-12, epsrel=1e-11)
    return 2.0 * (lo + hi)


def gaussian_bounds(delta):
    """``(c_delta, d_delta)`` for Gaussian data."""
    q = _q(delta)
    c = math.sqrt(1.0 + delta) * _centered_chi2_abs_moment(q) ** (1.0 / q)
    d = math.sqrt(1.0 + delta) * normal_abs_moment(q) ** (2.0 / q)
    return c, d


def _unit(innovation):
    return (innovation or Innovation.normal()).standardized()


def linear_bounds(delta, innovation=None):
    """``(Kbar, Dbar) = (2 ||xi^2||_q, (1 + delta) ||xi||_q^2)`` for ``X = A xi``.

    Innovations are rescaled to unit variance first, which leaves the
    normalized constants unchanged.  Needs ``E|xi|^{4 + 2 delta} < inf``.
    """
    q = _q(delta)
    inn = _unit(innovation)
    if not inn.has_moment(2 * q):
        raise ValueError(
            f"linear bounds at delta={delta:g} need innovation moments of order {2 * q:g}"
        )
    Kbar = 2.0 * inn.abs_moment(2 * q) ** (1.0 / q)
    Dbar = (1.0 + delta) * inn.norm(q) ** 2
    return Kbar, Dbar


def quad_bounds(delta, innovation=None, proof_constant=False):
    """``(Cbar, DbarW)`` bounding the moments of ``W`` vectors of a linear process.

    ``proof_constant=True`` swaps ``(2q)^{2q}`` for the smaller ``(2q-1)^{2q}``
    obtained at the end of the derivation.
    """
    q = _q(delta)
    inn = _unit(innovation)
    if not inn.has_moment(4 * q):
        raise ValueError(
            f"quadratic-form bounds at delta={delta:g} need innovation moments of order {4 * q:g}"
        )
    sq_norm_2q = inn.abs_moment(4 * q) ** (1.0 / (2 * q))   # ||xi^2||_{2q}
    n2q = inn.norm(2 * q)
    Cbar = 2.0 * (4.0 * q * sq_norm_2q) ** (2 * q)
    lead = (2 * q - 1) if proof_constant else 2 * q
    DbarW = (4.0 * q) ** q * n2q ** (2 * q) + lead ** (2 * q) * n2q ** (4 * q)
    return Cbar, DbarW


@dataclass(frozen=True)
class RateMoments:
    """Inputs of the rate function: ``K~_0``, ``K~_delta``, ``D~_delta`` and ``E(X^T Sigma X)^{q/2}/f^q``."""

    Ktilde0: float
    Ktilde: float
    Dtilde: float
    EqX: float

    def __post_init__(self):
        if min(self.Ktilde0, self.Ktilde, self.Dtilde, self.EqX) < 0:
            raise ValueError("moment inputs must be nonnegative")

    @classmethod
    def from_raw(cls, K0, K, D, delta, EqX=None):
        """Add the Gaussian constants; ``EqX`` defaults to its bound ``D^q``."""
        q = _q(delta)
        c0, _ = gaussian_bounds(0.0)
        c, d = gaussian_bounds(delta)
        return cls(K0 + c0, K + c, D + d, D ** q if EqX is None else EqX)


def rate_L_blocks(n, psi, delta, moments):
    """The ``psi^2`` and ``psi^q`` terms of ``L_delta(n, psi)`` separately."""
    q = _q(delta)
    m = moments
    block2 = psi ** 2 * (m.Ktilde0 ** 2 / n + m.Ktilde0 / math.sqrt(n))
    blockq = psi ** q * (m.Ktilde ** q / n ** (q - 1) + m.EqX / n ** (delta / 2)
                         + m.Dtilde ** q / n ** delta)
    return block2, blockq


def rate_L(n, psi, delta, moments):
    if psi < 0:
        raise ValueError("psi must be nonnegative")
    b2, bq = rate_L_blocks(n, psi, delta, moments)
    return b2 + bq


def solve_psi_n(n, delta, moments):
    """Unique root of ``L_delta(n, psi) = psi^{-1/2}`` to relative tolerance 1e-12."""
    if max(moments.Ktilde0, moments.Ktilde, moments.Dtilde, moments.EqX) == 0:
        raise ValueError("no finite crossing: all moment inputs are zero")

    def g(logpsi):
        psi = math.exp(logpsi)
        return math.log(rate_L(n, psi, delta, moments)) + 0.5 * logpsi

    lo, hi = -1.0, 1.0
    while g(lo) > 0:
        lo *= 2.0
    while g(hi) < 0:
        hi *= 2.0
    return math.exp(optimize.brentq(g, lo, hi, xtol=1e-13, rtol=1e-15))


def rate_L_dagger(n, delta, moments):
    """``(L_dagger, psi_n)`` for the diagonal-free statistic; ``psi_n = inf`` when ``L_dagger = 0``."""
    q = _q(delta)
    L = moments.EqX / n ** (delta / 2) + moments.Dtilde ** q / n ** delta
    psi = math.inf if L == 0 else L ** (-1.0 / (q + 0.5))
    return L, psi


@dataclass
class MomentDiagnostics:
    delta: float
    n: int
    K_delta_hat: float
    K_delta_se: float
    D_delta_hat: float
    D_delta_se: float
    K0_hat: float
    EqX_hat: float
    c_delta: float
    d_delta: float
    Kbar: Optional[float]
    Dbar: Optional[float]
    Cbar: Optional[float]
    DbarW: Optional[float]
    DbarW_proof: Optional[float]
    L_value: float
    psi_n: float
    L_dagger: float
    psi_n_dagger: float

    def to_dict(self):
        return asdict(self)


def diagnose(model, n, delta, N, seed, innovation=None):
    """Estimate the moment constants of ``model`` and evaluate bounds and rates at sample size ``n``.

    ``innovation`` enables the linear-process bounds; it defaults to the
    model's own ``innovation`` attribute when present.
    """
    K, K_se = empirical_K_delta(model, delta, N, seed, return_se=True)
    D, D_se = empirical_D_delta(model, delta, N, seed + 1, return_se=True)
    K0 = empirical_K_delta(model, 0.0, N, seed)
    EqX = empirical_EqX(model, delta, N, seed + 2)
    c, d = gaussian_bounds(delta)
    innovation = innovation or getattr(model, "innovation", None)
    if innovation is None and model.name == "gaussian":
        innovation = Innovation.normal()
    Kbar = Dbar = Cbar = DbarW = DbarW_proof = None
    if innovation is not None:
        try:
            Kbar, Dbar = linear_bounds(delta, innovation)
        except ValueError:
            pass
        try:
            Cbar, DbarW = quad_bounds(delta, innovation)
            _, DbarW_proof = quad_bounds(delta, innovation, proof_constant=True)
        except ValueError:
            pass
    moments = RateMoments.from_raw(K0, K, D, delta, EqX)
    psi = solve_psi_n(n, delta, moments)
    Ld, psid = rate_L_dagger(n, delta, moments)
    return MomentDiagnostics(delta, n, K, K_se, D, D_se, K0, EqX, c, d, Kbar, Dbar, Cbar, DbarW,
                             DbarW_proof, rate_L(n, psi, delta, moments), psi, Ld, psid)
