"""Seeded data generators and their analytic covariances.

Rows are produced in fixed blocks of ``ROW_BLOCK`` rows, each block (and each
random component within it) drawing from its own counter-based stream, so
output depends only on the arguments and the seed.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import signal, special

from . import _rng
from .spectral import check_cov, eigh_of


@dataclass(frozen=True)
class Innovation:
    """Distribution of the i.i.d. innovations driving linear-type models.

    ``kind`` is one of ``"standard-normal"``, ``"student-t"``,
    ``"bernoulli-sparse"`` or ``"custom"``.  Student-t draws are raw (variance
    ``df/(df-2)``) unless ``standardize`` is set.
    """

    kind: str = "standard-normal"
    df: Optional[float] = None
    ell: Optional[float] = None
    standardize: bool = False
    sampler: Optional[Callable] = field(default=None, compare=False, repr=False)
    custom_variance: Optional[float] = None
    custom_abs_moment: Optional[Callable] = field(default=None, compare=False, repr=False)
    custom_max_order: float = math.inf

    def __post_init__(self):
        if self.kind == "student-t":
            if self.df is None or self.df <= 2:
                raise ValueError("student-t innovations need df > 2")
        elif self.kind == "bernoulli-sparse":
            if self.ell is None or self.ell < 2:
                raise ValueError("bernoulli-sparse innovations need ell >= 2")
        elif self.kind == "custom":
            if self.sampler is None or self.custom_variance is None:
                raise ValueError("custom innovations need a sampler and a variance")
        elif self.kind != "standard-normal":
            raise ValueError(f"unknown innovation kind {self.kind!r}")

    @classmethod
    def normal(cls):
        return cls("standard-normal")

    @classmethod
    def student_t(cls, df=5, standardize=False):
        return cls("student-t", df=float(df), standardize=standardize)

    @classmethod
    def sparse_bernoulli(cls, ell):
        return cls("bernoulli-sparse", ell=float(ell))

    @classmethod
    def custom(cls, sampler, variance, abs_moment=None, max_order=math.inf):
        return cls("custom", sampler=sampler, custom_variance=float(variance),
                   custom_abs_moment=abs_moment, custom_max_order=max_order)

    @property
    def _scale(self):
        if self.kind == "student-t" and self.standardize:
            return math.sqrt((self.df - 2.0) / self.df)
        return 1.0

    @property
    def variance(self):
        if self.kind == "student-t":
            return 1.0 if self.standardize else self.df / (self.df - 2.0)
        if self.kind == "custom":
            return self.custom_variance
        return 1.0

    @property
    def max_order(self):
        """Supremum of the orders ``r`` with ``E|xi|^r`` finite (exclusive for student-t)."""
        if self.kind == "student-t":
            return self.df
        if self.kind == "custom":
            return self.custom_max_order
        return math.inf

    def has_moment(self, r):
        return r < self.max_order

    def draw(self, rng, shape):
        if self.kind == "standard-normal":
            return rng.standard_normal(shape)
        if self.kind == "student-t":
            return rng.standard_t(self.df, shape) * self._scale
        if self.kind == "bernoulli-sparse":
            ell = self.ell
            B = rng.random(shape) < 1.0 / ell
            return (ell * B - 1.0) / math.sqrt(ell - 1.0)
        return np.asarray(self.sampler(rng, shape), dtype=float)

    def abs_moment(self, r):
        """``E|xi|^r``; raises ``ValueError`` if it is infinite or unknown."""
        if not self.has_moment(r):
            raise ValueError(f"{self.kind} innovations have no finite moment of order {r:g}")
        if self.kind == "standard-normal":
            return normal_abs_moment(r)
        if self.kind == "student-t":
            nu = self.df
            m = (nu ** (r / 2) * special.gamma((r + 1) / 2) * special.gamma((nu - r) / 2)
                 / (math.sqrt(math.pi) * special.gamma(nu / 2)))
            return float(m * self._scale ** r)
        if self.kind == "bernoulli-sparse":
            ell = self.ell
            return ((ell - 1.0) ** (r / 2) / ell + (1.0 - 1.0 / ell) * (ell - 1.0) ** (-r / 2))
        if self.custom_abs_moment is None:
            raise ValueError("custom innovation does not declare its moments")
        return float(self.custom_abs_moment(r))

    def norm(self, r):
        """``||xi||_r = (E|xi|^r)^{1/r}``."""
        return self.abs_moment(r) ** (1.0 / r)

    def standardized(self):
        """The same law rescaled to unit variance."""
        if self.kind == "student-t":
            return Innovation.student_t(self.df, standardize=True)
        if self.kind == "custom" and self.custom_variance != 1.0:
            s = math.sqrt(self.custom_variance)
            am = self.custom_abs_moment
            return Innovation.custom(
                lambda rng, shape: self.sampler(rng, shape) / s, 1.0,
                None if am is None else (lambda r: am(r) / s ** r), self.custom_max_order)
        return self

    @property
    def nu(self):
        """``Var(xi^2)`` of the unit-variance version."""
        return self.standardized().abs_moment(4) - 1.0

    def describe(self):
        d = {"kind": self.kind}
        if self.df is not None:
            d["df"] = self.df
        if self.ell is not None:
            d["ell"] = self.ell
        if self.standardize:
            d["standardize"] = True
        return d


def normal_abs_moment(r):
    """``E|xi|^r = 2^{r/2} Gamma((r+1)/2) / sqrt(pi)`` for standard normal ``xi``."""
    return float(2.0 ** (r / 2) * special.gamma((r + 1) / 2) / math.sqrt(math.pi))


T5 = Innovation.student_t(5)


def _row_draws(n, width, seed, tag, draw, component=0):
    out = np.empty((n, width))
    for b, start, stop in _rng.blocks(n, _rng.ROW_BLOCK):
        rng = _rng.stream(seed, tag, b, component)
        out[start:stop] = draw(rng, (stop - start, width))
    return out


def sym_sqrt(Sigma):
    lam, Q = eigh_of(Sigma)
    return (Q * np.sqrt(lam)) @ Q.T


def gen_gaussian(n, p, Sigma, seed):
    """``n`` i.i.d. rows from ``N(0, Sigma)`` via the symmetric square root."""
    Sigma = check_cov(Sigma, "Sigma")
    if Sigma.shape[0] != p:
        raise ValueError(f"Sigma is {Sigma.shape[0]}x{Sigma.shape[0]}, expected p = {p}")
    Z = _row_draws(n, p, seed, _rng.GAUSSIAN, lambda rng, s: rng.standard_normal(s))
    d = np.diag(Sigma)
    if np.count_nonzero(Sigma - np.diag(d)) == 0 and np.all(d >= 0):
        return Z * np.sqrt(d)  # diagonal: skip the eigendecomposition and the matmul
    return Z @ sym_sqrt(Sigma)


def model1_coefficients(beta, K):
    if not beta > 0.5:
        raise ValueError(f"beta must exceed 1/2 (square-summable coefficients), got {beta!r}")
    if K < 0:
        raise ValueError("truncation K must be >= 0")
    return (np.arange(K + 1) + 1.0) ** (-float(beta))


def gen_model1(n, p, beta, K=2000, innovation=T5, seed=0):
    """Truncated linear process ``X_ij = sum_{k<=K} (k+1)^{-beta} xi_{i, j-k}``.

    Each row convolves its own innovation buffer of length ``p + K``; buffer
    offset ``j - k + K`` holds ``xi_{i, j-k}``.
    """
    c = model1_coefficients(beta, K)
    xi = _row_draws(n, p + K, seed, _rng.MODEL1, innovation.draw)
    if K == 0:
        return xi * c[0]
    return signal.fftconvolve(xi, c[None, :], mode="valid", axes=1)


def model1_covariance(p, beta, K=2000, innovation_variance=T5.variance):
    """Toeplitz covariance of the truncated Model-1 process."""
    c = model1_coefficients(beta, K)
    acov = np.zeros(p)
    for h in range(min(p, K + 1)):
        acov[h] = innovation_variance * np.dot(c[: K + 1 - h], c[h:])
    idx = np.arange(p)
    return acov[np.abs(idx[:, None] - idx[None, :])]


def gen_model2(n, p, a, seed=0):
    """Factor model ``X_ij = sqrt(4 + U_i^2) xi_ij + a (2 Z_i + Z_i^2 - 1)``."""
    U = _row_draws(n, 1, seed, _rng.MODEL2, lambda rng, s: rng.uniform(-1.0, 1.0, s), 0)
    Z = _row_draws(n, 1, seed, _rng.MODEL2, lambda rng, s: rng.standard_normal(s), 1)
    xi = _row_draws(n, p, seed, _rng.MODEL2, lambda rng, s: rng.standard_normal(s), 2)
    return np.sqrt(4.0 + U * U) * xi + a * (2.0 * Z + Z * Z - 1.0)


def model2_covariance(p, a):
    """``(13/3) Id + 6 a^2 11^T``: ``E U^2 = 1/3`` and ``Var(2Z + Z^2 - 1) = 6``."""
    return (13.0 / 3.0) * np.eye(p) + 6.0 * a * a * np.ones((p, p))


def gen_general_linear(n, A, innovation=None, seed=0):
    """Rows ``A xi_i`` with i.i.d. innovation vectors ``xi_i``."""
    innovation = innovation or Innovation.normal()
    A = np.atleast_2d(np.asarray(A, dtype=float))
    xi = _row_draws(n, A.shape[1], seed, _rng.LINEAR, innovation.draw)
    return xi @ A.T


def linear_covariance(A, innovation=None):
    innovation = innovation or Innovation.normal()
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return innovation.variance * (A @ A.T)


def gen_sparse_bernoulli(n, p, beta, seed=0):
    """``X_ij = (ell B_ij - 1) / sqrt(ell - 1)`` with ``B_ij ~ Bernoulli(1/ell)``, ``ell = p^beta``."""
    if not beta > 0.5:
        raise ValueError("beta must exceed 1/2")
    ell = float(p) ** beta
    if ell < 2:
        raise ValueError(f"p^beta = {ell:g} must be at least 2")
    inn = Innovation.sparse_bernoulli(ell)
    return _row_draws(n, p, seed, _rng.SPARSE, inn.draw)


class DataModel:
    """A data-generating model with (optionally) known covariance."""

    name = "model"

    def sample(self, n, seed):
        raise NotImplementedError

    def covariance(self):
        """Population covariance, or ``None`` when no closed form is available."""
        return None

    def params(self):
        return {}

    def manifest(self):
        return {"model": self.name, **self.params()}


@dataclass(frozen=True, eq=False)
class GaussianModel(DataModel):
    Sigma: np.ndarray
    name = "gaussian"

    @property
    def p(self):
        return np.asarray(self.Sigma).shape[0]

    def sample(self, n, seed):
        return gen_gaussian(n, self.p, self.Sigma, seed)

    def covariance(self):
        return np.asarray(self.Sigma, dtype=float)

    def params(self):
        return {"p": self.p}


@dataclass(frozen=True, eq=False)
class LinearModel(DataModel):
    A: np.ndarray
    innovation: Innovation = field(default_factory=Innovation.normal)
    name = "linear"

    @property
    def p(self):
        return np.asarray(self.A).shape[0]

    def sample(self, n, seed):
        return gen_general_linear(n, self.A, self.innovation, seed)

    def covariance(self):
        return linear_covariance(self.A, self.innovation)

    def params(self):
        return {"p": self.p, "innovation": self.innovation.describe()}


@dataclass(frozen=True)
class Model1(DataModel):
    p: int
    beta: float
    K: int = 2000
    innovation: Innovation = T5
    name = "model1"

    def sample(self, n, seed):
        return gen_model1(n, self.p, self.beta, self.K, self.innovation, seed)

    def covariance(self):
        return model1_covariance(self.p, self.beta, self.K, self.innovation.variance)

    def params(self):
        return {"p": self.p, "beta": self.beta, "K": self.K,
                "innovation": self.innovation.describe()}


@dataclass(frozen=True)
class Model2(DataModel):
    p: int
    a: float
    name = "model2"

    def sample(self, n, seed):
        return gen_model2(n, self.p, self.a, seed)

    def covariance(self):
        return model2_covariance(self.p, self.a)

    def params(self):
        return {"p": self.p, "a": self.a}


@dataclass(frozen=True)
class SparseBernoulliModel(DataModel):
    p: int
    beta: float
    name = "sparse-bernoulli"

    def sample(self, n, seed):
        return gen_sparse_bernoulli(n, self.p, self.beta, seed)

    def covariance(self):
        return np.eye(self.p)

    def params(self):
        return {"p": self.p, "beta": self.beta}
