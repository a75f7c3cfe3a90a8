"""Eigen-structure of covariance matrices and the trace functionals f_k.

``f_k = (tr Sigma^k)^(1/k)``; ``f = f_2`` is the Frobenius norm and ``f_1`` the
trace.  Every statistic in the package is normalized by these.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateEstimateError

SYMMETRY_RTOL = 1e-10
PSD_RTOL = 1e-8
WEIGHTS_ATOL = 1e-10


def check_cov(M, name="covariance matrix"):
    """Validate a covariance matrix and return its symmetrized float copy.

    Raises ``ValueError`` for non-square, non-finite or asymmetric input.
    Positive semi-definiteness is checked by :func:`spectrum_of`.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    scale = np.max(np.abs(M))
    asym = np.max(np.abs(M - M.T))
    if asym > SYMMETRY_RTOL * max(scale, np.finfo(float).tiny):
        raise ValueError(
            f"{name} is not symmetric: max |M - M^T| = {asym:.3g} exceeds "
            f"{SYMMETRY_RTOL:g} relative to max |M| = {scale:.3g}"
        )
    return 0.5 * (M + M.T)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Nonincreasing, nonnegative eigenvalues with memoized ``f_k``."""

    eigenvalues: np.ndarray
    _f_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float).ravel()
        if lam.size == 0:
            raise ValueError("empty spectrum")
        if np.any(lam < 0):
            raise ValueError("spectrum must be nonnegative")
        if np.any(np.diff(lam) > 0):
            raise ValueError("spectrum must be nonincreasing")
        lam.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)

    @classmethod
    def from_values(cls, values):
        """Build from unsorted eigenvalues, clamping negatives to zero."""
        lam = np.clip(np.asarray(values, dtype=float).ravel(), 0.0, None)
        return cls(np.sort(lam)[::-1].copy())

    @property
    def p(self):
        return self.eigenvalues.size

    def f(self, k=2):
        return functional_f_k(self, k)


def spectrum_of(M):
    """Eigenvalues of a covariance matrix, largest first.

    Small negative eigenvalues produced by round-off (above ``-1e-8`` times the
    largest) are clamped to zero; anything more negative is rejected.
    """
    S = check_cov(M)
    lam = np.linalg.eigvalsh(S)[::-1]
    top = max(lam[0], 0.0)
    if lam[-1] < -PSD_RTOL * top - np.finfo(float).tiny:
        raise ValueError(
            f"covariance matrix is not positive semi-definite: smallest eigenvalue "
            f"{lam[-1]:.3g}, largest {lam[0]:.3g}"
        )
    return Spectrum(np.clip(lam, 0.0, None).copy())


def eigh_of(M):
    """Clamped eigenvalues (largest first) with matching orthonormal eigenvectors."""
    S = check_cov(M)
    lam, Q = np.linalg.eigh(S)
    lam, Q = lam[::-1], Q[:, ::-1]
    if lam[-1] < -PSD_RTOL * max(lam[0], 0.0) - np.finfo(float).tiny:
        raise ValueError("covariance matrix is not positive semi-definite")
    return np.clip(lam, 0.0, None), Q


def functional_f_k(s, k):
    """``(sum_j lambda_j^k)^(1/k)`` for a :class:`Spectrum` (or raw eigenvalues)."""
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    k = int(k)
    if not isinstance(s, Spectrum):
        s = Spectrum.from_values(s)
    cache = s._f_cache
    if k not in cache:
        lam = s.eigenvalues
        top = lam[0]
        if top == 0:
            cache[k] = 0.0
        else:
            # scale by the top eigenvalue so lam**k cannot overflow
            cache[k] = float(top * np.sum((lam / top) ** k) ** (1.0 / k))
    return cache[k]


def check_weights(a, atol=WEIGHTS_ATOL):
    """Validate mixture weights: nonnegative, nonincreasing, unit sum of squares."""
    a = np.asarray(a, dtype=float).ravel()
    if a.size == 0:
        raise ValueError("empty weight vector")
    if not np.all(np.isfinite(a)) or np.any(a < 0):
        raise ValueError("weights must be finite and nonnegative")
    if np.any(np.diff(a) > atol):
        raise ValueError("weights must be nonincreasing")
    ss = float(np.sum(a * a))
    if abs(ss - 1.0) > atol:
        raise ValueError(f"weights must satisfy sum a_j^2 = 1, got {ss!r}")
    return a


def as_weights(values):
    """Sort descending and rescale arbitrary nonnegative numbers into mixture weights."""
    a = np.sort(np.abs(np.asarray(values, dtype=float).ravel()))[::-1]
    norm = np.sqrt(np.sum(a * a))
    if norm == 0:
        raise DegenerateEstimateError("degenerate covariance: all weights are zero")
    return a / norm


def normalized_weights(s):
    """Mixture weights ``lambda_j / f``."""
    if not isinstance(s, Spectrum):
        s = Spectrum.from_values(s)
    f = functional_f_k(s, 2)
    if f == 0:
        raise DegenerateEstimateError("degenerate covariance: all eigenvalues are zero")
    a = s.eigenvalues / f
    # renormalize to absorb the rounding in f
    return a / np.sqrt(np.sum(a * a))


def spectral_norm(M):
    return float(np.linalg.norm(np.asarray(M, dtype=float), 2))
