"""The centered chi-square mixture ``V = sum_j a_j (eta_j - 1)``.

``eta_j`` are i.i.d. chi-square(1).  With ``sum a_j^2 = 1`` the law has mean 0
and variance 2.  Sampling squares standard normals drawn from counter-based
streams, so the ``i``-th draw is a pure function of ``(seed, i)`` and two laws
sampled with the same seed are pathwise coupled coordinate by coordinate.
"""

import json
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from . import _rng
from .errors import QuadratureError
from .spectral import check_weights

DEFAULT_MC = 100_000
CF_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class MixtureLaw:
    weights: np.ndarray
    seed: int = 0

    def __post_init__(self):
        a = check_weights(self.weights).copy()
        a.setflags(write=False)
        object.__setattr__(self, "weights", a)
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def p(self):
        return self.weights.size

    def to_json(self):
        return json.dumps({"weights": self.weights.tolist(), "seed": self.seed})

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        return cls(np.asarray(obj["weights"], dtype=float), obj.get("seed", 0))


class EmpiricalCdf:
    """Right-continuous step CDF of a finite sample."""

    def __init__(self, samples):
        x = np.sort(np.asarray(samples, dtype=float).ravel())
        if x.size == 0:
            raise ValueError("empirical CDF needs at least one sample")
        self.sorted_samples = x
        self.sorted_samples.setflags(write=False)

    @property
    def count(self):
        return self.sorted_samples.size

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.searchsorted(self.sorted_samples, t, side="right") / self.count
        return out if out.ndim else float(out)

    def quantile(self, alpha):
        """Smallest atom ``t`` with ``F(t) >= alpha``."""
        if not 0 < alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
        k = math.ceil(alpha * self.count - 1e-9)
        return float(self.sorted_samples[max(k, 1) - 1])

    def ks_distance(self, other):
        """``sup_t |F(t) - G(t)|`` against another EmpiricalCdf or a vectorized CDF callable."""
        if isinstance(other, EmpiricalCdf):
            grid = np.concatenate([self.sorted_samples, other.sorted_samples])
            return float(np.max(np.abs(self(grid) - other(grid))))
        x = self.sorted_samples
        G = np.asarray(other(x), dtype=float)
        upper = np.arange(1, x.size + 1) / x.size
        lower = np.arange(0, x.size) / x.size
        return float(max(np.max(upper - G), np.max(G - lower)))

    def to_csv(self, path):
        x = self.sorted_samples
        np.savetxt(path, np.column_stack([x, self(x)]), delimiter=",",
                   header="t,F", comments="", fmt="%.17g")


def ks_distance(x, y):
    """Two-sample Kolmogorov distance between the empirical CDFs of ``x`` and ``y``."""
    return EmpiricalCdf(x).ks_distance(EmpiricalCdf(y))


def _chi2_draws(seed, block, p):
    """Centered squared normals for one replicate block, shape ``(p, MIXTURE_BLOCK)``.

    Draws are laid out coordinate-major, so coordinate ``j`` of replicate ``i``
    does not depend on ``p`` or on the total number of replicates.
    """
    g = _rng.stream(seed, _rng.MIXTURE, block).standard_normal((p, _rng.MIXTURE_BLOCK))
    g *= g
    g -= 1.0
    return g


def _sample_weights(weights_list, N, seed):
    """Coupled samples for several weight vectors sharing the same chi-square draws."""
    ws = [np.asarray(w, dtype=float) for w in weights_list]
    p_eff = max(int(np.max(np.nonzero(w)[0], initial=-1)) + 1 for w in ws)
    out = np.empty((len(ws), N))
    if p_eff == 0:
        out[:] = 0.0
        return out
    padded = np.zeros((len(ws), p_eff))
    for r, w in enumerate(ws):
        m = min(w.size, p_eff)
        padded[r, :m] = w[:m]
    for b, start, stop in _rng.blocks(N, _rng.MIXTURE_BLOCK):
        eta = _chi2_draws(seed, b, p_eff)
        out[:, start:stop] = (padded @ eta)[:, : stop - start]
    return out


def sample_mixture(law, N):
    """``N`` draws of ``V``; deterministic in ``(law.weights, law.seed)`` and prefix-stable in N."""
    N = int(N)
    if N < 1:
        raise ValueError("N must be at least 1")
    return _sample_weights([law.weights], N, law.seed)[0]


@lru_cache(maxsize=16)
def _cached_sorted(weights_bytes, N, seed):
    w = np.frombuffer(weights_bytes, dtype=float)
    x = np.sort(_sample_weights([w], N, seed)[0])
    x.setflags(write=False)
    return x


def mixture_ecdf(law, N=DEFAULT_MC):
    """EmpiricalCdf of ``N`` Monte Carlo draws (memoized on law, N and seed)."""
    x = _cached_sorted(law.weights.tobytes(), int(N), law.seed)
    cdf = EmpiricalCdf.__new__(EmpiricalCdf)
    cdf.sorted_samples = x
    return cdf


def _imhof_pieces(a, x):
    half_x = 0.5 * x

    def phase(u):
        return 0.5 * np.sum(np.arctan(a * u))

    def envelope(u):
        return u * np.prod((1.0 + (a * u) ** 2) ** 0.25)

    def body(u):
        if u == 0.0:
            return 0.5 * (np.sum(a) - x)
        return math.sin(phase(u) - half_x * u) / envelope(u)

    def tail_cos(u):
        return math.sin(phase(u)) / envelope(u)

    def tail_sin(u):
        return math.cos(phase(u)) / envelope(u)

    return body, tail_cos, tail_sin


def _cf_cdf_scalar(a, t, tol):
    # P(sum a_j eta_j <= x) by Imhof's form of the inversion integral
    x = t + float(np.sum(a))
    if x <= 0:
        return 0.0
    body, tail_cos, tail_sin = _imhof_pieces(a, x)
    omega = 0.5 * x
    cut = max(8.0 * math.pi / omega, 4.0 / a[0])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        i0, e0 = integrate.quad(body, 0.0, cut, limit=2000, epsabs=tol / 10, epsrel=0.0)
        i1, e1 = integrate.quad(tail_cos, cut, np.inf, weight="cos", wvar=omega, limlst=200)
        i2, e2 = integrate.quad(tail_sin, cut, np.inf, weight="sin", wvar=omega, limlst=200)
    err = (e0 + e1 + e2) / math.pi
    if not np.isfinite(err) or err > tol:
        raise QuadratureError(f"CF inversion did not converge at t={t:.6g}", err)
    F = 0.5 - (i0 + i1 - i2) / math.pi
    return min(max(F, 0.0), 1.0)


def _cf_cdf(law, t, tol=CF_TOL):
    a = law.weights[law.weights > 0]
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t_arr.shape)
    for idx, ti in np.ndenumerate(t_arr):
        if ti == np.inf:
            out[idx] = 1.0
        elif ti == -np.inf:
            out[idx] = 0.0
        else:
            out[idx] = _cf_cdf_scalar(a, float(ti), tol)
    return out


def mixture_cdf(law, t, method="monte-carlo", N=DEFAULT_MC, tol=CF_TOL):
    """``P(V <= t)`` by Monte Carlo (``N`` draws) or characteristic-function inversion.

    ``t`` may be a scalar or an array.  The inversion raises
    :class:`~l2infer.errors.QuadratureError` carrying the achieved error when
    it cannot meet ``tol``.
    """
    if method == "monte-carlo":
        out = mixture_ecdf(law, N)(t)
    elif method == "cf-inversion":
        out = _cf_cdf(law, t, tol)
        if np.ndim(t) == 0:
            out = float(out[0])
    else:
        raise ValueError(f"unknown method {method!r}")
    return out


def mixture_quantile(law, alpha, method="monte-carlo", N=DEFAULT_MC, tol=CF_TOL):
    """``inf{t : P(V <= t) >= alpha}``; the order statistic of rank ceil(alpha N) for Monte Carlo."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    if method == "monte-carlo":
        return mixture_ecdf(law, N).quantile(alpha)
    if method != "cf-inversion":
        raise ValueError(f"unknown method {method!r}")
    a = law.weights[law.weights > 0]
    lo = -float(np.sum(a))
    hi = 1.0
    while _cf_cdf_scalar(a, hi, tol) < alpha:
        hi *= 2.0
    return float(optimize.brentq(lambda s: _cf_cdf_scalar(a, s, tol) - alpha, lo, hi, xtol=1e-10))


def cdf_sup_distance(a, b, N=DEFAULT_MC, seed=0):
    """Kolmogorov distance between coupled Monte Carlo CDFs of ``V_a`` and ``V_b``.

    Both laws are driven by the same chi-square draws; shorter weight vectors
    are padded with zeros.
    """
    a = check_weights(a)
    b = check_weights(b)
    va, vb = _sample_weights([a, b], int(N), seed)
    return ks_distance(va, vb)


def density_band_probability(law, t, h, N=DEFAULT_MC):
    """Monte Carlo estimate of ``P(t <= V <= t + h)``; ``t`` may be an array."""
    if h <= 0:
        raise ValueError("h must be positive")
    x = mixture_ecdf(law, N).sorted_samples
    t = np.asarray(t, dtype=float)
    hits = np.searchsorted(x, t + h, side="right") - np.searchsorted(x, t, side="left")
    out = hits / x.size
    return out if out.ndim else float(out)


def band_bound(h):
    """Anti-concentration bound ``sqrt(4 h / pi)`` on any band of width ``h``."""
    return math.sqrt(4.0 * h / math.pi)
