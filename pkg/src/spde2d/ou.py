"""Small-dispersion Ornstein-Uhlenbeck process: exact simulation and the
quasi-likelihood contrast with its minimisers.

    dx(t) = -lambda x(t) dt + epsilon mu^{-alpha/2} dw(t)

observed at ``t = i h``, ``h = 1/n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from . import rng
from .errors import DegenerateDataError, InvalidConfigError

TAYLOR_CUTOFF = 1e-12


def var_factor(lam, h):
    """(1 - exp(-2 lam h)) / (2 lam), continuous through lam = 0 (value h).

    Valid for negative ``lam`` as well.
    """
    lam = np.asarray(lam, dtype=float)
    x = lam * h
    small = np.abs(x) < TAYLOR_CUTOFF
    safe = np.where(small, 1.0, lam)
    out = np.where(small, h * (1.0 - x), -np.expm1(-2.0 * safe * h) / (2.0 * safe))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class OuParams:
    lam: float
    mu: float
    alpha: float
    epsilon: float
    x0: float
    n: int

    def __post_init__(self):
        if not self.mu > 0:
            raise InvalidConfigError("mu must be > 0")
        if not 0 < self.alpha < 3:
            raise InvalidConfigError("alpha must lie in (0, 3)")
        if self.x0 == 0:
            raise InvalidConfigError("x0 must be nonzero")
        if self.n < 1:
            raise InvalidConfigError("n must be >= 1")

    @property
    def h(self) -> float:
        return 1.0 / self.n


@dataclass(frozen=True)
class OuPath:
    values: np.ndarray
    h: float

    @property
    def n(self) -> int:
        return len(self.values) - 1


@dataclass
class OuFit:
    lam: float
    mu: Optional[float]
    contrast: float
    at_bound: dict = field(default_factory=dict)

    @property
    def flagged(self) -> bool:
        return any(self.at_bound.values())


def simulate_ou(params: OuParams, seed: int) -> OuPath:
    return OuPath(simulate_ou_many(params, [seed])[0], params.h)


def simulate_ou_many(params: OuParams, seeds) -> np.ndarray:
    """Exact paths for each seed, shape (len(seeds), n + 1)."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    h = params.h
    a = math.exp(-params.lam * h)
    sd = params.epsilon * params.mu ** (-params.alpha / 2) * math.sqrt(var_factor(params.lam, h))
    keys = rng.derive_many(rng.TAG_OU, seeds)
    z = rng.normals(keys, params.n)
    x = np.empty((len(seeds), params.n + 1))
    x[:, 0] = params.x0
    for i in range(1, params.n + 1):
        x[:, i] = a * x[:, i - 1] + sd * z[:, i - 1]
    return x


def residual_energy(lam: float, x: np.ndarray, h: float) -> float:
    x = np.asarray(x, dtype=float)
    r = x[1:] - math.exp(-lam * h) * x[:-1]
    return float(r @ r)


def contrast_v(lam: float, mu: float, x, epsilon: float, alpha: float, h: float) -> float:
    """Quasi-likelihood contrast built from the exact one-step transition.

    sum_i (x_i - e^{-lam h} x_{i-1})^2 / (eps^2 c(lam) / mu^alpha)
        + n log(c(lam) / (mu^alpha h)),   c(lam) = (1 - e^{-2 lam h}) / (2 lam)
    """
    if not mu > 0:
        raise InvalidConfigError("mu must be > 0")
    x = np.asarray(x, dtype=float)
    n = len(x) - 1
    c = var_factor(lam, h)
    mua = mu ** alpha
    return residual_energy(lam, x, h) * mua / (epsilon * epsilon * c) + n * math.log(c / (mua * h))


def profiled_mu(lam: float, x, epsilon: float, alpha: float, h: float) -> float:
    """Stationary point in mu: mu^alpha = n eps^2 c(lam) / S(lam)."""
    x = np.asarray(x, dtype=float)
    n = len(x) - 1
    s = residual_energy(lam, x, h)
    if s <= 0:
        raise DegenerateDataError("zero residual energy; mu is not identifiable")
    return (n * epsilon * epsilon * var_factor(lam, h) / s) ** (1.0 / alpha)


def _scan_then_brent(f, lo: float, hi: float, xtol: float, grid: int = 201):
    pts = np.linspace(lo, hi, grid)
    vals = np.array([f(p) for p in pts])
    if not np.isfinite(vals).any():
        raise DegenerateDataError("contrast is non-finite over the whole search box")
    vals = np.where(np.isfinite(vals), vals, np.inf)
    k = int(np.argmin(vals))
    a, b = pts[max(k - 1, 0)], pts[min(k + 1, grid - 1)]
    res = minimize_scalar(f, bounds=(a, b), method="bounded", options={"xatol": xtol, "maxiter": 500})
    best, fbest = (res.x, res.fun) if res.fun <= vals[k] else (pts[k], vals[k])
    return float(best), float(fbest)


def _near(v, lo, hi, rel=1e-6) -> bool:
    tol = rel * (hi - lo)
    return v - lo <= tol or hi - v <= tol


def fit_ou(
    x,
    epsilon: float,
    alpha: float,
    h: float,
    mu_known: Optional[float] = None,
    lambda_box: tuple[float, float] = (-50.0, 50.0),
    mu_box: tuple[float, float] = (1e-4, 1e3),
    xtol: float = 1e-10,
) -> OuFit:
    """Minimum-contrast estimate of lambda (and mu when ``mu_known`` is None).

    With mu unknown the contrast is profiled analytically in mu and the
    remaining one-dimensional problem is searched over ``lambda_box``.
    """
    x = np.asarray(x, dtype=float)
    n = len(x) - 1
    if n < 2:
        raise InvalidConfigError("need at least 2 transitions")
    if np.all(x[:-1] == 0):
        raise DegenerateDataError("path is identically zero")
    lo, hi = lambda_box

    if mu_known is not None:
        lam, val = _scan_then_brent(lambda l: contrast_v(l, mu_known, x, epsilon, alpha, h), lo, hi, xtol)
        return OuFit(lam, None, val, {"lambda": _near(lam, lo, hi)})

    mlo, mhi = mu_box

    def profiled(lam):
        s = residual_energy(lam, x, h)
        if s <= 0:
            return -np.inf
        mu = min(max(profiled_mu(lam, x, epsilon, alpha, h), mlo), mhi)
        return contrast_v(lam, mu, x, epsilon, alpha, h)

    if residual_energy(lo, x, h) <= 0 and residual_energy(hi, x, h) <= 0:
        raise DegenerateDataError("zero residual energy across the lambda box")
    lam, val = _scan_then_brent(profiled, lo, hi, xtol)
    mu = min(max(profiled_mu(lam, x, epsilon, alpha, h), mlo), mhi)
    return OuFit(lam, mu, val, {"lambda": _near(lam, lo, hi), "mu": _near(mu, mlo, mhi)})
