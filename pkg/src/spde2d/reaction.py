"""Reaction-parameter estimation from a reconstructed coordinate process.

The coordinate process of one mode is approximated from gridded field data
with the closed-form antiderivatives ``g_l`` and the fitted (kappa, eta), and
an OU quasi-likelihood is then fitted to it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .coeff import CoeffEstimate
from .errors import DegenerateDataError, InvalidConfigError
from .model import PI2, ModeIndex, NoiseSpec
from .ou import fit_ou, var_factor
from .simulate import FieldData

DEFAULT_LAMBDA_BOX = (0.01, 50.0)
DEFAULT_MU_BOX = (1e-4, 1e3)


def g_l(x, a: float, l: int):
    """Antiderivative of sqrt2 sin(pi l x) exp(a x / 2)."""
    x = np.asarray(x, dtype=float)
    w = math.pi * l
    out = math.sqrt(2.0) * np.exp(a * x / 2) * ((a / 2) * np.sin(w * x) - w * np.cos(w * x)) / ((a / 2) ** 2 + w * w)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TemporalThinning:
    n: int
    N: int

    def __post_init__(self):
        if not 1 <= self.n <= self.N:
            raise InvalidConfigError(f"need 1 <= n <= N, got n={self.n}, N={self.N}")

    @property
    def stride(self) -> int:
        return self.N // self.n

    @property
    def delta(self) -> float:
        return self.stride / self.N

    @property
    def index(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.stride

    @property
    def times(self) -> np.ndarray:
        return self.index / self.N


@dataclass(frozen=True)
class ApproxCoordinatePath:
    values: np.ndarray
    mode: ModeIndex
    kappa: float
    eta: float
    h: float


def cell_weights(M: int, a: float, l: int) -> np.ndarray:
    """delta_j g_l(a) = g_l(y_j) - g_l(y_{j-1}), j = 1..M."""
    g = g_l(np.arange(M + 1) / M, a, l)
    return np.diff(g)


def approx_coordinate_path(
    fld: FieldData,
    mode,
    kappa_hat: float,
    eta_hat: float,
    thinning: TemporalThinning,
) -> ApproxCoordinatePath:
    """Left-endpoint reconstruction of x_{l1,l2} at the thinned times."""
    mode = ModeIndex.of(*mode)
    if thinning.N != fld.N:
        raise InvalidConfigError("temporal thinning built for a different N")
    wy = cell_weights(fld.M1, kappa_hat, mode.l1)
    wz = cell_weights(fld.M2, eta_hat, mode.l2)
    X = fld.values[thinning.index][:, :-1, :-1]  # X_t(y_{j-1}, z_{k-1})
    vals = np.einsum("ijk,j,k->i", X, wy, wz)
    return ApproxCoordinatePath(vals, mode, float(kappa_hat), float(eta_hat), thinning.delta)


@dataclass
class ReactionEstimate:
    lambda_hat: float
    theta0_hat: float
    mu_hat: Optional[float] = None
    mu0_hat: Optional[float] = None
    sd_lambda: Optional[float] = None
    sd_mu: Optional[float] = None
    contrast: float = float("nan")
    at_bound: dict = field(default_factory=dict)

    @property
    def flagged(self) -> bool:
        return any(self.at_bound.values())


def theta0_from_lambda(lam: float, theta2: float, kappa: float, eta: float, mode) -> float:
    mode = ModeIndex.of(*mode)
    return -lam + theta2 * ((kappa * kappa + eta * eta) / 4 + PI2 * mode.norm2)


def estimate_reaction(
    path: ApproxCoordinatePath,
    coeff: CoeffEstimate,
    noise: NoiseSpec,
    mu0_known: Optional[float] = None,
    lambda_box=DEFAULT_LAMBDA_BOX,
    mu_box=DEFAULT_MU_BOX,
    x0: Optional[float] = None,
) -> ReactionEstimate:
    """Minimum-contrast (lambda, mu) for the chosen mode, mapped to (theta0, mu0).

    ``x0`` is the known initial coefficient used for the asymptotic standard
    deviations; when omitted they are left empty.
    """
    x = np.asarray(path.values, dtype=float)
    if len(x) < 3:
        raise InvalidConfigError("need n >= 2")
    if not np.all(np.isfinite(x)):
        raise DegenerateDataError("non-finite approximate path")
    n = len(x) - 1
    shift = PI2 * path.mode.norm2
    mu_known = None if mu0_known is None else shift + mu0_known
    fit = fit_ou(x, noise.epsilon, noise.alpha, path.h, mu_known=mu_known,
                 lambda_box=lambda_box, mu_box=mu_box)
    theta0 = theta0_from_lambda(fit.lam, coeff.theta2_hat, coeff.kappa_hat, coeff.eta_hat, path.mode)
    mu = mu_known if fit.mu is None else fit.mu
    est = ReactionEstimate(fit.lam, theta0, contrast=fit.contrast, at_bound=dict(fit.at_bound))
    if fit.mu is not None:
        est.mu_hat = fit.mu
        est.mu0_hat = fit.mu - shift
    if x0 is not None and fit.lam > 0:
        G, H, *_ = asymptotic_variances(fit.lam, mu, x0, noise.alpha)
        est.sd_lambda = noise.epsilon / math.sqrt(G)
        if fit.mu is not None:
            est.sd_mu = 1.0 / math.sqrt(n * H)
    return est


def asymptotic_variances(lambda_star: float, mu_star: float, x0: float, alpha: float):
    """(G, H, I, script G, script I) of the limiting normal laws."""
    if x0 == 0:
        raise InvalidConfigError("x0 = 0: the chosen mode carries no signal")
    if not mu_star > 0:
        raise InvalidConfigError("mu must be > 0")
    G = var_factor(lambda_star, 1.0) * mu_star ** alpha * x0 * x0
    H = alpha * alpha / (2 * mu_star * mu_star)
    I = np.diag([G, H])
    return G, H, I, 1.0 / G, np.diag([1.0 / G, 1.0 / H])
