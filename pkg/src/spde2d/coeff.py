"""Minimum-contrast estimation of (kappa, eta, theta2) from triple increments.

The squared triple increments, normalised by ``eps^2 N dt^alpha`` and summed
over time, concentrate on ``exp(-kappa ybar_j - eta zbar_k) phi_{r,alpha}(theta2)``;
the estimator fits that surface to the observed cell statistics by least
squares.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize

from .errors import CutoffError, DegenerateDataError, GridAlignmentError, InvalidConfigError
from .model import NoiseSpec, SpdeParams, derived_coeffs, eigenvalue, eigenfunction_1d, mu_weight
from .phi import phi
from .simulate import FieldData

ALIGN_TOL = 1e-9


def _grid_index(x: float, M: int) -> int:
    x = float(x)
    v = x * M
    k = round(v)
    if abs(v - k) > ALIGN_TOL:
        raise GridAlignmentError(f"thinned node {x!r} is not on the 1/{M} grid (x*M = {v!r})")
    return int(k)


@dataclass(frozen=True)
class SpatialThinning:
    """Interior band ``[b, 1-b]^2`` cut into ``m1 x m1`` cells of side ``delta``.

    Every thinned node must be an observation node; misaligned configurations
    are rejected rather than snapped, since snapping would silently change r.
    """

    b: float
    m1: int
    M1: int
    M2: int
    N: int

    def __post_init__(self):
        if not 0 < self.b < 0.5:
            raise InvalidConfigError("b must lie in (0, 1/2)")
        if self.m1 < 1:
            raise InvalidConfigError("m1 must be >= 1")
        if self.N < 1:
            raise InvalidConfigError("N must be >= 1")
        self.y_index  # alignment check
        self.z_index

    @property
    def m2(self) -> int:
        return self.m1

    @property
    def m(self) -> int:
        return self.m1 * self.m2

    @property
    def delta(self) -> float:
        return (1.0 - 2.0 * self.b) / self.m1

    @property
    def r(self) -> float:
        return self.delta * math.sqrt(self.N)

    @property
    def nodes(self) -> np.ndarray:
        return self.b + np.arange(self.m1 + 1) * self.delta

    @property
    def midpoints(self) -> np.ndarray:
        y = self.nodes
        return (y[:-1] + y[1:]) / 2

    @property
    def y_index(self) -> np.ndarray:
        return np.array([_grid_index(v, self.M1) for v in self.nodes])

    @property
    def z_index(self) -> np.ndarray:
        return np.array([_grid_index(v, self.M2) for v in self.nodes])

    @classmethod
    def for_field(cls, b: float, m1: int, fld: FieldData) -> "SpatialThinning":
        return cls(b, m1, fld.M1, fld.M2, fld.N)


def _check_matches(fld: FieldData, th: SpatialThinning):
    if (fld.M1, fld.M2, fld.N) != (th.M1, th.M2, th.N):
        raise GridAlignmentError("thinning was built for a different observation grid")


def triple_increment(fld: FieldData, th: SpatialThinning, i: int, j: int, k: int) -> float:
    """Eight-point alternating sum over the (time, y, z) cube ending at (i, j, k)."""
    _check_matches(fld, th)
    if not (1 <= i <= th.N and 1 <= j <= th.m1 and 1 <= k <= th.m2):
        raise InvalidConfigError("triple increment index out of range")
    yi, zi = th.y_index, th.z_index
    X = fld.values

    def d2(t):
        return (X[t, yi[j], zi[k]] - X[t, yi[j - 1], zi[k]]
                - (X[t, yi[j], zi[k - 1]] - X[t, yi[j - 1], zi[k - 1]]))

    return float(d2(i) - d2(i - 1))


def triple_increments(fld: FieldData, th: SpatialThinning) -> np.ndarray:
    """All increments, shape (N, m1, m2)."""
    _check_matches(fld, th)
    sub = fld.values[:, th.y_index][:, :, th.z_index]
    return np.diff(np.diff(np.diff(sub, axis=0), axis=1), axis=2)


@dataclass(frozen=True)
class IncrementStats:
    V: np.ndarray
    r: float
    alpha: float
    epsilon: float
    N: int


def increment_stats(fld: FieldData, th: SpatialThinning, alpha: float, epsilon: float) -> IncrementStats:
    if not epsilon > 0:
        raise InvalidConfigError("epsilon must be > 0 to normalise the increments")
    T = triple_increments(fld, th)
    N = th.N
    V = np.einsum("ijk,ijk->jk", T, T) / (epsilon ** 2 * N * (1.0 / N) ** alpha)
    return IncrementStats(V, th.r, alpha, epsilon, N)


def expected_surface(kappa, eta, theta2, th: SpatialThinning, alpha: float) -> np.ndarray:
    yb = th.midpoints
    return np.exp(-kappa * yb[:, None] - eta * yb[None, :]) * phi(th.r, alpha, theta2)


def contrast_u(stats: IncrementStats, kappa: float, eta: float, theta2: float, th: SpatialThinning) -> float:
    if not theta2 > 0:
        raise InvalidConfigError("theta2 must be > 0")
    diff = stats.V - expected_surface(kappa, eta, theta2, th, stats.alpha)
    return float(np.mean(diff * diff))


@dataclass(frozen=True)
class XiBox:
    kappa: tuple = (-10.0, 10.0)
    eta: tuple = (-10.0, 10.0)
    theta2: tuple = (0.01, 5.0)

    def __post_init__(self):
        for name in ("kappa", "eta", "theta2"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise InvalidConfigError(f"empty {name} interval")
        if self.theta2[0] <= 0:
            raise InvalidConfigError("theta2 lower bound must be > 0")

    def bounds(self):
        return [self.kappa, self.eta, self.theta2]

    def clamp(self, p):
        return np.array([min(max(v, lo), hi) for v, (lo, hi) in zip(p, self.bounds())])


@dataclass
class CoeffEstimate:
    kappa_hat: float
    eta_hat: float
    theta2_hat: float
    contrast: float
    iterations: int = 0
    at_bound: dict = field(default_factory=dict)
    budget_exhausted: bool = False
    starts: list = field(default_factory=list)  # (kappa, eta, theta2, contrast) per start

    @property
    def theta1_hat(self) -> float:
        return self.kappa_hat * self.theta2_hat

    @property
    def eta1_hat(self) -> float:
        return self.eta_hat * self.theta2_hat

    @property
    def flagged(self) -> bool:
        return self.budget_exhausted or any(self.at_bound.values())


def initial_guess(stats: IncrementStats, th: SpatialThinning, box: XiBox):
    """Log-linear least squares for (log phi, kappa, eta), then invert phi."""
    V = stats.V
    yb = th.midpoints
    Y, Z = np.meshgrid(yb, yb, indexing="ij")
    keep = V > 0
    if keep.sum() < max(3, 0.5 * V.size):
        raise DegenerateDataError(f"{V.size - keep.sum()} of {V.size} cells are nonpositive")
    A = np.column_stack([np.ones(keep.sum()), -Y[keep], -Z[keep]])
    (c, kappa, eta), *_ = np.linalg.lstsq(A, np.log(V[keep]), rcond=None)
    target = math.exp(c)
    lo, hi = box.theta2
    g = lambda t: math.log(phi(stats.r, stats.alpha, t)) - c
    glo, ghi = g(lo), g(hi)
    # phi is strictly decreasing in theta2
    if glo <= 0:
        theta2 = lo
    elif ghi >= 0:
        theta2 = hi
    else:
        theta2 = brentq(g, lo, hi, xtol=1e-12, rtol=1e-12)
    return box.clamp([kappa, eta, theta2]), target


def _initial_simplex(start, box: XiBox):
    step = np.array([0.1, 0.1, 0.1 * start[2]])
    upper = np.array([hi for _, hi in box.bounds()])
    step = np.where(start + step <= upper, step, -step)
    return np.vstack([start] + [start + np.eye(3)[q] * step[q] for q in range(3)])


JITTER = np.array([[0.0, 0.0, 1.0], [0.3, -0.3, 1.15], [-0.3, 0.3, 0.87]])


def fit_coeff(
    stats: IncrementStats,
    th: SpatialThinning,
    box: XiBox = XiBox(),
    max_iter: int = 4000,
    xatol: float = 1e-10,
    fatol: float = 1e-16,
) -> CoeffEstimate:
    """Multi-start bounded Nelder-Mead on the contrast.

    Deterministic: the three starts are fixed offsets of the log-linear
    initial guess.
    """
    if stats.V.size < 4:
        raise InvalidConfigError("need at least 4 cells")
    x0, _ = initial_guess(stats, th, box)
    f = lambda p: contrast_u(stats, p[0], p[1], p[2], th)
    best = None
    per_start = []
    for jit in JITTER:
        start = box.clamp([x0[0] + jit[0], x0[1] + jit[1], x0[2] * jit[2]])
        simplex = _initial_simplex(start, box)
        res = minimize(f, start, method="Nelder-Mead", bounds=box.bounds(),
                       options={"initial_simplex": simplex, "maxiter": max_iter, "maxfev": 2 * max_iter,
                                "xatol": xatol, "fatol": fatol})
        per_start.append((*map(float, res.x), float(res.fun)))
        if best is None or res.fun < best.fun:
            best = res
    k, e, t = (float(v) for v in best.x)
    flags = {}
    for name, v, (lo, hi) in zip(("kappa", "eta", "theta2"), (k, e, t), box.bounds()):
        tol = 1e-6 * (hi - lo)
        flags[name] = bool(v - lo <= tol or hi - v <= tol)
    return CoeffEstimate(k, e, t, float(best.fun), int(best.nit), flags, not best.success, per_start)


def expectation_stats(params: SpdeParams, th: SpatialThinning, alpha: float, epsilon: float = 1.0) -> IncrementStats:
    """Cell statistics set exactly to their leading-order expectation."""
    d = derived_coeffs(params)
    V = expected_surface(d.kappa, d.eta, params.theta2, th, alpha)
    return IncrementStats(V, th.r, alpha, epsilon, th.N)


# ---- exact covariance of triple increments for a truncated field ----

def _cell_diffs(l, nodes, a):
    e = eigenfunction_1d(l[None, :], nodes[:, None], a)
    return e[1:] - e[:-1]  # (cells, modes)


def _phi_sums(params, noise, th, L, j, k, jp, kp, lags):
    """Phi^{jk}_{j'k'} (lag None) and Phi^{jk}_{J,j'k'} for each J in ``lags``."""
    d = derived_coeffs(params)
    l = np.arange(1, L + 1)
    dy = _cell_diffs(l, th.nodes, d.kappa)
    dz = _cell_diffs(l, th.nodes, d.eta)
    geo = np.outer(dy[j - 1] * dy[jp - 1], dz[k - 1] * dz[kp - 1])
    lam = eigenvalue(params, l[:, None], l[None, :])
    mu = mu_weight(noise, l[:, None], l[None, :])
    dt = 1.0 / th.N
    one = -np.expm1(-lam * dt)
    base = one / (lam * mu ** noise.alpha) * geo
    out = [base]
    for J in lags:
        out.append(base * one * np.exp(-J * lam * dt))
    return out


def cov_triple_increment_oracle(
    params: SpdeParams,
    noise: NoiseSpec,
    th: SpatialThinning,
    i: int, ip: int, j: int, k: int, jp: int, kp: int,
    L: int,
    rtol: float = 0.1,
) -> float:
    """Cov[T_{i,j,k} X, T_{i',j',k'} X] from the truncated Phi lattice sums.

    The deterministic initial condition does not contribute.  Raises
    :class:`CutoffError` when dropping the upper half of the modes changes the
    result by more than ``rtol`` times the variance scale Phi^{jk}_{jk}.
    """
    for v, hi in ((i, th.N), (ip, th.N), (j, th.m1), (jp, th.m1), (k, th.m2), (kp, th.m2)):
        if not 1 <= v <= hi:
            raise InvalidConfigError("index out of range")
    if L < 4:
        raise CutoffError("cutoff L must be at least 4")
    if i == ip:
        lags = [2 * (i - 1)]
    else:
        lags = [abs(i - ip) - 1, i + ip - 2]

    def combine(terms, upto):
        s = [t[:upto, :upto].sum() for t in terms]
        if i == ip:
            return s[0] - 0.5 * s[1]
        return -0.5 * (s[1] + s[2])

    terms = _phi_sums(params, noise, th, L, j, k, jp, kp, lags)
    full, half = combine(terms, L), combine(terms, L // 2)
    scale = abs(_phi_sums(params, noise, th, L, j, k, j, k, [])[0].sum())
    if abs(full - half) > rtol * scale:
        raise CutoffError(f"truncation change {abs(full - half):.3g} exceeds {rtol:g} x {scale:.3g}; raise L")
    return noise.epsilon ** 2 * float(full)
