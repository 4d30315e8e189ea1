"""Model parameterisation, eigenstructure and noise spectrum.

The operator ``-A = theta2 * Laplacian + theta1 d/dy + eta1 d/dz + theta0`` on
the unit square with Dirichlet boundary has eigenpairs

    lambda_{l1,l2} = theta2 * (pi^2 (l1^2 + l2^2) + Gamma),
    e_{l1,l2}(y, z) = 2 sin(pi l1 y) sin(pi l2 z) exp(-kappa y / 2 - eta z / 2),

orthonormal under the weight ``exp(kappa y + eta z)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .errors import InvalidConfigError

PI2 = math.pi ** 2


class ModeIndex(NamedTuple):
    l1: int
    l2: int

    @classmethod
    def of(cls, l1: int, l2: int) -> "ModeIndex":
        l1, l2 = int(l1), int(l2)
        if l1 < 1 or l2 < 1:
            raise InvalidConfigError(f"mode indices must be >= 1, got ({l1}, {l2})")
        return cls(l1, l2)

    @property
    def norm2(self) -> int:
        return self.l1 * self.l1 + self.l2 * self.l2


@dataclass(frozen=True)
class ParamBox:
    """Compact box for (theta0, theta1, eta1, theta2)."""

    theta0: tuple[float, float] = (-5.0, 5.0)
    theta1: tuple[float, float] = (-2.0, 2.0)
    eta1: tuple[float, float] = (-2.0, 2.0)
    theta2: tuple[float, float] = (0.01, 5.0)

    def contains(self, p: "SpdeParams") -> bool:
        return all(
            lo <= v <= hi
            for v, (lo, hi) in zip(
                (p.theta0, p.theta1, p.eta1, p.theta2),
                (self.theta0, self.theta1, self.eta1, self.theta2),
            )
        )


DEFAULT_BOX = ParamBox()


@dataclass(frozen=True)
class DerivedCoeffs:
    kappa: float
    eta: float
    gamma_cap: float


@dataclass(frozen=True)
class SpdeParams:
    theta0: float
    theta1: float
    eta1: float
    theta2: float

    def __post_init__(self):
        vals = (self.theta0, self.theta1, self.eta1, self.theta2)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidConfigError(f"non-finite parameter in {vals}")
        if self.theta2 <= 0:
            raise InvalidConfigError(f"theta2 must be > 0, got {self.theta2}")
        if eigenvalue(self, ModeIndex(1, 1)) <= 0:
            raise InvalidConfigError("lambda_{1,1} <= 0: operator is not positive definite")

    def validate(self, box: ParamBox = DEFAULT_BOX) -> "SpdeParams":
        if not box.contains(self):
            raise InvalidConfigError(f"{self} lies outside the parameter box {box}")
        return self

    @classmethod
    def from_coeffs(cls, theta0: float, kappa: float, eta: float, theta2: float) -> "SpdeParams":
        return cls(theta0, kappa * theta2, eta * theta2, theta2)

    @property
    def derived(self) -> DerivedCoeffs:
        return derived_coeffs(self)


@dataclass(frozen=True)
class NoiseSpec:
    alpha: float
    mu0: float
    epsilon: float

    def __post_init__(self):
        if not 0 < self.alpha < 3:
            raise InvalidConfigError(f"alpha must lie in (0, 3), got {self.alpha}")
        if not self.mu0 > -2 * PI2:
            raise InvalidConfigError(f"mu0 must exceed -2 pi^2, got {self.mu0}")
        if not 0 <= self.epsilon < 1:
            # epsilon = 0 is accepted for noiseless reference paths
            raise InvalidConfigError(f"epsilon must lie in [0, 1), got {self.epsilon}")


@dataclass(frozen=True)
class InitialSpectrum:
    """Sparse spectral initial condition: mode -> <X0, e_mode>."""

    coeffs: Mapping[ModeIndex, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, v in dict(self.coeffs).items():
            mode = ModeIndex.of(*k)
            if not math.isfinite(v):
                raise InvalidConfigError(f"non-finite initial coefficient at {mode}")
            if v != 0.0:
                clean[mode] = float(v)
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def single(cls, l1: int, l2: int, value: float) -> "InitialSpectrum":
        return cls({ModeIndex.of(l1, l2): value})

    def get(self, mode: Iterable[int]) -> float:
        return self.coeffs.get(ModeIndex(*mode), 0.0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def dominant_mode(self) -> ModeIndex:
        if self.is_zero():
            raise InvalidConfigError("initial spectrum is identically zero ([A2] fails)")
        return max(self.coeffs, key=lambda m: (abs(self.coeffs[m]), -m.l1, -m.l2))

    def as_array(self, L1: int, L2: int) -> np.ndarray:
        out = np.zeros((L1, L2))
        for (l1, l2), v in self.coeffs.items():
            if l1 <= L1 and l2 <= L2:
                out[l1 - 1, l2 - 1] = v
        return out


DEFAULT_SPECTRUM = InitialSpectrum.single(1, 1, 3.0)


def derived_coeffs(params: SpdeParams) -> DerivedCoeffs:
    kappa = params.theta1 / params.theta2
    eta = params.eta1 / params.theta2
    gamma_cap = -params.theta0 / params.theta2 + (kappa * kappa + eta * eta) / 4.0
    return DerivedCoeffs(kappa, eta, gamma_cap)


def eigenvalue(params: SpdeParams, l1, l2=None):
    """lambda_{l1,l2}; accepts a ModeIndex or broadcastable integer arrays."""
    if l2 is None:
        l1, l2 = l1
    d = derived_coeffs(params)
    l1 = np.asarray(l1, dtype=float)
    l2 = np.asarray(l2, dtype=float)
    out = params.theta2 * (PI2 * (l1 * l1 + l2 * l2) + d.gamma_cap)
    return float(out) if out.ndim == 0 else out


def eigenfunction_1d(l, x, a):
    """sqrt(2) sin(pi l x) exp(-a x / 2), exactly zero at x in {0, 1}."""
    l = np.asarray(l, dtype=float)
    x = np.asarray(x, dtype=float)
    val = math.sqrt(2.0) * np.sin(np.pi * l * x) * np.exp(-a * x / 2.0)
    return np.where((x == 0.0) | (x == 1.0), 0.0, val)


def eigenfunction(params: SpdeParams, l, y, z):
    l1, l2 = l
    d = derived_coeffs(params)
    out = eigenfunction_1d(l1, y, d.kappa) * eigenfunction_1d(l2, z, d.eta)
    return float(out) if np.ndim(out) == 0 else out


def mu_weight(noise: NoiseSpec, l1, l2=None):
    if l2 is None:
        l1, l2 = l1
    l1 = np.asarray(l1, dtype=float)
    l2 = np.asarray(l2, dtype=float)
    out = PI2 * (l1 * l1 + l2 * l2) + noise.mu0
    if np.any(out <= 0):
        raise InvalidConfigError("noise weight mu_{l1,l2} must be positive")
    return float(out) if out.ndim == 0 else out


def midpoint_nodes(n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) / n


def weighted_inner_product(f, g, kappa: float, eta: float) -> float:
    """Composite midpoint approximation of int f g exp(kappa y + eta z) over [0,1]^2.

    ``f`` and ``g`` are sampled at the cell midpoints of an ``n1 x n2``
    partition (see :func:`midpoint_nodes`).
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape or f.ndim != 2:
        raise InvalidConfigError(f"shape mismatch: {f.shape} vs {g.shape}")
    n1, n2 = f.shape
    if n1 < 2 or n2 < 2:
        raise InvalidConfigError("quadrature grid needs at least 2x2 points")
    wy = np.exp(kappa * midpoint_nodes(n1))
    wz = np.exp(eta * midpoint_nodes(n2))
    return float(wy @ (f * g) @ wz) / (n1 * n2)


def check_a1(spectrum: InitialSpectrum, params: SpdeParams, alpha0: float) -> float:
    """||A^{(1+alpha0)/2} X0||^2 for a finitely supported initial condition."""
    if not 0 < alpha0 < 3:
        raise InvalidConfigError(f"alpha0 must lie in (0, 3), got {alpha0}")
    total = 0.0
    for mode, c in spectrum.coeffs.items():
        total += eigenvalue(params, mode) ** (1.0 + alpha0) * c * c
    return total
