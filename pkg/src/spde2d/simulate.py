"""Exact spectral sample paths and field assembly on the observation grid."""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import rng
from .errors import InvalidConfigError
from .model import (
    InitialSpectrum,
    ModeIndex,
    NoiseSpec,
    SpdeParams,
    derived_coeffs,
    eigenfunction_1d,
    eigenvalue,
    mu_weight,
)
from .ou import var_factor

# tail modes are sampled as white noise in time; their lag-one
# autocorrelation exp(-lambda dt) must be below exp(-TAIL_MIN_DECAY)
TAIL_MIN_DECAY = 30.0


@dataclass(frozen=True)
class TimeGrid:
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise InvalidConfigError("N must be >= 1")

    @property
    def delta(self) -> float:
        return 1.0 / self.N

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.N + 1) / self.N


@dataclass(frozen=True)
class SpatialGrid:
    M1: int
    M2: int

    def __post_init__(self):
        if self.M1 < 2 or self.M2 < 2:
            raise InvalidConfigError("M1, M2 must be >= 2")

    @property
    def y(self) -> np.ndarray:
        return np.arange(self.M1 + 1) / self.M1

    @property
    def z(self) -> np.ndarray:
        return np.arange(self.M2 + 1) / self.M2


@dataclass(frozen=True)
class Truncation:
    """Mode cutoffs.

    ``tail_L > max(L1, L2)`` adds every mode in ``[1, tail_L]^2`` outside the
    ``L1 x L2`` block.  Those modes decorrelate within one time step, so they
    are sampled exactly as independent Gaussians per step and folded onto the
    ``M1 x M2`` grid by aliasing (see :func:`tail_variances`).  The resulting
    field is only defined at grid nodes.
    """

    L1: int
    L2: int
    tail_L: int = 0

    def __post_init__(self):
        if self.L1 < 1 or self.L2 < 1:
            raise InvalidConfigError("L1, L2 must be >= 1")
        if self.tail_L and self.tail_L <= max(self.L1, self.L2):
            raise InvalidConfigError("tail_L must exceed max(L1, L2)")


@dataclass(frozen=True)
class CoefficientPaths:
    """x_{l1,l2}(t_i) stored as ``values[i, l1 - 1, l2 - 1]``.

    ``tail`` optionally holds alias-aggregated high-mode coefficients with
    ``tail[i, a - 1, b - 1]`` attached to the grid basis of mode (a, b).
    """

    values: np.ndarray
    truncation: Truncation
    time_grid: TimeGrid
    seed: int
    tail: Optional[np.ndarray] = None
    tail_grid: Optional["SpatialGrid"] = None

    def mode(self, l1: int, l2: int) -> np.ndarray:
        return self.values[:, l1 - 1, l2 - 1]


@dataclass(frozen=True)
class FieldData:
    """Observed array ``values[i, j, k] = X_{t_i}(y_j, z_k)``."""

    values: np.ndarray
    time_grid: TimeGrid
    spatial_grid: SpatialGrid
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        want = (self.time_grid.N + 1, self.spatial_grid.M1 + 1, self.spatial_grid.M2 + 1)
        if self.values.shape != want:
            raise InvalidConfigError(f"field shape {self.values.shape} != {want}")

    @property
    def N(self) -> int:
        return self.time_grid.N

    @property
    def M1(self) -> int:
        return self.spatial_grid.M1

    @property
    def M2(self) -> int:
        return self.spatial_grid.M2

    def scaled(self, c: float) -> "FieldData":
        return FieldData(c * self.values, self.time_grid, self.spatial_grid, dict(self.meta))


def mode_arrays(truncation: Truncation):
    l1 = np.arange(1, truncation.L1 + 1)
    l2 = np.arange(1, truncation.L2 + 1)
    return np.meshgrid(l1, l2, indexing="ij")


def step_constants(params: SpdeParams, noise: NoiseSpec, l1, l2, delta: float):
    """Per-mode decay ``exp(-lambda dt)`` and innovation standard deviation."""
    lam = eigenvalue(params, l1, l2)
    mu = mu_weight(noise, l1, l2)
    decay = np.exp(-lam * delta)
    sd = noise.epsilon * mu ** (-noise.alpha / 2) * np.sqrt(var_factor(lam, delta))
    return decay, sd


def simulate_coordinates(
    params: SpdeParams,
    noise: NoiseSpec,
    spectrum: InitialSpectrum,
    truncation: Truncation,
    time_grid: TimeGrid,
    seed: int,
    spatial_grid: Optional[SpatialGrid] = None,
) -> CoefficientPaths:
    """Exact OU transitions for every retained mode.

    Mode (l1, l2) draws from its own stream keyed by (seed, l1, l2).  When the
    truncation requests a high-mode tail, ``spatial_grid`` is required.
    """
    values = simulate_coordinates_many(params, noise, spectrum, truncation, time_grid, [seed])[0]
    tail = None
    if truncation.tail_L:
        if spatial_grid is None:
            raise InvalidConfigError("a high-mode tail needs the spatial grid")
        tail = simulate_tail(params, noise, truncation, time_grid, spatial_grid, seed)
    return CoefficientPaths(values, truncation, time_grid, int(seed), tail, spatial_grid if tail is not None else None)


def simulate_coordinates_many(params, noise, spectrum, truncation, time_grid, seeds) -> np.ndarray:
    """Block-mode paths for several seeds at once: shape (R, N + 1, L1, L2).

    Bit-identical to calling :func:`simulate_coordinates` once per seed.
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    L1, L2, N = truncation.L1, truncation.L2, time_grid.N
    l1, l2 = mode_arrays(truncation)
    decay, sd = step_constants(params, noise, l1, l2, time_grid.delta)
    x0 = spectrum.as_array(L1, L2)
    keys = rng.derive_many(rng.TAG_MODE, seeds[:, None, None], l1[None], l2[None])
    out = np.empty((len(seeds), N + 1, L1, L2))
    out[:, 0] = x0
    if noise.epsilon == 0:
        for i in range(1, N + 1):
            out[:, i] = decay * out[:, i - 1]
        return out
    z = rng.normals(keys, N)  # (R, L1, L2, N)
    for i in range(1, N + 1):
        out[:, i] = decay * out[:, i - 1] + sd * z[..., i - 1]
    return out


def coordinate_moments(params, noise, spectrum, l: ModeIndex, t: float):
    """Mean and variance of x_l(t) for the exact OU law."""
    if not 0 <= t <= 1:
        raise InvalidConfigError("t must lie in [0, 1]")
    lam = eigenvalue(params, l)
    mu = mu_weight(noise, l)
    x0 = spectrum.get(l)
    mean = math.exp(-lam * t) * x0
    var = noise.epsilon ** 2 * mu ** (-noise.alpha) * var_factor(lam, t)
    return mean, var


def _alias(l: np.ndarray, M: int):
    """Grid alias class (1..M-1, or 0 when invisible) and sign of sin(pi l j / M)."""
    r = l % (2 * M)
    cls = np.where(r < M, r, 2 * M - r)
    sign = np.where(r < M, 1.0, -1.0)
    cls = np.where(r % M == 0, 0, cls)
    return cls, sign


@functools.lru_cache(maxsize=16)
def tail_variances(params, noise, truncation, time_grid, spatial_grid) -> np.ndarray:
    """Summed one-step variances of the high modes, folded by grid alias class.

    Entry ``[a - 1, b - 1]`` is the variance of the coefficient multiplying the
    grid basis of mode (a, b), for ``a < M1, b < M2``.
    """
    M1, M2 = spatial_grid.M1, spatial_grid.M2
    L, dt = truncation.tail_L, time_grid.delta
    l2 = np.arange(1, L + 1)
    c2, _ = _alias(l2, M2)
    out = np.zeros((M1, M2))  # class 0 collects invisible modes
    min_decay = np.inf
    chunk = max(1, 2_000_000 // L)
    for start in range(1, L + 1, chunk):
        l1 = np.arange(start, min(start + chunk, L + 1))
        lam = eigenvalue(params, l1[:, None], l2[None, :])
        mu = mu_weight(noise, l1[:, None], l2[None, :])
        v = noise.epsilon ** 2 * mu ** (-noise.alpha) * var_factor(lam, dt)
        inside = (l1[:, None] <= truncation.L1) & (l2[None, :] <= truncation.L2)
        v = np.where(inside, 0.0, v)
        min_decay = min(min_decay, float(np.min(np.where(inside, np.inf, lam))) * dt)
        c1, _ = _alias(l1, M1)
        flat = (c1[:, None] * M2 + c2[None, :]).ravel()
        out += np.bincount(flat, weights=v.ravel(), minlength=M1 * M2).reshape(M1, M2)
    if min_decay < TAIL_MIN_DECAY:
        raise InvalidConfigError(
            f"tail modes start at lambda*dt = {min_decay:.3g} < {TAIL_MIN_DECAY}; "
            "raise L1/L2 so that tail modes decorrelate within one step"
        )
    return out[1:, 1:]


def simulate_tail(params, noise, truncation, time_grid, spatial_grid, seed) -> np.ndarray:
    """Alias-aggregated high-mode coefficients, shape (N + 1, M1 - 1, M2 - 1).

    The initial condition must vanish on tail modes, so row 0 is zero.
    """
    var = tail_variances(params, noise, truncation, time_grid, spatial_grid)
    M1, M2 = spatial_grid.M1, spatial_grid.M2
    a = np.arange(1, M1)[:, None]
    b = np.arange(1, M2)[None, :]
    keys = rng.derive_many(rng.TAG_TAIL, np.uint64(seed), a, b)
    z = rng.normals(keys, time_grid.N)  # (M1-1, M2-1, N)
    out = np.zeros((time_grid.N + 1, M1 - 1, M2 - 1))
    out[1:] = np.moveaxis(z, -1, 0) * np.sqrt(var)
    return out


def basis_matrix(n_modes: int, nodes: np.ndarray, a: float) -> np.ndarray:
    """B[j, l - 1] = sqrt(2) sin(pi l x_j) exp(-a x_j / 2)."""
    l = np.arange(1, n_modes + 1)
    return eigenfunction_1d(l[None, :], nodes[:, None], a)


def assemble_field(
    coeffs: CoefficientPaths,
    params: SpdeParams,
    spatial_grid: SpatialGrid,
    chunk: int = 64,
    meta: Optional[dict] = None,
) -> FieldData:
    """X[t] = A C_t B^T with precomputed 1D basis matrices."""
    values = coeffs.values
    if values.ndim != 3 or values.shape[1:] != (coeffs.truncation.L1, coeffs.truncation.L2):
        raise InvalidConfigError("coefficient array does not match its truncation")
    d = derived_coeffs(params)
    A = basis_matrix(coeffs.truncation.L1, spatial_grid.y, d.kappa)
    B = basis_matrix(coeffs.truncation.L2, spatial_grid.z, d.eta)
    nt = values.shape[0]
    out = np.empty((nt, spatial_grid.M1 + 1, spatial_grid.M2 + 1))
    tail = coeffs.tail
    if tail is not None:
        if coeffs.tail_grid != spatial_grid:
            raise InvalidConfigError("tail was aliased onto a different grid")
        At = basis_matrix(spatial_grid.M1 - 1, spatial_grid.y, d.kappa)
        Bt = basis_matrix(spatial_grid.M2 - 1, spatial_grid.z, d.eta)
    for s in range(0, nt, chunk):
        sl = slice(s, min(s + chunk, nt))
        block = A @ values[sl] @ B.T
        if tail is not None:
            block += At @ tail[sl] @ Bt.T
        out[sl] = block
    info = {"seed": coeffs.seed, "L1": coeffs.truncation.L1, "L2": coeffs.truncation.L2,
            "tail_L": coeffs.truncation.tail_L}
    info.update(meta or {})
    return FieldData(out, coeffs.time_grid, spatial_grid, info)


def naive_point(coeffs: CoefficientPaths, params: SpdeParams, t_index: int, y: float, z: float) -> float:
    """Direct double sum over retained block modes (verification oracle)."""
    if not 0 <= t_index < coeffs.values.shape[0]:
        raise InvalidConfigError("t_index out of range")
    d = derived_coeffs(params)
    total = 0.0
    C = coeffs.values[t_index]
    for l1 in range(1, C.shape[0] + 1):
        ey = math.sqrt(2) * math.sin(math.pi * l1 * y) * math.exp(-d.kappa * y / 2)
        for l2 in range(1, C.shape[1] + 1):
            ez = math.sqrt(2) * math.sin(math.pi * l2 * z) * math.exp(-d.eta * z / 2)
            total += C[l1 - 1, l2 - 1] * ey * ez
    return total
