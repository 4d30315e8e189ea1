"""Flat key=value experiment configuration.

One ``name = value`` pair per line; ``#`` starts a comment.  Keys mirror the
field names of :class:`ExperimentConfig`.  The initial spectrum is written as
``x0 = l1,l2:value;l1,l2:value``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .coeff import SpatialThinning, XiBox
from .errors import InvalidConfigError
from .model import InitialSpectrum, NoiseSpec, ParamBox, SpdeParams
from .reaction import TemporalThinning
from .simulate import SpatialGrid, TimeGrid, Truncation


@dataclass(frozen=True)
class ExperimentConfig:
    # true parameters
    theta0: float = 0.0
    theta1: float = 0.2
    eta1: float = 0.2
    theta2: float = 0.2
    # noise
    alpha: float = 0.5
    mu0: float = -19.5
    epsilon: float = 0.1
    x0: str = "1,1:3.0"
    # simulation
    L1: int = 128
    L2: int = 128
    tail_L: int = 0
    N: int = 1000
    M1: int = 200
    M2: int = 200
    # estimation
    b: float = 0.05
    m1: int = 15
    n: int = 50
    mode_l1: int = 1
    mode_l2: int = 1
    mu0_known: bool = False
    kappa_lo: float = -10.0
    kappa_hi: float = 10.0
    eta_lo: float = -10.0
    eta_hi: float = 10.0
    theta2_lo: float = 0.01
    theta2_hi: float = 5.0
    lambda_lo: float = 0.01
    lambda_hi: float = 50.0
    mu_lo: float = 1e-4
    mu_hi: float = 1e3
    alpha0: float = 2.99
    # Monte Carlo
    reps: int = 200
    seed: int = 20240601
    threads: int = 1
    out: str = "results"

    # -- component views --
    def params(self) -> SpdeParams:
        return SpdeParams(self.theta0, self.theta1, self.eta1, self.theta2).validate(ParamBox())

    def noise(self) -> NoiseSpec:
        return NoiseSpec(self.alpha, self.mu0, self.epsilon)

    def spectrum(self) -> InitialSpectrum:
        return parse_spectrum(self.x0)

    def truncation(self) -> Truncation:
        return Truncation(self.L1, self.L2, self.tail_L)

    def time_grid(self) -> TimeGrid:
        return TimeGrid(self.N)

    def spatial_grid(self) -> SpatialGrid:
        return SpatialGrid(self.M1, self.M2)

    def spatial_thinning(self) -> SpatialThinning:
        return SpatialThinning(self.b, self.m1, self.M1, self.M2, self.N)

    def temporal_thinning(self) -> TemporalThinning:
        return TemporalThinning(self.n, self.N)

    def xi_box(self) -> XiBox:
        return XiBox((self.kappa_lo, self.kappa_hi), (self.eta_lo, self.eta_hi), (self.theta2_lo, self.theta2_hi))

    @property
    def mode(self):
        return (self.mode_l1, self.mode_l2)

    def validate(self) -> "ExperimentConfig":
        """Build every component once so that invalid settings fail early."""
        self.params()
        self.noise()
        self.spectrum()
        self.truncation()
        self.time_grid()
        self.spatial_grid()
        self.spatial_thinning()
        self.temporal_thinning()
        self.xi_box()
        if not (self.lambda_lo < self.lambda_hi and 0 < self.mu_lo < self.mu_hi):
            raise InvalidConfigError("empty lambda or mu box")
        if self.reps < 1:
            raise InvalidConfigError("reps must be >= 1")
        if self.threads < 1:
            raise InvalidConfigError("threads must be >= 1")
        if not 0 < self.alpha0 < 3:
            raise InvalidConfigError("alpha0 must lie in (0, 3)")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidConfigError("seed must be an unsigned 64-bit integer")
        return self

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)

    def to_text(self) -> str:
        return "".join(f"{f.name} = {_fmt(getattr(self, f.name))}\n" for f in dataclasses.fields(self))


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _coerce(name: str, typ: str, raw: str):
    try:
        if typ == "bool":
            low = raw.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if typ == "int":
            return int(raw, 0)
        if typ == "float":
            return float(raw)
        return raw
    except ValueError:
        raise InvalidConfigError(f"{name}: cannot parse {raw!r} as {typ}") from None


def parse_config(text: str) -> ExperimentConfig:
    types = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfigError(f"line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise InvalidConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, types[key], raw)
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def parse_spectrum(text: str) -> InitialSpectrum:
    coeffs = {}
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        try:
            idx, val = part.split(":")
            l1, l2 = (int(s) for s in idx.split(","))
            coeffs[(l1, l2)] = coeffs.get((l1, l2), 0.0) + float(val)
        except ValueError:
            raise InvalidConfigError(f"bad spectrum entry {part!r}; expected l1,l2:value") from None
    return InitialSpectrum(coeffs)


def format_spectrum(spec: InitialSpectrum) -> str:
    return ";".join(f"{l1},{l2}:{v!r}" for (l1, l2), v in sorted(spec.coeffs.items()))
