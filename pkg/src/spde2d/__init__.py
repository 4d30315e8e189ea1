"""Simulation and minimum-contrast calibration of a 2D linear parabolic SPDE
driven by a small-noise Q-Wiener process."""

from .errors import (
    CutoffError,
    DegenerateDataError,
    GridAlignmentError,
    InvalidConfigError,
    QuadratureError,
)
from .model import (
    DerivedCoeffs,
    InitialSpectrum,
    ModeIndex,
    NoiseSpec,
    ParamBox,
    SpdeParams,
    check_a1,
    derived_coeffs,
    eigenfunction,
    eigenvalue,
    mu_weight,
    weighted_inner_product,
)

__version__ = "0.1.0"
