"""Bessel functions of the first kind used by the increment characteristic."""
import numpy as np
from scipy import special


def bessel_j0(x):
    """J_0(x) for real x >= 0, vectorised (Cephes; absolute error ~1e-16)."""
    out = special.j0(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def bessel_j1(x):
    out = special.j1(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out
