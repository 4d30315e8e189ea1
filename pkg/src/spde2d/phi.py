"""The Bessel-integral characteristic of squared triple increments

    phi_{r,alpha}(theta2) = 2 / (theta2^{1-alpha} pi)
        * int_0^inf x^{-1-2 alpha} (1 - e^{-x^2})
                    (J0(sqrt2 r x / sqrt theta2) - 2 J0(r x / sqrt theta2) + 1) dx

and an independent lattice-sum approximation of it.

The integral is split in three:

* ``[0, xs]``: product of the power series of ``1 - e^{-x^2}`` and of the
  Bessel combination, integrated term by term (handles the integrable
  singularity at 0 for alpha close to 3);
* ``[xs, X1]``: vectorised adaptive Gauss-Kronrod (7/15) on panels no wider
  than a quarter period of the faster Bessel factor;
* ``[X1, inf)``: ``e^{-x^2}`` is below 1e-27 there, the constant part is
  integrated exactly and each ``int u^{-q} J0(u) du`` tail is summed from the
  integration-by-parts recursion
  ``T(q) = -U^{-q} J1(U) + (q+1) U^{-q-1} J0(U) - (q+1)^2 T(q+2)``.
"""
from __future__ import annotations

import functools
import math

import numpy as np

from .bessel import bessel_j0, bessel_j1
from .errors import CutoffError, InvalidConfigError, QuadratureError

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
# full 15-point rule on [-1, 1]
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_WG15[[1, 3, 5]] = _WG[:3]
_WG15[[13, 11, 9]] = _WG[:3]
_WG15[7] = _WG[3]

X_EXP_NEGLIGIBLE = 8.0   # e^{-64} < 1e-27
TAIL_MIN_ARG = 60.0      # smallest Bessel argument handed to the tail recursion
SERIES_TERMS = 30
MAX_ROUNDS = 60
MAX_PANELS = 200_000
_ROUNDOFF = 64 * np.finfo(float).eps


def _check(r, alpha, theta2):
    if not r > 0:
        raise InvalidConfigError(f"r must be > 0, got {r}")
    if not 0 < alpha < 3:
        raise InvalidConfigError(f"alpha must lie in (0, 3), got {alpha}")
    if not theta2 > 0:
        raise InvalidConfigError(f"theta2 must be > 0, got {theta2}")


def _integrand(x, c1, c2, alpha):
    h = bessel_j0(c1 * x) - 2.0 * bessel_j0(c2 * x) + 1.0
    return -np.expm1(-x * x) * h * x ** (-1.0 - 2.0 * alpha)


def _series_part(xs, c2, alpha):
    """int_0^xs of the integrand via the product power series."""
    # Bessel combination: sum_{k>=2} (-1)^k (2^k - 2) / (k!)^2 (c2 x / 2)^{2k}
    total = 0.0
    for k in range(2, SERIES_TERMS):
        bk = (-1) ** k * (2.0 ** k - 2.0) / math.factorial(k) ** 2 * (c2 / 2.0) ** (2 * k)
        for m in range(1, SERIES_TERMS):
            am = (-1) ** (m + 1) / math.factorial(m)
            p = 2 * (k + m) - 2.0 * alpha
            total += bk * am * xs ** p / p
    return total


def _bessel_power_tail(q, U, tol=1e-19):
    """int_U^inf u^{-q} J0(u) du for U well inside the asymptotic regime."""
    j0, j1 = bessel_j0(U), bessel_j1(U)
    total, coef, p = 0.0, 1.0, q
    envelope = math.sqrt(2.0 / (math.pi * U))
    for _ in range(200):
        total += coef * (-(U ** -p) * j1 + (p + 1) * U ** (-p - 1) * j0)
        coef *= -(p + 1) ** 2
        p += 2
        bound = abs(coef) * envelope * U ** (1 - p) / (p - 1)
        if bound < tol:
            return total
    raise QuadratureError(f"Bessel tail recursion did not converge at U={U}")


def _adaptive_gk(f, edges, tol, max_rounds=MAX_ROUNDS):
    """Integrate ``f`` over consecutive panels ``edges`` to absolute ``tol``."""
    a, b = edges[:-1].copy(), edges[1:].copy()
    span = b[-1] - a[0]
    done = 0.0
    done_err = 0.0
    for _ in range(max_rounds):
        mid, half = (a + b) / 2, (b - a) / 2
        x = mid[:, None] + half[:, None] * _NODES[None, :]
        fx = f(x)
        k15 = half * (fx @ _WK)
        g7 = half * (fx @ _WG15)
        err = np.abs(k15 - g7)
        local = tol * (b - a) / span
        # a panel whose error is at roundoff level cannot be improved by bisection
        floor = _ROUNDOFF * half * np.abs(fx).max(axis=1)
        ok = err <= np.maximum(local, floor)
        done += k15[ok].sum()
        done_err += err[ok].sum()
        if ok.all():
            return done, done_err
        a, b = a[~ok], b[~ok]
        if 2 * len(a) > MAX_PANELS:
            break
        m = (a + b) / 2
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        order = np.argsort(a, kind="stable")
        a, b = a[order], b[order]
    raise QuadratureError(f"adaptive quadrature: {len(a)} panels unresolved")


def phi_integral(r: float, alpha: float, theta2: float, tol: float = 1e-9) -> tuple[float, float]:
    """phi and an estimate of its absolute quadrature error."""
    _check(r, alpha, theta2)
    pref = 2.0 / (theta2 ** (1.0 - alpha) * math.pi)
    itol = tol / pref
    c2 = r / math.sqrt(theta2)
    c1 = math.sqrt(2.0) * c2
    xs = min(1.0, 1.0 / c1)
    X1 = max(X_EXP_NEGLIGIBLE, TAIL_MIN_ARG / c2, 2 * xs)

    head = _series_part(xs, c2, alpha)

    quarter = math.pi / (2.0 * c1)
    n_panels = max(4, int(math.ceil((X1 - xs) / quarter)))
    edges = np.linspace(xs, X1, n_panels + 1)
    body, body_err = _adaptive_gk(lambda x: _integrand(x, c1, c2, alpha), edges, 0.8 * itol)

    q = 1.0 + 2.0 * alpha
    tail = (c1 ** (2 * alpha) * _bessel_power_tail(q, c1 * X1)
            - 2.0 * c2 ** (2 * alpha) * _bessel_power_tail(q, c2 * X1)
            + X1 ** (-2.0 * alpha) / (2.0 * alpha))
    value = pref * (head + body + tail)
    return float(value), float(pref * body_err)


@functools.lru_cache(maxsize=4096)
def phi(r: float, alpha: float, theta2: float, tol: float = 1e-9) -> float:
    """phi_{r,alpha}(theta2) to absolute tolerance ``tol``.

    Raises :class:`QuadratureError` rather than returning an unconverged value.
    """
    value, err = phi_integral(float(r), float(alpha), float(theta2), tol)
    if not math.isfinite(value) or err > tol:
        raise QuadratureError(f"phi({r}, {alpha}, {theta2}) error estimate {err:.3g} > {tol:.3g}")
    return value


def phi_lattice_sum(r, alpha, theta2, gamma_cap, delta_t, L) -> np.ndarray:
    """Cumulative-block lattice sums S(L'), returned as a 2D summand array.

    Summand ``4 dt^{-alpha} (1 - e^{-lam dt}) / (lam mu^alpha) (cos(pi r l1 sqrt dt) - 1)
    (cos(pi r l2 sqrt dt) - 1)`` with ``lam = theta2 mu`` and
    ``mu = pi^2 (l1^2 + l2^2) + Gamma``.
    """
    l = np.arange(1, L + 1, dtype=float)
    s = np.pi ** 2 * (l[:, None] ** 2 + l[None, :] ** 2) + gamma_cap
    if np.any(s <= 0):
        raise InvalidConfigError("2 pi^2 + Gamma must be positive")
    lam = theta2 * s
    c = np.cos(np.pi * r * l * math.sqrt(delta_t)) - 1.0
    return 4.0 * delta_t ** (-alpha) * (-np.expm1(-lam * delta_t)) / (lam * s ** alpha) * np.outer(c, c)


def phi_lattice_oracle(r, alpha, theta2, params_aux, delta_t, L, rtol=1e-2, details=False):
    """Lattice-sum approximation of phi, independent of the Bessel quadrature.

    ``params_aux`` is ``(kappa, eta, gamma_cap)``; only ``gamma_cap`` enters the
    diagonal characteristic.  The truncated sum misses a tail decaying like
    ``L^{-2 alpha}``; it is removed by Richardson extrapolation from the
    ``L`` and ``L/2`` blocks, and the change of that extrapolation between
    ``L/2`` and ``L`` is the reported tail-error estimate.
    """
    _check(r, alpha, theta2)
    if L < 8:
        raise CutoffError("cutoff L must be at least 8")
    _, _, gamma_cap = params_aux
    terms = phi_lattice_sum(r, alpha, theta2, gamma_cap, delta_t, L)
    s_full = terms.sum()
    s_half = terms[: L // 2, : L // 2].sum()
    s_quarter = terms[: L // 4, : L // 4].sum()
    ratio = 2.0 ** (2 * alpha) - 1.0
    rich = s_full + (s_full - s_half) / ratio
    rich_half = s_half + (s_half - s_quarter) / ratio
    err = abs(rich - rich_half)
    if err > rtol * abs(rich):
        raise CutoffError(f"lattice tail estimate {err:.3g} exceeds {rtol:g} x {abs(rich):.3g}; raise L")
    if details:
        return {"value": rich, "raw": s_full, "tail": rich - s_full, "error": err}
    return rich
