import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spde2d.errors import DegenerateDataError, InvalidConfigError
from spde2d.ou import (
    OuParams,
    contrast_v,
    fit_ou,
    profiled_mu,
    simulate_ou,
    simulate_ou_many,
    var_factor,
)


@given(st.floats(-50, 50), st.floats(1e-4, 1.0))
def test_var_factor_matches_direct_formula(lam, h):
    if abs(lam * h) > 1e-6:
        direct = (1 - math.exp(-2 * lam * h)) / (2 * lam)
        assert var_factor(lam, h) == pytest.approx(direct, rel=1e-12)


def test_var_factor_small_lambda_limit():
    assert var_factor(0.0, 0.01) == 0.01
    assert var_factor(1e-15, 0.01) == pytest.approx(0.01, rel=1e-12)
    a, b = var_factor(1e-8, 0.1), var_factor(-1e-8, 0.1)
    assert abs(a - b) / a < 1e-6


def test_noiseless_path_is_exact_decay():
    p = OuParams(lam=2.0, mu=1.0, alpha=0.5, epsilon=0.0, x0=3.0, n=20)
    x = simulate_ou(p, 1).values
    t = np.arange(21) / 20
    assert np.allclose(x, 3.0 * np.exp(-2.0 * t), rtol=1e-13, atol=0)


@pytest.mark.parametrize("lam", [2.0, 0.0, -1.0])
def test_terminal_variance_closed_form(lam):
    p = OuParams(lam=lam, mu=2.0, alpha=1.5, epsilon=0.1, x0=1.0, n=10)
    x1 = simulate_ou_many(p, np.arange(100_000))[:, -1]
    mean = math.exp(-lam) * 1.0
    var = 0.01 * 2.0 ** -1.5 * var_factor(lam, 1.0)
    se_m = math.sqrt(var / len(x1))
    se_v = var * math.sqrt(2 / (len(x1) - 1))
    assert abs(x1.mean() - mean) < 4 * se_m
    assert abs(x1.var(ddof=1) - var) < 4 * se_v


def test_zero_lambda_step_variance():
    p = OuParams(lam=0.0, mu=1.0, alpha=0.5, epsilon=0.1, x0=1.0, n=4)
    x = simulate_ou_many(p, np.arange(50_000))
    v = np.diff(x, axis=1)[:, 0].var(ddof=1)
    assert v == pytest.approx(0.01 * 0.25, rel=4 * math.sqrt(2 / 50_000))


def test_contrast_noiseless_residual_vanishes():
    p = OuParams(lam=2.0, mu=1.0, alpha=0.5, epsilon=0.0, x0=3.0, n=50)
    x = simulate_ou(p, 0).values
    n, h = 50, 1 / 50
    c = contrast_v(2.0, 1.0, x, 0.1, 0.5, h)
    assert c == pytest.approx(n * math.log(var_factor(2.0, h) / h), rel=1e-9)


def test_contrast_continuous_across_zero():
    x = simulate_ou(OuParams(0.5, 1.0, 0.5, 0.1, 1.0, 100), 4).values
    h = 0.01
    a, b, z = (contrast_v(l, 1.0, x, 0.1, 0.5, h) for l in (1e-8, -1e-8, 0.0))
    assert math.isfinite(z)
    assert abs(a - b) <= 1e-6 * abs(a)
    assert abs(a - z) <= 1e-6 * abs(a)


def test_vanishing_noise_recovery():
    p = OuParams(lam=2.0, mu=1.0, alpha=0.5, epsilon=1e-8, x0=3.0, n=200)
    x = simulate_ou(p, 11).values
    assert fit_ou(x, 1e-8, 0.5, p.h, mu_known=1.0).lam == pytest.approx(2.0, abs=1e-4)
    assert fit_ou(x, 1e-8, 0.5, p.h).lam == pytest.approx(2.0, abs=1e-4)


def test_unknown_mu_matches_least_squares_closed_form():
    # profiling mu turns the contrast into a monotone function of the
    # residual energy, so lambda_hat solves the AR(1) least squares problem
    x = simulate_ou(OuParams(1.5, 1.0, 0.5, 0.05, 2.0, 300), 8).values
    h = 1 / 300
    rho = (x[1:] @ x[:-1]) / (x[:-1] @ x[:-1])
    assert fit_ou(x, 0.05, 0.5, h).lam == pytest.approx(-math.log(rho) / h, abs=1e-7)


def test_profile_optimality():
    x = simulate_ou(OuParams(2.0, 1.0, 0.5, 0.01, 3.0, 500), 3).values
    fit = fit_ou(x, 0.01, 0.5, 1 / 500)
    base = contrast_v(fit.lam, fit.mu, x, 0.01, 0.5, 1 / 500)
    for d in (-1e-6, 1e-6):
        assert contrast_v(fit.lam, fit.mu + d, x, 0.01, 0.5, 1 / 500) >= base - 1e-9 * abs(base)


def test_known_and_unknown_agree_at_profiled_mu():
    x = simulate_ou(OuParams(2.0, 1.0, 0.5, 0.01, 3.0, 500), 5).values
    h = 1 / 500
    free = fit_ou(x, 0.01, 0.5, h)
    known = fit_ou(x, 0.01, 0.5, h, mu_known=free.mu)
    assert known.lam == pytest.approx(free.lam, abs=1e-7)


def test_fit_is_deterministic():
    x = simulate_ou(OuParams(2.0, 1.0, 0.5, 0.01, 3.0, 100), 9).values
    a, b = fit_ou(x, 0.01, 0.5, 0.01), fit_ou(x, 0.01, 0.5, 0.01)
    assert (a.lam, a.mu, a.contrast) == (b.lam, b.mu, b.contrast)


def test_bound_hits_are_flagged():
    x = simulate_ou(OuParams(2.0, 1.0, 0.5, 1e-6, 3.0, 100), 9).values
    fit = fit_ou(x, 1e-6, 0.5, 0.01, mu_known=1.0, lambda_box=(3.0, 10.0))
    assert fit.at_bound["lambda"] and fit.flagged


def test_degenerate_inputs():
    with pytest.raises(DegenerateDataError):
        fit_ou(np.zeros(10), 0.1, 0.5, 0.1)
    with pytest.raises(InvalidConfigError):
        OuParams(1.0, 1.0, 0.5, 0.1, 0.0, 10)
    with pytest.raises(InvalidConfigError):
        contrast_v(1.0, 0.0, np.ones(5), 0.1, 0.5, 0.25)
    with pytest.raises(DegenerateDataError):
        profiled_mu(0.0, np.ones(5), 0.1, 0.5, 0.25)
