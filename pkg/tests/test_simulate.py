import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spde2d.errors import InvalidConfigError
from spde2d.model import InitialSpectrum, ModeIndex, NoiseSpec, SpdeParams, derived_coeffs, eigenfunction, eigenvalue, mu_weight
from spde2d.ou import var_factor
from spde2d.simulate import (
    CoefficientPaths,
    SpatialGrid,
    TimeGrid,
    Truncation,
    assemble_field,
    basis_matrix,
    coordinate_moments,
    naive_point,
    simulate_coordinates,
    simulate_coordinates_many,
    tail_variances,
)


def test_grids():
    tg = TimeGrid(8)
    assert tg.times[-1] == 1.0 and tg.delta == 0.125
    sg = SpatialGrid(4, 5)
    assert sg.y[-1] == 1.0 and len(sg.z) == 6
    with pytest.raises(InvalidConfigError):
        TimeGrid(0)
    with pytest.raises(InvalidConfigError):
        SpatialGrid(1, 4)
    with pytest.raises(InvalidConfigError):
        Truncation(0, 3)


def test_noiseless_paths_are_mild_solution(ref_params):
    spec = InitialSpectrum({(1, 1): 3.0, (2, 1): -1.0})
    noise = NoiseSpec(0.5, -19.5, 0.0)
    c = simulate_coordinates(ref_params, noise, spec, Truncation(3, 3), TimeGrid(10), 0)
    t = np.arange(11) / 10
    for (l1, l2), x0 in spec.coeffs.items():
        assert np.allclose(c.mode(l1, l2), x0 * np.exp(-eigenvalue(ref_params, (l1, l2)) * t), rtol=1e-13)
    assert np.all(c.mode(3, 3) == 0)
    assert np.array_equal(c.values[0], spec.as_array(3, 3))


def test_zero_mode_terminal_law(ref_params, ref_noise):
    spec = InitialSpectrum({})
    R = 10_000
    paths = simulate_coordinates_many(ref_params, ref_noise, spec, Truncation(2, 2), TimeGrid(10), np.arange(R))
    x = paths[:, -1, 1, 0]
    _, var = coordinate_moments(ref_params, ref_noise, spec, ModeIndex(2, 1), 1.0)
    assert abs(x.mean()) < 4 * math.sqrt(var / R)
    assert abs(x.var(ddof=1) - var) < 4 * var * math.sqrt(2 / (R - 1))


def test_coordinate_moments_examples(ref_params, ref_noise, ref_spectrum):
    assert coordinate_moments(ref_params, ref_noise, ref_spectrum, ModeIndex(1, 1), 0.0) == (3.0, 0.0)
    m, v = coordinate_moments(ref_params, ref_noise, ref_spectrum, ModeIndex(1, 1), 1.0)
    assert m == pytest.approx(3 * math.exp(-4.047842), rel=1e-6)
    assert v == pytest.approx(0.01 * 0.239209 ** -0.5 * (1 - math.exp(-8.095684)) / 8.095684, rel=1e-5)
    # small-lambda limit: a mode with lambda ~ 0
    p = SpdeParams(0.2 * (2 * math.pi ** 2) - 1e-12, 0, 0, 0.2)
    noise = NoiseSpec(1.0, 0.0, 0.1)
    _, v = coordinate_moments(p, noise, ref_spectrum, ModeIndex(1, 1), 0.5)
    assert v == pytest.approx(0.01 / mu_weight(noise, (1, 1)) * 0.5, rel=1e-9)


def test_determinism_and_batching(ref_params, ref_noise, ref_spectrum):
    tr, tg = Truncation(6, 5), TimeGrid(20)
    a = simulate_coordinates(ref_params, ref_noise, ref_spectrum, tr, tg, 42).values
    b = simulate_coordinates(ref_params, ref_noise, ref_spectrum, tr, tg, 42).values
    many = simulate_coordinates_many(ref_params, ref_noise, ref_spectrum, tr, tg, [41, 42, 43])
    assert np.array_equal(a, b)
    assert np.array_equal(many[1], a)
    assert not np.array_equal(many[0], a)


def test_mode_streams_do_not_depend_on_truncation(ref_params, ref_noise, ref_spectrum):
    small = simulate_coordinates(ref_params, ref_noise, ref_spectrum, Truncation(3, 3), TimeGrid(15), 7)
    big = simulate_coordinates(ref_params, ref_noise, ref_spectrum, Truncation(9, 4), TimeGrid(15), 7)
    assert np.array_equal(small.mode(2, 3), big.mode(2, 3))


def _random_coeffs(seed, L1, L2, N):
    g = np.random.default_rng(seed)
    return CoefficientPaths(g.normal(size=(N + 1, L1, L2)), Truncation(L1, L2), TimeGrid(N), seed)


def test_single_mode_assembly(ref_params):
    vals = np.zeros((3, 4, 4))
    vals[:, 1, 2] = 1.7
    c = CoefficientPaths(vals, Truncation(4, 4), TimeGrid(2), 0)
    sg = SpatialGrid(10, 12)
    f = assemble_field(c, ref_params, sg)
    want = 1.7 * eigenfunction(ref_params, (2, 3), sg.y[:, None], sg.z[None, :])
    assert np.allclose(f.values[1], want, rtol=1e-13, atol=1e-15)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(1, 12), st.integers(1, 12))
def test_assembly_matches_naive_sum(seed, L1, L2):
    p = SpdeParams(0.1, 0.3, -0.2, 0.25)
    c = _random_coeffs(seed, L1, L2, 3)
    sg = SpatialGrid(7, 9)
    f = assemble_field(c, p, sg)
    g = np.random.default_rng(seed + 1)
    for _ in range(5):
        i, j, k = g.integers(0, 4), g.integers(0, 8), g.integers(0, 10)
        want = naive_point(c, p, i, sg.y[j], sg.z[k])
        assert f.values[i, j, k] == pytest.approx(want, rel=1e-10, abs=1e-12)


@given(st.integers(0, 2 ** 32))
@settings(max_examples=20, deadline=None)
def test_boundary_is_exactly_zero(seed):
    p = SpdeParams(0.0, 0.5, 0.5, 0.3)
    f = assemble_field(_random_coeffs(seed, 9, 9, 2), p, SpatialGrid(13, 11))
    v = f.values
    assert np.all(v[:, 0, :] == 0) and np.all(v[:, -1, :] == 0)
    assert np.all(v[:, :, 0] == 0) and np.all(v[:, :, -1] == 0)


def test_assembly_linearity(ref_params):
    a, b = _random_coeffs(1, 8, 8, 4), _random_coeffs(2, 8, 8, 4)
    ab = CoefficientPaths(a.values + b.values, a.truncation, a.time_grid, 0)
    sg = SpatialGrid(16, 16)
    fa, fb, fab = (assemble_field(c, ref_params, sg).values for c in (a, b, ab))
    assert np.allclose(fab, fa + fb, rtol=1e-12, atol=1e-12 * np.abs(fab).max())


def test_naive_point_trivial_cases(ref_params):
    z = CoefficientPaths(np.zeros((2, 3, 3)), Truncation(3, 3), TimeGrid(1), 0)
    assert naive_point(z, ref_params, 1, 0.3, 0.4) == 0.0


def test_dimension_mismatch_rejected(ref_params):
    c = CoefficientPaths(np.zeros((2, 3, 4)), Truncation(3, 3), TimeGrid(1), 0)
    with pytest.raises(InvalidConfigError):
        assemble_field(c, ref_params, SpatialGrid(4, 4))


def test_tail_variances_match_direct_node_variance():
    # folding by alias class is exact at grid nodes: the per-node one-step
    # variance of the tail equals the direct sum over every tail mode
    p = SpdeParams(0.0, 0.2, 0.2, 0.2)
    noise = NoiseSpec(0.5, -19.5, 0.1)
    tr, tg, sg = Truncation(40, 40, 300), TimeGrid(100), SpatialGrid(12, 10)
    var = tail_variances(p, noise, tr, tg, sg)
    d = derived_coeffs(p)
    At = basis_matrix(sg.M1 - 1, sg.y, d.kappa)
    Bt = basis_matrix(sg.M2 - 1, sg.z, d.eta)
    folded = (At ** 2) @ var @ (Bt ** 2).T
    l = np.arange(1, 301)
    lam = eigenvalue(p, l[:, None], l[None, :])
    v = 0.01 * mu_weight(noise, l[:, None], l[None, :]) ** -0.5 * var_factor(lam, tg.delta)
    v[:40, :40] = 0
    A = basis_matrix(300, sg.y, d.kappa)
    B = basis_matrix(300, sg.z, d.eta)
    direct = (A ** 2) @ v @ (B ** 2).T
    assert np.allclose(folded, direct, rtol=1e-10, atol=1e-20)


def test_tail_requires_fast_decay(ref_params, ref_noise):
    with pytest.raises(InvalidConfigError):
        tail_variances(ref_params, ref_noise, Truncation(8, 8, 50), TimeGrid(1000), SpatialGrid(10, 10))


def test_tail_field_is_deterministic(ref_params, ref_noise, ref_spectrum):
    tr, tg, sg = Truncation(40, 40, 200), TimeGrid(50), SpatialGrid(10, 10)
    a = assemble_field(simulate_coordinates(ref_params, ref_noise, ref_spectrum, tr, tg, 3, sg), ref_params, sg)
    b = assemble_field(simulate_coordinates(ref_params, ref_noise, ref_spectrum, tr, tg, 3, sg), ref_params, sg)
    assert np.array_equal(a.values, b.values)
    with pytest.raises(InvalidConfigError):
        simulate_coordinates(ref_params, ref_noise, ref_spectrum, tr, tg, 3)
