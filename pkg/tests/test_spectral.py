import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from dampwave.errors import BlowupDetected, GridError
from dampwave.spectral import (
    Field,
    GridSpec,
    SystemState,
    advance,
    dealias_product,
    derivative,
    dilate,
    resample,
    step,
    transform,
)
from helpers import dft_oracle, convolution_oracle, linear_toy_evolution

GRID = GridSpec(256, 2 * math.pi * 4)
K1 = 2 * math.pi / GRID.domain_length


class ZeroModel:
    damping = 0.7

    def nonstiff(self, state):
        return Field.zeros(state.grid), Field.zeros(state.grid)


class LinearToy:
    """u_t = -v_x, v_t = -u_x - lam v (nonlinearities off)."""

    def __init__(self, lam):
        self.damping = lam

    def nonstiff(self, state):
        return -1.0 * derivative(state.second), -1.0 * derivative(state.first)


def test_grid_validation():
    with pytest.raises(GridError):
        GridSpec(100, 1.0)  # not a power of two
    with pytest.raises(GridError):
        GridSpec(4, 1.0)  # too small
    with pytest.raises(GridError):
        GridSpec(64, -1.0)
    g = GridSpec(64, 3.0)
    assert g.dx * g.num_points == pytest.approx(g.domain_length)


def test_transform_constant_field():
    f = Field.from_samples(GRID, np.ones(GRID.num_points))
    c = transform(f, "forward").coefficients
    assert c[0] == pytest.approx(1.0)
    assert np.max(np.abs(c[1:])) < 1e-14


def test_transform_cosine_mode():
    m = 5
    f = Field.from_samples(GRID, np.cos(m * K1 * GRID.nodes))
    c = f.coefficients
    assert abs(c[m]) == pytest.approx(0.5, abs=1e-13)
    assert abs(c[-m]) == pytest.approx(0.5, abs=1e-13)
    others = np.delete(np.abs(c), [m, GRID.num_points - m])
    assert np.max(others) < 1e-13


def test_transform_matches_direct_dft():
    rng = np.random.default_rng(0)
    samples = rng.standard_normal(128)
    f = Field.from_samples(GridSpec(128, 5.0), samples)
    assert_allclose(f.coefficients, dft_oracle(samples), atol=1e-12)


@pytest.mark.parametrize("n", [8, 64, 1024, 2**16])
def test_roundtrip_across_sizes(n):
    rng = np.random.default_rng(n)
    samples = rng.standard_normal(n)
    g = GridSpec(n, 2 * math.pi)
    back = transform(transform(Field.from_samples(g, samples), "forward"), "inverse")
    scale = np.max(np.abs(samples))
    assert np.max(np.abs(back.samples - samples)) < 1e-12 * scale


def test_transform_bad_direction():
    with pytest.raises(ValueError):
        transform(Field.zeros(GRID), "sideways")


def test_hermitian_symmetry():
    rng = np.random.default_rng(1)
    f = Field.from_samples(GRID, rng.standard_normal(GRID.num_points))
    c = f.coefficients
    n = GRID.num_points
    assert_allclose(c[1:], np.conj(c[1:][::-1]), atol=1e-14)
    assert abs(c[n // 2].imag) < 1e-14


def test_derivative_sine():
    f = Field.from_samples(GRID, np.sin(K1 * GRID.nodes))
    d = derivative(f)
    assert np.max(np.abs(d.samples - K1 * np.cos(K1 * GRID.nodes))) < 1e-11


def test_derivative_constant_is_zero():
    f = Field.from_samples(GRID, np.full(GRID.num_points, 2.5))
    assert np.max(np.abs(derivative(f).samples)) < 1e-14


def test_second_derivative_cosine():
    f = Field.from_samples(GRID, np.cos(K1 * GRID.nodes))
    d2 = derivative(f, 2)
    assert np.max(np.abs(d2.samples + K1**2 * np.cos(K1 * GRID.nodes))) < 1e-11


def test_derivative_composition():
    rng = np.random.default_rng(2)
    c = np.zeros(GRID.num_points, dtype=complex)
    c[1:20] = rng.standard_normal(19) + 1j * rng.standard_normal(19)
    f = Field.from_coefficients(GRID, c)
    twice = derivative(derivative(f))
    once = derivative(f, 2)
    assert np.max(np.abs(twice.samples - once.samples)) < 1e-10


def test_derivative_order_limit():
    with pytest.raises(ValueError):
        derivative(Field.zeros(GRID), 5)
    with pytest.raises(ValueError):
        derivative(Field.zeros(GRID), 0)


def test_dealias_product_in_band_matches_convolution():
    f = Field.from_samples(GRID, np.cos(3 * K1 * GRID.nodes))
    g = Field.from_samples(GRID, np.cos(5 * K1 * GRID.nodes))
    prod = dealias_product(f, g)
    assert_allclose(prod.coefficients, convolution_oracle(f, g), atol=1e-14)


def test_dealias_product_with_one():
    f = Field.from_samples(GRID, np.cos(7 * K1 * GRID.nodes) + 0.3)
    one = Field.from_samples(GRID, np.ones(GRID.num_points))
    prod = dealias_product(f, one)
    assert np.max(np.abs(prod.samples - f.samples)) < 1e-13


def test_dealias_product_kills_out_of_band_sum():
    # inputs inside the band whose sum frequency exceeds it
    cut = GRID.num_points // 3
    m1, m2 = cut - 1, cut - 2
    f = Field.from_samples(GRID, np.cos(m1 * K1 * GRID.nodes))
    g = Field.from_samples(GRID, np.cos(m2 * K1 * GRID.nodes))
    prod = dealias_product(f, g)
    assert abs(prod.coefficients[m1 + m2]) == 0.0
    # the difference frequency survives and matches the oracle
    assert_allclose(prod.coefficients, convolution_oracle(f, g), atol=1e-14)


def test_dealias_product_grid_mismatch():
    with pytest.raises(GridError):
        dealias_product(Field.zeros(GRID), Field.zeros(GridSpec(128, 1.0)))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_dealias_product_matches_oracle_property(seed):
    rng = np.random.default_rng(seed)
    g = GridSpec(64, 2 * math.pi)
    half = g.num_points // 2

    def band_limited():
        c = np.zeros(g.num_points, dtype=complex)
        live = rng.integers(1, g.num_points // 3, size=4)
        c[live] = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        return Field.from_coefficients(g, c)

    f, h = band_limited(), band_limited()
    assert_allclose(
        dealias_product(f, h).coefficients, convolution_oracle(f, h), atol=1e-12
    )


def test_step_pure_damping_is_exact():
    lam, dt = 2.5, 0.37
    v0 = np.cos(3 * K1 * GRID.nodes)
    state = SystemState(Field.zeros(GRID), Field.from_samples(GRID, v0), 0.0)

    class PureDamping:
        damping = lam

        def nonstiff(self, s):
            return Field.zeros(GRID), Field.zeros(GRID)

    out = step(state, PureDamping(), dt)
    assert np.max(np.abs(out.second.samples - math.exp(-lam * dt) * v0)) < 1e-14


def test_step_zero_rhs_only_advances_time():
    state = SystemState(
        Field.from_samples(GRID, np.cos(K1 * GRID.nodes)), Field.zeros(GRID), 1.0
    )
    out = step(state, ZeroModel(), 0.25)
    assert out.time == pytest.approx(1.25)
    assert_allclose(out.first.samples, state.first.samples, atol=1e-15)
    assert np.max(np.abs(out.second.samples)) < 1e-15


def test_step_linear_matches_symbol_exponential():
    lam, T = 1.0, 2.0
    state = SystemState(
        Field.from_samples(GRID, np.cos(5 * K1 * GRID.nodes)),
        Field.from_samples(GRID, 0.3 * np.sin(5 * K1 * GRID.nodes)),
        0.0,
    )
    exact = linear_toy_evolution(state, lam, T)
    errors = []
    for dt in (0.05, 0.025):
        out = advance(state, LinearToy(lam), dt, round(T / dt))
        errors.append(
            max(
                np.max(np.abs(out.first.samples - exact.first.samples)),
                np.max(np.abs(out.second.samples - exact.second.samples)),
            )
        )
    assert errors[0] < 1e-4
    # third-order convergence: halving dt gains at least 3.5x
    assert errors[0] / errors[1] > 3.5


def test_step_energy_conservation_without_damping():
    g = GridSpec(512, 2 * math.pi * 4)
    rng = np.random.default_rng(5)
    c = np.zeros(g.num_points, dtype=complex)
    c[1:11] = (rng.standard_normal(10) + 1j * rng.standard_normal(10)) * 0.1
    state = SystemState(
        Field.from_coefficients(g, c), Field.from_coefficients(g, 1j * c), 0.0
    )

    def energy(s):
        return np.sum(s.first.samples**2) + np.sum(s.second.samples**2)

    e0 = energy(state)
    drifts = []
    for dt in (0.02, 0.01):
        out = advance(state, LinearToy(0.0), dt, round(1.0 / dt))
        drifts.append(abs(energy(out) - e0) / e0)
    assert drifts[0] < 1e-4
    assert drifts[0] / drifts[1] > 3.5


def test_step_detects_blowup():
    state = SystemState(
        Field.from_samples(GRID, np.full(GRID.num_points, 1e308)),
        Field.from_samples(GRID, np.full(GRID.num_points, 1e308)),
        0.0,
    )

    class Quadratic:
        damping = 1.0

        def nonstiff(self, s):
            sq = Field(s.grid, samples=s.first.samples * s.first.samples)
            return sq, sq

    with pytest.raises(BlowupDetected) as info:
        step(state, Quadratic(), 1.0)
    assert info.value.time == pytest.approx(1.0)


def test_resample_refines_and_rejects():
    f = Field.from_samples(GRID, np.cos(3 * K1 * GRID.nodes))
    fine = resample(f, GridSpec(512, GRID.domain_length))
    assert np.max(np.abs(fine.samples[::2] - f.samples)) < 1e-12
    near_nyquist = Field.from_samples(
        GRID, np.cos((GRID.num_points // 2 - 1) * K1 * GRID.nodes)
    )
    with pytest.raises(GridError):
        resample(near_nyquist, GridSpec(64, GRID.domain_length))


def test_dilate_doubles_frequencies():
    f = Field.from_samples(GRID, np.cos(3 * K1 * GRID.nodes))
    d = dilate(f)
    assert d.grid.domain_length == pytest.approx(GRID.domain_length / 2)
    # same samples, physical frequency doubled
    assert_allclose(d.samples, f.samples)
    k_new = 2 * math.pi / d.grid.domain_length
    assert k_new == pytest.approx(2 * K1)


def test_state_requires_shared_grid():
    with pytest.raises(GridError):
        SystemState(Field.zeros(GRID), Field.zeros(GridSpec(128, 1.0)), 0.0)
