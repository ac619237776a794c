"""Shared oracles for the test suite: direct O(N^2) transforms, direct
spectral convolution, and closed-form 2x2 linear evolution."""

import math

import numpy as np

from dampwave.spectral import Field, GridSpec, SystemState


def dft_oracle(samples: np.ndarray) -> np.ndarray:
    """Direct O(N^2) discrete transform with the package normalization
    (coefficient m = (1/N) sum_i f_i exp(-2*pi*i*m*i/N), FFT bin order)."""
    n = len(samples)
    i = np.arange(n)
    m = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    kernel = np.exp(-2j * math.pi * np.outer(m, i) / n)
    return kernel @ samples / n


def convolution_oracle(f: Field, g: Field) -> np.ndarray:
    """Exact truncated convolution: coefficients of the product of the
    2/3-band parts of f and g, keeping only the 2/3 band of the result."""
    grid = f.grid
    n = grid.num_points
    keep = grid.dealias_keep
    m = grid.mode_numbers
    cf = np.where(keep, f.coefficients, 0.0)
    cg = np.where(keep, g.coefficients, 0.0)
    out = np.zeros(n, dtype=complex)
    idx = {int(mm): i for i, mm in enumerate(m)}
    for i1 in np.nonzero(cf)[0]:
        for i2 in np.nonzero(cg)[0]:
            target = int(m[i1]) + int(m[i2])
            if target in idx and keep[idx[target]]:
                out[idx[target]] += cf[i1] * cg[i2]
    return out


def linear_toy_evolution(state: SystemState, lam: float, t: float) -> SystemState:
    """Exact per-mode solution of u_t = -v_x, v_t = -u_x - lam v via the
    closed-form exponential of the 2x2 symbol."""
    grid = state.grid
    xi = grid.wavenumbers
    disc = np.sqrt((lam * lam - 4.0 * xi**2).astype(complex))
    mu_p = (-lam + disc) / 2.0
    mu_m = (-lam - disc) / 2.0
    ep, em = np.exp(mu_p * t), np.exp(mu_m * t)
    dd = np.where(np.abs(disc) < 1e-30, 1.0, disc)
    # exp(tA) = f0 I + f1 A for the 2x2 symbol A = [[0, -i xi], [-i xi, -lam]]
    f1 = (ep - em) / dd
    f0 = (ep * (-mu_m) + em * mu_p) / dd
    same_root = np.abs(disc) < 1e-30
    f1 = np.where(same_root, t * np.exp(mu_p * t), f1)
    f0 = np.where(same_root, (1 - mu_p * t) * np.exp(mu_p * t), f0)
    cu, cv = state.first.coefficients, state.second.coefficients
    cu_t = f0 * cu + f1 * (-1j * xi * cv)
    cv_t = f0 * cv + f1 * (-1j * xi * cu - lam * cv)
    return SystemState(
        Field.from_coefficients(grid, cu_t),
        Field.from_coefficients(grid, cv_t),
        state.time + t,
    )


def single_mode_state(grid: GridSpec, mode: int, amp_u=1.0, amp_v=0.0,
                      phase=0.0) -> SystemState:
    xi = grid.wavenumbers[mode]
    x = grid.nodes
    u = Field(grid, samples=amp_u * np.cos(xi * x + phase))
    v = Field(grid, samples=amp_v * np.sin(xi * x + phase))
    return SystemState(u, v, 0.0)
