"""Periodic pseudospectral toolbox.

Uniform grid on a torus of length L, FFT-based transform pair, spectral
differentiation, products dealiased by the 2/3 rule, and an
integrating-factor SSP-RK3 time stepper that removes a diagonal damping
term -lam*v exactly.

Conventions: a real field f is held jointly as N samples f(x_i) and
normalized Fourier coefficients c_m with f(x) = sum_m c_m exp(2*pi*i*m*x/L),
so cos(2*pi*m*x/L) has c_{+-m} = 1/2.  The mean mode c_0 is kept with the
field but is excluded from the dyadic frequency analysis built on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import BlowupDetected, GridError

__all__ = [
    "GridSpec",
    "Field",
    "SystemState",
    "transform",
    "derivative",
    "dealias_product",
    "dealias",
    "resample",
    "dilate",
    "step",
    "advance",
]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid: num_points samples on a torus of length domain_length."""

    num_points: int
    domain_length: float

    def __post_init__(self):
        if not _is_power_of_two(self.num_points) or self.num_points < 8:
            raise GridError(
                f"num_points must be a power of two >= 8, got {self.num_points}"
            )
        if not (self.domain_length > 0):
            raise GridError(f"domain_length must be > 0, got {self.domain_length}")

    @property
    def dx(self) -> float:
        return self.domain_length / self.num_points

    @property
    def nodes(self) -> np.ndarray:
        return _nodes(self)

    @property
    def mode_numbers(self) -> np.ndarray:
        """Signed integer mode indices in FFT order: 0, 1, ..., N/2-1, -N/2, ..., -1."""
        return _mode_numbers(self)

    @property
    def wavenumbers(self) -> np.ndarray:
        """Physical wavenumbers xi_m = 2*pi*m/L in FFT order."""
        return _wavenumbers(self)

    @property
    def dealias_keep(self) -> np.ndarray:
        """Boolean mask of modes kept by the 2/3 rule (|m| <= N//3)."""
        return _dealias_keep(self)

    @property
    def nyquist_frequency(self) -> float:
        return math.pi * self.num_points / self.domain_length

    @property
    def min_frequency(self) -> float:
        return 2.0 * math.pi / self.domain_length

    def torus_safe_horizon(self, retention: float = 0.8) -> float:
        """Largest time window on which the discrete spectral gap keeps at
        least `retention` of a unit-rate mode at the smallest frequency,
        i.e. exp(-xi_1**2 * t) >= retention."""
        return math.log(1.0 / retention) / self.min_frequency**2


@lru_cache(maxsize=64)
def _nodes(grid: GridSpec) -> np.ndarray:
    x = grid.dx * np.arange(grid.num_points)
    x.setflags(write=False)
    return x


@lru_cache(maxsize=64)
def _mode_numbers(grid: GridSpec) -> np.ndarray:
    m = np.fft.fftfreq(grid.num_points, d=1.0 / grid.num_points)
    m = np.rint(m).astype(np.int64)
    m.setflags(write=False)
    return m


@lru_cache(maxsize=64)
def _wavenumbers(grid: GridSpec) -> np.ndarray:
    xi = (2.0 * math.pi / grid.domain_length) * _mode_numbers(grid)
    xi.setflags(write=False)
    return xi


@lru_cache(maxsize=64)
def _dealias_keep(grid: GridSpec) -> np.ndarray:
    cutoff = grid.num_points // 3
    keep = np.abs(_mode_numbers(grid)) <= cutoff
    keep.setflags(write=False)
    return keep


class Field:
    """A real periodic function held as grid samples and Fourier coefficients.

    Either representation may be supplied; the other is computed lazily.
    Coefficients are Hermitian-symmetric (c_{-m} = conj(c_m)) so samples are
    real; `from_coefficients` symmetrizes its input to enforce this.
    """

    __slots__ = ("grid", "_samples", "_coeffs")

    def __init__(self, grid: GridSpec, samples=None, coefficients=None):
        if samples is None and coefficients is None:
            raise ValueError("Field needs samples or coefficients")
        self.grid = grid
        self._samples = None
        self._coeffs = None
        if samples is not None:
            samples = np.asarray(samples, dtype=float)
            if samples.shape != (grid.num_points,):
                raise GridError(
                    f"samples shape {samples.shape} != ({grid.num_points},)"
                )
            self._samples = samples
        if coefficients is not None:
            coefficients = np.asarray(coefficients, dtype=complex)
            if coefficients.shape != (grid.num_points,):
                raise GridError(
                    f"coefficients shape {coefficients.shape} != ({grid.num_points},)"
                )
            self._coeffs = coefficients

    @classmethod
    def from_samples(cls, grid: GridSpec, values) -> "Field":
        return cls(grid, samples=values)

    @classmethod
    def from_coefficients(cls, grid: GridSpec, coeffs) -> "Field":
        c = np.asarray(coeffs, dtype=complex)
        if c.shape != (grid.num_points,):
            raise GridError(f"coefficients shape {c.shape} != ({grid.num_points},)")
        # Hermitian symmetrization: average c_m with conj(c_{-m}).
        sym = 0.5 * (c + np.conj(c[_conj_index(grid)]))
        return cls(grid, coefficients=sym)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "Field":
        return cls(grid, samples=np.zeros(grid.num_points))

    @property
    def samples(self) -> np.ndarray:
        if self._samples is None:
            self._samples = np.fft.ifft(self._coeffs * self.grid.num_points).real
        return self._samples

    @property
    def coefficients(self) -> np.ndarray:
        if self._coeffs is None:
            self._coeffs = np.fft.fft(self._samples) / self.grid.num_points
        return self._coeffs

    def mean(self) -> float:
        if self._coeffs is not None:
            return float(self._coeffs[0].real)
        return float(np.mean(self._samples))

    def copy(self) -> "Field":
        return Field(
            self.grid,
            samples=None if self._samples is None else self._samples.copy(),
            coefficients=None if self._coeffs is None else self._coeffs.copy(),
        )

    # Small amount of arithmetic; products go through dealias_product.
    def __add__(self, other: "Field") -> "Field":
        _require_same_grid(self, other)
        return Field(self.grid, samples=self.samples + other.samples)

    def __sub__(self, other: "Field") -> "Field":
        _require_same_grid(self, other)
        return Field(self.grid, samples=self.samples - other.samples)

    def __neg__(self) -> "Field":
        return Field(self.grid, samples=-self.samples)

    def __rmul__(self, scalar: float) -> "Field":
        return Field(self.grid, samples=float(scalar) * self.samples)

    __mul__ = __rmul__

    def __repr__(self):
        return f"Field(N={self.grid.num_points}, L={self.grid.domain_length:.6g})"


@lru_cache(maxsize=64)
def _conj_index(grid: GridSpec) -> np.ndarray:
    # index of the -m bin for each m bin (0 and Nyquist map to themselves)
    idx = (-np.arange(grid.num_points)) % grid.num_points
    idx.setflags(write=False)
    return idx


def _require_same_grid(f: Field, g: Field) -> None:
    if f.grid != g.grid:
        raise GridError(f"mismatched grids: {f.grid} vs {g.grid}")


@dataclass
class SystemState:
    """Pair of unknowns on one grid at one time."""

    first: Field
    second: Field
    time: float = 0.0

    def __post_init__(self):
        if self.first.grid != self.second.grid:
            raise GridError("state components must share one grid")
        if self.time < 0:
            raise ValueError(f"time must be >= 0, got {self.time}")

    @property
    def grid(self) -> GridSpec:
        return self.first.grid

    def copy(self) -> "SystemState":
        return SystemState(self.first.copy(), self.second.copy(), self.time)


def transform(field: Field, direction: str) -> Field:
    """Synchronize a field's representations.

    "forward" fills coefficients from samples, "inverse" fills samples from
    coefficients; the returned field carries both.
    """
    if direction == "forward":
        out = Field(field.grid, samples=field.samples)
        out.coefficients  # materialize
    elif direction == "inverse":
        out = Field.from_coefficients(field.grid, field.coefficients)
        out.samples
    else:
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    return out


def derivative(field: Field, order: int = 1) -> Field:
    """Spectral derivative: coefficient m is multiplied by (i*2*pi*m/L)**order.

    The Nyquist bin is zeroed for odd orders (it has no conjugate partner, so
    an odd power of i*xi there would break Hermitian symmetry).
    """
    if not 1 <= order <= 4:
        raise ValueError(f"order must be in 1..4, got {order}")
    xi = field.grid.wavenumbers
    mult = (1j * xi) ** order
    if order % 2 == 1:
        mult = mult.copy()
        mult[field.grid.num_points // 2] = 0.0
    return Field(field.grid, coefficients=field.coefficients * mult)


def dealias(field: Field) -> Field:
    """Truncate a field to the 2/3-rule band |m| <= N//3."""
    keep = field.grid.dealias_keep
    return Field(field.grid, coefficients=np.where(keep, field.coefficients, 0.0))


def dealias_product(f: Field, g: Field) -> Field:
    """Pointwise product with 2/3-rule truncation on inputs and output.

    Exact (alias-free) for inputs supported in the retained band: their true
    convolution reaches |m| <= 2*N//3, whose aliased images land outside the
    kept band and are discarded with the truncation.
    """
    _require_same_grid(f, g)
    keep = f.grid.dealias_keep
    n = f.grid.num_points
    cf = np.where(keep, f.coefficients, 0.0)
    cg = np.where(keep, g.coefficients, 0.0)
    pf = np.fft.ifft(cf * n).real
    pg = np.fft.ifft(cg * n).real
    prod = np.fft.fft(pf * pg) / n
    return Field(f.grid, coefficients=np.where(keep, prod, 0.0))


def resample(field: Field, grid: GridSpec, tol: float = 1e-12) -> Field:
    """Spectral interpolation onto a grid with the same domain length.

    Raises GridError if the target cannot hold the field's spectrum (relative
    truncated energy above `tol`).
    """
    if math.isclose(grid.domain_length, field.grid.domain_length):
        pass
    else:
        raise GridError("resample requires equal domain lengths")
    c_old = field.coefficients
    m_old = field.grid.mode_numbers
    m_new = grid.mode_numbers
    half_new = grid.num_points // 2
    c_new = np.zeros(grid.num_points, dtype=complex)
    inside = np.abs(m_old) < half_new
    lut = {int(m): i for i, m in enumerate(m_new)}
    for i_old in np.where(inside)[0]:
        c_new[lut[int(m_old[i_old])]] = c_old[i_old]
    dropped = np.sum(np.abs(c_old[~inside]) ** 2)
    total = np.sum(np.abs(c_old) ** 2)
    if total > 0 and dropped / total > tol:
        raise GridError(
            f"target grid drops {dropped / total:.3e} of the spectral energy"
        )
    return Field.from_coefficients(grid, c_new)


def dilate(field: Field, factor: float = 2.0) -> Field:
    """Return x -> f(factor*x) as a field on the torus of length L/factor.

    Samples are unchanged; only the grid metadata rescales, so every
    frequency is multiplied by `factor` exactly.
    """
    new_grid = GridSpec(field.grid.num_points, field.grid.domain_length / factor)
    return Field(new_grid, samples=field.samples)


def step(state: SystemState, model, dt: float) -> SystemState:
    """One integrating-factor SSP-RK3 step.

    `model` provides `damping` (the coefficient lam of the stiff term
    -lam * second) and `nonstiff(state) -> (Field, Field)` (every other
    right-hand-side term).  The damping is removed exactly by the substitution
    w = exp(lam*(t - t_n)) * v, and SSP-RK3 advances (u, w).

    Raises BlowupDetected when the result is not finite.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    lam = model.damping
    grid = state.grid
    e_full = math.exp(-lam * dt)
    e_half = math.exp(-lam * dt / 2.0)

    u0 = state.first.samples
    v0 = state.second.samples

    ku0, kv0 = _rhs_arrays(model, state.first, state.second, state.time)
    u1 = u0 + dt * ku0
    w1 = v0 + dt * kv0
    v1 = e_full * w1

    ku1, kv1 = _rhs_arrays(
        model, Field(grid, samples=u1), Field(grid, samples=v1), state.time + dt
    )
    u2 = 0.75 * u0 + 0.25 * (u1 + dt * ku1)
    w2 = 0.75 * v0 + 0.25 * (w1 + dt * kv1 / e_full)
    v2 = e_half * w2

    ku2, kv2 = _rhs_arrays(
        model, Field(grid, samples=u2), Field(grid, samples=v2), state.time + dt / 2.0
    )
    u_new = u0 / 3.0 + (2.0 / 3.0) * (u2 + dt * ku2)
    w_new = v0 / 3.0 + (2.0 / 3.0) * (w2 + dt * kv2 / e_half)
    v_new = e_full * w_new

    t_new = state.time + dt
    if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(v_new))):
        raise BlowupDetected(t_new)
    return SystemState(Field(grid, samples=u_new), Field(grid, samples=v_new), t_new)


def _rhs_arrays(model, u: Field, v: Field, time: float):
    du, dv = model.nonstiff(SystemState(u, v, max(time, 0.0)))
    return du.samples, dv.samples


def advance(state: SystemState, model, dt: float, n_steps: int) -> SystemState:
    """Apply `step` n_steps times."""
    for _ in range(n_steps):
        state = step(state, model, dt)
    return state
