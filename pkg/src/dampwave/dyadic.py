"""Discrete dyadic frequency decomposition and Besov-type seminorms.

A smooth even cutoff chi (= 1 on [-3/4, 3/4], = 0 outside (-4/3, 4/3)) yields
annulus multipliers phi(xi) = chi(xi/2) - chi(xi) supported on 3/4 <= |xi| <= 8/3.
Block j applies phi(2^-j xi) in Fourier space; the blocks tile every nonzero
grid frequency exactly once (telescoping partition of unity).  Seminorms
weight per-block L^p norms by 2^(j*s) and sum in l^r; hybrid norms split the
sum at a threshold J with one overlapping block (low: j <= J, high: j >= J).

The mean mode is excluded from every block and every seminorm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from .errors import GridError, RangeError
from .spectral import Field, GridSpec, SystemState

__all__ = [
    "CutoffProfile",
    "DyadicDecomposition",
    "NormSpec",
    "FrequencySplit",
    "default_profile",
    "build",
    "get_decomposition",
    "block",
    "lowpass",
    "highpass",
    "smoothing",
    "lp_norm",
    "block_lp_profile",
    "besov_norm",
    "besov_norm_from_profile",
    "j_threshold",
    "hybrid_data_norm",
    "HybridNorm",
]


def _smooth_step_down(t: np.ndarray) -> np.ndarray:
    """C-infinity transition from 1 (t <= 0) to 0 (t >= 1) built from exp(-1/t)."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    lo = t <= 0.0
    hi = t >= 1.0
    mid = ~(lo | hi)
    out[lo] = 1.0
    out[hi] = 0.0
    tm = t[mid]
    with np.errstate(over="ignore", under="ignore"):
        f_up = np.exp(-1.0 / tm)          # ~ e^{-1/t}, vanishes at 0+
        f_dn = np.exp(-1.0 / (1.0 - tm))  # vanishes at 1-
    out[mid] = f_dn / (f_up + f_dn)
    return out


@dataclass(frozen=True)
class CutoffProfile:
    """Smooth even cutoff chi with plateau [-3/4, 3/4] and support (-4/3, 4/3)."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    plateau: float = 0.75
    support: float = 4.0 / 3.0

    def chi(self, xi) -> np.ndarray:
        return self.evaluator(np.abs(np.asarray(xi, dtype=float)))

    def phi(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return self.chi(xi / 2.0) - self.chi(xi)


def default_profile() -> CutoffProfile:
    plateau, support = 0.75, 4.0 / 3.0
    width = support - plateau

    def chi(abs_xi: np.ndarray) -> np.ndarray:
        return _smooth_step_down((abs_xi - plateau) / width)

    return CutoffProfile(evaluator=chi)


@dataclass(frozen=True)
class NormSpec:
    """Besov seminorm exponents: regularity s, Lebesgue p, summation r."""

    s: float
    p: float = 2.0
    r: float = 1.0

    def __post_init__(self):
        if not self.p >= 1:
            raise RangeError(f"p must be >= 1, got {self.p}")
        if not self.r >= 1:
            raise RangeError(f"r must be >= 1, got {self.r}")

    def label(self) -> str:
        def fmt(x):
            if math.isinf(x):
                return "inf"
            return f"{x:g}"

        return f"B[{fmt(self.s)},{fmt(self.p)},{fmt(self.r)}]"


@dataclass(frozen=True)
class FrequencySplit:
    """Low/high threshold J; low runs over j <= J, high over j >= J (one shared block)."""

    threshold: int

    def check(self, decomp: "DyadicDecomposition") -> "FrequencySplit":
        if not decomp.j_min <= self.threshold <= decomp.j_max:
            raise RangeError(
                f"threshold {self.threshold} outside decomposition range "
                f"[{decomp.j_min}, {decomp.j_max}]"
            )
        return self


class DyadicDecomposition:
    """Family of annulus multipliers phi(2^-j xi_m) over a grid's frequencies.

    Immutable after construction; shareable across threads.
    """

    def __init__(self, grid: GridSpec, profile: CutoffProfile, j_min: int, j_max: int):
        self.grid = grid
        self.profile = profile
        self.j_min = j_min
        self.j_max = j_max
        xi = grid.wavenumbers
        mults = np.empty((j_max - j_min + 1, grid.num_points))
        for row, j in enumerate(range(j_min, j_max + 1)):
            m = profile.phi(xi / 2.0**j)
            m[0] = 0.0
            mults[row] = m
        mults.setflags(write=False)
        self.multipliers = mults
        self._chi_cache: dict[int, np.ndarray] = {}

    @property
    def js(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def multiplier(self, j: int) -> np.ndarray:
        if not self.j_min <= j <= self.j_max:
            raise IndexError(f"block {j} outside [{self.j_min}, {self.j_max}]")
        return self.multipliers[j - self.j_min]

    def chi_multiplier(self, j: int) -> np.ndarray:
        """Multiplier of the smoothing operator chi(2^-j xi) with mean excluded."""
        if j not in self._chi_cache:
            m = self.profile.chi(self.grid.wavenumbers / 2.0**j)
            m[0] = 0.0
            m.setflags(write=False)
            self._chi_cache[j] = m
        return self._chi_cache[j]

    def partition_defect(self) -> float:
        """Max deviation of sum_j phi(2^-j xi) from 1 over nonzero grid frequencies."""
        total = self.multipliers.sum(axis=0)
        return float(np.max(np.abs(total[1:] - 1.0)))


def build(profile: CutoffProfile, grid: GridSpec) -> DyadicDecomposition:
    """Choose the block range covering every nonzero grid frequency and
    precompute the multipliers."""
    xi_lo = grid.min_frequency
    xi_hi = grid.nyquist_frequency
    j_min = math.floor(math.log2(xi_lo)) - 1
    j_max = math.ceil(math.log2(xi_hi))
    if j_max - j_min + 1 < 3:
        raise GridError(
            f"grid hosts only {j_max - j_min + 1} dyadic blocks (need >= 3)"
        )
    return DyadicDecomposition(grid, profile, j_min, j_max)


@lru_cache(maxsize=32)
def get_decomposition(grid: GridSpec) -> DyadicDecomposition:
    """Decomposition with the default cutoff, cached per grid."""
    return build(default_profile(), grid)


def block(field: Field, decomp: DyadicDecomposition, j: int) -> Field:
    """Extract dyadic block j (Fourier multiplier phi(2^-j xi))."""
    if field.grid != decomp.grid:
        raise GridError("field and decomposition grids differ")
    return Field(field.grid, coefficients=field.coefficients * decomp.multiplier(j))


def lowpass(field: Field, decomp: DyadicDecomposition, J: int) -> Field:
    """Sum of blocks j <= J.  J = j_min - 1 is an allowed sentinel (zero field)."""
    if field.grid != decomp.grid:
        raise GridError("field and decomposition grids differ")
    if J < decomp.j_min:
        return Field.zeros(field.grid)
    hi = min(J, decomp.j_max)
    mult = decomp.multipliers[: hi - decomp.j_min + 1].sum(axis=0)
    return Field(field.grid, coefficients=field.coefficients * mult)


def highpass(field: Field, decomp: DyadicDecomposition, J: int) -> Field:
    """Sum of blocks j >= J."""
    if field.grid != decomp.grid:
        raise GridError("field and decomposition grids differ")
    if J > decomp.j_max:
        return Field.zeros(field.grid)
    lo = max(J, decomp.j_min)
    mult = decomp.multipliers[lo - decomp.j_min :].sum(axis=0)
    return Field(field.grid, coefficients=field.coefficients * mult)


def smoothing(field: Field, decomp: DyadicDecomposition, j: int) -> Field:
    """Smoothing operator: frequencies below 2^j (multiplier chi(2^-j xi)).

    Equals the sum of blocks j' <= j-1 on the resolved band.
    """
    if field.grid != decomp.grid:
        raise GridError("field and decomposition grids differ")
    return Field(field.grid, coefficients=field.coefficients * decomp.chi_multiplier(j))


def lp_norm(field: Field, p: float) -> float:
    """L^p norm by the rectangle rule on the grid; p = inf gives max |f|."""
    if not p >= 1:
        raise RangeError(f"p must be >= 1, got {p}")
    vals = np.abs(field.samples)
    if math.isinf(p):
        return float(vals.max(initial=0.0))
    dx = field.grid.dx
    return float((np.sum(vals**p) * dx) ** (1.0 / p))


def block_lp_profile(
    field: Field, decomp: DyadicDecomposition, p: float
) -> np.ndarray:
    """Per-block L^p norms ||block_j f||_p for j in decomp.js.

    p = 2 is evaluated directly from coefficients (Parseval); other p go
    through samples.
    """
    if field.grid != decomp.grid:
        raise GridError("field and decomposition grids differ")
    c = field.coefficients
    if p == 2:
        L = field.grid.domain_length
        energy = (decomp.multipliers**2) @ (np.abs(c) ** 2)
        return np.sqrt(L * energy)
    out = np.empty(len(decomp.js))
    n = field.grid.num_points
    for row in range(len(decomp.js)):
        samples = np.fft.ifft(decomp.multipliers[row] * c * n).real
        out[row] = lp_norm(Field(field.grid, samples=samples), p)
    return out


def besov_norm_from_profile(
    profile: np.ndarray,
    decomp: DyadicDecomposition,
    spec: NormSpec,
    side: str = "full",
    J: int | None = None,
) -> float:
    js = np.arange(decomp.j_min, decomp.j_max + 1)
    if side == "full":
        sel = slice(None)
    elif side == "low":
        if J is None:
            raise ValueError("side='low' needs a threshold J")
        sel = js <= J
    elif side == "high":
        if J is None:
            raise ValueError("side='high' needs a threshold J")
        sel = js >= J
    else:
        raise ValueError(f"side must be full|low|high, got {side!r}")
    terms = 2.0 ** (js[sel] * spec.s) * profile[sel]
    if terms.size == 0:
        return 0.0
    if math.isinf(spec.r):
        return float(terms.max())
    return float(np.sum(terms**spec.r) ** (1.0 / spec.r))


def besov_norm(
    field: Field,
    decomp: DyadicDecomposition,
    spec: NormSpec,
    side: str = "full",
    J: int | None = None,
) -> float:
    """Homogeneous Besov seminorm: l^r over blocks of 2^(j*s) ||block_j f||_p.

    side="low" sums j <= J, side="high" sums j >= J (overlapping convention).
    """
    profile = block_lp_profile(field, decomp, spec.p)
    return besov_norm_from_profile(profile, decomp, spec, side, J)


def band_residual(field: Field, decomp: DyadicDecomposition) -> float:
    """Fraction of the field's mean-free L^2 energy outside the resolved blocks.

    Zero by construction when the block range covers every grid frequency;
    reported so truncation of the j-range stays observable.
    """
    c = field.coefficients.copy()
    c[0] = 0.0
    total = float(np.sum(np.abs(c) ** 2))
    if total == 0.0:
        return 0.0
    covered = decomp.multipliers.sum(axis=0)
    rem = np.sum(np.abs(c) ** 2 * np.clip(1.0 - covered, 0.0, None))
    return float(rem / total)


def j_threshold(lam: float, k: int) -> int:
    """Low/high split index floor(log2(lam)) + k."""
    if not lam > 0:
        raise RangeError(f"lam must be > 0, got {lam}")
    mantissa, exponent = math.frexp(lam)  # lam = mantissa * 2**exponent, mantissa in [0.5, 1)
    return exponent - 1 + k


class HybridNorm(NamedTuple):
    low: float
    high: float
    combined: float


def hybrid_data_norm(
    state: SystemState,
    decomp: DyadicDecomposition,
    p: float,
    lam: float,
    k: int,
) -> HybridNorm:
    """Smallness quantity of the well-posedness theory: low-frequency B^{1/p}_{p,1}
    part plus lam^-1 times the high-frequency B^{3/2}_{2,1} part, split at
    j_threshold(lam, k).  Component norms add."""
    if not 2 <= p <= 4:
        raise RangeError(f"p must be in [2, 4], got {p}")
    J = j_threshold(lam, k)
    low_spec = NormSpec(1.0 / p, p, 1.0)
    high_spec = NormSpec(1.5, 2.0, 1.0)
    low = sum(
        besov_norm(f, decomp, low_spec, "low", J) for f in (state.first, state.second)
    )
    high = sum(
        besov_norm(f, decomp, high_spec, "high", J)
        for f in (state.first, state.second)
    )
    return HybridNorm(low, high, low + high / lam)
