"""Right-hand sides and changes of variables for the damped systems.

Three systems share the integrator protocol (`damping` + `nonstiff`):

* toy model:      u_t + v u_x + v_x = 0,  v_t + v v_x + u_x + lam v = 0
* frozen-advection linearization: the same with a prescribed transport field w
* damped Euler in sound-speed variables (n, V):
                  n_t + V n_x + V_x + G(n) V_x = 0,
                  V_t + V V_x + n_x + lam V = 0
* general pair:   u_t + a v_x + V1(v) u_x + W1(u,v) v_x = 0,
                  v_t + b u_x + V2(v) u_x + W2(u,v) v_x + lam v + kap lam v^q = 0

All quadratic terms use dealiased products; the stiff part handed to the
integrating factor is always the diagonal damping -lam * (second component).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field as dataclass_field
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .dyadic import NormSpec, besov_norm, get_decomposition
from .errors import DomainError, GridError, RangeError
from .spectral import (
    Field,
    GridSpec,
    SystemState,
    dealias_product,
    derivative,
    resample,
)

__all__ = [
    "ToyConfig",
    "PressureLaw",
    "EulerConfig",
    "GeneralConfig",
    "ToyModel",
    "FrozenAdvectionModel",
    "EulerModel",
    "GeneralModel",
    "toy_rhs",
    "ltm_rhs",
    "linear_spectrum",
    "n_from_rho",
    "rho_from_n",
    "G_of_n",
    "euler_rhs",
    "general_rhs",
    "normalize_general",
    "TrajectoryMap",
    "rescale_solution",
    "make_initial_data",
]


# ---------------------------------------------------------------------------
# configurations


@dataclass(frozen=True)
class ToyConfig:
    lam: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise RangeError(f"lam must be > 0, got {self.lam}")


@dataclass(frozen=True)
class PressureLaw:
    """Barotropic pressure, normalized so the reference state has P'(1) = 1.

    Power laws P = rho**gamma / gamma keep closed forms for the sound-speed
    variable n and for G; a general law supplies P and P' as callables and
    falls back to quadrature and root finding.
    """

    kind: str  # "gamma" | "general"
    gamma: float = 2.0
    P: Callable[[float], float] | None = None
    dP: Callable[[float], float] | None = None

    @classmethod
    def gamma_law(cls, gamma: float) -> "PressureLaw":
        if not gamma > 0:
            raise RangeError(f"gamma must be > 0, got {gamma}")
        return cls(kind="gamma", gamma=float(gamma))

    @classmethod
    def general(cls, P, dP) -> "PressureLaw":
        if abs(dP(1.0) - 1.0) > 1e-9:
            raise RangeError(f"general law must satisfy P'(1) = 1, got {dP(1.0)}")
        return cls(kind="general", P=P, dP=dP)

    def n_range(self) -> tuple[float, float]:
        """Open interval of admissible n values."""
        if self.kind == "gamma":
            g = self.gamma
            if g == 1.0:
                return (-math.inf, math.inf)
            if g > 1.0:
                return (-1.0 / (g - 1.0), math.inf)
            return (-math.inf, 1.0 / (1.0 - g))
        return (self._n_at(1e-8), self._n_at(1e8))

    def _n_at(self, rho: float) -> float:
        val, _ = quad(lambda s: self.dP(s) / s, 1.0, rho, limit=200)
        return val


def n_from_rho(rho: float, pressure: PressureLaw) -> float:
    """Sound-speed style variable n(rho) = integral_1^rho P'(s)/s ds."""
    if not rho > 0:
        raise DomainError(f"rho must be > 0, got {rho}")
    if pressure.kind == "gamma":
        g = pressure.gamma
        if g == 1.0:
            return math.log(rho)
        return (rho ** (g - 1.0) - 1.0) / (g - 1.0)
    return pressure._n_at(rho)


def rho_from_n(n: float, pressure: PressureLaw) -> float:
    """Inverse of n_from_rho; DomainError outside the diffeomorphism range."""
    lo, hi = pressure.n_range()
    if not lo < n < hi:
        raise DomainError(f"n={n} outside admissible range ({lo:.6g}, {hi:.6g})")
    if pressure.kind == "gamma":
        g = pressure.gamma
        if g == 1.0:
            return math.exp(n)
        return (1.0 + (g - 1.0) * n) ** (1.0 / (g - 1.0))
    # n_from_rho is increasing where P' > 0; expand a bracket around rho = 1
    f = lambda rho: pressure._n_at(rho) - n
    a = b = 1.0
    for _ in range(200):
        if f(a) <= 0.0 <= f(b):
            return float(brentq(f, a, b, xtol=1e-15, rtol=1e-14))
        if f(a) > 0.0:
            a /= 2.0
        if f(b) < 0.0:
            b *= 2.0
    raise DomainError(f"could not bracket rho for n={n}")


def G_of_n(n: float, pressure: PressureLaw) -> float:
    """Nonlinear sound-speed correction G with G(n(rho)) = P'(rho) - 1.

    For a power law this is exactly (gamma - 1) * n.
    """
    if pressure.kind == "gamma":
        return (pressure.gamma - 1.0) * n
    return pressure.dP(rho_from_n(n, pressure)) - 1.0


def _g_samples(n_samples: np.ndarray, pressure: PressureLaw, time: float) -> np.ndarray:
    lo, hi = pressure.n_range()
    if np.min(n_samples) <= lo or np.max(n_samples) >= hi:
        raise DomainError(
            f"n left the diffeomorphism range ({lo:.6g}, {hi:.6g}) at t={time:.6g}"
        )
    if pressure.kind == "gamma":
        return (pressure.gamma - 1.0) * n_samples
    return np.array([G_of_n(float(n), pressure) for n in n_samples])


@dataclass(frozen=True)
class EulerConfig:
    lam: float = 1.0
    pressure: PressureLaw = dataclass_field(default_factory=lambda: PressureLaw.gamma_law(2.0))

    def __post_init__(self):
        if not self.lam > 0:
            raise RangeError(f"lam must be > 0, got {self.lam}")


@dataclass(frozen=True)
class GeneralConfig:
    """Coefficients of the general damped pair; V1, V2 vanish at v=0 and
    W1, W2 vanish at (0, 0) (the caller's smoothness contract)."""

    alpha: float = 1.0
    beta: float = 1.0
    lam: float = 1.0
    kappa: float = 0.0
    q: int = 2
    V1: Callable[[np.ndarray], np.ndarray] = lambda v: np.zeros_like(v)
    V2: Callable[[np.ndarray], np.ndarray] = lambda v: np.zeros_like(v)
    W1: Callable[[np.ndarray, np.ndarray], np.ndarray] = lambda u, v: np.zeros_like(v)
    W2: Callable[[np.ndarray, np.ndarray], np.ndarray] = lambda u, v: np.zeros_like(v)

    def __post_init__(self):
        for name in ("alpha", "beta", "lam"):
            if not getattr(self, name) > 0:
                raise RangeError(f"{name} must be > 0, got {getattr(self, name)}")
        if not (isinstance(self.q, int) and self.q >= 2):
            raise RangeError(f"q must be an integer >= 2, got {self.q}")


# ---------------------------------------------------------------------------
# models (integrator protocol: .damping, .nonstiff(state))


class ToyModel:
    def __init__(self, cfg: ToyConfig):
        self.cfg = cfg
        self.damping = cfg.lam

    def nonstiff(self, state: SystemState):
        u, v = state.first, state.second
        ux, vx = derivative(u), derivative(v)
        du = -(dealias_product(v, ux)) - vx
        dv = -(dealias_product(v, vx)) - ux
        return du, dv

    def full_rhs(self, state: SystemState):
        du, dv = self.nonstiff(state)
        return du, dv - self.damping * state.second

    def max_speed(self, state: SystemState) -> float:
        return 1.0 + float(np.max(np.abs(state.second.samples)))


class FrozenAdvectionModel:
    """Linearization of the toy model along a prescribed transport field w."""

    def __init__(self, w: Field, lam: float = 1.0):
        self.w = w
        self.damping = lam

    def nonstiff(self, state: SystemState):
        u, v = state.first, state.second
        if u.grid != self.w.grid:
            raise GridError("state and transport field grids differ")
        ux, vx = derivative(u), derivative(v)
        du = -(dealias_product(self.w, ux)) - vx
        dv = -(dealias_product(self.w, vx)) - ux
        return du, dv

    def full_rhs(self, state: SystemState):
        du, dv = self.nonstiff(state)
        return du, dv - self.damping * state.second

    def max_speed(self, state: SystemState) -> float:
        return 1.0 + float(np.max(np.abs(self.w.samples)))


class EulerModel:
    def __init__(self, cfg: EulerConfig):
        self.cfg = cfg
        self.damping = cfg.lam

    def nonstiff(self, state: SystemState):
        n, V = state.first, state.second
        nx, Vx = derivative(n), derivative(V)
        g = Field(n.grid, samples=_g_samples(n.samples, self.cfg.pressure, state.time))
        dn = -(dealias_product(V, nx)) - Vx - dealias_product(g, Vx)
        dV = -(dealias_product(V, Vx)) - nx
        return dn, dV

    def full_rhs(self, state: SystemState):
        dn, dV = self.nonstiff(state)
        return dn, dV - self.damping * state.second

    def max_speed(self, state: SystemState) -> float:
        g = _g_samples(state.first.samples, self.cfg.pressure, state.time)
        sound = math.sqrt(max(float(np.max(1.0 + g)), 0.0))
        return sound + float(np.max(np.abs(state.second.samples)))


class GeneralModel:
    def __init__(self, cfg: GeneralConfig):
        if cfg.q > 4:
            raise RangeError(f"q <= 4 (dealiasing budget), got {cfg.q}")
        self.cfg = cfg
        self.damping = cfg.lam

    def nonstiff(self, state: SystemState):
        cfg = self.cfg
        u, v = state.first, state.second
        grid = u.grid
        ux, vx = derivative(u), derivative(v)
        us, vs = u.samples, v.samples
        v1 = Field(grid, samples=np.asarray(cfg.V1(vs), dtype=float))
        v2 = Field(grid, samples=np.asarray(cfg.V2(vs), dtype=float))
        w1 = Field(grid, samples=np.asarray(cfg.W1(us, vs), dtype=float))
        w2 = Field(grid, samples=np.asarray(cfg.W2(us, vs), dtype=float))
        du = -cfg.alpha * vx - dealias_product(v1, ux) - dealias_product(w1, vx)
        dv = -cfg.beta * ux - dealias_product(v2, ux) - dealias_product(w2, vx)
        if cfg.kappa != 0.0:
            vq = v
            for _ in range(cfg.q - 1):
                vq = dealias_product(vq, v)
            dv = dv - (cfg.kappa * cfg.lam) * vq
        return du, dv

    def full_rhs(self, state: SystemState):
        du, dv = self.nonstiff(state)
        return du, dv - self.damping * state.second

    def max_speed(self, state: SystemState) -> float:
        cfg = self.cfg
        us, vs = state.first.samples, state.second.samples
        a = cfg.alpha + float(np.max(np.abs(cfg.W1(us, vs))))
        b = cfg.beta + float(np.max(np.abs(cfg.V2(vs))))
        drift = float(np.max(np.abs(cfg.V1(vs)))) + float(np.max(np.abs(cfg.W2(us, vs))))
        return math.sqrt(a * b) + drift


# spec-level functional forms


def toy_rhs(state: SystemState, cfg: ToyConfig):
    """Full toy-model time derivative (-v u_x - v_x, -v v_x - u_x - lam v)."""
    return ToyModel(cfg).full_rhs(state)


def ltm_rhs(state: SystemState, w: Field, lam: float = 1.0):
    """Frozen-advection linearization; equals toy_rhs when w is the state's v."""
    return FrozenAdvectionModel(w, lam).full_rhs(state)


def euler_rhs(state: SystemState, cfg: EulerConfig):
    return EulerModel(cfg).full_rhs(state)


def general_rhs(state: SystemState, cfg: GeneralConfig):
    return GeneralModel(cfg).full_rhs(state)


def linear_spectrum(xi: float, lam: float) -> tuple[complex, complex]:
    """Decay rates (positive real part = damping) of the frozen linear pair
    at frequency xi: the roots of z**2 - lam*z + xi**2 = 0.

    Returned as (slow, fast) in the real case (slow -> xi**2/lam, fast ->
    lam - xi**2/lam as xi -> 0).  For |xi| > lam/2 the rates form the
    conjugate pair (lam +- i*sqrt(4 xi**2 - lam**2))/2: the damping rate
    saturates at lam/2 while the oscillation frequency grows like |xi| (not
    like xi**2; conventions in the literature differ, this module always
    reports the exact roots).
    """
    disc = lam * lam - 4.0 * xi * xi
    root = cmath.sqrt(disc)
    slow = (lam - root) / 2.0
    fast = (lam + root) / 2.0
    if disc >= 0:
        return (complex(slow.real), complex(fast.real))
    return (slow, fast)


# ---------------------------------------------------------------------------
# exact rescalings


@dataclass(frozen=True)
class TrajectoryMap:
    """Invertible change of variables (u,v)(t,x) = (su*u', sv*v')(st*t, sx*x).

    `apply` maps a state of the original system to the corresponding state of
    the transformed one (samples are reused; only amplitudes, the torus
    length and the time stamp change).
    """

    scale_u: float
    scale_v: float
    scale_t: float
    scale_x: float

    def apply(self, state: SystemState) -> SystemState:
        grid = state.grid
        new_grid = GridSpec(grid.num_points, grid.domain_length * self.scale_x)
        u = Field(new_grid, samples=state.first.samples / self.scale_u)
        v = Field(new_grid, samples=state.second.samples / self.scale_v)
        return SystemState(u, v, state.time * self.scale_t)

    def invert(self, state: SystemState) -> SystemState:
        return self.inverse().apply(state)

    def inverse(self) -> "TrajectoryMap":
        return TrajectoryMap(
            1.0 / self.scale_u, 1.0 / self.scale_v, 1.0 / self.scale_t, 1.0 / self.scale_x
        )

    @property
    def is_identity(self) -> bool:
        return all(
            s == 1.0 for s in (self.scale_u, self.scale_v, self.scale_t, self.scale_x)
        )


def normalize_general(cfg: GeneralConfig) -> tuple[GeneralConfig, TrajectoryMap]:
    """Rescale the general system to alpha = beta = lam = 1.

    Substituting (u,v)(t,x) = (sqrt(alpha) u', sqrt(beta) v')(lam t,
    lam x / sqrt(alpha beta)) turns the system into the normalized one with
    drag coefficient kappa * beta**((q-1)/2) and rescaled coefficient
    functions.  The returned map sends original states to normalized ones
    (time stretched by lam, torus length by lam / sqrt(alpha beta)).
    """
    a, b, lam = cfg.alpha, cfg.beta, cfg.lam
    sa, sb = math.sqrt(a), math.sqrt(b)
    V1, V2, W1, W2 = cfg.V1, cfg.V2, cfg.W1, cfg.W2
    norm_cfg = GeneralConfig(
        alpha=1.0,
        beta=1.0,
        lam=1.0,
        kappa=cfg.kappa * b ** ((cfg.q - 1) / 2.0),
        q=cfg.q,
        V1=lambda v: V1(sb * v) / (sa * sb),
        V2=lambda v: V2(sb * v) / b,
        W1=lambda u, v: W1(sa * u, sb * v) / a,
        W2=lambda u, v: W2(sa * u, sb * v) / (sa * sb),
    )
    state_map = TrajectoryMap(scale_u=sa, scale_v=sb, scale_t=lam, scale_x=lam / (sa * sb))
    return norm_cfg, state_map


def rescale_solution(traj, lam: float, target_grid: GridSpec | None = None):
    """Map a unit-damping toy trajectory to damping coefficient lam by the
    exact substitution (u,v)(t,x) = (u',v')(lam t, lam x): times divide by
    lam and the torus shrinks by lam (every frequency is multiplied by lam).

    If `target_grid` is given the states are spectrally resampled onto it
    (GridError when it cannot hold the rescaled band).
    """
    from .functionals import Trajectory  # local import; functionals owns the type

    mapping = TrajectoryMap(scale_u=1.0, scale_v=1.0, scale_t=1.0 / lam, scale_x=1.0 / lam)
    states = [mapping.apply(s) for s in traj.states]
    if target_grid is not None:
        if not math.isclose(
            target_grid.domain_length, states[0].grid.domain_length
        ):
            raise GridError(
                "target grid length does not match the rescaled torus length"
            )
        states = [
            SystemState(
                resample(s.first, target_grid), resample(s.second, target_grid), s.time
            )
            for s in states
        ]
    return Trajectory(np.asarray(traj.times) / lam, states)


# ---------------------------------------------------------------------------
# initial data


def make_initial_data(
    envelope: tuple[float, float, int],
    amplitude: float,
    seed: int,
    grid: GridSpec,
) -> SystemState:
    """Random-phase data with a prescribed dyadic energy envelope.

    envelope = (s_low, s_high, j_split): per-mode coefficient magnitudes
    follow xi**-(s+1/2) with s = s_low below the knee and s = s_high above,
    which makes the per-block L2 mass scale like 2**(-j*s), i.e. a flat
    2**(j*s) ||block_j||_L2 profile on each side.  The knee sits at
    1.4 * 2**j_split (the plateau center of block j_split).  Phases are drawn
    deterministically from `seed`; the spectrum is cut at the dealiasing
    band; the mean mode is zero.

    The state is scaled so that the critical-norm size
    ||(u,v)||_{B^{1/2}_{2,1}} + ||(u,v)||_{B^{3/2}_{2,1}} equals `amplitude`.
    """
    if amplitude < 0:
        raise RangeError(f"amplitude must be >= 0, got {amplitude}")
    s_low, s_high, j_split = envelope
    n = grid.num_points
    if amplitude == 0.0:
        return SystemState(Field.zeros(grid), Field.zeros(grid), 0.0)

    xi = np.abs(grid.wavenumbers)
    knee = 1.4 * 2.0 ** float(j_split)
    with np.errstate(divide="ignore"):
        rel = np.where(xi > 0, xi / knee, 1.0)
        mag = np.where(
            rel <= 1.0, rel ** -(s_low + 0.5), rel ** -(s_high + 0.5)
        )
    mag[0] = 0.0
    mag[~grid.dealias_keep] = 0.0
    mag[n // 2] = 0.0

    rng = np.random.default_rng(seed)

    def one_field() -> Field:
        phase = rng.uniform(0.0, 2.0 * math.pi, size=n // 2 - 1)
        c = np.zeros(n, dtype=complex)
        c[1 : n // 2] = np.exp(1j * phase)
        c[n // 2 + 1 :] = np.conj(c[1 : n // 2][::-1])
        return Field(grid, coefficients=c * mag)

    u = one_field()
    v = one_field()
    decomp = get_decomposition(grid)
    size = sum(
        besov_norm(f, decomp, NormSpec(s, 2.0, 1.0))
        for f in (u, v)
        for s in (0.5, 1.5)
    )
    if size == 0.0:
        return SystemState(Field.zeros(grid), Field.zeros(grid), 0.0)
    scale = amplitude / size
    return SystemState(scale * u, scale * v, 0.0)
