"""Measurable functionals along simulated trajectories.

Contains the damped mode lam*v + u_x, the global well-posedness functional
X_{p,lam} (six sup/integral terms in hybrid norms split at
J = floor(log2 lam) + k), blockwise Lyapunov pairs (L, H), empirical decay
fits in log<t> coordinates, the predicted decay-exponent table, and the
two-solution stability distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dyadic import (
    DyadicDecomposition,
    NormSpec,
    besov_norm,
    besov_norm_from_profile,
    block_lp_profile,
    get_decomposition,
    j_threshold,
    smoothing,
)
from .errors import AlignmentError, BlowupDetected, FitError, RangeError
from .spectral import Field, SystemState, derivative, step

__all__ = [
    "Trajectory",
    "FunctionalSeries",
    "DecayFit",
    "DecayExponents",
    "simulate",
    "damped_mode",
    "pair_besov",
    "X_p_lambda",
    "lyapunov",
    "besov_series",
    "decay_fit",
    "predicted_decay",
    "stability_metric",
]


def _trapz(y: np.ndarray, x: np.ndarray) -> float:
    return float(np.trapezoid(y, x))


def _running_trapz(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(np.asarray(y, dtype=float))
    if len(x) > 1:
        seg = 0.5 * (y[1:] + y[:-1]) * np.diff(x)
        out[1:] = np.cumsum(seg)
    return out


class Trajectory:
    """Time-stamped states plus named running time-integral accumulators."""

    def __init__(self, times, states):
        times = np.asarray(times, dtype=float)
        if len(times) != len(states) or len(times) == 0:
            raise ValueError("times and states must be nonempty and equal length")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        self.times = times
        self.states = list(states)
        self.accumulators: dict[str, np.ndarray] = {}

    def __len__(self):
        return len(self.states)

    @property
    def grid(self):
        return self.states[0].grid

    def accumulate(self, name: str, values, power: float = 1.0) -> np.ndarray:
        """Running L^power-in-time norm of a sampled series (trapezoid rule).

        Stored under `name`; starts at 0 and is non-decreasing.
        """
        values = np.asarray(values, dtype=float)
        integral = _running_trapz(np.abs(values) ** power, self.times)
        acc = integral ** (1.0 / power)
        self.accumulators[name] = acc
        return acc

    def final_states(self):
        return self.states[-1]


@dataclass
class FunctionalSeries:
    times: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values must have equal length")

    def window(self, t_a: float, t_b: float) -> "FunctionalSeries":
        sel = (self.times >= t_a) & (self.times <= t_b)
        return FunctionalSeries(self.times[sel], self.values[sel], self.label)


@dataclass
class DecayFit:
    slope: float
    intercept: float
    window: tuple[float, float]
    r_squared: float

    def __post_init__(self):
        if not self.window[0] < self.window[1]:
            raise ValueError("window must satisfy t_a < t_b")


@dataclass(frozen=True)
class DecayExponents:
    """Predicted algebraic rates for data with extra low-frequency decay sigma1."""

    sigma1: float
    sigma: float
    alpha: float      # rate of the B^sigma_{2,1} low-frequency norm
    alpha1: float     # rate of the damped component in B^{-sigma1}_{2,inf}
    alpha2: float     # rate of the high-frequency B^{3/2} norm
    theta0: float     # interpolation weight driving the Lyapunov ODE
    theta1: float     # interpolation weight for intermediate sigma
    kappa0: float     # time-scale constant in <t> = 1 + kappa0 * t
    c0_lambda: float  # data size entering every decay bound


def simulate(model, state0: SystemState, horizon: float, snap_dt: float,
             cfl: float = 0.4, dt: float | None = None) -> Trajectory:
    """Advance a state with the integrating-factor stepper, storing snapshots
    every `snap_dt` (time step chosen from the advective CFL bound at t=0 and
    rounded down to divide snap_dt exactly).

    On blow-up the partial trajectory is attached to the raised
    BlowupDetected as `.trajectory`.
    """
    if snap_dt <= 0 or horizon <= 0:
        raise ValueError("horizon and snap_dt must be > 0")
    if dt is None:
        dt = cfl * state0.grid.dx / model.max_speed(state0)
    n_sub = max(1, math.ceil(snap_dt / dt - 1e-12))
    dt_eff = snap_dt / n_sub
    n_snap = max(1, round(horizon / snap_dt))
    times = [state0.time]
    states = [state0]
    state = state0
    try:
        for k in range(1, n_snap + 1):
            for _ in range(n_sub):
                state = step(state, model, dt_eff)
            state.time = state0.time + k * snap_dt  # exact stamps
            times.append(state.time)
            states.append(state)
    except BlowupDetected as exc:
        if len(times) > 1:
            exc.trajectory = Trajectory(times, states)
        raise
    return Trajectory(times, states)


def damped_mode(state: SystemState, lam: float) -> Field:
    """The well-damped combination lam*v + u_x."""
    return lam * state.second + derivative(state.first)


def pair_besov(state: SystemState, decomp, spec: NormSpec,
               side: str = "full", J: int | None = None) -> float:
    """Besov seminorm of the pair (first, second): component norms add."""
    return besov_norm(state.first, decomp, spec, side, J) + besov_norm(
        state.second, decomp, spec, side, J
    )


def besov_series(traj: Trajectory, spec: NormSpec, side: str = "full",
                 J: int | None = None, component: str = "pair",
                 lam: float = 1.0, decomp=None, label: str = "") -> FunctionalSeries:
    """Sample a Besov seminorm at every stored time.

    component selects the pair (default), "first", "second", or "damped"
    (lam*v + u_x).
    """
    if decomp is None:
        decomp = get_decomposition(traj.grid)
    vals = np.empty(len(traj))
    for i, state in enumerate(traj.states):
        if component == "pair":
            vals[i] = pair_besov(state, decomp, spec, side, J)
        elif component == "first":
            vals[i] = besov_norm(state.first, decomp, spec, side, J)
        elif component == "second":
            vals[i] = besov_norm(state.second, decomp, spec, side, J)
        elif component == "damped":
            vals[i] = besov_norm(damped_mode(state, lam), decomp, spec, side, J)
        else:
            raise ValueError(f"unknown component {component!r}")
    if not label:
        label = f"{component}:{spec.label()}[{side}{'' if J is None else ',' + str(J)}]"
    return FunctionalSeries(traj.times, vals, label)


def X_p_lambda(traj: Trajectory, p: float, lam: float, k: int, decomp=None) -> float:
    """The six-term global functional controlling the solution:

        sup_t low-frequency B^{1/p}_{p,1} of (u,v)
      + lam^-1  sup_t high-frequency B^{3/2}_{2,1} of (u,v)
      + lam^-1  L1_t of low-frequency B^{1/p+2}_{p,1} of u
      +         L1_t of high-frequency B^{3/2}_{2,1} of (u,v)
      +         L1_t of B^{1/p}_{p,1} of lam*v + u_x
      + lam^1/2 L2_t of B^{1/p}_{p,1} of v

    split at J = floor(log2 lam) + k; time integrals by the trapezoid rule
    over the stored snapshots (single-snapshot trajectories keep only the
    sup terms).
    """
    if not 2 <= p <= 4:
        raise RangeError(f"p must be in [2, 4], got {p}")
    if decomp is None:
        decomp = get_decomposition(traj.grid)
    J = j_threshold(lam, k)
    low = NormSpec(1.0 / p, p, 1.0)
    low_smooth = NormSpec(1.0 / p + 2.0, p, 1.0)
    high = NormSpec(1.5, 2.0, 1.0)

    n_t = len(traj)
    sup_low = np.empty(n_t)
    sup_high = np.empty(n_t)
    int_u_smooth = np.empty(n_t)
    int_damped = np.empty(n_t)
    int_v = np.empty(n_t)
    for i, state in enumerate(traj.states):
        prof_u = block_lp_profile(state.first, decomp, p)
        prof_v = block_lp_profile(state.second, decomp, p)
        sup_low[i] = besov_norm_from_profile(
            prof_u, decomp, low, "low", J
        ) + besov_norm_from_profile(prof_v, decomp, low, "low", J)
        sup_high[i] = pair_besov(state, decomp, high, "high", J)
        int_u_smooth[i] = besov_norm_from_profile(prof_u, decomp, low_smooth, "low", J)
        int_damped[i] = besov_norm(damped_mode(state, lam), decomp, low)
        int_v[i] = besov_norm_from_profile(prof_v, decomp, low)

    t = traj.times
    traj.accumulate("L1t:u_low_smooth", int_u_smooth)
    traj.accumulate("L1t:high", sup_high)
    traj.accumulate("L1t:damped_mode", int_damped)
    traj.accumulate("L2t:v", int_v, power=2.0)
    return float(
        sup_low.max()
        + sup_high.max() / lam
        + _trapz(int_u_smooth, t) / lam
        + _trapz(sup_high, t)
        + _trapz(int_damped, t)
        + math.sqrt(lam) * math.sqrt(_trapz(int_v**2, t))
    )


def _block_quadratics(state: SystemState, decomp: DyadicDecomposition):
    """Per-block squared L2 norms of (u_j, v_j, u_j', v_j') and the cross
    term integral of v_j * u_j', all evaluated from coefficients."""
    grid = state.grid
    L = grid.domain_length
    xi = grid.wavenumbers
    cu = state.first.coefficients
    cv = state.second.coefficients
    cux = 1j * xi * cu
    cvx = 1j * xi * cv
    m2 = decomp.multipliers**2
    uu = L * (m2 @ np.abs(cu) ** 2)
    vv = L * (m2 @ np.abs(cv) ** 2)
    uxux = L * (m2 @ np.abs(cux) ** 2)
    vxvx = L * (m2 @ np.abs(cvx) ** 2)
    cross = L * (m2 @ np.real(np.conj(cv) * cux))
    return uu, vv, uxux, vxvx, cross


def lyapunov(state: SystemState, variant: str, lam: float, eta: float, j0: int,
             decomp=None, g_of_n=None, coeff_v2=None, coeff_w1=None):
    """Blockwise Lyapunov pair (L, H).

    Per block, L_j = sqrt(|u_j|^2 + |v_j|^2 + |u_j'|^2 + |v_j'|^2
    + int v_j u_j') (L2 norms); the euler variant weights |v_j'|^2 by
    1 + S_{j-1}G(n) for j >= j0, the general variant weights |u_j'|^2 by
    1 + V2(v) and |v_j'|^2 by 1 + W1(u,v) for j >= j0 (weights reported
    as-is, no smallness assumed).  Then

        L = sum_j 2^(j/2) L_j + eta * ||lam v + u_x||^{low,j0}_{B^{1/2}_{2,1}}
        H = sum_j 2^(j/2) min(1, 2^(2j)) L_j + eta * (same low-frequency term)

    Returns (L, H).
    """
    if variant not in ("toy", "euler", "general"):
        raise ValueError(f"variant must be toy|euler|general, got {variant!r}")
    if decomp is None:
        decomp = get_decomposition(state.grid)
    uu, vv, uxux, vxvx, cross = _block_quadratics(state, decomp)
    js = np.arange(decomp.j_min, decomp.j_max + 1)
    lj_sq = uu + vv + uxux + vxvx + cross

    if variant != "toy":
        grid = state.grid
        dx = grid.dx
        n_pts = grid.num_points
        ux_c = derivative(state.first).coefficients
        vx_c = derivative(state.second).coefficients
        if variant == "euler":
            if g_of_n is None:
                raise ValueError("euler variant needs g_of_n (samples -> samples)")
            g_field = Field(grid, samples=np.asarray(g_of_n(state.first.samples)))
        else:
            if coeff_v2 is None or coeff_w1 is None:
                raise ValueError("general variant needs coeff_v2 and coeff_w1")
            w_u = 1.0 + np.asarray(coeff_v2(state.second.samples))
            w_v = 1.0 + np.asarray(coeff_w1(state.first.samples, state.second.samples))
        for row, j in enumerate(js):
            if j < j0:
                continue
            mult = decomp.multipliers[row]
            ux_j = np.fft.ifft(mult * ux_c * n_pts).real
            vx_j = np.fft.ifft(mult * vx_c * n_pts).real
            if variant == "euler":
                w = 1.0 + smoothing(g_field, decomp, j - 1).samples
                weighted = dx * float(np.sum(w * vx_j**2))
                lj_sq[row] = uu[row] + vv[row] + uxux[row] + weighted + cross[row]
            else:
                wu_term = dx * float(np.sum(w_u * ux_j**2))
                wv_term = dx * float(np.sum(w_v * vx_j**2))
                lj_sq[row] = uu[row] + vv[row] + wu_term + wv_term + cross[row]

    lj = np.sqrt(np.clip(lj_sq, 0.0, None))
    weights = 2.0 ** (js / 2.0)
    damp_weights = weights * np.minimum(1.0, 4.0**js.astype(float))
    z = damped_mode(state, lam)
    z_low = besov_norm(z, decomp, NormSpec(0.5, 2.0, 1.0), "low", j0)
    L = float(np.sum(weights * lj) + eta * z_low)
    H = float(np.sum(damp_weights * lj) + eta * z_low)
    return L, H


def decay_fit(series: FunctionalSeries, window: tuple[float, float],
              kappa0: float, lam: float = 1.0) -> DecayFit:
    """Least-squares slope of log(value) against log(1 + kappa0*lam*t) over
    the window; the slope estimates minus the algebraic decay rate.
    """
    t_a, t_b = window
    sub = series.window(t_a, t_b)
    if len(sub.times) < 8:
        raise FitError(
            f"need >= 8 samples in window [{t_a}, {t_b}], got {len(sub.times)}"
        )
    if np.any(sub.values <= 0):
        raise FitError("values must be positive on the fit window")
    x = np.log1p(kappa0 * lam * sub.times)
    y = np.log(sub.values)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return DecayFit(float(slope), float(intercept), (t_a, t_b), r2)


def predicted_decay(sigma1: float, sigma: float, lam: float,
                    data_norms: tuple[float, float, float]) -> DecayExponents:
    """Exponent table for data with low-frequency decay index sigma1.

    data_norms = (low_neg, low_half, high): the low-frequency
    B^{-sigma1}_{2,inf} and B^{1/2}_{2,1} norms and the high-frequency
    B^{3/2}_{2,1} norm of the data; they set the time normalization kappa0
    and the size constant.
    """
    if not -0.5 < sigma1 <= 0.5:
        raise RangeError(f"sigma1 must be in (-1/2, 1/2], got {sigma1}")
    if not -sigma1 <= sigma <= 0.5:
        raise RangeError(f"sigma must be in [-sigma1, 1/2], got {sigma}")
    low_neg, low_half, high = data_norms
    alpha = (sigma + sigma1) / 2.0
    alpha1 = 0.5 * (0.5 + sigma1)
    alpha2 = sigma1 + 0.5
    theta0 = 2.0 / (2.5 + sigma1)
    theta1 = (0.5 - sigma) / (0.5 + sigma1)
    c0 = lam ** (1.0 + alpha2) * low_neg + high
    num = lam * low_half + high
    if c0 == 0.0:
        kappa0 = 1.0 if num == 0.0 else math.inf
    else:
        kappa0 = (num / c0) ** (2.0 / (sigma1 + 0.5))
    return DecayExponents(
        sigma1=sigma1,
        sigma=sigma,
        alpha=alpha,
        alpha1=alpha1,
        alpha2=alpha2,
        theta0=theta0,
        theta1=theta1,
        kappa0=kappa0,
        c0_lambda=c0,
    )


def stability_metric(traj_a: Trajectory, traj_b: Trajectory, p: float, j0: int,
                     decomp=None) -> FunctionalSeries:
    """Two-solution distance series

        dU(t) = ||(du,dv)||^{low,j0}_{B^{2/p-1/2}_{p,1}}
              + ||(du,dv)||^{high,j0}_{B^{1/2}_{2,1}}

    for (du, dv) the componentwise difference; the trajectories must share
    grid and time stamps.
    """
    if traj_a.grid != traj_b.grid:
        raise AlignmentError("trajectories live on different grids")
    if len(traj_a) != len(traj_b) or not np.allclose(
        traj_a.times, traj_b.times, rtol=0.0, atol=1e-9
    ):
        raise AlignmentError("trajectories have different time stamps")
    if decomp is None:
        decomp = get_decomposition(traj_a.grid)
    low = NormSpec(2.0 / p - 0.5, p, 1.0)
    high = NormSpec(0.5, 2.0, 1.0)
    vals = np.empty(len(traj_a))
    for i, (sa, sb) in enumerate(zip(traj_a.states, traj_b.states)):
        du = sa.first - sb.first
        dv = sa.second - sb.second
        vals[i] = (
            besov_norm(du, decomp, low, "low", j0)
            + besov_norm(dv, decomp, low, "low", j0)
            + besov_norm(du, decomp, high, "high", j0)
            + besov_norm(dv, decomp, high, "high", j0)
        )
    return FunctionalSeries(traj_a.times, vals, f"dU[p={p:g},J0={j0}]")
