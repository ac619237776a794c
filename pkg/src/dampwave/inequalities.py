"""Numerical stress tests for the harmonic-analysis toolbox.

Each check evaluates one inequality as an LHS/RHS ratio on concrete fields;
the implied constant is the largest ratio seen over an input family, and its
meaningfulness rests on stability under the dyadic dilation group (dilating
the inputs and the threshold together must leave the fitted constant nearly
unchanged, since every norm involved is homogeneous).

All pointwise products go through the dealiased product so the checks are
alias-free on band-limited inputs; the paraproduct remainder identity then
holds exactly on the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy.integrate import solve_ivp

from .dyadic import (
    DyadicDecomposition,
    NormSpec,
    besov_norm,
    block,
    lp_norm,
    smoothing,
)
from .errors import ContractError, EmptyFieldError, RangeError
from .spectral import Field, GridSpec, dealias_product, derivative

__all__ = [
    "RatioReport",
    "CommutatorReport",
    "check_bernstein",
    "check_commutator",
    "check_pointwise_commutator",
    "check_product_law",
    "check_composition",
    "check_cp_remainders",
    "ode_lemma_demo",
    "packet",
    "random_band",
    "multiscale",
    "fit_constant",
]


@dataclass
class RatioReport:
    lhs: float
    rhs: float
    ratio: float
    inputs: str = ""

    def __post_init__(self):
        if self.rhs == 0.0 and self.lhs != 0.0:
            raise ValueError(f"rhs = 0 with lhs = {self.lhs} (inputs: {self.inputs})")


def _ratio(lhs: float, rhs: float, inputs: str, floor: float = 1e-9) -> RatioReport:
    # a vanishing rhs forces lhs = 0 mathematically; snap accumulated FFT
    # roundoff below `floor` to zero before enforcing that invariant
    if rhs == 0.0 and lhs <= floor:
        lhs = 0.0
    r = 0.0 if rhs == 0.0 else lhs / rhs
    return RatioReport(lhs=lhs, rhs=rhs, ratio=r, inputs=inputs)


@dataclass
class CommutatorReport:
    variant: str
    js: np.ndarray
    lhs_per_j: np.ndarray
    c_j: np.ndarray  # normalized per-j mass, sums to 1 when aggregate > 0
    aggregate: RatioReport


def fit_constant(reports) -> float:
    """Fitted implied constant for a family: the largest observed ratio."""
    ratios = [r.aggregate.ratio if isinstance(r, CommutatorReport) else r.ratio
              for r in reports]
    return max(ratios) if ratios else 0.0


# ---------------------------------------------------------------------------
# individual inequalities


def check_bernstein(f: Field, p: float, lam: float,
                    radii: tuple[float, float] = (0.75, 8.0 / 3.0)) -> RatioReport:
    """Reverse Bernstein ratio on an annulus |xi| in lam*[R1, R2]:

        lhs = lam^2 * ((p-1)/p) * int |f|^p
        rhs = (p-1) * int |f'|^2 |f|^(p-2)

    For annulus-supported f the ratio is bounded; 1/max(ratio) over a family
    fits the constant c with c*lhs <= rhs.
    """
    if not p >= 2:
        raise RangeError(f"p must be >= 2, got {p}")
    samples = f.samples
    if float(np.max(np.abs(samples))) == 0.0:
        raise EmptyFieldError("bernstein check needs a nonzero field")
    xi = np.abs(f.grid.wavenumbers)
    c = np.abs(f.coefficients) ** 2
    inside = (xi >= radii[0] * lam - 1e-12) & (xi <= radii[1] * lam + 1e-12)
    out_frac = float(np.sum(c[~inside]) / np.sum(c))
    if out_frac > 1e-10:
        raise ValueError(
            f"field is not band-limited to the annulus: {out_frac:.2e} outside"
        )
    dx = f.grid.dx
    fx = derivative(f).samples
    lhs = lam**2 * ((p - 1.0) / p) * float(np.sum(np.abs(samples) ** p)) * dx
    rhs = (p - 1.0) * float(np.sum(fx**2 * np.abs(samples) ** (p - 2.0))) * dx
    return _ratio(lhs, rhs, f"bernstein p={p:g} lam={lam:g}")


def _conjugate(p: float) -> float:
    if math.isinf(p):
        return 1.0
    if p == 1.0:
        return math.inf
    return p / (p - 1.0)


def _commutator_samples(w: Field, g: Field, decomp, j: int) -> Field:
    """[w, block_j] g = w * block_j(g) - block_j(w * g), dealiased products."""
    first = dealias_product(w, block(g, decomp, j))
    second = block(dealias_product(w, g), decomp, j)
    return first - second


def check_commutator(w: Field, v: Field, s: float, p: float, variant: str,
                     decomp: DyadicDecomposition) -> CommutatorReport:
    """Transport-commutator estimates.  Per block,

        com1: 2^(j*s) ||[w, block_j] v_x||_p <= C c_j ||w_x||_{B^{1/p}_{p,1}} ||v||_{B^s_{p,1}}
        com2: ||d/dx([w, block_j] v)||_p <= C c_j 2^(-j*s) ||w_x||_{B^{1/p}_{p,1}} ||v||_{B^s_{p,1}}
        com3: sup_j 2^(j*s) ||[w, block_j] v_x||_p <= C ||w_x||_{B^{1/p}_{p,1}} ||v||_{B^s_{p,inf}}

    The weights c_j are reported as the realized normalized per-block mass,
    so the aggregate C is sum_j lhs_j / rhs for the summed variants and
    max_j lhs_j / rhs for com3.
    """
    pc = _conjugate(p)
    lo = min(1.0 / p if p > 0 else math.inf, 1.0 / pc if pc > 0 else math.inf)
    if variant == "com1":
        if not -lo < s <= 1.0 / p + 1.0:
            raise RangeError(
                f"com1 requires s in (-min(1/p,1/p'), 1/p+1] = (-{lo:g}, {1/p+1:g}], got s={s:g}"
            )
    elif variant == "com3":
        if not -lo <= s < 1.0 / p + 1.0:
            raise RangeError(
                f"com3 requires s in [-min(1/p,1/p'), 1/p+1) = [-{lo:g}, {1/p+1:g}), got s={s:g}"
            )
    elif variant == "com2":
        if not -1.0 - lo < s <= 1.0 / p:
            raise RangeError(
                f"com2 requires s in (-1-min(1/p,1/p'), 1/p] = ({-1-lo:g}, {1/p:g}], got s={s:g}"
            )
    else:
        raise ValueError(f"variant must be com1|com2|com3, got {variant!r}")

    js = np.arange(decomp.j_min, decomp.j_max + 1)
    lhs = np.empty(len(js))
    if variant in ("com1", "com3"):
        vx = derivative(v)
        for row, j in enumerate(js):
            comm = _commutator_samples(w, vx, decomp, j)
            lhs[row] = 2.0 ** (j * s) * lp_norm(comm, p)
    else:
        for row, j in enumerate(js):
            comm = derivative(_commutator_samples(w, v, decomp, j))
            lhs[row] = 2.0 ** (j * s) * lp_norm(comm, p)

    wx_norm = besov_norm(derivative(w), decomp, NormSpec(1.0 / p, p, 1.0))
    r_exp = math.inf if variant == "com3" else 1.0
    v_norm = besov_norm(v, decomp, NormSpec(s, p, r_exp))
    rhs = wx_norm * v_norm
    total = float(lhs.sum())
    c_j = lhs / total if total > 0 else np.zeros_like(lhs)
    agg_lhs = float(lhs.max()) if variant == "com3" else total
    agg = _ratio(agg_lhs, rhs, f"{variant} s={s:g} p={p:g}")
    return CommutatorReport(variant, js, lhs, c_j, agg)


def check_pointwise_commutator(a: Field, b: Field, p: float, q: float,
                               decomp: DyadicDecomposition) -> CommutatorReport:
    """First-order commutator smoothing: ||[block_j, a] b||_r <= C 2^-j ||a_x||_q ||b||_p
    with 1/r = 1/p + 1/q; reported as per-j ratios of 2^j ||[block_j,a] b||_r
    to the product of norms."""
    inv_r = (0.0 if math.isinf(p) else 1.0 / p) + (0.0 if math.isinf(q) else 1.0 / q)
    if inv_r > 1.0:
        raise RangeError(f"need 1/p + 1/q <= 1, got {inv_r:g}")
    r = math.inf if inv_r == 0.0 else 1.0 / inv_r
    js = np.arange(decomp.j_min, decomp.j_max + 1)
    lhs = np.empty(len(js))
    for row, j in enumerate(js):
        comm = block(dealias_product(a, b), decomp, j) - dealias_product(
            a, block(b, decomp, j)
        )
        lhs[row] = 2.0**j * lp_norm(comm, r)
    rhs = lp_norm(derivative(a), q) * lp_norm(b, p)
    total = float(lhs.sum())
    c_j = lhs / total if total > 0 else np.zeros_like(lhs)
    agg = _ratio(float(lhs.max()), rhs, f"pointwise-commutator p={p:g} q={q:g}")
    return CommutatorReport("pointwise", js, lhs, c_j, agg)


def check_product_law(a: Field, b: Field, variant: str,
                      decomp: DyadicDecomposition,
                      s: float | None = None, p: float | None = None,
                      r: float | None = None, J: int | None = None) -> RatioReport:
    """Product laws in Besov seminorms (d = 1 throughout):

        prod1 (s > 0): ||ab||_{B^s_{p,r}} <= C(||a||_inf ||b||_{B^s_{p,r}}
                                              + ||a||_{B^s_{p,r}} ||b||_inf)
        prod2 (-min(1/p,1/p') < s <= 1/p):
                      ||ab||_{B^s_{p,1}} <= C ||a||_{B^{1/p}_{p,1}} ||b||_{B^s_{p,1}}
        prod3 (-min(1/p,1/p') < s <= 1/p + 1), low side at J:
                      ||ab||^l_{B^s_{p,1}} <= C max(||a||_inf, ||a||_{B^{1/p+1}_{p,1}})
                                              * ||b||_{B^{s-1}_{p,1}}
        prod4 (2 <= p <= 4), hybrid at J:
                      ||ab||_{B^{1/2}_{2,1}} <= C (||a||^l_{B^{1/p-1}_{p,1}} + ||a||^h_{B^{1/2}_{2,1}})
                                                * (||b||^l_{B^{2/p-1/2}_{p,1}} + ||b||^h_{B^{1/2}_{2,1}})
    """
    ab = dealias_product(a, b)
    if variant == "prod1":
        if s is None or p is None or r is None:
            raise ValueError("prod1 needs s, p, r")
        if not s > 0:
            raise RangeError(f"prod1 requires s > 0, got {s:g}")
        spec = NormSpec(s, p, r)
        lhs = besov_norm(ab, decomp, spec)
        rhs = lp_norm(a, math.inf) * besov_norm(b, decomp, spec) + besov_norm(
            a, decomp, spec
        ) * lp_norm(b, math.inf)
        return _ratio(lhs, rhs, f"prod1 s={s:g} p={p:g} r={r:g}")
    if variant == "prod2":
        if s is None or p is None:
            raise ValueError("prod2 needs s, p")
        lo = min(1.0 / p, 1.0 / _conjugate(p))
        if not -lo < s <= 1.0 / p:
            raise RangeError(
                f"prod2 requires s in (-min(1/p,1/p'), 1/p] = (-{lo:g}, {1/p:g}], got s={s:g}"
            )
        lhs = besov_norm(ab, decomp, NormSpec(s, p, 1.0))
        rhs = besov_norm(a, decomp, NormSpec(1.0 / p, p, 1.0)) * besov_norm(
            b, decomp, NormSpec(s, p, 1.0)
        )
        return _ratio(lhs, rhs, f"prod2 s={s:g} p={p:g}")
    if variant == "prod3":
        if s is None or p is None or J is None:
            raise ValueError("prod3 needs s, p, J")
        lo = min(1.0 / p, 1.0 / _conjugate(p))
        if not -lo < s <= 1.0 / p + 1.0:
            raise RangeError(
                f"prod3 requires s in (-min(1/p,1/p'), 1/p+1] = (-{lo:g}, {1/p+1:g}], got s={s:g}"
            )
        lhs = besov_norm(ab, decomp, NormSpec(s, p, 1.0), "low", J)
        rhs = max(
            lp_norm(a, math.inf),
            besov_norm(a, decomp, NormSpec(1.0 / p + 1.0, p, 1.0)),
        ) * besov_norm(b, decomp, NormSpec(s - 1.0, p, 1.0))
        return _ratio(lhs, rhs, f"prod3 s={s:g} p={p:g} J={J}")
    if variant == "prod4":
        if p is None or J is None:
            raise ValueError("prod4 needs p, J")
        if not 2 <= p <= 4:
            raise RangeError(f"prod4 requires p in [2, 4], got {p:g}")
        lhs = besov_norm(ab, decomp, NormSpec(0.5, 2.0, 1.0))
        fa = besov_norm(
            a, decomp, NormSpec(1.0 / p - 1.0, p, 1.0), "low", J
        ) + besov_norm(a, decomp, NormSpec(0.5, 2.0, 1.0), "high", J)
        fb = besov_norm(
            b, decomp, NormSpec(2.0 / p - 0.5, p, 1.0), "low", J
        ) + besov_norm(b, decomp, NormSpec(0.5, 2.0, 1.0), "high", J)
        rhs = fa * fb
        return _ratio(lhs, rhs, f"prod4 p={p:g} J={J}")
    raise ValueError(f"variant must be prod1..prod4, got {variant!r}")


def check_composition(f, u: Field, spec: NormSpec,
                      decomp: DyadicDecomposition) -> RatioReport:
    """Composition stability ||f(u)|| <= C(f', ||u||_inf) ||u|| in one seminorm.

    Requires f(0) = 0 (checked numerically) and 0 < s <= 1/p with r = 1 at
    the endpoint.
    """
    f0 = float(f(np.zeros(1))[0] if np.ndim(f(np.zeros(1))) else f(0.0))
    if abs(f0) > 1e-12:
        raise ContractError(f"composition needs f(0) = 0, got f(0) = {f0:g}")
    if not spec.s > 0:
        raise RangeError(f"composition requires s > 0, got s={spec.s:g}")
    if spec.s > 1.0 / spec.p or (spec.s == 1.0 / spec.p and spec.r != 1.0):
        raise RangeError(
            f"composition requires s < 1/p, or s = 1/p with r = 1; "
            f"got s={spec.s:g}, p={spec.p:g}, r={spec.r:g}"
        )
    composed = Field(u.grid, samples=np.asarray(f(u.samples), dtype=float))
    lhs = besov_norm(composed, decomp, spec)
    rhs = besov_norm(u, decomp, spec)
    umax = lp_norm(u, math.inf)
    h = max(umax, 1e-6) * 1e-4
    grid_vals = np.linspace(-umax - h, umax + h, 513)
    fprime = float(np.max(np.abs(np.gradient(f(grid_vals), grid_vals))))
    return _ratio(lhs, rhs, f"composition {spec.label()} sup|f'|~{fprime:.3g}")


def check_cp_remainders(w: Field, z: Field, s: float, p: float,
                        decomp: DyadicDecomposition, J0: int) -> dict:
    """Paraproduct split of the frozen-transport remainder

        R_j = S_{j-1}w * (block_j z)_x - block_j(w z_x)

    into the three pieces (paraproduct of z_x acting on w; the commutators
    with the smoothed advection; the smoothing mismatch between neighbour
    blocks), each measured against its own right-hand side and the identity
    R = R1 + R2 + R3 verified exactly.  1/2 <= s <= 3/2; p in [2, 4];
    p* = 2p/(p-2).
    """
    if not 0.5 <= s <= 1.5:
        raise RangeError(f"s must be in [1/2, 3/2], got {s:g}")
    if not 2 <= p <= 4:
        raise RangeError(f"p must be in [2, 4], got {p:g}")
    pstar = math.inf if p == 2 else 2.0 * p / (p - 2.0)
    zx = derivative(z)
    wx = derivative(w)
    js_all = list(decomp.js)
    js_high = [j for j in js_all if j >= J0]

    # paraproduct of z_x onto w: T'_{z_x} w = sum_j S_{j+2}(z_x) * block_j w
    tprime = Field.zeros(w.grid)
    for j in js_all:
        tprime = tprime + dealias_product(smoothing(zx, decomp, j + 2), block(w, decomp, j))

    sums = {"R1": 0.0, "R2": 0.0, "R3": 0.0}
    identity_defect = 0.0
    scale = max(lp_norm(dealias_product(w, zx), math.inf), 1e-30)
    for j in js_high:
        r1 = -1.0 * block(tprime, decomp, j)
        # -sum_{j'} [block_j, S_{j'-1}w] block_j' z_x  (nonzero only for
        # j' in [j-2, j+5]; the wider symmetric range is harmless)
        r2 = Field.zeros(w.grid)
        for jp in range(j - 5, j + 6):
            if not decomp.j_min <= jp <= decomp.j_max:
                continue
            sw = smoothing(w, decomp, jp - 1)
            zj = block(zx, decomp, jp)
            r2 = r2 + (dealias_product(sw, block(zj, decomp, j)) - block(dealias_product(sw, zj), decomp, j))
        r3 = Field.zeros(w.grid)
        for jp in (j - 1, j, j + 1):
            if not decomp.j_min <= jp <= decomp.j_max:
                continue
            dsw = smoothing(w, decomp, jp - 1) - smoothing(w, decomp, j - 1)
            r3 = r3 + dealias_product(dsw, block(block(zx, decomp, jp), decomp, j))
        r3 = -1.0 * r3

        direct = dealias_product(smoothing(w, decomp, j - 1), block(zx, decomp, j)) - block(
            dealias_product(w, zx), decomp, j
        )
        resid = direct - (r1 + r2 + r3)
        identity_defect = max(identity_defect, lp_norm(resid, math.inf) / scale)
        weight = 2.0 ** (j * s)
        sums["R1"] += weight * lp_norm(r1, 2.0)
        sums["R2"] += weight * lp_norm(r2, 2.0)
        sums["R3"] += weight * lp_norm(r3, 2.0)

    if s == 1.5:
        r1_high_factor = lp_norm(zx, math.inf)
    else:
        r1_high_factor = besov_norm(zx, decomp, NormSpec(s - 1.5, math.inf, math.inf))
    rhs1 = besov_norm(zx, decomp, NormSpec(1.0 / p - 1.0, p, 1.0)) * besov_norm(
        w, decomp, NormSpec(1.0 + (0.0 if math.isinf(pstar) else 1.0 / pstar), pstar, 1.0),
        "low", J0,
    ) + r1_high_factor * besov_norm(w, decomp, NormSpec(1.5, 2.0, 1.0), "high", J0)
    rhs_high_z = lp_norm(wx, math.inf) * besov_norm(
        zx, decomp, NormSpec(s - 1.0, 2.0, 1.0), "high", J0
    )
    rhs2 = rhs_high_z + besov_norm(
        zx, decomp, NormSpec(s - 0.5 - 1.0 / p, p, 1.0), "low", J0
    ) * besov_norm(
        wx, decomp,
        NormSpec(0.0 if math.isinf(pstar) else -1.0 / pstar, pstar, 1.0),
        "low", J0,
    )
    rhs3 = rhs_high_z

    return {
        "R1": _ratio(sums["R1"], rhs1, f"cp-R1 s={s:g} p={p:g} J0={J0}"),
        "R2": _ratio(sums["R2"], rhs2, f"cp-R2 s={s:g} p={p:g} J0={J0}"),
        "R3": _ratio(sums["R3"], rhs3, f"cp-R3 s={s:g} p={p:g} J0={J0}"),
        "identity_defect": identity_defect,
    }


def ode_lemma_demo(A, B: float, X0: float, p: float, horizon: float,
                   num: int = 2001, tol: float = 1e-7):
    """Check the time-integrated form of (1/p)(X^p)' + B X^p <= A X^(p-1).

    The equality case reduces to X' = A - B X for any p >= 1; the numeric
    solution must satisfy X(t) + B int X <= X0 + int A pointwise (within
    integrator tolerance).  Returns (ok, trace).
    """
    if p < 1:
        raise RangeError(f"p must be >= 1, got {p}")
    if B < 0 or X0 < 0:
        raise RangeError("B and X0 must be >= 0")
    a_fn = A if callable(A) else (lambda t, _a=float(A): _a)
    ts = np.linspace(0.0, horizon, num)
    # integrate X together with its running integrals so the conclusion is
    # checked against integrals at the solver's own accuracy
    sol = solve_ivp(
        lambda t, y: [a_fn(t) - B * y[0], y[0], a_fn(t)],
        (0.0, horizon),
        [X0, 0.0, 0.0],
        t_eval=ts,
        rtol=1e-11,
        atol=1e-13,
        method="RK45",
    )
    X, int_x, int_a = sol.y
    lhs = X + B * int_x
    rhs = X0 + int_a
    slack = rhs - lhs
    scale = max(X0, float(np.max(rhs)), 1.0)
    ok = bool(np.all(slack >= -tol * scale))
    trace = {"t": ts, "X": X, "lhs": lhs, "rhs": rhs, "slack": slack}
    return ok, trace


# ---------------------------------------------------------------------------
# input families


def _snap_frequency(grid: GridSpec, xi: float) -> float:
    """Nearest nonzero grid frequency."""
    m = max(1, round(xi / grid.min_frequency))
    return m * grid.min_frequency


def packet(grid: GridSpec, j: int, position: float = 1.4, phase: float = 0.0,
           amplitude: float = 1.0) -> Field:
    """Single cosine packet at the grid frequency nearest position * 2**j."""
    xi = _snap_frequency(grid, position * 2.0**j)
    return Field(grid, samples=amplitude * np.cos(xi * grid.nodes + phase))


def random_band(grid: GridSpec, xi_lo: float, xi_hi: float, seed: int,
                tilt: float = 0.0) -> Field:
    """Random-phase field with |c(xi)| = (xi/xi_lo)**tilt on [xi_lo, xi_hi]."""
    rng = np.random.default_rng(seed)
    xi = np.abs(grid.wavenumbers)
    n = grid.num_points
    inside = (xi >= xi_lo) & (xi <= xi_hi)
    inside[0] = False
    inside[n // 2] = False
    mag = np.zeros(n)
    mag[inside] = (xi[inside] / xi_lo) ** tilt
    phase = rng.uniform(0, 2 * math.pi, n // 2 - 1)
    c = np.zeros(n, dtype=complex)
    c[1 : n // 2] = np.exp(1j * phase)
    c[n // 2 + 1 :] = np.conj(c[1 : n // 2][::-1])
    return Field(grid, coefficients=c * mag)


def multiscale(grid: GridSpec, s: float, j_range: range, seed: int,
               position: float = 1.4) -> Field:
    """Superposition sum_j 2^(-j*s) cos(xi_j x + theta_j) with xi_j near
    position * 2**j and seeded phases."""
    rng = np.random.default_rng(seed)
    samples = np.zeros(grid.num_points)
    for j in j_range:
        xi = _snap_frequency(grid, position * 2.0**j)
        samples += 2.0 ** (-j * s) * np.cos(xi * grid.nodes + rng.uniform(0, 2 * math.pi))
    return Field(grid, samples=samples)
