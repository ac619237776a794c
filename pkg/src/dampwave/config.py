"""Plain-text run configuration: dotted keys, one `key = value` per line.

Values are decimal reals, integers, booleans, bare strings, or
comma/semicolon separated lists.  `parse_config` returns a flat mapping;
`RunConfig.from_mapping` validates it (raising ConfigError with the
offending key path) and `serialize_config` writes the canonical sorted form,
so parse -> serialize is idempotent.

Norm requests use the column mini-language

    component:B[s,p,r][side,J]

with component in {uv, u, v, z} (z is the damped mode lam*v + u_x), side in
{full, low, high}; J is required for low/high and "inf" is accepted for p
and r.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field as dataclass_field

from .dyadic import NormSpec
from .errors import ConfigError

__all__ = [
    "NormRequest",
    "ModelSection",
    "GridSection",
    "DataSection",
    "IntegratorSection",
    "AnalysisSection",
    "OutputSection",
    "RunConfig",
    "SweepSection",
    "SweepConfig",
    "parse_config",
    "serialize_config",
    "parse_norm_request",
    "GENERAL_PRESETS",
]


_NORM_RE = re.compile(
    r"^(?:(?P<comp>uv|u|v|z):)?"
    r"B\[(?P<s>[^,\]]+),(?P<p>[^,\]]+),(?P<r>[^,\]]+)\]"
    r"(?:\[(?P<side>full|low|high)(?:,(?P<J>-?\d+))?\])?$"
)


@dataclass(frozen=True)
class NormRequest:
    component: str  # uv | u | v | z
    spec: NormSpec
    side: str = "full"
    J: int | None = None

    def label(self) -> str:
        side = self.side if self.J is None else f"{self.side},{self.J}"
        return f"{self.component}:{self.spec.label()}[{side}]"


def _parse_real(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    return float(t)


def parse_norm_request(text: str) -> NormRequest:
    m = _NORM_RE.match(text.strip())
    if m is None:
        raise ValueError(f"bad norm request {text!r}")
    comp = m.group("comp") or "uv"
    spec = NormSpec(
        _parse_real(m.group("s")), _parse_real(m.group("p")), _parse_real(m.group("r"))
    )
    side = m.group("side") or "full"
    j = m.group("J")
    if side != "full" and j is None:
        raise ValueError(f"norm request {text!r}: side {side!r} needs a threshold J")
    return NormRequest(comp, spec, side, None if j is None else int(j))


def parse_config(text: str) -> dict[str, str]:
    """Flat key/value mapping from config text; later keys override earlier."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def serialize_config(mapping: dict[str, str]) -> str:
    return "".join(f"{k} = {mapping[k]}\n" for k in sorted(mapping))


class _Reader:
    """Typed extraction from the flat mapping with key-path errors."""

    def __init__(self, mapping: dict[str, str]):
        self.mapping = dict(mapping)
        self.seen: set[str] = set()

    def _raw(self, key, default):
        self.seen.add(key)
        if key in self.mapping:
            return self.mapping[key]
        if default is _REQUIRED:
            raise ConfigError(key, "missing required key")
        return default

    def real(self, key, default=None):
        raw = self._raw(key, default)
        if raw is None or isinstance(raw, float):
            return raw
        try:
            return _parse_real(raw)
        except ValueError:
            raise ConfigError(key, f"expected a real number, got {raw!r}") from None

    def integer(self, key, default=None):
        raw = self._raw(key, default)
        if raw is None or isinstance(raw, int):
            return raw
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(key, f"expected an integer, got {raw!r}") from None

    def boolean(self, key, default=None):
        raw = self._raw(key, default)
        if raw is None or isinstance(raw, bool):
            return raw
        low = raw.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ConfigError(key, f"expected a boolean, got {raw!r}")

    def text(self, key, default=None):
        return self._raw(key, default)

    def reals(self, key, default=None):
        raw = self._raw(key, default)
        if raw is None or isinstance(raw, tuple):
            return raw
        parts = [p for chunk in raw.split(";") for p in chunk.split(",")]
        try:
            return tuple(_parse_real(p) for p in parts if p.strip())
        except ValueError:
            raise ConfigError(key, f"expected a list of reals, got {raw!r}") from None

    def norms(self, key, default=None):
        raw = self._raw(key, default)
        if raw is None or isinstance(raw, tuple):
            return raw
        items = [p.strip() for p in raw.split(";") if p.strip()]
        try:
            return tuple(parse_norm_request(p) for p in items)
        except ValueError as exc:
            raise ConfigError(key, str(exc)) from None

    def unknown_keys(self, prefixes: tuple[str, ...]) -> list[str]:
        return [
            k
            for k in self.mapping
            if k not in self.seen and k.split(".", 1)[0] in prefixes
        ]


_REQUIRED = object()


# named coefficient sets for the general system (arbitrary callables are not
# expressible in the text format)
GENERAL_PRESETS = {
    # V1 = v, W2 = v reproduces the toy nonlinearity
    "toy-equivalent": dict(
        V1=lambda v: v,
        V2=lambda v: 0.0 * v,
        W1=lambda u, v: 0.0 * v,
        W2=lambda u, v: v,
    ),
    # all four coefficient functions active
    "full-coupling": dict(
        V1=lambda v: v,
        V2=lambda v: 0.5 * v * v,
        W1=lambda u, v: 0.5 * u * v,
        W2=lambda u, v: v + 0.25 * u,
    ),
}


@dataclass(frozen=True)
class ModelSection:
    kind: str = "toy"
    lam: float = 1.0
    gamma: float = 2.0
    alpha: float = 1.0
    beta: float = 1.0
    kappa: float = 0.0
    q: int = 2
    preset: str = "toy-equivalent"


@dataclass(frozen=True)
class GridSection:
    num_points: int = 2**14
    box_exponent: int | None = 7
    domain_length: float | None = None

    def length(self) -> float:
        if self.domain_length is not None:
            return self.domain_length
        return 2.0 * math.pi * 2.0**self.box_exponent


@dataclass(frozen=True)
class DataSection:
    s_low: float = -0.5
    s_high: float = 3.0
    j_split: int = 1
    amplitude: float = 0.05
    seed: int = 0


@dataclass(frozen=True)
class IntegratorSection:
    cfl: float = 0.4
    dt: float | None = None
    horizon: float = 40.0
    snap_dt: float = 0.1


@dataclass(frozen=True)
class AnalysisSection:
    p: float = 2.0
    k: int = 0
    j0: int = -2
    eta: float = 0.1
    sigma1: float = 0.5
    sigma: float = 0.5
    fit_t_min: float = 2.0
    fit_t_max: float | None = None  # default: horizon
    slope_tol: float = 0.15
    high_slope_max: float = -0.8
    norms: tuple[NormRequest, ...] = ()


@dataclass(frozen=True)
class OutputSection:
    states: bool = True
    prefix: str = "run"


@dataclass(frozen=True)
class RunConfig:
    model: ModelSection = dataclass_field(default_factory=ModelSection)
    grid: GridSection = dataclass_field(default_factory=GridSection)
    data: DataSection = dataclass_field(default_factory=DataSection)
    integrator: IntegratorSection = dataclass_field(default_factory=IntegratorSection)
    analysis: AnalysisSection = dataclass_field(default_factory=AnalysisSection)
    output: OutputSection = dataclass_field(default_factory=OutputSection)

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> "RunConfig":
        r = _Reader(mapping)
        model = ModelSection(
            kind=r.text("model.kind", "toy"),
            lam=r.real("model.lam", 1.0),
            gamma=r.real("model.gamma", 2.0),
            alpha=r.real("model.alpha", 1.0),
            beta=r.real("model.beta", 1.0),
            kappa=r.real("model.kappa", 0.0),
            q=r.integer("model.q", 2),
            preset=r.text("model.preset", "toy-equivalent"),
        )
        if model.kind not in ("toy", "euler", "general"):
            raise ConfigError("model.kind", f"must be toy|euler|general, got {model.kind!r}")
        if not model.lam > 0:
            raise ConfigError("model.lam", f"must be > 0, got {model.lam}")
        if model.kind == "general" and model.preset not in GENERAL_PRESETS:
            raise ConfigError(
                "model.preset",
                f"unknown preset {model.preset!r}; have {sorted(GENERAL_PRESETS)}",
            )
        grid = GridSection(
            num_points=r.integer("grid.num_points", 2**14),
            box_exponent=r.integer("grid.box_exponent", None),
            domain_length=r.real("grid.domain_length", None),
        )
        if grid.box_exponent is None and grid.domain_length is None:
            grid = GridSection(grid.num_points, 7, None)
        data = DataSection(
            s_low=r.real("data.s_low", -0.5),
            s_high=r.real("data.s_high", 3.0),
            j_split=r.integer("data.j_split", 1),
            amplitude=r.real("data.amplitude", 0.05),
            seed=r.integer("data.seed", 0),
        )
        if data.amplitude < 0:
            raise ConfigError("data.amplitude", "must be >= 0")
        integrator = IntegratorSection(
            cfl=r.real("integrator.cfl", 0.4),
            dt=r.real("integrator.dt", None),
            horizon=r.real("integrator.horizon", 40.0),
            snap_dt=r.real("integrator.snap_dt", 0.1),
        )
        if integrator.horizon <= 0:
            raise ConfigError("integrator.horizon", "must be > 0")
        if integrator.snap_dt <= 0:
            raise ConfigError("integrator.snap_dt", "must be > 0")
        analysis = AnalysisSection(
            p=r.real("analysis.p", 2.0),
            k=r.integer("analysis.k", 0),
            j0=r.integer("analysis.j0", -2),
            eta=r.real("analysis.eta", 0.1),
            sigma1=r.real("analysis.sigma1", 0.5),
            sigma=r.real("analysis.sigma", 0.5),
            fit_t_min=r.real("analysis.fit_t_min", 2.0),
            fit_t_max=r.real("analysis.fit_t_max", None),
            slope_tol=r.real("analysis.slope_tol", 0.15),
            high_slope_max=r.real("analysis.high_slope_max", -0.8),
            norms=r.norms("analysis.norms", ()),
        )
        if not 2 <= analysis.p <= 4:
            raise ConfigError("analysis.p", f"must be in [2, 4], got {analysis.p}")
        if not -0.5 < analysis.sigma1 <= 0.5:
            raise ConfigError("analysis.sigma1", "must be in (-1/2, 1/2]")
        output = OutputSection(
            states=r.boolean("output.states", True),
            prefix=r.text("output.prefix", "run"),
        )
        unknown = r.unknown_keys(
            ("model", "grid", "data", "integrator", "analysis", "output")
        )
        if unknown:
            raise ConfigError(unknown[0], "unknown key")
        return cls(model, grid, data, integrator, analysis, output)

    def to_mapping(self) -> dict[str, str]:
        m: dict[str, str] = {}
        m["model.kind"] = self.model.kind
        m["model.lam"] = repr(self.model.lam)
        if self.model.kind == "euler":
            m["model.gamma"] = repr(self.model.gamma)
        if self.model.kind == "general":
            m["model.alpha"] = repr(self.model.alpha)
            m["model.beta"] = repr(self.model.beta)
            m["model.kappa"] = repr(self.model.kappa)
            m["model.q"] = str(self.model.q)
            m["model.preset"] = self.model.preset
        m["grid.num_points"] = str(self.grid.num_points)
        if self.grid.domain_length is not None:
            m["grid.domain_length"] = repr(self.grid.domain_length)
        else:
            m["grid.box_exponent"] = str(self.grid.box_exponent)
        m["data.s_low"] = repr(self.data.s_low)
        m["data.s_high"] = repr(self.data.s_high)
        m["data.j_split"] = str(self.data.j_split)
        m["data.amplitude"] = repr(self.data.amplitude)
        m["data.seed"] = str(self.data.seed)
        m["integrator.cfl"] = repr(self.integrator.cfl)
        if self.integrator.dt is not None:
            m["integrator.dt"] = repr(self.integrator.dt)
        m["integrator.horizon"] = repr(self.integrator.horizon)
        m["integrator.snap_dt"] = repr(self.integrator.snap_dt)
        m["analysis.p"] = repr(self.analysis.p)
        m["analysis.k"] = str(self.analysis.k)
        m["analysis.j0"] = str(self.analysis.j0)
        m["analysis.eta"] = repr(self.analysis.eta)
        m["analysis.sigma1"] = repr(self.analysis.sigma1)
        m["analysis.sigma"] = repr(self.analysis.sigma)
        m["analysis.fit_t_min"] = repr(self.analysis.fit_t_min)
        if self.analysis.fit_t_max is not None:
            m["analysis.fit_t_max"] = repr(self.analysis.fit_t_max)
        m["analysis.slope_tol"] = repr(self.analysis.slope_tol)
        m["analysis.high_slope_max"] = repr(self.analysis.high_slope_max)
        if self.analysis.norms:
            m["analysis.norms"] = "; ".join(n.label() for n in self.analysis.norms)
        m["output.states"] = "true" if self.output.states else "false"
        m["output.prefix"] = self.output.prefix
        return m

    def replace_axis(self, axis: str, value) -> "RunConfig":
        """New config with one sweep-axis value substituted."""
        from dataclasses import replace

        if axis == "lambda":
            return replace(self, model=replace(self.model, lam=float(value)))
        if axis == "amplitude":
            return replace(self, data=replace(self.data, amplitude=float(value)))
        if axis == "sigma1":
            v = float(value)
            return replace(
                self,
                data=replace(self.data, s_low=-v),
                analysis=replace(self.analysis, sigma1=v),
            )
        if axis == "k":
            return replace(self, analysis=replace(self.analysis, k=int(value)))
        raise ConfigError("sweep.axis", f"unknown axis {axis!r}")


@dataclass(frozen=True)
class SweepSection:
    axis: str
    values: tuple[float, ...]
    parallelism: int = 1


@dataclass(frozen=True)
class SweepConfig:
    base: RunConfig
    sweep: SweepSection

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> "SweepConfig":
        r = _Reader({k: v for k, v in mapping.items() if k.startswith("sweep.")})
        axis = r.text("sweep.axis", _REQUIRED)
        values = r.reals("sweep.values", _REQUIRED)
        parallelism = r.integer("sweep.parallelism", 1)
        if axis not in ("lambda", "sigma1", "amplitude", "k"):
            raise ConfigError("sweep.axis", f"unknown axis {axis!r}")
        if not values:
            raise ConfigError("sweep.values", "axis values must be nonempty")
        if parallelism < 1:
            raise ConfigError("sweep.parallelism", "must be >= 1")
        base = RunConfig.from_mapping(
            {k: v for k, v in mapping.items() if not k.startswith("sweep.")}
        )
        return cls(base, SweepSection(axis, tuple(values), parallelism))
