"""Run configuration: an INI file with one section per concern.

Grammar
-------
Sections ``[market]``, ``[prior]``, ``[utility]``, ``[eval]``, ``[quad]``,
``[sim]`` and ``[output]``; one ``key = value`` per line; ``#`` or ``;``
start comments. Lists are comma separated (``t = 0, 0.25, 0.5``) or
``linspace(start, stop, num)``. Discrete atoms are a literal list of
``(theta, weight)`` pairs. Unknown sections and keys are rejected.

Example::

    [market]
    sigma = 0.2
    T = 1
    r = 0.02

    [prior]
    kind = gaussian
    m = 0.5
    v = 0.5

    [utility]
    family = power
    gamma = -1

    [eval]
    t = 0, 0.5
    y = linspace(-2, 2, 5)
"""

from __future__ import annotations

import ast
import configparser
import dataclasses
import io
import os
import re
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .errors import ConfigError
from .numerics import QuadConfig
from .policy import Exp, Log, MarketParams, Power, UtilitySpec
from .prior import DEFAULT_CONTINUOUS_NODES, DEFAULT_GAUSSIAN_NODES, Prior
from .simulator import SimConfig, Strategy

ENV_QUAD_NODES = "HARA_QUAD_NODES"


# -- value codecs -------------------------------------------------------------


def _float(s: str) -> float:
    return float(s)


def _int(s: str) -> int:
    return int(s)


def _bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


_LINSPACE = re.compile(r"^linspace\(([^,]+),([^,]+),([^,]+)\)$")


def _floats(s: str) -> tuple[float, ...]:
    text = s.replace(" ", "")
    m = _LINSPACE.match(text)
    if m:
        return tuple(float(v) for v in np.linspace(float(m[1]), float(m[2]), int(m[3])))
    vals = tuple(float(v) for v in text.split(",") if v)
    if not vals:
        raise ValueError("empty list")
    return vals


def _strs(s: str) -> tuple[str, ...]:
    # commas inside merton(...) are not expected, so a plain split suffices
    return tuple(v.strip() for v in s.split(",") if v.strip())


def _atoms(s: str) -> tuple[tuple[float, float], ...]:
    raw = ast.literal_eval(s)
    return tuple((float(a), float(w)) for a, w in raw)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return repr([tuple(a) for a in value])
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def _key(parse: Callable[[str], Any], default=None):
    return field(default=default, metadata={"parse": parse})


# -- sections -----------------------------------------------------------------


@dataclass(frozen=True)
class MarketSection:
    sigma: float | None = _key(_float)
    T: float | None = _key(_float)
    r: float = _key(_float, 0.0)


@dataclass(frozen=True)
class PriorSection:
    kind: str | None = _key(str)
    theta0: float | None = _key(_float)
    atoms: tuple | None = _key(_atoms)
    m: float | None = _key(_float)
    v: float | None = _key(_float)
    lower: float | None = _key(_float)
    upper: float | None = _key(_float)
    a: float | None = _key(_float)
    b: float | None = _key(_float)


@dataclass(frozen=True)
class UtilitySection:
    family: str = _key(str, "power")
    gamma: float | None = _key(_float)
    beta: float = _key(_float, 1.0)
    eta: float = _key(_float, 0.0)


@dataclass(frozen=True)
class EvalSection:
    t: tuple = _key(_floats, (0.0,))
    x: tuple = _key(_floats, (1.0,))
    y: tuple = _key(_floats, (0.0,))
    gammas: tuple | None = _key(_floats)


@dataclass(frozen=True)
class QuadSection:
    z_nodes: int | None = _key(_int)
    theta_nodes: int | None = _key(_int)
    tol: float = _key(_float, 1e-10)


@dataclass(frozen=True)
class SimSection:
    x0: float = _key(_float, 1.0)
    n_paths: int = _key(_int, 10_000)
    n_steps: int = _key(_int, 250)
    seed: int = _key(_int, 0)
    strategies: tuple = _key(_strs, ("optimal", "myopic"))
    antithetic: bool = _key(_bool, False)
    table_points: int = _key(_int, 481)


@dataclass(frozen=True)
class OutputSection:
    csv: str | None = _key(str)
    paths_csv: str | None = _key(str)
    precision: int = _key(_int, 12)


SECTIONS = {
    "market": MarketSection,
    "prior": PriorSection,
    "utility": UtilitySection,
    "eval": EvalSection,
    "quad": QuadSection,
    "sim": SimSection,
    "output": OutputSection,
}

_PRIOR_KEYS = {
    "point_mass": {"theta0"},
    "discrete": {"atoms"},
    "gaussian": {"m", "v"},
    "uniform": {"lower", "upper"},
    "beta": {"a", "b", "lower", "upper"},
}


@dataclass(frozen=True)
class RunConfig:
    market: MarketSection = field(default_factory=MarketSection)
    prior: PriorSection = field(default_factory=PriorSection)
    utility: UtilitySection = field(default_factory=UtilitySection)
    eval: EvalSection = field(default_factory=EvalSection)
    quad: QuadSection = field(default_factory=QuadSection)
    sim: SimSection = field(default_factory=SimSection)
    output: OutputSection = field(default_factory=OutputSection)

    # -- io ------------------------------------------------------------------

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        parser.optionxform = str  # keys are case sensitive (T)
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError("", f"malformed config: {exc}") from None
        sections = {}
        for name in parser.sections():
            if name not in SECTIONS:
                raise ConfigError(name, "unknown section")
            sections[name] = _parse_section(name, SECTIONS[name], parser[name])
        cfg = cls(**sections)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError("", f"cannot read {path}: {exc.strerror}") from None
        return cls.from_text(text)

    def to_text(self) -> str:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        for name in SECTIONS:
            sec = getattr(self, name)
            items = {f.name: _fmt(getattr(sec, f.name)) for f in dataclasses.fields(sec) if getattr(sec, f.name) is not None}
            if items:
                parser[name] = items
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()

    def replace(self, section: str, **changes) -> "RunConfig":
        return dataclasses.replace(self, **{section: dataclasses.replace(getattr(self, section), **changes)})

    # -- validation and construction -----------------------------------------

    def validate(self) -> None:
        """Build every module-level object once so errors surface with their field path."""
        self.build_market()
        self.build_quad()
        if self.prior.kind is not None:
            self.build_prior()

    def build_market(self) -> MarketParams:
        m = self.market
        for key in ("sigma", "T"):
            if getattr(m, key) is None:
                raise ConfigError(f"market.{key}", "required")
        with _at("market"):
            return MarketParams(sigma=m.sigma, T=m.T, r=m.r)

    def build_quad(self) -> QuadConfig:
        q = self.quad
        env = _env_nodes()
        z = q.z_nodes if q.z_nodes is not None else (env or QuadConfig.z_nodes)
        th = q.theta_nodes if q.theta_nodes is not None else env
        with _at("quad"):
            return QuadConfig(z_nodes=z, theta_nodes=th, tol=q.tol)

    def build_prior(self) -> Prior:
        p = self.prior
        if p.kind is None:
            raise ConfigError("prior.kind", "required")
        if p.kind not in _PRIOR_KEYS:
            raise ConfigError("prior.kind", f"unknown kind {p.kind!r}; expected one of {sorted(_PRIOR_KEYS)}")
        need = _PRIOR_KEYS[p.kind]
        for f in dataclasses.fields(p):
            if f.name == "kind":
                continue
            given = getattr(p, f.name) is not None
            if f.name in need and not given:
                raise ConfigError(f"prior.{f.name}", f"required for kind={p.kind}")
            if given and f.name not in need:
                raise ConfigError(f"prior.{f.name}", f"not a parameter of kind={p.kind}")
        nodes = self.build_quad().theta_nodes
        with _at("prior"):
            if p.kind == "point_mass":
                return Prior.point_mass(p.theta0)
            if p.kind == "discrete":
                return Prior.discrete(p.atoms)
            if p.kind == "gaussian":
                return Prior.gaussian(p.m, p.v, nodes or DEFAULT_GAUSSIAN_NODES)
            if p.kind == "uniform":
                return Prior.uniform(p.lower, p.upper, nodes or DEFAULT_CONTINUOUS_NODES)
            return Prior.beta(p.a, p.b, p.lower, p.upper, nodes or DEFAULT_CONTINUOUS_NODES)

    def build_utility(self, gamma: float | None = None) -> UtilitySpec:
        u = self.utility
        with _at("utility"):
            if u.family == "power":
                g = u.gamma if gamma is None else gamma
                if g is None:
                    raise ConfigError("utility.gamma", "required for family=power")
                return Power(g, u.beta, u.eta)
            if u.family == "log":
                return Log(u.beta, u.eta)
            if u.family == "exp":
                return Exp(u.beta)
        raise ConfigError("utility.family", f"unknown family {u.family!r}; expected power, log or exp")

    def build_sim(self, seed: int | None = None) -> SimConfig:
        s = self.sim
        with _at("sim.strategies"):
            strategies = tuple(Strategy.parse(x) for x in s.strategies)
        with _at("sim"):
            return SimConfig(
                prior=self.build_prior(),
                mkt=self.build_market(),
                utility=self.build_utility(),
                x0=s.x0,
                n_paths=s.n_paths,
                n_steps=s.n_steps,
                seed=s.seed if seed is None else seed,
                strategies=strategies,
                antithetic=s.antithetic,
                quad=self.build_quad(),
                table_points=s.table_points,
            )


class _at:
    """Re-raise library ``ValueError`` as :class:`ConfigError` under a field path."""

    def __init__(self, path: str):
        self.path = path

    def __enter__(self):
        return self

    def __exit__(self, typ, exc, tb):
        if exc is not None and isinstance(exc, ValueError) and not isinstance(exc, ConfigError):
            raise ConfigError(self.path, str(exc)) from exc
        return False


def _parse_section(name: str, cls, items) -> Any:
    fields = {f.name: f for f in dataclasses.fields(cls)}
    values = {}
    for key, raw in items.items():
        if key not in fields:
            raise ConfigError(f"{name}.{key}", "unknown key")
        try:
            values[key] = fields[key].metadata["parse"](raw)
        except (ValueError, TypeError, SyntaxError) as exc:
            raise ConfigError(f"{name}.{key}", f"cannot parse {raw!r}: {exc}") from None
    return cls(**values)


def _env_nodes() -> int | None:
    raw = os.environ.get(ENV_QUAD_NODES)
    if raw is None or raw.strip() == "":
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(ENV_QUAD_NODES, f"not an integer: {raw!r}") from None
    if n < 2:
        raise ConfigError(ENV_QUAD_NODES, "must be at least 2")
    return n
