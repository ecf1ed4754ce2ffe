#!/usr/bin/env python3
"""
Configuration module for the rb-lab application.
Parses run and sweep files (TOML) into immutable config objects. Every key has an
explicit default; unknown tables or keys are rejected.
"""

import itertools
import math
import tomllib
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Tuple, Union

from src.errors import ConfigError
from src.multiplier_ops import FAMILIES, SymbolG, make_g
from src.spectral_core import Grid2D

IC_KINDS = ("taylor_green", "random_band", "file")
SWEEP_AXES = ("symbol", "n", "dt", "amplitude")


@dataclass(frozen=True)
class ICSpec:
    """Initial condition: kind, amplitudes, random band and checkpoint path."""

    kind: str = "taylor_green"
    amplitude: float = 1.0
    theta_amplitude: float = 1.0
    k_lo: float = 1.0
    k_hi: int = 8
    path: str = ""


@dataclass(frozen=True)
class PhysicsHooks:
    """
    Switches for the individual terms of the evolution.

    Attributes:
        advection (bool): Transport terms u.grad(omega) and u.grad(theta)
        buoyancy (bool): Forcing d1 theta in the vorticity equation
        convection (bool): Source u2 in the temperature equation
        dissipation (bool): The operator L acting on the vorticity
    """

    advection: bool = True
    buoyancy: bool = True
    convection: bool = True
    dissipation: bool = True


@dataclass(frozen=True)
class OutputConfig:
    record_every: int = 1
    checkpoint_every: int = 0
    sobolev_s: float = 2.0
    transport_p: float = math.inf
    store_fields: bool = True
    plot: bool = False


@dataclass(frozen=True)
class SymbolConfig:
    family: str = "log"
    c0: float = 1.0
    mu1: float = 1.0
    mu2: float = 1.0
    table: str = ""

    def params(self) -> Dict[str, Any]:
        """Parameters relevant to the selected family."""
        return {
            "constant": {"c0": self.c0},
            "log": {"mu1": self.mu1},
            "loglog": {"mu2": self.mu2},
            "tabulated": {"table": self.table},
        }[self.family]


@dataclass(frozen=True)
class SolverConfig:
    """
    Fully resolved configuration of a single run.

    Attributes:
        n (int): Grid points per dimension
        box_length (float): Period of the box
        dealias (bool): Apply the 2/3 rule to products
        symbol (SymbolConfig): Dissipation symbol
        dt (float | str): Time step or "auto"
        c_cfl (float): CFL safety factor for "auto"
        dt_max (float): Upper bound on an automatic step
        t_end (float): Final time
        ic (ICSpec): Initial condition
        physics (PhysicsHooks): Term switches
        output (OutputConfig): Recording and output options
        seed (int): Seed for random initial conditions
    """

    n: int = 128
    box_length: float = 2.0 * math.pi
    dealias: bool = True
    symbol: SymbolConfig = field(default_factory=SymbolConfig)
    dt: Union[float, str] = "auto"
    c_cfl: float = 0.5
    dt_max: float = 0.1
    t_end: float = 1.0
    ic: ICSpec = field(default_factory=ICSpec)
    physics: PhysicsHooks = field(default_factory=PhysicsHooks)
    output: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0

    def __post_init__(self):
        try:
            Grid2D(self.n, self.box_length)
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if self.dt != "auto" and not (isinstance(self.dt, (int, float)) and self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError(f"time.dt must be 'auto' or a positive number, got {self.dt!r}")
        if not 0 < self.c_cfl <= 1:
            raise ConfigError(f"time.c_cfl must lie in (0, 1], got {self.c_cfl}")
        if not self.dt_max > 0:
            raise ConfigError(f"time.dt_max must be positive, got {self.dt_max}")
        if not (self.t_end >= 0 and math.isfinite(self.t_end)):
            raise ConfigError(f"time.t_end must be finite and >= 0, got {self.t_end}")
        if self.symbol.family not in FAMILIES:
            raise ConfigError(f"symbol.family must be one of {FAMILIES}, got '{self.symbol.family}'")
        if self.ic.kind not in IC_KINDS:
            raise ConfigError(f"initial.kind must be one of {IC_KINDS}, got '{self.ic.kind}'")
        if not (math.isfinite(self.ic.amplitude) and math.isfinite(self.ic.theta_amplitude)):
            raise ConfigError("initial amplitudes must be finite")
        if self.ic.kind == "random_band" and not 0 <= self.ic.k_lo <= self.ic.k_hi <= self.n // 3:
            raise ConfigError(f"initial band [{self.ic.k_lo}, {self.ic.k_hi}] must lie within [0, {self.n // 3}]")
        if self.ic.kind == "file" and not self.ic.path:
            raise ConfigError("initial.kind = 'file' requires initial.path")
        if self.output.record_every < 1:
            raise ConfigError(f"output.record_every must be >= 1, got {self.output.record_every}")
        if self.output.checkpoint_every < 0:
            raise ConfigError("output.checkpoint_every must be >= 0")
        if not self.output.transport_p >= 1:
            raise ConfigError(f"output.transport_p must be >= 1 or 'inf', got {self.output.transport_p}")

    def grid(self) -> Grid2D:
        return Grid2D(self.n, self.box_length)

    def make_symbol(self) -> SymbolG:
        return make_g(self.symbol.family, self.symbol.params())

    def to_dict(self) -> Dict[str, Any]:
        """
        Snapshot in the file layout; load_mapping(snapshot) reproduces this config.

        Returns:
            Dict[str, Any]: JSON-serialisable nested mapping
        """
        output = asdict(self.output)
        output["transport_p"] = _format_p(self.output.transport_p)
        return {
            "seed": self.seed,
            "grid": {"n": self.n, "box_length": self.box_length, "dealias": self.dealias},
            "symbol": asdict(self.symbol),
            "time": {"dt": self.dt, "c_cfl": self.c_cfl, "dt_max": self.dt_max, "t_end": self.t_end},
            "initial": asdict(self.ic),
            "physics": asdict(self.physics),
            "output": output,
        }

    def with_overrides(self, **changes) -> "SolverConfig":
        return replace(self, **changes)


def _format_p(p: float) -> Union[float, str]:
    return "inf" if math.isinf(p) else p


def _parse_p(value: Any) -> float:
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity"):
            return math.inf
        raise ConfigError(f"output.transport_p must be a number or 'inf', got '{value}'")
    return _coerce("output", "transport_p", value, float)


_TABLES = {
    "grid": {"n": "n", "box_length": "box_length", "dealias": "dealias"},
    "time": {"dt": "dt", "c_cfl": "c_cfl", "dt_max": "dt_max", "t_end": "t_end"},
}


def _check_keys(table: str, data: Dict[str, Any], allowed) -> None:
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in [{table}]: {', '.join(unknown)}")


def _section(data: Dict[str, Any], name: str) -> Dict[str, Any]:
    value = data.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"[{name}] must be a table")
    return value


def _coerce(table: str, key: str, value: Any, kind: type) -> Any:
    """
    Check a value against the expected type and convert it.

    Booleans are never accepted as numbers and strings are never parsed;
    integers must be whole.

    Raises:
        ConfigError: If the value has the wrong type
    """
    if kind is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(f"[{table}] {key} must be true or false, got {value!r}")
    if kind is str:
        if isinstance(value, str):
            return value
        raise ConfigError(f"[{table}] {key} must be a string, got {value!r}")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"[{table}] {key} must be a number, got {value!r}")
    if kind is int:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"[{table}] {key} must be an integer, got {value!r}")
        return int(value)
    return float(value)


def _build(cls, table: str, data: Dict[str, Any], converters: Dict[str, Any] = None):
    allowed = cls.__dataclass_fields__.keys()
    _check_keys(table, data, allowed)
    converters = converters or {}
    kwargs = {}
    for key, value in data.items():
        convert = converters.get(key)
        if convert is not None:
            kwargs[key] = convert(value)
        else:
            kwargs[key] = _coerce(table, key, value, type(cls.__dataclass_fields__[key].default))
    return cls(**kwargs)


def _parse_dt(value: Any) -> Union[float, str]:
    if isinstance(value, str):
        if value != "auto":
            raise ConfigError(f"time.dt must be 'auto' or a positive number, got '{value}'")
        return value
    return _coerce("time", "dt", value, float)


def load_mapping(data: Dict[str, Any], allow_sweep: bool = False) -> SolverConfig:
    """
    Build a SolverConfig from a nested mapping in the file layout.

    Args:
        data (Dict[str, Any]): Parsed TOML or a config snapshot
        allow_sweep (bool): Accept (and ignore) a [sweep] table

    Returns:
        SolverConfig: Validated configuration

    Raises:
        ConfigError: On unknown keys, wrong types or invalid values
    """
    allowed = {"seed", "grid", "symbol", "time", "initial", "physics", "output"}
    if allow_sweep:
        allowed.add("sweep")
    _check_keys("top level", data, allowed)

    grid = _section(data, "grid")
    _check_keys("grid", grid, _TABLES["grid"])
    time = _section(data, "time")
    _check_keys("time", time, _TABLES["time"])

    kwargs: Dict[str, Any] = {}
    if "n" in grid:
        kwargs["n"] = _coerce("grid", "n", grid["n"], int)
    if "box_length" in grid:
        kwargs["box_length"] = _coerce("grid", "box_length", grid["box_length"], float)
    if "dealias" in grid:
        kwargs["dealias"] = _coerce("grid", "dealias", grid["dealias"], bool)
    if "dt" in time:
        kwargs["dt"] = _parse_dt(time["dt"])
    for key in ("c_cfl", "dt_max", "t_end"):
        if key in time:
            kwargs[key] = _coerce("time", key, time[key], float)
    if "seed" in data:
        kwargs["seed"] = _coerce("top level", "seed", data["seed"], int)

    kwargs["symbol"] = _build(SymbolConfig, "symbol", _section(data, "symbol"))
    kwargs["ic"] = _build(ICSpec, "initial", _section(data, "initial"))
    kwargs["physics"] = _build(PhysicsHooks, "physics", _section(data, "physics"))
    kwargs["output"] = _build(OutputConfig, "output", _section(data, "output"), {"transport_p": _parse_p})
    return SolverConfig(**kwargs)


def _read_toml(path: str) -> Dict[str, Any]:
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"malformed config {path}: {e}") from e


def load_config(path: str) -> SolverConfig:
    """
    Load a run configuration file.

    Args:
        path (str): TOML file

    Returns:
        SolverConfig: Validated configuration
    """
    return load_mapping(_read_toml(path))


@dataclass(frozen=True)
class SweepConfig:
    """Base run configuration plus the axes of a Cartesian sweep."""

    base: SolverConfig
    axes: Dict[str, List[Any]]

    def expand(self) -> List[Tuple[Dict[str, Any], SolverConfig]]:
        """
        Cartesian product of the axes in a fixed order (symbol, n, dt, amplitude).

        Returns:
            List[Tuple[Dict[str, Any], SolverConfig]]: (axis values, config) per run
        """
        names = [axis for axis in SWEEP_AXES if axis in self.axes]
        runs = []
        for values in itertools.product(*(self.axes[name] for name in names)):
            point = dict(zip(names, values))
            runs.append((point, _apply_point(self.base, point)))
        return runs


def _apply_point(base: SolverConfig, point: Dict[str, Any]) -> SolverConfig:
    config = base
    if "symbol" in point:
        config = replace(config, symbol=_build(SymbolConfig, "sweep.symbol", point["symbol"]))
    if "n" in point:
        n = _coerce("sweep", "n", point["n"], int)
        ic = config.ic
        if ic.kind == "random_band" and ic.k_hi > n // 3:
            raise ConfigError(f"sweep n={n} cannot resolve initial band k_hi={ic.k_hi}")
        config = replace(config, n=n)
    if "dt" in point:
        config = replace(config, dt=_parse_dt(point["dt"]))
    if "amplitude" in point:
        config = replace(config, ic=replace(config.ic, amplitude=_coerce("sweep", "amplitude", point["amplitude"], float)))
    return config


def load_sweep(path: str) -> SweepConfig:
    """
    Load a sweep file: a run configuration plus a [sweep] table of axis lists.

    Args:
        path (str): TOML file

    Returns:
        SweepConfig: Base config and axes
    """
    data = _read_toml(path)
    base = load_mapping(data, allow_sweep=True)
    axes = _section(data, "sweep")
    _check_keys("sweep", axes, SWEEP_AXES)
    for name, values in axes.items():
        if not isinstance(values, list) or not values:
            raise ConfigError(f"sweep axis '{name}' must be a non-empty list")
    if not axes:
        axes = {"n": [base.n]}
    return SweepConfig(base=base, axes=axes)
