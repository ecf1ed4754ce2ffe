#!/usr/bin/env python3
"""
Fourier multipliers for the rb-lab application.
Dissipation symbols g(r), the operator L with symbol |k|/g(|k|), its square root,
the Riesz-type operator R_g = L^-1 d1, fractional derivatives, the exact linear
propagator and symbol validation.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Optional, Tuple

import numpy as np
import pandas as pd

from src.errors import ConfigError, MeanModeError
from src.spectral_core import Grid2D, RealField2D, SpectralField2D, forward, inverse

logger = logging.getLogger(__name__)

E = math.e
FAMILIES = ("constant", "log", "loglog", "tabulated")
DEFAULT_SIGMA_GRID = (0.25, 0.5, 0.75, 1.0)
LATTICE_INTEGERS = 1024
LATTICE_GEOMETRIC = 512
FD_STEP = 1e-4
POSITIVITY_SLACK_FRACTION = 0.1


@dataclass(frozen=True)
class SymbolG:
    """
    Radial dissipation symbol g(r), r >= 0.

    Attributes:
        family (str): One of constant, log, loglog, tabulated, or a fixture name
        params (dict): Family parameters (c0, mu1, mu2) or the table path
        evaluator (Callable): Vectorised r -> g(r)
        derivatives (Callable): Optional analytic r -> (g'(r), g''(r))
    """

    family: str
    params: Dict[str, float] = field(default_factory=dict)
    evaluator: Callable[[np.ndarray], np.ndarray] = field(default=None, repr=False, compare=False)
    derivatives: Optional[Callable] = field(default=None, repr=False, compare=False)

    def __call__(self, r) -> np.ndarray:
        return self.evaluator(np.asarray(r, dtype=float))

    @property
    def c0(self) -> float:
        """Lower bound C0 = g(0) of a non-decreasing symbol."""
        return float(self(np.array([0.0]))[0])

    def derivative(self, r) -> Tuple[np.ndarray, np.ndarray]:
        """
        First and second radial derivatives of g.

        Analytic for the built-in families; central differences with step r*1e-4 otherwise.

        Args:
            r: Radii

        Returns:
            Tuple[np.ndarray, np.ndarray]: (g'(r), g''(r))
        """
        r = np.asarray(r, dtype=float)
        if self.derivatives is not None:
            return self.derivatives(r)
        return _central_differences(self, r)

    def describe(self) -> Dict[str, object]:
        """Serialisable form used in manifests and checkpoint headers."""
        return {"family": self.family, **self.params}

    @classmethod
    def from_function(cls, name: str, fn: Callable[[np.ndarray], np.ndarray]) -> "SymbolG":
        """
        Wrap an arbitrary function as a symbol; used for deliberately invalid fixtures.

        Args:
            name (str): Label for reports
            fn (Callable): Vectorised r -> g(r)

        Returns:
            SymbolG: Symbol with numerically differentiated derivatives
        """
        return cls(family=name, params={}, evaluator=lambda r: np.asarray(fn(r), dtype=float) * np.ones_like(r))


def _central_differences(g: SymbolG, r: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    h = np.maximum(r * FD_STEP, 1e-8)
    lower = np.maximum(r - h, 0.0)
    up = g(r + h)
    mid = g(r)
    down = g(lower)
    first = (up - down) / (r + h - lower)
    second = np.where(r >= h, (up - 2.0 * mid + down) / (h * h), 0.0)
    return first, second


def _log_symbol(mu: float) -> SymbolG:
    def evaluate(r):
        return np.log(E + r) ** mu

    def derivatives(r):
        a = np.log(E + r)
        first = mu * a ** (mu - 1.0) / (E + r)
        second = mu * (mu - 1.0) * a ** (mu - 2.0) / (E + r) ** 2 - mu * a ** (mu - 1.0) / (E + r) ** 2
        return first, second

    return SymbolG("log", {"mu1": mu}, evaluate, derivatives)


def _loglog_symbol(mu: float) -> SymbolG:
    def evaluate(r):
        return np.log(E + r) * np.log(E * E + np.log1p(r)) ** mu

    def derivatives(r):
        a = np.log(E + r)
        a1 = 1.0 / (E + r)
        a2 = -1.0 / (E + r) ** 2
        d = E * E + np.log1p(r)
        b = np.log(d)
        b1 = 1.0 / (d * (1.0 + r))
        b2 = -(1.0 + d) / (d * d * (1.0 + r) ** 2)
        bm = b**mu
        bm1 = mu * b ** (mu - 1.0) * b1
        bm2 = mu * (mu - 1.0) * b ** (mu - 2.0) * b1 * b1 + mu * b ** (mu - 1.0) * b2
        return a1 * bm + a * bm1, a2 * bm + 2.0 * a1 * bm1 + a * bm2

    return SymbolG("loglog", {"mu2": mu}, evaluate, derivatives)


def _constant_symbol(c0: float) -> SymbolG:
    def derivatives(r):
        return np.zeros_like(r), np.zeros_like(r)

    return SymbolG("constant", {"c0": c0}, lambda r: np.full(np.shape(r), c0, dtype=float), derivatives)


def _positive(params: dict, key: str, default: float) -> float:
    value = float(params.get(key, default))
    if not value > 0 or not math.isfinite(value):
        raise ConfigError(f"symbol parameter {key} must be positive and finite, got {value}")
    return value


def make_g(family: str, params: Optional[dict] = None) -> SymbolG:
    """
    Build one of the dissipation symbol families.

    constant: g = c0; log: g = (ln(e+r))^mu1; loglog: g = ln(e+r) (ln(e^2 + ln(1+r)))^mu2;
    tabulated: linear interpolation of the CSV at params["table"].

    Args:
        family (str): Family name
        params (dict): Family parameters

    Returns:
        SymbolG: The symbol

    Raises:
        ConfigError: On an unknown family or a nonpositive parameter
    """
    params = dict(params or {})
    if family == "constant":
        return _constant_symbol(_positive(params, "c0", 1.0))
    if family == "log":
        return _log_symbol(_positive(params, "mu1", 1.0))
    if family == "loglog":
        return _loglog_symbol(_positive(params, "mu2", 1.0))
    if family == "tabulated":
        if "table" not in params:
            raise ConfigError("tabulated symbol requires a 'table' path")
        return load_tabulated_g(params["table"])
    raise ConfigError(f"unknown symbol family '{family}' (expected one of {', '.join(FAMILIES)})")


def load_tabulated_g(path: str) -> SymbolG:
    """
    Load a tabulated symbol from a two-column CSV with header r,g.

    Args:
        path (str): CSV file path

    Returns:
        SymbolG: Piecewise-linear symbol, constant beyond the last sample
    """
    try:
        table = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ConfigError(f"cannot read symbol table {path}: {e}") from e
    if list(table.columns[:2]) != ["r", "g"]:
        raise ConfigError(f"symbol table {path} must have columns r,g")
    r = table["r"].to_numpy(dtype=float)
    g = table["g"].to_numpy(dtype=float)
    if r.size < 2 or np.any(np.diff(r) <= 0) or r[0] < 0:
        raise ConfigError(f"symbol table {path} needs strictly increasing r >= 0")
    if not np.all(np.isfinite(g)) or np.any(g <= 0):
        raise ConfigError(f"symbol table {path} has nonpositive or non-finite g values")
    return SymbolG("tabulated", {"table": str(path)}, lambda x: np.interp(x, r, g))


@dataclass
class SymbolReport:
    """Outcome of the condition (a)-(c) checks on a sampled lattice."""

    condition_a: bool
    min_g: float
    monotone: bool
    condition_b: bool
    mikhlin_constant: float
    condition_c: bool
    trend: float
    trend_by_sigma: Dict[float, float]
    lattice: np.ndarray = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.condition_a and self.condition_b and self.condition_c

    def to_lines(self) -> list:
        """key=value lines for text reports."""
        lines = [
            f"condition_a={'pass' if self.condition_a else 'fail'}",
            f"min_g={self.min_g:.17g}",
            f"monotone={self.monotone}",
            f"condition_b={'pass' if self.condition_b else 'fail'}",
            f"mikhlin_constant={self.mikhlin_constant:.17g}",
            f"condition_c={'pass' if self.condition_c else 'fail'}",
            f"trend={self.trend:.17g}",
        ]
        lines += [f"trend_sigma_{sigma:g}={value:.17g}" for sigma, value in self.trend_by_sigma.items()]
        lines.append(f"lattice_points={self.lattice.size}")
        return lines


def symbol_lattice(k_max: float) -> np.ndarray:
    """Radii 0, 1..min(k_max, 1024) and 512 geometric points up to k_max."""
    integers = np.arange(0.0, min(math.floor(k_max), LATTICE_INTEGERS) + 1.0)
    geometric = np.geomspace(1.0, k_max, LATTICE_GEOMETRIC)
    return np.unique(np.concatenate([integers, geometric]))


def validate_symbol(g: SymbolG, k_max: float, sigma_grid: Iterable[float] = DEFAULT_SIGMA_GRID) -> SymbolReport:
    """
    Check conditions (a)-(c) on a sampled radial lattice.

    Condition (c) is a finite proxy: g(r)/r^sigma must be non-increasing on the tail
    [k_max/4, k_max] and end below where it started. For (ln(e+r))^mu this needs
    r > e^(mu/sigma), so very small sigma only pass for very large k_max.

    Args:
        g (SymbolG): Symbol under test
        k_max (float): Largest radius sampled
        sigma_grid (Iterable[float]): Exponents in (0, 1]

    Returns:
        SymbolReport: Measurements and pass/fail flags; failures are never raised
    """
    sigmas = [float(s) for s in sigma_grid]
    if not sigmas or any(not 0 < s <= 1 for s in sigmas):
        raise ValueError(f"sigma_grid must lie in (0, 1], got {sigmas}")
    if not k_max >= 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")

    lattice = symbol_lattice(k_max)
    values = g(lattice)
    min_g = float(np.min(values))
    monotone = bool(np.all(np.diff(values) >= -1e-14 * np.abs(values[1:])))
    condition_a = bool(np.all(np.isfinite(values)) and min_g > 0 and min_g >= g.c0 * (1 - 1e-14) and monotone)

    first, second = g.derivative(lattice)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.concatenate([np.abs(lattice * first / values), np.abs(lattice**2 * second / values)])
    mikhlin = float(np.max(ratios)) if np.all(np.isfinite(ratios)) else math.inf
    condition_b = math.isfinite(mikhlin)

    tail = lattice[lattice >= k_max / 4.0]
    trends = {}
    condition_c = True
    for sigma in sigmas:
        h = g(tail) / tail**sigma
        trends[sigma] = float(h[-1] / h[0])
        decreasing = bool(np.all(np.diff(h) <= 1e-14 * np.abs(h[:-1])))
        if not (decreasing and h[-1] < h[0]):
            condition_c = False

    report = SymbolReport(
        condition_a=condition_a,
        min_g=min_g,
        monotone=monotone,
        condition_b=condition_b,
        mikhlin_constant=mikhlin,
        condition_c=condition_c,
        trend=max(trends.values()),
        trend_by_sigma=trends,
        lattice=lattice,
    )
    logger.debug("symbol %s validated: a=%s b=%s (C=%.3g) c=%s", g.family, condition_a, condition_b, mikhlin, condition_c)
    return report


@dataclass(frozen=True)
class MultiplierOp:
    """
    Diagonal Fourier operator f_hat(k) -> m(k) f_hat(k).

    Attributes:
        name (str): Label
        symbol (Callable): grid -> m(k) array (real or complex)
        zero_mode_value (complex): Value of m at k = 0
        mean_zero_only (bool): Reject inputs with a nonzero mean
    """

    name: str
    symbol: Callable[[Grid2D], np.ndarray] = field(repr=False)
    zero_mode_value: complex = 0.0
    mean_zero_only: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def multiplier(self, grid: Grid2D) -> np.ndarray:
        """Symbol evaluated on the grid lattice (cached per grid)."""
        if grid not in self._cache:
            m = np.array(self.symbol(grid))
            if np.iscomplexobj(m) or np.iscomplexobj(np.asarray(self.zero_mode_value)):
                m = m.astype(complex)
            m[0, 0] = self.zero_mode_value
            m.setflags(write=False)
            self._cache[grid] = m
        return self._cache[grid]

    def apply(self, f: SpectralField2D) -> SpectralField2D:
        if self.mean_zero_only:
            scale = max(1.0, float(np.max(np.abs(f.coeffs))))
            if abs(f.coeffs[0, 0]) > 1e-13 * scale:
                raise MeanModeError(f"{self.name} is defined on mean-zero fields only")
        return SpectralField2D(self.multiplier(f.grid) * f.coeffs, f.grid)

    def apply_real(self, f: RealField2D) -> RealField2D:
        """Apply to physical samples (no dealiasing)."""
        return inverse(self.apply(forward(f)))

    def compose(self, other: "MultiplierOp") -> "MultiplierOp":
        """Operator self o other."""
        return MultiplierOp(
            name=f"{self.name}*{other.name}",
            symbol=lambda grid: self.multiplier(grid) * other.multiplier(grid),
            zero_mode_value=self.zero_mode_value * other.zero_mode_value,
            mean_zero_only=self.mean_zero_only or other.mean_zero_only,
        )


def _radial(grid: Grid2D, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    out = np.zeros_like(grid.kmag)
    nonzero = grid.kmag > 0
    out[nonzero] = fn(grid.kmag[nonzero])
    return out


def op_L(g: SymbolG) -> MultiplierOp:
    """Dissipation operator with symbol |k|/g(|k|)."""
    return MultiplierOp("L", lambda grid: _radial(grid, lambda k: k / g(k)))


def op_L_half(g: SymbolG) -> MultiplierOp:
    return MultiplierOp("L^1/2", lambda grid: _radial(grid, lambda k: np.sqrt(k / g(k))))


def op_Rg(g: SymbolG) -> MultiplierOp:
    """Riesz-type operator R_g = L^-1 d1 with symbol i k1 g(|k|)/|k|."""

    def symbol(grid):
        return 1j * grid.k1_odd * _radial(grid, lambda k: g(k) / k)

    return MultiplierOp("R_g", symbol)


def op_lambda(s: float) -> MultiplierOp:
    """
    Fractional derivative Lambda^s with symbol |k|^s.

    Args:
        s (float): Order in [-2, 4]; negative orders act on mean-zero fields only

    Returns:
        MultiplierOp: The operator
    """
    if not -2.0 <= s <= 4.0:
        raise ValueError(f"Lambda^s order must lie in [-2, 4], got {s}")
    return MultiplierOp(
        f"Lambda^{s:g}",
        lambda grid: _radial(grid, lambda k: k**s),
        zero_mode_value=1.0 if s == 0 else 0.0,
        mean_zero_only=s < 0,
    )


def linear_propagator(g: SymbolG, dt: float) -> MultiplierOp:
    """Exact solution operator exp(-dt L) of the dissipative part."""
    if not dt > 0:
        raise ValueError(f"propagator step must be positive, got {dt}")
    return MultiplierOp(
        f"exp(-{dt:g}L)",
        lambda grid: np.exp(-dt * _radial(grid, lambda k: k / g(k))),
        zero_mode_value=1.0,
    )


def kernel_negative_mass(g: SymbolG, grid: Grid2D) -> float:
    """
    Positive off-diagonal mass of the discrete convolution kernel of L.

    A continuum kernel of L is non-positive away from the origin; on the grid the
    truncated symbol leaves a small positive part that bounds the quadrature slack.
    """
    kernel = np.fft.ifft2(op_L(g).multiplier(grid)).real
    off = kernel.copy()
    off[0, 0] = 0.0
    return float(np.sum(np.maximum(off, 0.0)))


@dataclass
class PositivityReport:
    """Pointwise and integral gaps of the positivity inequalities for L."""

    p: float
    min_gap: float
    integral_gap: float
    pointwise_tol: float
    integral_tol: float
    kernel_negative_mass: float
    kernel_slack: float
    violations: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


def pointwise_positivity_check(f: RealField2D, g: SymbolG, p: float) -> PositivityReport:
    """
    Test |f|^(p-2) f Lf >= (1/p) L(|f|^p) pointwise and
    int |f|^(p-2) f Lf >= (2/p) ||L^(1/2)(|f|^(p/2))||_2^2.

    Args:
        f (RealField2D): Test field
        g (SymbolG): Dissipation symbol
        p (float): Exponent, p >= 2

    Returns:
        PositivityReport: Gaps, tolerances and violation count
    """
    if not p >= 2:
        raise ValueError(f"positivity check needs p >= 2, got {p}")
    grid = f.grid
    L = op_L(g)
    values = f.values
    absf = np.abs(values)
    scale = float(np.max(absf)) ** p
    m_max = float(np.max(L.multiplier(grid)))

    lf = inverse(L.apply(forward(f))).values
    weight = absf ** (p - 2.0) * values
    lhs = weight * lf
    l_power = inverse(L.apply(forward(RealField2D(absf**p, grid)))).values
    gap = lhs - l_power / p

    half = forward(RealField2D(absf ** (p / 2.0), grid))
    dissipation = grid.area * float(np.sum(L.multiplier(grid) * np.abs(half.coeffs) ** 2))
    integral_gap = float(np.sum(lhs) * grid.dx**2) - (2.0 / p) * dissipation

    # kernel slack bounds the discrete gap from below; the tolerance takes at most a fixed share of max |f|^(p-1)|Lf|
    negmass = kernel_negative_mass(g, grid)
    slack = (2.0 + 1.0 / p) * scale * negmass
    allowed = min(slack, POSITIVITY_SLACK_FRACTION * float(np.max(np.abs(lhs))))
    pointwise_tol = max(1e-8 * scale * m_max, allowed)
    integral_tol = grid.area * pointwise_tol
    violations = int(np.sum(gap < -pointwise_tol)) + int(integral_gap < -integral_tol)
    if violations:
        logger.warning("positivity check p=%g: %d violations (min gap %.3e)", p, violations, float(np.min(gap)))
    return PositivityReport(
        p=p,
        min_gap=float(np.min(gap)),
        integral_gap=integral_gap,
        pointwise_tol=pointwise_tol,
        integral_tol=integral_tol,
        kernel_negative_mass=negmass,
        kernel_slack=slack,
        violations=violations,
    )
