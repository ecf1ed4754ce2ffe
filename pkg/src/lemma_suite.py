#!/usr/bin/env python3
"""
Inequality verification suites for the rb-lab application.

Every check evaluates both sides of an inequality with constant 1 over a seeded
ensemble of random band-limited fields and reports the worst ratio as the empirical
constant. Ensembles are drawn on a fixed wavenumber box, so the same seed gives the
same continuous fields at every resolution; constants are required to agree within
a factor of two across n in {64, 128} and across two independent seed batches.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.config import ICSpec, OutputConfig, PhysicsHooks, SolverConfig, SymbolConfig
from src.diagnostics import compare_transport, decay_rate_contrast, record_run, transport_besov_check
from src.errors import ConfigError
from src.littlewood_paley import BesovNormSpec, besov_norm, build_partition, delta_j, hs_norm
from src.multiplier_ops import (
    SymbolG,
    linear_propagator,
    make_g,
    op_L,
    op_L_half,
    op_lambda,
    op_Rg,
    pointwise_positivity_check,
    validate_symbol,
)
from src.spectral_core import (
    Grid2D,
    RealField2D,
    SpectralField2D,
    forward,
    gradient,
    inverse,
    lp_norm,
    magnitude,
    product,
    random_band_field,
    sobolev_norm,
)

logger = logging.getLogger(__name__)

RESOLUTIONS = (64, 128)
STABILITY_FACTOR = 2.0
ALGEBRA_TOL = 1e-12

SUITES = {
    "operators": ("operator_algebra", "symbol_validation", "positivity", "criticality_contrast"),
    "partition": ("partition",),
    "bernstein": ("bernstein", "generalized_bernstein"),
    "commutators": ("convolution_commutator", "convolution_commutator_lipschitz", "kato_ponce", "rg_commutator"),
    "interpolation": ("interpolation",),
    "transport": ("transport",),
}


@dataclass
class EnsembleSpec:
    """Seeded ensemble of random band-limited fields."""

    size: int = 100
    k_lo: float = 1.0
    k_hi: int = 10
    amplitude: float = 1.0
    seed: int = 0

    def batch_seeds(self) -> List[int]:
        """Two independent child seeds of the ensemble seed."""
        return [int(child.generate_state(1)[0]) for child in np.random.SeedSequence(self.seed).spawn(2)]

    def draw(self, grid: Grid2D, seed: int, per_sample: int = 1) -> List[Tuple[SpectralField2D, ...]]:
        rng = np.random.default_rng(seed)
        samples = []
        for _ in range(self.size):
            samples.append(
                tuple(random_band_field(grid, self.k_lo, self.k_hi, self.amplitude, rng) for _ in range(per_sample))
            )
        return samples


@dataclass
class InequalityReport:
    """
    Result of one inequality check.

    Attributes:
        lemma (str): Check identifier
        ensemble_size (int): Samples per (resolution, batch)
        worst_ratio (float): Largest LHS/RHS ratio seen
        empirical_constant (float): Same as worst_ratio; the measured constant
        violations (int): Non-finite ratios, tolerance failures and instabilities
        params (dict): Parameters used
        constants (dict): Empirical constant per (resolution, batch)
        stable (bool): Constants agree within a factor of two
        samples (pd.DataFrame): Per-sample ratios
    """

    lemma: str
    ensemble_size: int
    worst_ratio: float
    empirical_constant: float
    violations: int
    params: Dict[str, Any]
    constants: Dict[str, float] = field(default_factory=dict)
    stable: bool = True
    samples: pd.DataFrame = field(default_factory=pd.DataFrame, repr=False)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_lines(self) -> List[str]:
        lines = [
            f"lemma={self.lemma}",
            f"ensemble_size={self.ensemble_size}",
            f"worst_ratio={self.worst_ratio:.17g}",
            f"empirical_constant={self.empirical_constant:.17g}",
            f"violations={self.violations}",
            f"stable={self.stable}",
        ]
        lines += [f"param_{key}={value}" for key, value in self.params.items()]
        lines += [f"constant_{key}={value:.17g}" for key, value in self.constants.items()]
        return lines


def _ratio(lhs: float, rhs: float, scale: float = 1.0) -> float:
    if rhs > 0:
        return lhs / rhs
    return 0.0 if lhs <= 1e-12 * scale else math.inf


def _map(fn: Callable, items: Sequence, workers: int) -> List:
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _symbol(params: Dict[str, Any]) -> SymbolG:
    family = params.get("family", "log")
    return make_g(family, {k: params[k] for k in ("c0", "mu1", "mu2", "table") if k in params})


def _physical(f: SpectralField2D) -> RealField2D:
    return inverse(f, validate=False)


def _exponent(value) -> float:
    return math.inf if value in ("inf", math.inf) else float(value)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _reciprocal(p: float) -> float:
    return 0.0 if math.isinf(p) else 1.0 / p


def _bernstein(params):
    p, q, alpha = _exponent(params["p"]), _exponent(params["q"]), float(params["alpha"])
    _require(1 <= p <= q, f"bernstein needs 1 <= p <= q, got p={p}, q={q}")
    _require(alpha >= 0, f"bernstein needs alpha >= 0, got {alpha}")
    gap = _reciprocal(p) - _reciprocal(q)
    lam = op_lambda(2.0 * alpha)

    def evaluate(sample, grid, g, partition):
        (f,) = sample
        out = []
        for j in params["blocks"]:
            fj = delta_j(f, j, partition)
            phys = _physical(fj)
            lam_fj = _physical(lam.apply(fj))
            norm_p, norm_q, lam_q = lp_norm(phys, p), lp_norm(phys, q), lp_norm(lam_fj, q)
            out.append((f"lq_lp_j{j}", _ratio(norm_q, 2.0 ** (2 * j * gap) * norm_p)))
            out.append((f"lower_j{j}", _ratio(2.0 ** (2 * alpha * j) * norm_q, lam_q)))
            out.append((f"upper_j{j}", _ratio(lam_q, 2.0 ** (2 * alpha * j + 2 * j * gap) * norm_p)))
        return out

    return evaluate, 1


def _positivity(params):
    p_values = [float(p) for p in params["p_values"]]
    _require(all(p >= 2 for p in p_values), f"positivity needs p >= 2, got {p_values}")

    def evaluate(sample, grid, g, partition):
        (f,) = sample
        out = []
        for p in p_values:
            report = pointwise_positivity_check(_physical(f), g, p)
            worst = max(-report.min_gap / report.pointwise_tol, -report.integral_gap / report.integral_tol)
            out.append((f"p{p:g}", worst))
        return out

    return evaluate, 1


def _generalized_bernstein(params):
    p = float(params["p"])
    _require(2 <= p < math.inf, f"generalized bernstein needs p in [2, inf), got {p}")

    def evaluate(sample, grid, g, partition):
        (f,) = sample
        L = op_L(g)
        out = []
        for j in params["blocks"]:
            _require(j >= 0, "generalized bernstein is stated for blocks j >= 0")
            fj = delta_j(f, j, partition)
            phys = _physical(fj).values
            l_phys = _physical(L.apply(fj)).values
            lhs = 2.0**j / float(g(np.array([2.0**j]))[0]) * float(np.sum(np.abs(phys) ** p) * grid.dx**2)
            rhs = float(np.sum(np.abs(phys) ** (p - 2.0) * phys * l_phys) * grid.dx**2)
            out.append((f"j{j}", _ratio(lhs, rhs)))
        return out

    return evaluate, 1


def periodic_distance(grid: Grid2D) -> np.ndarray:
    """Minimum-image distance |x| of each collocation point to the origin."""
    x1, x2 = grid.coordinates
    length = grid.box_length
    d1 = np.minimum(x1, length - x1)
    d2 = np.minimum(x2, length - x2)
    return np.hypot(d1, d2)


def block_kernel(grid: Grid2D, j: int, partition) -> np.ndarray:
    """Physical kernel h of Delta_j, so that h * f = Delta_j f on the torus."""
    return np.fft.ifft2(partition.block(j)).real * (grid.n * grid.n) / grid.area


def _convolution_commutator(params):
    delta = float(params["delta"])
    p1, p2, p3 = (_exponent(params[k]) for k in ("p1", "p2", "p3"))
    _require(0 < delta < 1, f"convolution commutator needs delta in (0, 1), got {delta}")
    _require(min(p1, p2, p3) >= 1, "convolution commutator needs p1, p2, p3 in [1, inf]")
    _require(
        abs(_reciprocal(p1) - _reciprocal(p2) - _reciprocal(p3)) < 1e-12,
        f"convolution commutator needs 1/p1 = 1/p2 + 1/p3, got ({p1}, {p2}, {p3})",
    )
    seminorm = BesovNormSpec(delta, p2, math.inf, homogeneous=True)

    def evaluate(sample, grid, g, partition):
        f, h = sample
        distance = periodic_distance(grid) ** delta
        f_phys, h_phys = _physical(f), _physical(h)
        f_besov = besov_norm(f, seminorm, g, partition)
        h_norm = lp_norm(h_phys, p3)
        out = []
        for j in params["blocks"]:
            kernel = block_kernel(grid, j, partition)
            weight = float(np.sum(distance * np.abs(kernel)) * grid.dx**2)
            commutator = _physical(delta_j(product(f, h), j, partition)).values - f_phys.values * _physical(
                delta_j(h, j, partition)
            ).values
            lhs = lp_norm(RealField2D(commutator, grid), p1)
            out.append((f"j{j}", _ratio(lhs, weight * f_besov * h_norm)))
        return out

    return evaluate, 2


def _convolution_commutator_lipschitz(params):
    p, r1 = _exponent(params["p"]), _exponent(params["r1"])
    _require(p >= 1, f"lipschitz commutator needs p >= 1, got {p}")
    _require(1 <= r1 <= p, f"lipschitz commutator needs r1 in [1, p], got {r1}")
    r2 = math.inf if r1 == 1 else r1 / (r1 - 1.0)

    def evaluate(sample, grid, g, partition):
        f, h = sample
        distance = periodic_distance(grid)
        f_phys = _physical(f)
        grad_norm = lp_norm(magnitude(gradient(f)), p)
        h_norm = lp_norm(_physical(h), r2)
        out = []
        for j in params["blocks"]:
            kernel = block_kernel(grid, j, partition)
            weight = lp_norm(RealField2D(distance * kernel, grid), r1)
            commutator = _physical(delta_j(product(f, h), j, partition)).values - f_phys.values * _physical(
                delta_j(h, j, partition)
            ).values
            lhs = lp_norm(RealField2D(commutator, grid), p)
            out.append((f"j{j}", _ratio(lhs, weight * grad_norm * h_norm)))
        return out

    return evaluate, 2


def _kato_ponce(params):
    s, r = float(params["s"]), _exponent(params["r"])
    p1, q1, p2, q2 = (_exponent(params[k]) for k in ("p1", "q1", "p2", "q2"))
    _require(0 < s <= 3, f"kato-ponce needs 0 < s <= 3, got {s}")
    _require(1 < r < math.inf, f"kato-ponce needs 1 < r < inf, got {r}")
    _require(1 < q1 < math.inf and 1 < p2 < math.inf, "kato-ponce needs q1, p2 in (1, inf)")
    _require(p1 >= 1 and q2 >= 1, "kato-ponce needs p1, q2 in [1, inf]")
    _require(
        abs(1 / r - _reciprocal(p1) - 1 / q1) < 1e-12 and abs(1 / r - 1 / p2 - _reciprocal(q2)) < 1e-12,
        "kato-ponce needs 1/r = 1/p1 + 1/q1 = 1/p2 + 1/q2",
    )
    lam_s, lam_s1 = op_lambda(s), op_lambda(s - 1.0)

    def evaluate(sample, grid, g, partition):
        f, h = sample
        f_phys = _physical(f)
        commutator = _physical(lam_s.apply(product(f, h))).values - f_phys.values * _physical(lam_s.apply(h)).values
        lhs = lp_norm(RealField2D(commutator, grid), r)
        rhs = lp_norm(magnitude(gradient(f)), p1) * lp_norm(_physical(lam_s1.apply(h)), q1) + lp_norm(
            _physical(lam_s.apply(f)), p2
        ) * lp_norm(_physical(h), q2)
        return [("commutator", _ratio(lhs, rhs))]

    return evaluate, 2


def _rg_commutator(params):
    p1, p2, p3 = (_exponent(params[k]) for k in ("p1", "p2", "p3"))
    q, s, delta = _exponent(params["q"]), float(params["s"]), float(params["delta"])
    _require(all(2 <= p < math.inf for p in (p1, p2, p3)), "R_g commutator needs p1, p2, p3 in [2, inf)")
    _require(abs(1 / p1 - 1 / p2 - 1 / p3) < 1e-12, "R_g commutator needs 1/p1 = 1/p2 + 1/p3")
    _require(q >= 1, "R_g commutator needs q >= 1")
    _require(0 < s < delta, f"R_g commutator needs 0 < s < delta, got s={s}, delta={delta}")
    target = BesovNormSpec(s, p1, q, weight=1.0)
    u_spec = BesovNormSpec(delta, p2, math.inf, homogeneous=True)
    f_spec = BesovNormSpec(s - delta, p3, q, weight=2.0)

    def evaluate(sample, grid, g, partition):
        u, F = sample
        Rg = op_Rg(g)
        commutator = Rg.apply(product(u, F)) - product(u, Rg.apply(F))
        lhs = besov_norm(commutator, target, g, partition)
        rhs = besov_norm(u, u_spec, g, partition) * besov_norm(F, f_spec, g, partition) + sobolev_norm(
            u, 0.0
        ) * sobolev_norm(F, 0.0)
        return [("commutator", _ratio(lhs, rhs))]

    return evaluate, 2


def interpolation_index(beta: float, eps: float) -> float:
    """Integrability 2 beta / (2 - eps (beta - 1)) of the middle Besov norm; inf when the denominator is 0."""
    denominator = 2.0 - eps * (beta - 1.0)
    if denominator < 0:
        raise ConfigError(f"interpolation index undefined: 2 - eps(beta - 1) = {denominator:g} < 0")
    return math.inf if denominator == 0 else 2.0 * beta / denominator


def _interpolation(params):
    beta, eps, s = float(params["beta"]), float(params["eps"]), float(params["s"])
    _require(beta > 2, f"interpolation needs beta > 2, got {beta}")
    _require(0 < s < 1, f"interpolation needs s in (0, 1), got {s}")
    _require(0 < eps * (beta - 2) <= 2, f"interpolation needs 0 < eps (beta - 2) <= 2, got {eps * (beta - 2):g}")
    lebesgue = 2.0 * beta / (1.0 + eps)
    middle_spec = BesovNormSpec(s, interpolation_index(beta, eps), 2, homogeneous=True)
    sigma = s + (1.0 - 2.0 / beta) * (1.0 + eps)

    def evaluate(sample, grid, g, partition):
        (f,) = sample
        phys = _physical(f).values
        power = forward(RealField2D(np.abs(phys) ** (beta - 2.0) * phys, grid))
        lhs = sobolev_norm(power, s, homogeneous=True)
        factor = lp_norm(RealField2D(phys, grid), lebesgue) ** (beta - 2.0)
        middle = factor * besov_norm(f, middle_spec, g, partition)
        right = factor * sobolev_norm(f, sigma, homogeneous=True)
        return [("lower", _ratio(lhs, middle)), ("upper", _ratio(middle, right))]

    return evaluate, 1


LEMMAS: Dict[str, Tuple[Callable, Dict[str, Any], int]] = {
    "bernstein": (_bernstein, {"p": 2.0, "q": 4.0, "alpha": 0.5, "blocks": (0, 1, 2, 3)}, 100),
    "positivity": (_positivity, {"p_values": (2.0, 3.0, 4.0)}, 100),
    "generalized_bernstein": (_generalized_bernstein, {"p": 3.0, "blocks": (0, 1, 2, 3)}, 100),
    "convolution_commutator": (
        _convolution_commutator,
        {"delta": 0.5, "p1": 2.0, "p2": 4.0, "p3": 4.0, "blocks": (1, 2, 3)},
        50,
    ),
    "convolution_commutator_lipschitz": (_convolution_commutator_lipschitz, {"p": 2.0, "r1": 1.0, "blocks": (1, 2, 3)}, 50),
    "kato_ponce": (_kato_ponce, {"s": 1.0, "r": 2.0, "p1": "inf", "q1": 2.0, "p2": 2.0, "q2": "inf"}, 100),
    "rg_commutator": (
        _rg_commutator,
        {"p1": 2.0, "p2": 4.0, "p3": 4.0, "q": 2.0, "s": 0.25, "delta": 0.5},
        50,
    ),
    "interpolation": (_interpolation, {"beta": 4.0, "eps": 0.5, "s": 0.25}, 200),
}

STABILITY_EXEMPT = {"positivity"}


def _spread(values) -> float:
    values = list(values)
    if not values or max(values) <= 0:
        return 1.0
    if min(values) <= 0:
        return math.inf
    return max(values) / min(values)


def lemma_suite(
    lemma: str,
    ensemble: Optional[EnsembleSpec] = None,
    params: Optional[Dict[str, Any]] = None,
    workers: int = 1,
    resolutions: Sequence[int] = RESOLUTIONS,
) -> InequalityReport:
    """
    Run one inequality check over an ensemble at every resolution and seed batch.

    Args:
        lemma (str): Identifier, one of LEMMAS
        ensemble (EnsembleSpec): Ensemble description; the size defaults per check
        params (dict): Overrides of the check parameters (and of the symbol: family, mu1, ...)
        workers (int): Threads evaluating ensemble members
        resolutions (Sequence[int]): Grid sizes compared for stability

    Returns:
        InequalityReport: Worst ratio, per-run constants and violations

    Raises:
        ConfigError: On an unknown check or parameters outside the admissible range
    """
    if lemma not in LEMMAS:
        raise ConfigError(f"unknown inequality check '{lemma}'")
    builder, defaults, default_size = LEMMAS[lemma]
    merged = {**defaults, **(params or {})}
    evaluate, per_sample = builder(merged)
    g = _symbol(merged)
    ensemble = ensemble or EnsembleSpec(size=default_size)

    rows = []
    constants = {}
    for n in resolutions:
        grid = Grid2D(n)
        partition = build_partition(grid)
        for batch, seed in enumerate(ensemble.batch_seeds()):
            samples = ensemble.draw(grid, seed, per_sample)
            results = _map(lambda sample: evaluate(sample, grid, g, partition), samples, workers)
            worst = 0.0
            for index, sides in enumerate(results):
                for side, ratio in sides:
                    rows.append({"n": n, "batch": batch, "sample": index, "side": side, "ratio": ratio})
                    worst = max(worst, ratio) if not math.isnan(ratio) else math.inf
            constants[f"n{n}_batch{batch}"] = worst

    samples_frame = pd.DataFrame(rows, columns=["n", "batch", "sample", "side", "ratio"])
    ratios = samples_frame["ratio"].to_numpy(dtype=float)
    hard = int(np.sum(~np.isfinite(ratios)))
    if lemma == "positivity":
        hard += int(np.sum(ratios > 1.0))
    stable = lemma in STABILITY_EXEMPT or _spread(constants.values()) <= STABILITY_FACTOR
    worst_ratio = float(np.max(ratios)) if ratios.size else 0.0
    report = InequalityReport(
        lemma=lemma,
        ensemble_size=ensemble.size,
        worst_ratio=worst_ratio,
        empirical_constant=worst_ratio,
        violations=hard + (0 if stable else 1),
        params={key: value for key, value in merged.items()},
        constants=constants,
        stable=stable,
        samples=samples_frame,
    )
    logger.info("%s: constant %.4g, %d violations", lemma, worst_ratio, report.violations)
    return report


def operator_algebra(seed: int = 0, n: int = 128, g: Optional[SymbolG] = None) -> InequalityReport:
    """Round trip, L R_g = d1, L^(1/2) L^(1/2) = L and the propagator semigroup, relative errors."""
    g = g or make_g("log", {"mu1": 1.0})
    grid = Grid2D(n)
    f = random_band_field(grid, 1, 10, 1.0, np.random.default_rng(seed))
    scale = float(np.max(np.abs(f.coeffs)))

    def relative(a: np.ndarray, b: np.ndarray) -> float:
        return float(np.max(np.abs(a - b))) / max(float(np.max(np.abs(b))), scale, 1e-300)

    phys = inverse(f)
    L, L_half, Rg = op_L(g), op_L_half(g), op_Rg(g)
    errors = {
        "round_trip": float(np.max(np.abs(inverse(forward(phys)).values - phys.values)) / np.max(np.abs(phys.values))),
        "L_Rg_is_d1": relative(L.apply(Rg.apply(f)).coeffs, gradient(f).c1.coeffs),
        "L_half_squared": relative(L_half.apply(L_half.apply(f)).coeffs, L.apply(f).coeffs),
        "propagator_semigroup": relative(
            linear_propagator(g, 0.1).apply(linear_propagator(g, 0.1).apply(f)).coeffs,
            linear_propagator(g, 0.2).apply(f).coeffs,
        ),
        "L_Rg_commute": relative(L.apply(Rg.apply(f)).coeffs, Rg.apply(L.apply(f)).coeffs),
        "critical_L_is_lambda": relative(op_L(make_g("constant")).apply(f).coeffs, op_lambda(1.0).apply(f).coeffs),
    }
    rows = [{"n": n, "batch": 0, "sample": 0, "side": name, "ratio": err / ALGEBRA_TOL} for name, err in errors.items()]
    worst = max(errors.values())
    return InequalityReport(
        lemma="operator_algebra",
        ensemble_size=1,
        worst_ratio=worst,
        empirical_constant=worst,
        violations=sum(1 for err in errors.values() if not err <= ALGEBRA_TOL),
        params={"tolerance": ALGEBRA_TOL, "n": n, "symbol": g.family},
        constants=errors,
        samples=pd.DataFrame(rows),
    )


def symbol_validation(k_max: float = 1e4) -> InequalityReport:
    """Both logarithmic families pass conditions (a)-(c); the fixture g(r) = r fails (c)."""
    cases = {
        "log": (make_g("log", {"mu1": 1.0}), True),
        "loglog": (make_g("loglog", {"mu2": 1.0}), True),
        "constant": (make_g("constant", {"c0": 1.0}), True),
        "linear_fixture": (SymbolG.from_function("linear", lambda r: r), False),
    }
    violations = 0
    constants = {}
    rows = []
    for name, (g, expected) in cases.items():
        report = validate_symbol(g, k_max)
        outcome = report.passed if expected else report.condition_c
        if outcome != expected:
            violations += 1
        constants[f"{name}_mikhlin"] = report.mikhlin_constant
        constants[f"{name}_trend"] = report.trend
        rows.append({"n": 0, "batch": 0, "sample": 0, "side": name, "ratio": report.trend})
    return InequalityReport(
        lemma="symbol_validation",
        ensemble_size=len(cases),
        worst_ratio=max(r["ratio"] for r in rows),
        empirical_constant=constants["log_mikhlin"],
        violations=violations,
        params={"k_max": k_max},
        constants=constants,
        samples=pd.DataFrame(rows),
    )


def criticality_contrast(tolerance: float = 1e-10) -> InequalityReport:
    """Isolated modes decay at |k|/g(|k|); the log symbol rate is 1/ln(e+|k|) of the critical one."""
    report = decay_rate_contrast(make_g("log", {"mu1": 1.0}))
    rows = report.rows
    errors = rows["relative_error"].to_numpy()
    samples = pd.DataFrame(
        {"n": 32, "batch": 0, "sample": range(len(rows)), "side": "decay_rate", "ratio": errors}
    )
    return InequalityReport(
        lemma="criticality_contrast",
        ensemble_size=len(rows),
        worst_ratio=float(errors.max()),
        empirical_constant=float(errors.max()),
        violations=int(np.sum(~(errors <= tolerance))),
        params={"tolerance": tolerance, "symbol": "log mu1=1"},
        constants={f"ratio_k{k:g}": r for k, r in zip(rows["k"], rows["ratio_to_critical"])},
        samples=samples,
    )


def partition_check(seed: int = 0, n: int = 128, size: int = 100) -> InequalityReport:
    """
    Partition of unity, block reconstruction, support disjointness and the B^s_{2,2} / H^s
    ratio over random fields for s in {0.5, 1, 2}.
    """
    grid = Grid2D(n)
    partition = build_partition(grid)
    rng = np.random.default_rng(seed)
    fields = [random_band_field(grid, 0, 12, 1.0, rng) for _ in range(size)]
    unity = partition.unity_deviation()
    overlap = max(
        float(np.max(np.abs(partition.block(j) * partition.block(k))))
        for j in partition.indices
        for k in partition.indices
        if abs(j - k) >= 2
    )
    reconstruction = 0.0
    rows = []
    for index, f in enumerate(fields):
        total = sum(delta_j(f, j, partition).coeffs for j in partition.indices)
        reconstruction = max(reconstruction, float(np.max(np.abs(total - f.coeffs)) / np.max(np.abs(f.coeffs))))
        for s in (0.5, 1.0, 2.0):
            ratio = besov_norm(f, BesovNormSpec(s, 2, 2), partition=partition) / hs_norm(f, s)
            rows.append({"n": n, "batch": 0, "sample": index, "side": f"besov_over_hs_s{s:g}", "ratio": ratio})
    frame = pd.DataFrame(rows)
    ratios = frame["ratio"].to_numpy()
    violations = int(unity > 1e-12) + int(reconstruction > 1e-12) + int(overlap > 0)
    violations += int(np.sum((ratios < 0.25) | (ratios > 4.0)))
    return InequalityReport(
        lemma="partition",
        ensemble_size=size,
        worst_ratio=float(ratios.max()),
        empirical_constant=float(ratios.max()),
        violations=violations,
        params={"n": n, "j_max": partition.j_max},
        constants={
            "unity_deviation": unity,
            "reconstruction_error": reconstruction,
            "support_overlap": overlap,
            "min_ratio": float(ratios.min()),
        },
        samples=frame,
    )


def transport_check(seed: int = 0, params: Optional[Dict[str, Any]] = None, resolutions=(32, 64)) -> InequalityReport:
    """Transport Besov bound on short runs at two resolutions, with and without the u2 source."""
    params = {"p": "inf", "t_end": 0.5, "dt": 0.02, "amplitude": 0.5, "k_hi": 4, **(params or {})}
    p = _exponent(params["p"])
    _require(p >= 1, f"transport check needs p >= 1, got {p}")
    rows = []
    constants = {}
    violations = 0
    for convection in (False, True):
        reports = []
        for n in resolutions:
            config = SolverConfig(
                n=n,
                dt=float(params["dt"]),
                t_end=float(params["t_end"]),
                symbol=SymbolConfig(family="log", mu1=1.0),
                ic=ICSpec(kind="random_band", amplitude=float(params["amplitude"]), k_lo=1, k_hi=int(params["k_hi"])),
                physics=PhysicsHooks(convection=convection),
                output=OutputConfig(transport_p=p),
                seed=seed,
            )
            traj, _ = record_run(config)
            report = transport_besov_check(traj, config.make_symbol(), p, config.physics)
            reports.append(report)
            if not report.finite:
                violations += 1
            label = f"{'source' if convection else 'no_source'}_n{n}"
            constants[label] = report.worst_ratio
            rows += [
                {"n": n, "batch": int(convection), "sample": i, "side": label, "ratio": r}
                for i, r in enumerate(report.ratios)
            ]
        if compare_transport(reports) > STABILITY_FACTOR:
            violations += 1
    frame = pd.DataFrame(rows)
    worst = float(frame["ratio"].max())
    return InequalityReport(
        lemma="transport",
        ensemble_size=2 * len(resolutions),
        worst_ratio=worst,
        empirical_constant=worst,
        violations=violations,
        params=params,
        constants=constants,
        stable=violations == 0,
        samples=frame,
    )


def run_suite(name: str, seed: int = 0, workers: int = 1) -> List[InequalityReport]:
    """
    Run a named verification suite.

    Args:
        name (str): operators, partition, bernstein, commutators, interpolation, transport or all
        seed (int): Ensemble seed
        workers (int): Threads per ensemble

    Returns:
        List[InequalityReport]: One report per check

    Raises:
        ConfigError: On an unknown suite name
    """
    if name == "all":
        checks = [check for suite in SUITES.values() for check in suite]
    elif name in SUITES:
        checks = list(SUITES[name])
    else:
        raise ConfigError(f"unknown suite '{name}' (expected one of {', '.join([*SUITES, 'all'])})")

    reports = []
    for check in checks:
        if check == "operator_algebra":
            reports.append(operator_algebra(seed))
        elif check == "symbol_validation":
            reports.append(symbol_validation())
        elif check == "criticality_contrast":
            reports.append(criticality_contrast())
        elif check == "partition":
            reports.append(partition_check(seed))
        elif check == "transport":
            reports.append(transport_check(seed))
        else:
            reports.append(lemma_suite(check, EnsembleSpec(size=LEMMAS[check][2], seed=seed), workers=workers))
    return reports


def write_reports(reports: Sequence[InequalityReport], out_dir: str, suite: str) -> List[str]:
    """
    Write <suite>_report.txt (key=value blocks) and one samples CSV per check.

    Returns:
        List[str]: Paths written
    """
    os.makedirs(out_dir, exist_ok=True)
    text_path = os.path.join(out_dir, f"{suite}_report.txt")
    with open(text_path, "w", encoding="utf-8") as f:
        f.write("\n\n".join("\n".join(report.to_lines()) for report in reports) + "\n")
    paths = [text_path]
    for report in reports:
        path = os.path.join(out_dir, f"{suite}_{report.lemma}_samples.csv")
        report.samples.to_csv(path, index=False, float_format="%.17g")
        paths.append(path)
    return paths
