#!/usr/bin/env python3
"""
Diagnostics for the rb-lab application.
Per-record norms, the combined quantity G = omega - R_g theta, residuals of the
G-equation and of the energy balance, a-priori bound monitors along a trajectory,
twin-run stability and the transport Besov bound.
"""

import logging
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.config import PhysicsHooks, SolverConfig
from src.errors import BlowUpError, WindowError
from src.littlewood_paley import BesovNormSpec, DyadicPartition, besov_norm, build_partition
from src.multiplier_ops import SymbolG, op_L, op_L_half, op_Rg
from src.rb_solver import RBSolver, RunResult, SolverState
from src.record import DiagnosticRecord
from src.spectral_core import (
    RealField2D,
    SpectralField2D,
    biot_savart,
    gradient,
    gradient_magnitude_max,
    inner,
    inverse,
    lp_norm,
    sobolev_norm,
    to_physical,
)
from src.trajectory import Trajectory

logger = logging.getLogger(__name__)

SPACING_TOL = 1e-9
GRONWALL_EPS = 1e-9


def _l2(coeffs: np.ndarray, area: float) -> float:
    return float(math.sqrt(area * np.sum(np.abs(coeffs) ** 2)))


def _cumulative(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Cumulative trapezoid integral starting at 0."""
    if len(t) < 2:
        return np.zeros(len(t))
    return np.concatenate([[0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))])


def combined_G(state: SolverState, g: SymbolG) -> SpectralField2D:
    """G = omega - R_g theta."""
    return state.omega_hat - op_Rg(g).apply(state.theta_hat)


@dataclass
class RecordContext:
    """Everything compute_record needs besides the state."""

    g: SymbolG
    partition: DyadicPartition
    sobolev_s: float = 2.0
    transport_p: float = math.inf
    hooks: PhysicsHooks = field(default_factory=PhysicsHooks)
    dealiased: bool = True

    @classmethod
    def from_solver(cls, solver: RBSolver) -> "RecordContext":
        config = solver.config
        return cls(
            g=solver.g,
            partition=build_partition(solver.grid),
            sobolev_s=config.output.sobolev_s,
            transport_p=config.output.transport_p,
            hooks=config.physics,
            dealiased=config.dealias,
        )


def compute_record(state: SolverState, ctx: RecordContext) -> DiagnosticRecord:
    """
    Evaluate every tracked quantity on one state.

    Args:
        state (SolverState): Recorded state
        ctx (RecordContext): Symbol, partition and norm parameters

    Returns:
        DiagnosticRecord: Residual columns are left NaN
    """
    grid = state.grid
    area = grid.area
    g = ctx.g
    part = ctx.partition
    u = biot_savart(state.omega_hat)
    u_phys = to_physical(u)
    speed = RealField2D(np.hypot(u_phys.c1.values, u_phys.c2.values), grid)
    theta = inverse(state.theta_hat, validate=False)
    G = combined_G(state, g)
    G_phys = inverse(G, validate=False)
    m_half = op_L_half(g).multiplier(grid) ** 2

    grad_theta = to_physical(gradient(state.theta_hat))
    s = ctx.sobolev_s
    gain = BesovNormSpec(s + 0.5, 2, 2, weight=-0.5)

    return DiagnosticRecord(
        t=state.t,
        u_L2=math.hypot(_l2(u.c1.coeffs, area), _l2(u.c2.coeffs, area)),
        theta_L2=_l2(state.theta_hat.coeffs, area),
        theta_L3=lp_norm(theta, 3),
        theta_Linf=lp_norm(theta, math.inf),
        L_half_u_L2=float(math.sqrt(area * np.sum(m_half * (np.abs(u.c1.coeffs) ** 2 + np.abs(u.c2.coeffs) ** 2)))),
        G_L2=_l2(G.coeffs, area),
        G_L3=lp_norm(G_phys, 3),
        grad_u_Linf=gradient_magnitude_max(u),
        grad_theta_Linf=float(np.max(np.hypot(grad_theta.c1.values, grad_theta.c2.values))),
        omega_B0ginv_3inf=besov_norm(state.omega_hat, BesovNormSpec(0.0, 3, math.inf, weight=-1.0), g, part),
        G_B23_31=besov_norm(G, BesovNormSpec(2.0 / 3.0, 3, 1), g, part),
        u_Hs=math.hypot(sobolev_norm(u.c1, s), sobolev_norm(u.c2, s)),
        theta_Hs=sobolev_norm(state.theta_hat, s),
        theta_B0g_p1=besov_norm(state.theta_hat, BesovNormSpec(0.0, ctx.transport_p, 1, weight=1.0), g, part),
        theta_mean=state.theta_hat.mean,
        L_half_G_L2=float(math.sqrt(area * np.sum(m_half * np.abs(G.coeffs) ** 2))),
        omega_B0inf1=besov_norm(state.omega_hat, BesovNormSpec(0.0, math.inf, 1), g, part),
        u_besov_gain=math.hypot(besov_norm(u.c1, gain, g, part), besov_norm(u.c2, gain, g, part)),
        u2_theta_L2=inner(u.c2, state.theta_hat),
        u_Linf=lp_norm(speed, math.inf),
        u_L3=lp_norm(speed, 3),
    )


def _spacing(times: Sequence[float]) -> float:
    steps = np.diff(np.asarray(times, dtype=float))
    if steps.size == 0 or np.any(steps <= 0):
        raise WindowError("diagnostic window needs strictly increasing times")
    h = float(steps[0])
    if np.max(np.abs(steps - h)) > SPACING_TOL * max(h, 1.0):
        raise WindowError(f"diagnostic window is not uniformly spaced (steps {steps.min():.6g}..{steps.max():.6g})")
    return h


def _transport(u_phys, f: SpectralField2D, dealiased: bool) -> np.ndarray:
    grid = f.grid
    grad = to_physical(gradient(f))
    out = np.fft.fft2(u_phys.c1.values * grad.c1.values + u_phys.c2.values * grad.c2.values) / (grid.n * grid.n)
    if dealiased:
        out = np.where(grid.dealias_mask, out, 0.0)
    out[0, 0] = 0.0
    return out


def g_equation_terms(state: SolverState, g: SymbolG, hooks: PhysicsHooks, dealiased: bool = True) -> np.ndarray:
    """
    Right-hand side pieces of the G-equation evaluated on one state.

    Returns a*u.grad(G) + d*L G - a*[R_g, u.grad]theta - (b - d)*d1 theta + c*R_g u2, where
    a, b, c, d switch advection, buoyancy, convection and dissipation. With all terms on,
    d_t G plus this quantity vanishes.
    """
    grid = state.grid
    Rg = op_Rg(g)
    u = biot_savart(state.omega_hat)
    u_phys = to_physical(u)
    G = combined_G(state, g)
    total = np.zeros((grid.n, grid.n), dtype=complex)
    if hooks.advection:
        rg_theta = Rg.apply(state.theta_hat)
        commutator = Rg.multiplier(grid) * _transport(u_phys, state.theta_hat, dealiased) - _transport(
            u_phys, rg_theta, dealiased
        )
        total += _transport(u_phys, G, dealiased) - commutator
    if hooks.dissipation:
        total += op_L(g).multiplier(grid) * G.coeffs
    total -= (float(hooks.buoyancy) - float(hooks.dissipation)) * 1j * grid.k1_odd * state.theta_hat.coeffs
    if hooks.convection:
        total += Rg.multiplier(grid) * u.c2.coeffs
    return total


def g_equation_residual(
    states: Sequence[SolverState],
    g: SymbolG,
    hooks: Optional[PhysicsHooks] = None,
    stencil: str = "centered",
    dealiased: bool = True,
) -> float:
    """
    L^2 norm of the G-equation residual on three consecutive, uniformly spaced states.

    d_t G + u.grad(G) + L G = [R_g, u.grad]theta - R_g u2 with
    [R_g, u.grad]theta = R_g(u.grad theta) - u.grad(R_g theta).

    Args:
        states (Sequence[SolverState]): Exactly three states
        g (SymbolG): Dissipation symbol
        hooks (PhysicsHooks): Terms active in the run that produced the states
        stencil (str): centered (middle state), forward (first) or backward (last)
        dealiased (bool): Dealias products as the integrator does

    Returns:
        float: Residual norm, O(h^2) in the state spacing h

    Raises:
        WindowError: On a window that is not three uniformly spaced states
    """
    if len(states) != 3:
        raise WindowError(f"G-equation residual needs three states, got {len(states)}")
    hooks = hooks or PhysicsHooks()
    h = _spacing([s.t for s in states])
    G0, G1, G2 = (combined_G(s, g).coeffs for s in states)
    if stencil == "centered":
        dG, at = (G2 - G0) / (2.0 * h), states[1]
    elif stencil == "forward":
        dG, at = (-3.0 * G0 + 4.0 * G1 - G2) / (2.0 * h), states[0]
    elif stencil == "backward":
        dG, at = (G0 - 4.0 * G1 + 3.0 * G2) / (2.0 * h), states[2]
    else:
        raise ValueError(f"unknown stencil '{stencil}'")
    residual = dG + g_equation_terms(at, g, hooks, dealiased)
    return _l2(residual, at.grid.area)


def _energy_terms(records: Sequence[DiagnosticRecord], hooks: PhysicsHooks) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    t = np.array([r.t for r in records])
    energy = np.array([r.energy() for r in records])
    source = (float(hooks.buoyancy) + float(hooks.convection)) * np.array([r.u2_theta_L2 for r in records])
    dissipation = float(hooks.dissipation) * np.array([r.L_half_u_L2**2 for r in records])
    return t, energy, source - dissipation


def energy_residual_series(records: Sequence[DiagnosticRecord], hooks: Optional[PhysicsHooks] = None) -> np.ndarray:
    """
    Pointwise energy-balance residual dE/dt - (2 int u2 theta - ||L^(1/2) u||^2).

    Centered differences inside, second-order one-sided differences at both ends;
    all NaN with fewer than three records.
    """
    if len(records) < 3:
        return np.full(len(records), np.nan)
    t, energy, rhs = _energy_terms(records, hooks or PhysicsHooks())
    _spacing(t)
    return np.gradient(energy, t, edge_order=2) - rhs


def _as_records(window) -> List[DiagnosticRecord]:
    if isinstance(window, Trajectory):
        return window.get_records()
    if isinstance(window, pd.DataFrame):
        return [DiagnosticRecord.from_data(row) for row in window.to_dict(orient="records")]
    return list(window)


def energy_balance_check(window, method: str = "simpson", hooks: Optional[PhysicsHooks] = None) -> float:
    """
    Largest energy-balance residual over all three-record windows.

    centered: |(E[i+1] - E[i-1]) / 2h - rhs[i]|, O(h^2).
    simpson: |E[i+1] - E[i-1] - h/3 (rhs[i-1] + 4 rhs[i] + rhs[i+1])|, O(h^5) per window.

    Args:
        window: Trajectory, DataFrame or list of DiagnosticRecords
        method (str): centered or simpson
        hooks (PhysicsHooks): Terms active in the run

    Returns:
        float: Maximum absolute residual

    Raises:
        WindowError: With fewer than three or non-uniform records
    """
    records = _as_records(window)
    if len(records) < 3:
        raise WindowError(f"energy balance needs at least three records, got {len(records)}")
    t, energy, rhs = _energy_terms(records, hooks or PhysicsHooks())
    h = _spacing(t)
    if method == "centered":
        residual = (energy[2:] - energy[:-2]) / (2.0 * h) - rhs[1:-1]
    elif method == "simpson":
        residual = energy[2:] - energy[:-2] - h / 3.0 * (rhs[:-2] + 4.0 * rhs[1:-1] + rhs[2:])
    else:
        raise ValueError(f"unknown energy balance method '{method}'")
    return float(np.max(np.abs(residual)))


class DiagnosticsRecorder:
    """Solver observer turning recorded states into a DiagnosticRecord stream."""

    def __init__(self, ctx: RecordContext, trajectory: Trajectory):
        self.ctx = ctx
        self.trajectory = trajectory
        self.window: deque = deque(maxlen=3)

    def __call__(self, state: SolverState, step: int) -> None:
        records = self.trajectory.records
        self.trajectory.append(compute_record(state, self.ctx), state)
        self.window.append(state)
        if len(self.window) == 3:
            self._fill(len(records) - 2, "centered")
            if len(records) == 3:
                self._fill(0, "forward")

    def _fill(self, index: int, stencil: str) -> None:
        try:
            value = g_equation_residual(list(self.window), self.ctx.g, self.ctx.hooks, stencil, self.ctx.dealiased)
        except WindowError as e:
            logger.warning("G-equation residual skipped: %s", e)
            return
        self.trajectory.records[index].g_equation_residual = value

    def finish(self) -> None:
        """Fill the residuals that need the end of the stream."""
        records = self.trajectory.records
        if len(records) < 3:
            return
        self._fill(len(records) - 1, "backward")
        try:
            self.trajectory.set_series("energy_balance_residual", energy_residual_series(records, self.ctx.hooks))
        except WindowError as e:
            logger.warning("energy residual skipped: %s", e)


def record_run(
    config: SolverConfig,
    g: Optional[SymbolG] = None,
    trajectory: Optional[Trajectory] = None,
    checkpoints=None,
) -> Tuple[Trajectory, RunResult]:
    """
    Run a configuration and record diagnostics at the configured cadence.

    Args:
        config (SolverConfig): Run configuration
        g (SymbolG): Symbol override
        trajectory (Trajectory): Destination; keeps the partial stream if the run blows up
        checkpoints (CheckpointStore): Optional checkpoint destination

    Returns:
        Tuple[Trajectory, RunResult]: Records and run statistics

    Raises:
        BlowUpError: After the records received so far have been finalised
    """
    solver = RBSolver(config, g)
    if trajectory is None:
        trajectory = Trajectory(store_fields=config.output.store_fields)
    trajectory.metadata.update({"config": config.to_dict(), "symbol": solver.g.describe()})
    recorder = DiagnosticsRecorder(RecordContext.from_solver(solver), trajectory)
    try:
        result = solver.run(recorder, checkpoints=checkpoints)
    finally:
        recorder.finish()
    trajectory.metadata["dt"] = result.dt
    return trajectory, result


@dataclass
class MonitorViolation:
    check: str
    t: float
    margin: float


@dataclass
class MonitorReport:
    """Outcome of the a-priori bound monitors along a trajectory."""

    constant: float
    constant_fit: float
    violations: List[MonitorViolation]
    accumulated: Dict[str, float]

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_lines(self) -> List[str]:
        lines = [f"gronwall_constant={self.constant:.17g}", f"gronwall_constant_fit={self.constant_fit:.17g}"]
        lines += [f"accumulated_{name}={value:.17g}" for name, value in self.accumulated.items()]
        lines.append(f"violations={len(self.violations)}")
        lines += [f"violation={v.check} t={v.t:.17g} margin={v.margin:.17g}" for v in self.violations]
        return lines


def monitor_propositions(traj: Union[Trajectory, Sequence[DiagnosticRecord]], hooks: Optional[PhysicsHooks] = None) -> MonitorReport:
    """
    Check the a-priori bounds along a record stream.

    (i)   ||u||^2 + ||theta||^2 + 2 int ||L^(1/2) u||^2 <= E0 exp(C t), C = 2(b+c) ||u0|| ||theta0|| / E0
    (ii)  ||theta||_inf <= ||theta_0||_inf + int ||u||_inf
    (ii') ||theta||_3 <= ||theta_0||_3 + int ||u||_3
    (iii) int ||omega||^2_{B^{0,g^-1}_{3,inf}} is finite
    (iv)  every norm column is finite

    Violations are collected with their time and margin; nothing is raised.

    Args:
        traj: Trajectory or list of records
        hooks (PhysicsHooks): Terms active in the run

    Returns:
        MonitorReport: Violations, the constant used and the accumulated integrals
    """
    records = _as_records(traj)
    if not records:
        raise WindowError("monitor needs at least one record")
    hooks = hooks or PhysicsHooks()
    t = np.array([r.t for r in records])

    def column(name):
        return np.array([getattr(r, name) for r in records], dtype=float)

    violations: List[MonitorViolation] = []
    energy = column("u_L2") ** 2 + column("theta_L2") ** 2
    dissipated = _cumulative(t, column("L_half_u_L2") ** 2)
    e0 = energy[0]
    # d/dt of the left side is 2(b+c) int u2 theta <= 2(b+c) ||u|| ||theta||, taken at t=0
    coupling = float(hooks.buoyancy) + float(hooks.convection)
    constant_fit = 2.0 * coupling * records[0].u_L2 * records[0].theta_L2 / e0 if e0 > 0 else 0.0
    constant = constant_fit
    with np.errstate(over="ignore"):
        bound = e0 * np.exp(constant * t) + GRONWALL_EPS * e0
    for ti, lhs, rhs in zip(t, energy + 2.0 * dissipated, bound):
        if lhs > rhs:
            violations.append(MonitorViolation("energy_gronwall", float(ti), float(rhs - lhs)))

    for name, speed, label in (("theta_Linf", "u_Linf", "theta_Linf_transport"), ("theta_L3", "u_L3", "theta_L3_transport")):
        values = column(name)
        bound = values[0] + _cumulative(t, column(speed))
        scale = max(float(np.nanmax(np.abs(values))), float(np.nanmax(bound)), 1e-300)
        for ti, margin in zip(t, bound - values):
            if margin < -1e-6 * scale:
                violations.append(MonitorViolation(label, float(ti), float(margin)))

    accumulated = {
        "L_half_u_L2_sq": float(dissipated[-1]),
        "L_half_G_L2_sq": float(_cumulative(t, column("L_half_G_L2") ** 2)[-1]),
        "omega_B0ginv_3inf_sq": float(_cumulative(t, column("omega_B0ginv_3inf") ** 2)[-1]),
        "G_B23_31": float(_cumulative(t, column("G_B23_31"))[-1]),
        "omega_B0inf1": float(_cumulative(t, column("omega_B0inf1"))[-1]),
        "grad_u_Linf": float(_cumulative(t, column("grad_u_Linf"))[-1]),
        "u_Linf": float(_cumulative(t, column("u_Linf"))[-1]),
        "u_besov_gain_sq": float(_cumulative(t, column("u_besov_gain") ** 2)[-1]),
    }
    if not math.isfinite(accumulated["omega_B0ginv_3inf_sq"]):
        violations.append(MonitorViolation("omega_besov_integral", float(t[-1]), math.inf))

    for record in records:
        bad = record.non_finite_norms()
        if bad:
            violations.append(MonitorViolation(f"non_finite:{','.join(bad)}", record.t, math.nan))

    for v in violations:
        logger.warning("monitor violation %s at t=%.6g (margin %.3e)", v.check, v.t, v.margin)
    return MonitorReport(constant=constant, constant_fit=constant_fit, violations=violations, accumulated=accumulated)


def perturb_mode(state: SolverState, delta0: float, mode: Tuple[int, int] = (2, 1)) -> SolverState:
    """
    Add a cos(k.x) vorticity perturbation whose velocity has L^2 norm delta0.

    Args:
        state (SolverState): Base state
        delta0 (float): Velocity-norm size of the perturbation
        mode (Tuple[int, int]): Integer wavenumber of the perturbation

    Returns:
        SolverState: Perturbed copy
    """
    grid = state.grid
    if max(abs(mode[0]), abs(mode[1])) > grid.band_limit or mode == (0, 0):
        raise ValueError(f"perturbation mode {mode} must be nonzero and inside the dealiased band")
    kmag = grid.k_unit * math.hypot(*mode)
    amplitude = delta0 * kmag * math.sqrt(2.0 / grid.area)
    coeffs = state.omega_hat.coeffs.copy()
    coeffs[grid.mode_index(*mode)] += 0.5 * amplitude
    coeffs[grid.mode_index(-mode[0], -mode[1])] += 0.5 * amplitude
    return replace(state, omega_hat=SpectralField2D(coeffs, grid))


@dataclass
class StabilityReport:
    """Difference of two runs against its Gronwall envelope."""

    delta0: float
    mode: Tuple[int, int]
    constant: float
    constant_fit: float
    times: np.ndarray
    differences: np.ndarray
    envelope: np.ndarray
    violations: int
    identical: bool
    aborted: bool = False

    @property
    def passed(self) -> bool:
        return not self.aborted and self.violations == 0 and (self.delta0 != 0 or self.identical)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.times, "difference": self.differences, "envelope": self.envelope})


def gronwall_envelope(
    times: np.ndarray,
    differences: np.ndarray,
    coefficient: np.ndarray,
    delta0: float,
    calibration: int = 3,
) -> Tuple[float, np.ndarray, int]:
    """
    Fit the constant of delta0^2 exp(C int coefficient) and count the records above it.

    C is the largest log-growth rate log(d_i / delta0^2) / int_0^t_i coefficient over
    records 1..calibration, floored at 0, then frozen for the rest of the series.

    Args:
        times (np.ndarray): Record times
        differences (np.ndarray): Squared L^2 differences
        coefficient (np.ndarray): Integrand 1 + ||grad u||_inf + ||grad theta||_inf
        delta0 (float): Initial difference
        calibration (int): Records used to fit C

    Returns:
        Tuple[float, np.ndarray, int]: Constant, envelope and number of violations
    """
    integral = _cumulative(times, coefficient)
    constant = 0.0
    if delta0 > 0:
        for i in range(1, min(calibration + 1, len(times))):
            if differences[i] > 0 and integral[i] > 0:
                constant = max(constant, math.log(differences[i] / delta0**2) / integral[i])
    with np.errstate(over="ignore"):
        envelope = delta0**2 * np.exp(constant * integral)
    violations = int(np.sum(differences > envelope * (1.0 + GRONWALL_EPS) + 1e-300))
    return constant, envelope, violations


def twin_run_stability(
    config: SolverConfig,
    delta0: float,
    mode: Tuple[int, int] = (2, 1),
    calibration: int = 3,
    g: Optional[SymbolG] = None,
) -> StabilityReport:
    """
    Run the configuration twice, once with a perturbed vorticity mode, and compare.

    The squared difference ||u1 - u2||^2 + ||theta1 - theta2||^2 must stay below
    delta0^2 exp(int C (1 + ||grad u2||_inf + ||grad theta2||_inf)); C is fitted on the
    first `calibration` records as the largest log-growth rate (never negative) and frozen.

    Args:
        config (SolverConfig): Run configuration
        delta0 (float): Initial velocity difference (L^2)
        mode (Tuple[int, int]): Perturbed mode
        calibration (int): Records used to fit C
        g (SymbolG): Symbol override

    Returns:
        StabilityReport: Differences, envelope and verdict; aborted when a run blew up
    """
    solver = RBSolver(config, g)
    base = solver.initial_state()
    dt = solver.resolve_dt(base)
    first: List[SolverState] = []
    second: List[SolverState] = []
    aborted = False
    try:
        solver.run(lambda s, k: first.append(s), state=base, dt=dt)
        solver.run(lambda s, k: second.append(s), state=perturb_mode(base, delta0, mode), dt=dt)
    except BlowUpError as e:
        logger.warning("twin run aborted: %s", e)
        aborted = True

    count = min(len(first), len(second))
    area = solver.grid.area
    times = np.array([s.t for s in second[:count]])
    differences = np.zeros(count)
    coefficient = np.zeros(count)
    identical = True
    for i in range(count):
        a, b = first[i], second[i]
        d_omega = a.omega_hat - b.omega_hat
        d_theta = a.theta_hat.coeffs - b.theta_hat.coeffs
        du = biot_savart(d_omega)
        differences[i] = area * float(
            np.sum(np.abs(du.c1.coeffs) ** 2 + np.abs(du.c2.coeffs) ** 2 + np.abs(d_theta) ** 2)
        )
        identical = identical and np.array_equal(a.omega_hat.coeffs, b.omega_hat.coeffs) and not np.any(d_theta)
        grad_theta = to_physical(gradient(b.theta_hat))
        coefficient[i] = (
            1.0
            + gradient_magnitude_max(b.velocity())
            + float(np.max(np.hypot(grad_theta.c1.values, grad_theta.c2.values)))
        )
    constant, envelope, violations = gronwall_envelope(times, differences, coefficient, delta0, calibration)
    if violations:
        logger.warning("twin run: %d records above the Gronwall envelope", violations)
    return StabilityReport(
        delta0=delta0,
        mode=tuple(mode),
        constant=constant,
        constant_fit=constant,
        times=times,
        differences=differences,
        envelope=envelope,
        violations=violations,
        identical=bool(identical),
        aborted=aborted,
    )


@dataclass
class TransportReport:
    """Both sides of the transport Besov bound along a trajectory."""

    p: float
    times: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    ratios: np.ndarray

    @property
    def worst_ratio(self) -> float:
        return float(np.max(self.ratios)) if self.ratios.size else 0.0

    @property
    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.lhs)) and np.all(np.isfinite(self.rhs)))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.times, "lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratios})


def transport_besov_check(
    traj: Trajectory, g: SymbolG, p: float = math.inf, hooks: Optional[PhysicsHooks] = None
) -> TransportReport:
    """
    ||theta||_{B^{0,g}_{p,1}} against (||theta_0|| + int ||u2||)(1 + int ||grad u||_inf).

    Args:
        traj (Trajectory): Trajectory with stored states
        g (SymbolG): Dissipation symbol (the Besov weight)
        p (float): Integrability index
        hooks (PhysicsHooks): Terms active in the run; the source u2 is dropped without convection

    Returns:
        TransportReport: Both sides and their ratio per record
    """
    states = traj.get_states()
    if not states:
        raise ValueError("transport check needs a trajectory with stored fields")
    hooks = hooks or PhysicsHooks()
    spec = BesovNormSpec(0.0, p, 1, weight=1.0)
    partition = build_partition(states[0].grid)
    times = np.array([s.t for s in states])
    lhs = np.array([besov_norm(s.theta_hat, spec, g, partition) for s in states])
    if hooks.convection:
        source = np.array([besov_norm(s.velocity().c2, spec, g, partition) for s in states])
    else:
        source = np.zeros(len(states))
    grad_u = np.array([gradient_magnitude_max(s.velocity()) for s in states])
    rhs = (lhs[0] + _cumulative(times, source)) * (1.0 + _cumulative(times, grad_u))
    ratios = np.zeros_like(lhs)
    positive = rhs > 0
    ratios[positive] = lhs[positive] / rhs[positive]
    ratios[~positive & (lhs > 0)] = math.inf
    return TransportReport(p=p, times=times, lhs=lhs, rhs=rhs, ratios=ratios)


def compare_transport(reports: Sequence[TransportReport]) -> float:
    """Spread max/min of the worst ratios of runs at different resolutions."""
    worst = [r.worst_ratio for r in reports]
    if min(worst) <= 0:
        return 1.0 if max(worst) <= 0 else math.inf
    return max(worst) / min(worst)


@dataclass
class ContrastReport:
    """Measured and predicted decay rates of isolated vorticity modes."""

    symbol: str
    rows: pd.DataFrame

    @property
    def max_relative_error(self) -> float:
        return float(self.rows["relative_error"].max())


def decay_rate_contrast(
    g: SymbolG,
    modes: Sequence[Tuple[int, int]] = ((1, 0), (2, 0), (4, 0), (8, 0)),
    t_end: float = 1.0,
    n: int = 32,
    dt: float = 0.1,
) -> ContrastReport:
    """
    Pure-dissipation runs of single vorticity modes.

    Each mode decays at |k|/g(|k|); relative to the critical case g = 1 the rate is
    scaled by 1/g(|k|).

    Args:
        g (SymbolG): Symbol under test
        modes (Sequence[Tuple[int, int]]): Integer wavenumbers
        t_end (float): Run length
        n (int): Grid size
        dt (float): Step size

    Returns:
        ContrastReport: One row per mode
    """
    config = SolverConfig(
        n=n,
        dt=dt,
        t_end=t_end,
        physics=PhysicsHooks(advection=False, buoyancy=False, convection=False, dissipation=True),
    )
    solver = RBSolver(config, g)
    grid = solver.grid
    rows = []
    for mode in modes:
        coeffs = np.zeros((grid.n, grid.n), dtype=complex)
        coeffs[grid.mode_index(*mode)] = 0.5
        coeffs[grid.mode_index(-mode[0], -mode[1])] = 0.5
        start = SolverState(SpectralField2D(coeffs, grid), SpectralField2D.zeros(grid), 0.0)
        final = solver.run(state=start).final_state
        kmag = grid.k_unit * math.hypot(*mode)
        measured = -math.log(abs(final.omega_hat.coefficient(*mode)) / 0.5) / final.t
        expected = kmag / float(g(np.array([kmag]))[0])
        rows.append(
            {
                "k1": mode[0],
                "k2": mode[1],
                "k": kmag,
                "measured_rate": measured,
                "expected_rate": expected,
                "relative_error": abs(measured - expected) / expected,
                "ratio_to_critical": measured / kmag,
                "expected_ratio": expected / kmag,
            }
        )
    return ContrastReport(symbol=g.family, rows=pd.DataFrame(rows))
