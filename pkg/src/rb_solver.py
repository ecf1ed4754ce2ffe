#!/usr/bin/env python3
"""
Time integration of the truncated Rayleigh-Benard system in vorticity-temperature form.

    d_t omega + u.grad(omega) + L omega = d1 theta
    d_t theta + u.grad(theta)           = u2
    u = grad_perp Laplacian^-1 omega

The dissipative term is integrated exactly with the factor exp(-t |k|/g(|k|)); the
remaining terms use classical fourth-order Runge-Kutta on the transformed variable.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional, Tuple, Union

import numpy as np

from src.checkpoint import Checkpoint, CheckpointStore, load_checkpoint
from src.config import PhysicsHooks, SolverConfig
from src.errors import BlowUpError, ConfigError
from src.multiplier_ops import SymbolG, op_L
from src.spectral_core import (
    Grid2D,
    RealField2D,
    SpectralField2D,
    VectorField2D,
    biot_savart,
    dealias,
    forward,
    random_band_field,
    to_physical,
)

logger = logging.getLogger(__name__)

VELOCITY_FLOOR = 1e-8
BLOWUP_THRESHOLD = 1e150


@dataclass(frozen=True)
class SolverState:
    """Spectral vorticity, spectral temperature and simulation time."""

    omega_hat: SpectralField2D
    theta_hat: SpectralField2D
    t: float = 0.0

    @property
    def grid(self) -> Grid2D:
        return self.omega_hat.grid

    def is_healthy(self) -> bool:
        """All coefficients finite and below the blow-up threshold."""
        for coeffs in (self.omega_hat.coeffs, self.theta_hat.coeffs):
            if not np.all(np.isfinite(coeffs)) or np.max(np.abs(coeffs)) > BLOWUP_THRESHOLD:
                return False
        return True

    def velocity(self) -> VectorField2D:
        return biot_savart(self.omega_hat)


@dataclass
class RunResult:
    """Outcome of a completed run."""

    final_state: SolverState
    steps: int
    dt: float
    cfl_warnings: int = 0


Observer = Callable[[SolverState, int], None]


def cfl_dt(state: SolverState, c_cfl: float = 0.5, dt_max: float = 0.1) -> float:
    """
    Advective CFL step c_cfl * dx / max(||u||_inf, 1e-8), capped at dt_max.

    Args:
        state (SolverState): Current state
        c_cfl (float): Safety factor in (0, 1]
        dt_max (float): Upper bound on the step

    Returns:
        float: Time step
    """
    u = to_physical(state.velocity())
    speed = float(np.max(np.hypot(u.c1.values, u.c2.values)))
    return min(c_cfl * state.grid.dx / max(speed, VELOCITY_FLOOR), dt_max)


def recover_pressure(state: SolverState, buoyancy: bool = True, dealiased: bool = True) -> SpectralField2D:
    """
    Pressure from the divergence of the momentum equation.

    p_hat = (F(div(u.grad u)) - i k2 theta_hat) / |k|^2 for k != 0, p_hat(0) = 0.

    Args:
        state (SolverState): Current state
        buoyancy (bool): Include the buoyancy force theta e2
        dealiased (bool): Dealias the quadratic term as the integrator does

    Returns:
        SpectralField2D: Pressure coefficients
    """
    grid = state.grid
    u = state.velocity()
    u_phys = to_physical(u)
    a1 = _advection(u_phys, u.c1, dealiased)
    a2 = _advection(u_phys, u.c2, dealiased)
    source = 1j * grid.k1_odd * a1 + 1j * grid.k2_odd * a2
    if buoyancy:
        source = source - 1j * grid.k2_odd * state.theta_hat.coeffs
    inv_ksq = np.zeros_like(grid.ksq)
    np.divide(1.0, grid.ksq, out=inv_ksq, where=grid.ksq > 0)
    return SpectralField2D(source * inv_ksq, grid)


def _advection(u_phys: VectorField2D, f: SpectralField2D, dealiased: bool) -> np.ndarray:
    grid = f.grid
    n2 = grid.n * grid.n
    d1 = np.fft.ifft2(1j * grid.k1_odd * f.coeffs).real * n2
    d2 = np.fft.ifft2(1j * grid.k2_odd * f.coeffs).real * n2
    out = np.fft.fft2(u_phys.c1.values * d1 + u_phys.c2.values * d2) / n2
    if dealiased:
        out = np.where(grid.dealias_mask, out, 0.0)
    return out


class RBSolver:
    """Integrating-factor RK4 integrator for one configuration."""

    def __init__(self, config: SolverConfig, g: Optional[SymbolG] = None):
        """
        Args:
            config (SolverConfig): Run configuration
            g (SymbolG): Dissipation symbol; built from the config when omitted
        """
        self.config = config
        self.grid = config.grid()
        self.g = g if g is not None else config.make_symbol()
        self.hooks: PhysicsHooks = config.physics
        if self.hooks.dissipation:
            self.rate = np.array(op_L(self.g).multiplier(self.grid))
        else:
            self.rate = np.zeros_like(self.grid.kmag)
        self._factors = {}

    def integrating_factors(self, dt: float) -> Tuple[np.ndarray, np.ndarray]:
        """(exp(-m dt/2), exp(-m dt)) with m = |k|/g(|k|), cached per step size."""
        if dt not in self._factors:
            self._factors[dt] = (np.exp(-0.5 * dt * self.rate), np.exp(-dt * self.rate))
        return self._factors[dt]

    def initial_state(self) -> SolverState:
        """
        Build the configured initial condition.

        Returns:
            SolverState: State at the start time
        """
        ic = self.config.ic
        grid = self.grid
        if ic.kind == "taylor_green":
            x1, x2 = grid.coordinates
            kx = grid.k_unit
            omega = forward(RealField2D(ic.amplitude * np.sin(kx * x1) * np.sin(kx * x2), grid))
            theta = forward(RealField2D(ic.theta_amplitude * np.cos(kx * x1), grid))
            t0 = 0.0
        elif ic.kind == "random_band":
            rng = np.random.default_rng(self.config.seed)
            omega = random_band_field(grid, ic.k_lo, ic.k_hi, ic.amplitude, rng)
            theta = random_band_field(grid, ic.k_lo, ic.k_hi, ic.theta_amplitude, rng)
            t0 = 0.0
        else:
            stored = load_checkpoint(ic.path, expected_n=grid.n, expected_box_length=grid.box_length)
            omega = SpectralField2D(stored.omega_hat, grid)
            theta = SpectralField2D(stored.theta_hat, grid)
            scale = max(1.0, float(np.max(np.abs(stored.omega_hat))))
            if abs(stored.omega_hat[0, 0]) > 1e-13 * scale:
                raise ConfigError(f"checkpoint {ic.path} has nonzero mean vorticity")
            t0 = stored.t

        coeffs = omega.coeffs.copy()
        coeffs[0, 0] = 0.0
        omega = SpectralField2D(coeffs, grid)
        if self.config.dealias:
            omega, theta = dealias(omega), dealias(theta)
        return SolverState(omega, theta, t0)

    def nonlinear_rhs(self, state: SolverState) -> Tuple[SpectralField2D, SpectralField2D]:
        """
        Non-dissipative tendencies of (omega_hat, theta_hat).

        d_omega = -P(u.grad omega) + i k1 theta_hat, d_theta = -P(u.grad theta) + u2_hat,
        P the 2/3-rule projection. The mean of each transport term is removed.

        Args:
            state (SolverState): Current (or stage) state

        Returns:
            Tuple[SpectralField2D, SpectralField2D]: (d omega_hat, d theta_hat)

        Raises:
            BlowUpError: If a tendency is not finite
        """
        grid = self.grid
        hooks = self.hooks
        u = state.velocity()
        d_omega = np.zeros((grid.n, grid.n), dtype=complex)
        d_theta = np.zeros((grid.n, grid.n), dtype=complex)
        if hooks.advection:
            u_phys = to_physical(u)
            adv_omega = _advection(u_phys, state.omega_hat, self.config.dealias)
            adv_theta = _advection(u_phys, state.theta_hat, self.config.dealias)
            adv_omega[0, 0] = 0.0
            adv_theta[0, 0] = 0.0
            d_omega -= adv_omega
            d_theta -= adv_theta
        if hooks.buoyancy:
            d_omega += 1j * grid.k1_odd * state.theta_hat.coeffs
        if hooks.convection:
            d_theta += u.c2.coeffs
        if not (np.all(np.isfinite(d_omega)) and np.all(np.isfinite(d_theta))):
            raise BlowUpError(state.t, state, "non-finite nonlinear term")
        return SpectralField2D(d_omega, grid), SpectralField2D(d_theta, grid)

    def step(self, state: SolverState, dt: float) -> SolverState:
        """
        Advance one integrating-factor RK4 step.

        Args:
            state (SolverState): Current state
            dt (float): Step size

        Returns:
            SolverState: State at t + dt

        Raises:
            BlowUpError: With `state` as the last good state
        """
        grid = self.grid
        e_half, e_full = self.integrating_factors(dt)
        w = state.omega_hat.coeffs
        th = state.theta_hat.coeffs

        def stage(omega, theta, t):
            return self.nonlinear_rhs(SolverState(SpectralField2D(omega, grid), SpectralField2D(theta, grid), t))

        try:
            with np.errstate(over="ignore", invalid="ignore"):
                a_w, a_t = stage(w, th, state.t)
                b_w, b_t = stage(e_half * (w + 0.5 * dt * a_w.coeffs), th + 0.5 * dt * a_t.coeffs, state.t + 0.5 * dt)
                c_w, c_t = stage(e_half * w + 0.5 * dt * b_w.coeffs, th + 0.5 * dt * b_t.coeffs, state.t + 0.5 * dt)
                d_w, d_t = stage(e_full * w + dt * e_half * c_w.coeffs, th + dt * c_t.coeffs, state.t + dt)
                new_w = e_full * w + dt / 6.0 * (
                    e_full * a_w.coeffs + 2.0 * e_half * (b_w.coeffs + c_w.coeffs) + d_w.coeffs
                )
                new_t = th + dt / 6.0 * (a_t.coeffs + 2.0 * (b_t.coeffs + c_t.coeffs) + d_t.coeffs)
        except BlowUpError as e:
            raise BlowUpError(e.t, state, "non-finite nonlinear term") from e

        new_state = SolverState(SpectralField2D(new_w, grid), SpectralField2D(new_t, grid), state.t + dt)
        if not new_state.is_healthy():
            raise BlowUpError(state.t + dt, state)
        return new_state

    def cfl_dt(self, state: SolverState, c_cfl: Optional[float] = None) -> float:
        return cfl_dt(state, self.config.c_cfl if c_cfl is None else c_cfl, self.config.dt_max)

    def resolve_dt(self, state: SolverState) -> float:
        """
        Step size used for the whole run. "auto" is evaluated once on the initial
        state and shrunk so that an integer number of steps lands on t_end.
        """
        if self.config.dt == "auto":
            dt = self.cfl_dt(state)
        else:
            dt = float(self.config.dt)
        span = self.config.t_end - state.t
        if span > 0:
            dt = span / math.ceil(span / dt - 1e-9)
        return dt

    def recover_pressure(self, state: SolverState) -> SpectralField2D:
        return recover_pressure(state, self.hooks.buoyancy, self.config.dealias)

    def run(
        self,
        observers: Union[Observer, Iterable[Observer], None] = None,
        state: Optional[SolverState] = None,
        dt: Optional[float] = None,
        checkpoints: Optional[CheckpointStore] = None,
    ) -> RunResult:
        """
        Integrate from the initial state to t_end.

        Observers are called with (state, step) at step 0 and every record_every steps.

        Args:
            observers: Callable or callables receiving recorded states
            state (SolverState): Start state; the configured initial condition when omitted
            dt (float): Fixed step overriding the configured one
            checkpoints (CheckpointStore): Destination of periodic checkpoints

        Returns:
            RunResult: Final state and step statistics

        Raises:
            BlowUpError: If the state stops being finite; observers keep what they received
        """
        if observers is None:
            observers = []
        elif callable(observers):
            observers = [observers]
        state = state if state is not None else self.initial_state()
        dt = dt if dt is not None else self.resolve_dt(state)
        t0 = state.t
        span = self.config.t_end - t0
        n_steps = max(0, math.ceil(span / dt - 1e-9)) if span > 0 else 0
        record_every = self.config.output.record_every
        checkpoint_every = self.config.output.checkpoint_every
        logger.info("run n=%d g=%s dt=%.6g steps=%d", self.grid.n, self.g.family, dt, n_steps)

        for observe in observers:
            observe(state, 0)
        cfl_warnings = 0
        for step in range(1, n_steps + 1):
            state = replace(self.step(state, dt), t=t0 + step * dt)
            if self.config.dt == "auto":
                limit = self.cfl_dt(state)
                if dt > limit * (1 + 1e-12):
                    cfl_warnings += 1
                    if cfl_warnings == 1:
                        logger.warning("frozen dt=%.6g exceeds CFL step %.6g at t=%.6g", dt, limit, state.t)
            if step % record_every == 0:
                for observe in observers:
                    observe(state, step)
            if checkpoints is not None and checkpoint_every and step % checkpoint_every == 0:
                checkpoints.save(step, self.to_checkpoint(state))
            logger.debug("step %d t=%.6g", step, state.t)
        return RunResult(final_state=state, steps=n_steps, dt=dt, cfl_warnings=cfl_warnings)

    def to_checkpoint(self, state: SolverState) -> Checkpoint:
        return Checkpoint(
            omega_hat=state.omega_hat.coeffs,
            theta_hat=state.theta_hat.coeffs,
            n=self.grid.n,
            box_length=self.grid.box_length,
            t=state.t,
            symbol=self.g.describe(),
        )


def run(config: SolverConfig, observers=None, **kwargs) -> RunResult:
    """Integrate a configuration; see RBSolver.run."""
    return RBSolver(config).run(observers, **kwargs)
