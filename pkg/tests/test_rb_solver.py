"""
Tests for the Rayleigh-Benard integrator.
"""
import math
import os
import sys

import numpy as np
import pytest

# Add the src directory to the path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.checkpoint import CheckpointStore
from src.config import ICSpec, OutputConfig, PhysicsHooks, SolverConfig, SymbolConfig
from src.errors import BlowUpError, ConfigError
from src.rb_solver import RBSolver, SolverState, cfl_dt, run
from src.spectral_core import (
    Grid2D,
    RealField2D,
    SpectralField2D,
    biot_savart,
    forward,
    gradient,
    inner,
    inverse,
    product,
    random_band_field,
)

DISSIPATION_ONLY = PhysicsHooks(advection=False, buoyancy=False, convection=False, dissipation=True)
NOTHING = PhysicsHooks(advection=False, buoyancy=False, convection=False, dissipation=False)


class TestInitialState:
    """Test cases for initial conditions."""

    def test_taylor_green(self):
        """Test omega = A sin x1 sin x2 and theta = B cos x1."""
        solver = RBSolver(SolverConfig(n=32, ic=ICSpec(amplitude=2.0, theta_amplitude=0.5)))
        state = solver.initial_state()
        x1, x2 = solver.grid.coordinates
        assert state.t == 0.0
        assert state.omega_hat.mean == 0.0
        assert np.allclose(inverse(state.omega_hat).values, 2.0 * np.sin(x1) * np.sin(x2), atol=1e-13)
        assert np.allclose(inverse(state.theta_hat).values, 0.5 * np.cos(x1), atol=1e-13)
        assert state.is_healthy()

    def test_random_band_is_seeded(self):
        """Test that the same seed reproduces the same random state."""
        config = SolverConfig(n=32, ic=ICSpec(kind="random_band", k_hi=6), seed=5)
        a = RBSolver(config).initial_state()
        b = RBSolver(config).initial_state()
        c = RBSolver(config.with_overrides(seed=6)).initial_state()
        assert np.array_equal(a.omega_hat.coeffs, b.omega_hat.coeffs)
        assert np.array_equal(a.theta_hat.coeffs, b.theta_hat.coeffs)
        assert not np.array_equal(a.omega_hat.coeffs, c.omega_hat.coeffs)


class TestStepping:
    """Test cases for the integrating-factor RK4 step."""

    def test_linear_decay_is_exact(self):
        """Test that pure dissipation decays every mode by exp(-t |k|/g(|k|))."""
        config = SolverConfig(n=32, dt=0.1, t_end=1.0, physics=DISSIPATION_ONLY)
        solver = RBSolver(config)
        start = solver.initial_state()
        final = solver.run(state=start).final_state
        expected = start.omega_hat.coeffs * np.exp(-final.t * solver.rate)
        scale = np.max(np.abs(start.omega_hat.coeffs))
        assert final.t == pytest.approx(1.0)
        assert np.max(np.abs(final.omega_hat.coeffs - expected)) <= 1e-12 * scale
        assert np.array_equal(final.theta_hat.coeffs, start.theta_hat.coeffs)

    def test_all_terms_off(self):
        """Test that switching every term off leaves the state unchanged."""
        solver = RBSolver(SolverConfig(n=16, dt=0.05, t_end=0.2, physics=NOTHING))
        start = solver.initial_state()
        final = solver.run(state=start).final_state
        assert np.array_equal(final.omega_hat.coeffs, start.omega_hat.coeffs)
        assert np.array_equal(final.theta_hat.coeffs, start.theta_hat.coeffs)

    def test_buoyancy_drives_vorticity(self):
        """Test d_t omega = d1 theta with a frozen temperature: omega = -t sin x1."""
        hooks = PhysicsHooks(advection=False, buoyancy=True, convection=False, dissipation=False)
        config = SolverConfig(n=16, dt=0.1, t_end=0.5, ic=ICSpec(amplitude=0.0), physics=hooks)
        solver = RBSolver(config)
        final = solver.run().final_state
        x1, _ = solver.grid.coordinates
        assert np.allclose(inverse(final.omega_hat).values, -0.5 * np.sin(x1), atol=1e-12)

    def test_blow_up_reports_last_good_state(self):
        """Test that a non-finite state raises BlowUpError carrying the input state."""
        grid = Grid2D(16)
        coeffs = np.zeros((16, 16), dtype=complex)
        coeffs[grid.mode_index(1, 0)] = np.inf
        coeffs[grid.mode_index(-1, 0)] = np.inf
        state = SolverState(SpectralField2D(coeffs, grid), SpectralField2D.zeros(grid), 0.3)
        solver = RBSolver(SolverConfig(n=16, dt=0.1))
        with pytest.raises(BlowUpError) as info:
            solver.step(state, 0.1)
        assert info.value.last_good_state is state
        assert info.value.t == pytest.approx(0.3)


class TestTimeStep:
    """Test cases for time step selection."""

    def test_cfl_dt(self):
        """Test c dx / max|u| for Taylor-Green (max|u| = 1/2) and the dt_max cap."""
        solver = RBSolver(SolverConfig(n=32))
        state = solver.initial_state()
        assert cfl_dt(state, 0.5, 10.0) == pytest.approx(2.0 * math.pi / 32)
        assert cfl_dt(state, 0.5, 0.01) == 0.01

    def test_fixed_dt_lands_on_t_end(self):
        """Test that a fixed dt is shrunk to an integer number of steps."""
        solver = RBSolver(SolverConfig(n=16, dt=0.03, t_end=0.1))
        assert solver.resolve_dt(solver.initial_state()) == pytest.approx(0.025)

    def test_auto_dt_is_frozen(self):
        """Test that "auto" resolves once and respects dt_max."""
        solver = RBSolver(SolverConfig(n=16, dt="auto", dt_max=0.05, t_end=0.2))
        result = solver.run()
        assert result.dt <= 0.05
        assert result.steps * result.dt == pytest.approx(0.2)


class TestRun:
    """Test cases for RBSolver.run."""

    def test_observer_cadence(self):
        """Test observers see step 0 and every record_every steps."""
        config = SolverConfig(n=16, dt=0.1, t_end=1.0, output=OutputConfig(record_every=2))
        seen = []
        result = run(config, lambda state, step: seen.append((step, state.t)))
        assert [step for step, _ in seen] == [0, 2, 4, 6, 8, 10]
        assert seen[-1][1] == pytest.approx(1.0)
        assert result.steps == 10

    def test_checkpoint_restart(self, tmp_path):
        """Test that a checkpoint restarts the run at its stored time."""
        store = CheckpointStore(str(tmp_path / "checkpoints"))
        config = SolverConfig(n=16, dt=0.1, t_end=0.5, output=OutputConfig(checkpoint_every=5))
        first = RBSolver(config).run(checkpoints=store).final_state
        assert store.has(5)

        restart = config.with_overrides(t_end=0.7, ic=ICSpec(kind="file", path=store.latest()))
        solver = RBSolver(restart)
        state = solver.initial_state()
        assert state.t == pytest.approx(0.5)
        assert np.array_equal(state.omega_hat.coeffs, first.omega_hat.coeffs)
        assert solver.run().final_state.t == pytest.approx(0.7)

    def test_restart_from_wrong_grid(self, tmp_path):
        """Test that a checkpoint from another grid raises ConfigError."""
        store = CheckpointStore(str(tmp_path / "checkpoints"))
        RBSolver(SolverConfig(n=16, dt=0.1, t_end=0.1, output=OutputConfig(checkpoint_every=1))).run(checkpoints=store)
        solver = RBSolver(SolverConfig(n=32, ic=ICSpec(kind="file", path=store.latest())))
        with pytest.raises(ConfigError):
            solver.initial_state()

    def test_restart_from_wrong_box(self, tmp_path):
        """Test that a checkpoint from another box length raises ConfigError."""
        store = CheckpointStore(str(tmp_path / "checkpoints"))
        RBSolver(SolverConfig(n=16, dt=0.1, t_end=0.1, output=OutputConfig(checkpoint_every=1))).run(checkpoints=store)
        solver = RBSolver(SolverConfig(n=16, box_length=4.0 * np.pi, ic=ICSpec(kind="file", path=store.latest())))
        with pytest.raises(ConfigError):
            solver.initial_state()


class TestPressure:
    """Test cases for pressure recovery."""

    def test_hydrostatic_balance(self):
        """Test that a fluid at rest with theta = cos x2 has p = sin x2."""
        grid = Grid2D(16)
        _, x2 = grid.coordinates
        state = SolverState(SpectralField2D.zeros(grid), forward(RealField2D(np.cos(x2), grid)))
        solver = RBSolver(SolverConfig(n=16))
        pressure = solver.recover_pressure(state)
        assert np.allclose(inverse(pressure).values, np.sin(x2), atol=1e-13)

    def test_momentum_residual_on_random_state(self):
        """Test that u_t = -P(u.grad u) - grad p + theta e2 matches the vorticity tendency."""
        grid = Grid2D(32)
        rng = np.random.default_rng(5)
        state = SolverState(random_band_field(grid, 1, 10, 1.0, rng), random_band_field(grid, 1, 10, 1.0, rng))
        solver = RBSolver(SolverConfig(n=32))
        d_omega, _ = solver.nonlinear_rhs(state)
        u_t = biot_savart(d_omega)

        u = state.velocity()
        p = solver.recover_pressure(state).coeffs

        def advect(f):
            grad = gradient(f)
            return product(u.c1, grad.c1).coeffs + product(u.c2, grad.c2).coeffs

        r1 = -advect(u.c1) - 1j * grid.k1_odd * p
        r2 = -advect(u.c2) - 1j * grid.k2_odd * p + state.theta_hat.coeffs
        scale = max(np.max(np.abs(r1)), np.max(np.abs(r2)))
        assert np.max(np.abs(u_t.c1.coeffs - r1)) <= 1e-12 * scale
        assert np.max(np.abs(u_t.c2.coeffs - r2)) <= 1e-12 * scale
        divergence = 1j * grid.k1_odd * r1 + 1j * grid.k2_odd * r2
        assert np.max(np.abs(divergence)) <= 1e-12 * scale


class TestNonlinearTerm:
    """Test cases for the transport tendencies."""

    def test_advection_is_skew_symmetric(self):
        """Test int (u.grad f) f = 0 for both transported fields."""
        grid = Grid2D(32)
        rng = np.random.default_rng(8)
        state = SolverState(random_band_field(grid, 1, 10, 1.0, rng), random_band_field(grid, 1, 10, 1.0, rng))
        hooks = PhysicsHooks(buoyancy=False, convection=False)
        d_omega, d_theta = RBSolver(SolverConfig(n=32, physics=hooks)).nonlinear_rhs(state)
        for tendency, field in ((d_omega, state.omega_hat), (d_theta, state.theta_hat)):
            scale = math.sqrt(inner(tendency, tendency) * inner(field, field))
            assert scale > 0
            assert abs(inner(tendency, field)) <= 1e-10 * scale


@pytest.mark.slow
class TestConvergence:
    """Acceptance-scale convergence checks."""

    def test_rk4_richardson_ratio(self):
        """Test fourth-order convergence on Taylor-Green to t = 0.5."""
        base = SolverConfig(n=32, t_end=0.5, symbol=SymbolConfig(family="log", mu1=1.0))
        finals = []
        for dt in (0.05, 0.025, 0.0125):
            finals.append(RBSolver(base.with_overrides(dt=dt)).run().final_state)
        e1 = np.max(np.abs(finals[0].omega_hat.coeffs - finals[1].omega_hat.coeffs))
        e2 = np.max(np.abs(finals[1].omega_hat.coeffs - finals[2].omega_hat.coeffs))
        assert 12.0 <= e1 / e2 <= 20.0
