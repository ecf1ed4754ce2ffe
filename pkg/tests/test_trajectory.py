"""
Tests for the Trajectory class.
"""
import math
import os
import sys

import numpy as np
import pytest

# Add the src directory to the path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.record import DiagnosticRecord
from src.trajectory import Trajectory


def make_record(t):
    values = {name: t + 1.0 / 3.0 for name in DiagnosticRecord.columns()}
    values["t"] = t
    values["g_equation_residual"] = math.nan
    return DiagnosticRecord(**values)


class TestTrajectory:
    """Test cases for Trajectory."""

    def setup_method(self):
        """Set up test fixtures."""
        self.trajectory = Trajectory(metadata={"name": "test"}, store_fields=True)
        for i in range(4):
            self.trajectory.append(make_record(0.1 * i), state=f"state{i}")

    def test_append_and_series(self):
        """Test record storage and column access."""
        assert len(self.trajectory) == 4
        assert self.trajectory.get_states() == ["state0", "state1", "state2", "state3"]
        assert np.allclose(self.trajectory.times(), [0.0, 0.1, 0.2, 0.3])
        assert np.allclose(self.trajectory.series("u_L2"), self.trajectory.times() + 1.0 / 3.0)
        assert self.trajectory.final().t == pytest.approx(0.3)

    def test_states_not_kept_without_store_fields(self):
        """Test that store_fields=False keeps records only."""
        trajectory = Trajectory(store_fields=False)
        trajectory.append(make_record(0.0), state="state")
        assert trajectory.get_states() == []
        assert len(trajectory) == 1

    def test_set_series(self):
        """Test overwriting a column and the length check."""
        self.trajectory.set_series("energy_balance_residual", [1.0, 2.0, 3.0, 4.0])
        assert list(self.trajectory.series("energy_balance_residual")) == [1.0, 2.0, 3.0, 4.0]
        with pytest.raises(ValueError):
            self.trajectory.set_series("energy_balance_residual", [1.0])

    def test_csv_round_trip(self, tmp_path):
        """Test that the CSV keeps every digit, the column order and NaN residuals."""
        path = self.trajectory.to_csv(str(tmp_path / "out" / "series.csv"))
        with open(path) as f:
            header = f.readline().strip().split(",")
        assert header == DiagnosticRecord.columns()
        loaded = Trajectory.from_csv(path)
        assert len(loaded) == 4
        assert np.array_equal(loaded.series("u_L2"), self.trajectory.series("u_L2"))
        assert np.all(np.isnan(loaded.series("g_equation_residual")))

    def test_dataframe(self):
        """Test the DataFrame view."""
        frame = self.trajectory.to_dataframe()
        assert list(frame.columns) == DiagnosticRecord.columns()
        assert frame.shape == (4, len(DiagnosticRecord.columns()))

    def test_empty_trajectory(self, tmp_path):
        """Test an empty stream writes a header-only CSV."""
        trajectory = Trajectory()
        assert trajectory.final() is None
        path = trajectory.to_csv(str(tmp_path / "empty.csv"))
        with open(path) as f:
            assert f.read().strip().split(",") == DiagnosticRecord.columns()
