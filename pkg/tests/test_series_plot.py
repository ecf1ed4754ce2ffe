"""
Tests for the SeriesPlot class.
"""
import math
import os
import sys

import pytest

# Add the src directory to the path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.record import DiagnosticRecord
from src.series_plot import SeriesPlot
from src.trajectory import Trajectory


def make_trajectory():
    trajectory = Trajectory(store_fields=False)
    for i in range(3):
        values = {name: float(i) for name in DiagnosticRecord.columns()}
        values["t"] = 0.5 * i
        trajectory.append(DiagnosticRecord(**values))
    return trajectory


class TestSeriesPlot:
    """Test cases for SeriesPlot."""

    def setup_method(self):
        """Set up test fixtures."""
        self.plot = SeriesPlot.from_trajectory(make_trajectory(), columns=("u_L2", "theta_L2"), title="test")

    def test_from_trajectory(self):
        """Test that series and times are taken from the records."""
        assert self.plot.names == ["u_L2", "theta_L2"]
        assert self.plot.times == [0.0, 0.5, 1.0]
        assert self.plot.vectors[0] == [0.0, 1.0, 2.0]

    def test_traces_drop_non_positive_on_log_axis(self):
        """Test that zero values become gaps on a log axis."""
        traces = self.plot.get_traces()
        assert [trace.name for trace in traces] == ["u_L2", "theta_L2"]
        assert math.isnan(traces[0].y[0])
        assert list(traces[0].y[1:]) == [1.0, 2.0]

    def test_linear_axis_keeps_values(self):
        """Test that log_y=False keeps every value."""
        plot = SeriesPlot(vectors=[[0.0, -1.0]], names=["x"], times=[0.0, 1.0], log_y=False)
        assert list(plot.get_traces()[0].y) == [0.0, -1.0]

    def test_category_filter(self):
        """Test drawing a subset of columns."""
        assert [trace.name for trace in self.plot.get_traces(["theta_L2"])] == ["theta_L2"]

    def test_create_and_save(self, tmp_path):
        """Test figure creation, layout and HTML export."""
        self.plot.create_figure()
        assert self.plot.fig.layout.yaxis.type == "log"
        assert self.plot.fig.layout.title.text == "test"
        path = self.plot.save_html(str(tmp_path / "plots" / "series.html"))
        assert os.path.exists(path)

    def test_save_before_create(self, tmp_path):
        """Test that saving an uncreated figure raises ValueError."""
        with pytest.raises(ValueError):
            self.plot.save_html(str(tmp_path / "series.html"))

    def test_str(self):
        """Test string representations."""
        assert "test" in str(self.plot)
        assert "traces=2" in repr(self.plot)
