#!/usr/bin/env python3
"""
Series plot implementation for the rb-lab application.
Subclass of Figure drawing diagnostic columns against time on a log axis.
"""

import math
from typing import List, Sequence

import numpy as np
import plotly.graph_objects as go

from src.figure import Figure
from src.trajectory import Trajectory

DEFAULT_COLUMNS = ("u_L2", "theta_L2", "theta_Linf", "G_L2", "grad_u_Linf", "omega_B0ginv_3inf", "u_Hs", "theta_Hs")


class SeriesPlot(Figure):
    """Time series of selected DiagnosticRecord columns."""

    def __init__(
        self,
        title: str = "Diagnostics",
        width: int = 1000,
        height: int = 700,
        vectors: list = None,
        names: list = None,
        times: Sequence[float] = None,
        log_y: bool = True,
    ):
        """
        Args:
            title (str): Plot title
            width (int): Width in pixels
            height (int): Height in pixels
            vectors (list): One series per column
            names (list): Column names
            times (Sequence[float]): Shared time axis
            log_y (bool): Logarithmic value axis
        """
        super().__init__(title, width, height, vectors, names)
        self.times = list(times) if times is not None else []
        self.log_y = log_y

    @classmethod
    def from_trajectory(cls, traj: Trajectory, columns: Sequence[str] = DEFAULT_COLUMNS, **kwargs) -> "SeriesPlot":
        """
        Build a plot from a trajectory's records.

        Args:
            traj (Trajectory): Record stream
            columns (Sequence[str]): Columns to draw

        Returns:
            SeriesPlot: Figure not yet created
        """
        vectors = [traj.series(name).tolist() for name in columns]
        return cls(vectors=vectors, names=list(columns), times=traj.times().tolist(), **kwargs)

    def create_figure(self, categories: List = None) -> None:
        """
        Create the figure.

        Args:
            categories (List): Optional subset of names to draw
        """
        fig = go.Figure()
        for trace in self.get_traces(categories):
            fig.add_trace(trace)
        self.set_layout(fig)
        self.fig = fig

    def set_layout(self, fig, **kwargs) -> None:
        fig.update_layout(
            title=self.title,
            width=self.width,
            height=self.height,
            template=self.theme,
            font=dict(family=self.font_family, size=self.font_size),
            xaxis_title="t",
            yaxis_type="log" if self.log_y else "linear",
            showlegend=True,
            **kwargs,
        )

    def get_traces(self, categories: List = None) -> List[go.Scatter]:
        """
        Get one line trace per series.

        Non-positive values are dropped on a log axis.

        Returns:
            List[go.Scatter]: Traces in name order
        """
        traces = []
        for index, (name, vector) in enumerate(zip(self.names, self.vectors)):
            if categories and name not in categories:
                continue
            values = np.asarray(vector, dtype=float)
            if self.log_y:
                values = np.where(values > 0, values, math.nan)
            traces.append(
                go.Scatter(
                    x=self.times,
                    y=values.tolist(),
                    mode="lines",
                    name=name,
                    line=dict(color=self.color_palette[index % len(self.color_palette)]),
                )
            )
        return traces
