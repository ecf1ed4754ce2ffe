#!/usr/bin/env python3
"""
DiagnosticRecord object for the rb-lab application.
"""

import math
from dataclasses import asdict, dataclass, fields
from typing import Dict, List

NAN = float("nan")

RESIDUAL_COLUMNS = ("energy_balance_residual", "g_equation_residual")


@dataclass
class DiagnosticRecord:
    """
    One time sample of every tracked norm, balance and residual.

    Field order is the CSV column order. The two residual columns need neighbouring
    samples and stay NaN until the record stream has at least three entries.
    """

    t: float
    u_L2: float
    theta_L2: float
    theta_L3: float
    theta_Linf: float
    L_half_u_L2: float
    G_L2: float
    G_L3: float
    grad_u_Linf: float
    grad_theta_Linf: float
    omega_B0ginv_3inf: float
    G_B23_31: float
    u_Hs: float
    theta_Hs: float
    theta_B0g_p1: float
    energy_balance_residual: float = NAN
    g_equation_residual: float = NAN
    theta_mean: float = NAN
    L_half_G_L2: float = NAN
    omega_B0inf1: float = NAN
    u_besov_gain: float = NAN
    u2_theta_L2: float = NAN
    u_Linf: float = NAN
    u_L3: float = NAN

    @classmethod
    def columns(cls) -> List[str]:
        """
        Get the column names in CSV order.

        Returns:
            list: Column names
        """
        return [f.name for f in fields(cls)]

    @classmethod
    def norm_columns(cls) -> List[str]:
        return [name for name in cls.columns() if name not in RESIDUAL_COLUMNS]

    @classmethod
    def from_data(cls, data: Dict[str, float]) -> "DiagnosticRecord":
        """
        Build a record from a row mapping, ignoring unknown keys.

        Args:
            data (dict): Column -> value

        Returns:
            DiagnosticRecord: The record
        """
        known = set(cls.columns())
        return cls(**{key: float(value) for key, value in data.items() if key in known})

    def get_vector(self) -> List[float]:
        """
        Get the record as a list of floats in column order.

        Returns:
            list: Column values
        """
        return [getattr(self, name) for name in self.columns()]

    def get_data(self) -> Dict[str, float]:
        return asdict(self)

    def energy(self) -> float:
        """Kinetic plus thermal energy 1/2 (||u||^2 + ||theta||^2)."""
        return 0.5 * (self.u_L2**2 + self.theta_L2**2)

    def non_finite_norms(self) -> List[str]:
        """Names of norm columns holding NaN or infinity."""
        return [name for name in self.norm_columns() if not math.isfinite(getattr(self, name))]
