#!/usr/bin/env python3
"""
Trajectory object for the rb-lab application.
An ordered collection of DiagnosticRecords, optionally with the recorded states.
"""

import logging
import os
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from src.record import DiagnosticRecord

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


class Trajectory:
    """Record stream of one run."""

    def __init__(self, metadata: Optional[Dict[str, Any]] = None, store_fields: bool = True):
        """
        Args:
            metadata (dict): Run description (config snapshot, symbol, dt)
            store_fields (bool): Keep the recorded solver states alongside the records
        """
        self.metadata = dict(metadata or {})
        self.store_fields = store_fields
        self.records: List[DiagnosticRecord] = []
        self.states: List[Any] = []

    @classmethod
    def from_csv(cls, path: str) -> "Trajectory":
        """
        Create a Trajectory from a series CSV written by to_csv.

        Args:
            path (str): CSV path

        Returns:
            Trajectory: Records only, no states
        """
        instance = cls(metadata={"source": path}, store_fields=False)
        frame = pd.read_csv(path, float_precision="round_trip")
        for row in frame.to_dict(orient="records"):
            instance.records.append(DiagnosticRecord.from_data(row))
        return instance

    def append(self, record: DiagnosticRecord, state: Any = None) -> None:
        self.records.append(record)
        if self.store_fields and state is not None:
            self.states.append(state)

    def __len__(self) -> int:
        return len(self.records)

    def get_records(self) -> List[DiagnosticRecord]:
        return self.records

    def get_states(self) -> List[Any]:
        return self.states

    def times(self) -> np.ndarray:
        return np.array([record.t for record in self.records])

    def series(self, column: str) -> np.ndarray:
        """
        Get one column as an array.

        Args:
            column (str): DiagnosticRecord field name

        Returns:
            np.ndarray: Values in record order
        """
        return np.array([getattr(record, column) for record in self.records], dtype=float)

    def set_series(self, column: str, values) -> None:
        if len(values) != len(self.records):
            raise ValueError(f"column {column} needs {len(self.records)} values, got {len(values)}")
        for record, value in zip(self.records, values):
            setattr(record, column, float(value))

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame([record.get_vector() for record in self.records], columns=DiagnosticRecord.columns())

    def to_csv(self, path: str) -> str:
        """
        Write the records with one header row and 17 significant digits.

        Args:
            path (str): Destination

        Returns:
            str: The path written
        """
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        self.to_dataframe().to_csv(path, index=False, float_format=FLOAT_FORMAT)
        logger.debug("wrote %d records to %s", len(self), path)
        return path

    def final(self) -> Optional[DiagnosticRecord]:
        return self.records[-1] if self.records else None
