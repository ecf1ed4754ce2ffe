#!/usr/bin/env python3
"""
Checkpoint module for the rb-lab application.
Persists spectral states between sessions as .npz files with a JSON header.
"""

import json
import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from src.errors import ConfigError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass(frozen=True)
class Checkpoint:
    """Spectral coefficients and header of one stored state."""

    omega_hat: np.ndarray
    theta_hat: np.ndarray
    n: int
    box_length: float
    t: float
    symbol: Dict[str, Any]

    def header(self) -> Dict[str, Any]:
        return {
            "format_version": FORMAT_VERSION,
            "n": self.n,
            "box_length": self.box_length,
            "t": self.t,
            "symbol": self.symbol,
        }


def save_checkpoint(path: str, checkpoint: Checkpoint) -> str:
    """
    Write a checkpoint atomically.

    Args:
        path (str): Target .npz path
        checkpoint (Checkpoint): State to store

    Returns:
        str: The path written
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    tmp = f"{path}.tmp.npz"
    np.savez(
        tmp,
        omega_hat=checkpoint.omega_hat,
        theta_hat=checkpoint.theta_hat,
        header=np.array(json.dumps(checkpoint.header(), sort_keys=True)),
    )
    os.replace(tmp, path)
    logger.debug("checkpoint t=%.6g written to %s", checkpoint.t, path)
    return path


def load_checkpoint(path: str, expected_n: Optional[int] = None, expected_box_length: Optional[float] = None) -> Checkpoint:
    """
    Read a checkpoint and check its header.

    Args:
        path (str): .npz file
        expected_n (int): Grid size the caller needs, if any
        expected_box_length (float): Box period the caller needs, if any

    Returns:
        Checkpoint: The stored state

    Raises:
        ConfigError: If the file is missing, of another format version, another grid or another box
    """
    if not os.path.exists(path):
        raise ConfigError(f"checkpoint not found: {path}")
    try:
        with np.load(path, allow_pickle=False) as data:
            header = json.loads(str(data["header"]))
            omega_hat = np.array(data["omega_hat"])
            theta_hat = np.array(data["theta_hat"])
    except (OSError, KeyError, ValueError) as e:
        raise ConfigError(f"unreadable checkpoint {path}: {e}") from e

    if header.get("format_version") != FORMAT_VERSION:
        raise ConfigError(f"checkpoint {path} has format version {header.get('format_version')}, expected {FORMAT_VERSION}")
    n = int(header["n"])
    if omega_hat.shape != (n, n) or theta_hat.shape != (n, n):
        raise ConfigError(f"checkpoint {path} arrays do not match header n={n}")
    if expected_n is not None and n != expected_n:
        raise ConfigError(f"checkpoint {path} has n={n}, config expects n={expected_n}")
    box_length = float(header["box_length"])
    if expected_box_length is not None and not np.isclose(box_length, expected_box_length, rtol=1e-12, atol=0.0):
        raise ConfigError(f"checkpoint {path} has box_length={box_length}, config expects {expected_box_length}")
    return Checkpoint(
        omega_hat=omega_hat,
        theta_hat=theta_hat,
        n=n,
        box_length=box_length,
        t=float(header["t"]),
        symbol=header.get("symbol", {}),
    )


class CheckpointStore:
    """Directory of numbered checkpoints written during a run."""

    def __init__(self, directory: str):
        """
        Args:
            directory (str): Directory holding the checkpoint files
        """
        self.directory = directory

    def path_for(self, step: int) -> str:
        return os.path.join(self.directory, f"checkpoint_{step:08d}.npz")

    def save(self, step: int, checkpoint: Checkpoint) -> str:
        return save_checkpoint(self.path_for(step), checkpoint)

    def list(self) -> List[str]:
        """Stored checkpoint paths in step order."""
        if not os.path.isdir(self.directory):
            return []
        names = sorted(f for f in os.listdir(self.directory) if f.startswith("checkpoint_") and f.endswith(".npz"))
        return [os.path.join(self.directory, name) for name in names]

    def latest(self) -> Optional[str]:
        paths = self.list()
        return paths[-1] if paths else None

    def has(self, step: int) -> bool:
        return os.path.exists(self.path_for(step))
