#!/usr/bin/env python3
"""
Littlewood-Paley analysis for the rb-lab application.
Dyadic partition of unity on the wavenumber lattice, block operators, Besov norms
and the Bony paraproduct decomposition.
"""

import logging
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np

from src.errors import ConfigError, MeanModeError
from src.spectral_core import Grid2D, SpectralField2D, inverse, lp_norm, product, sobolev_norm

logger = logging.getLogger(__name__)

CHI_INNER = 1.0
CHI_OUTER = 4.0 / 3.0


def _bump(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    positive = x > 0
    out[positive] = np.exp(-1.0 / x[positive])
    return out


def chi(r) -> np.ndarray:
    """
    Smooth radial cutoff: 1 for r <= 1, 0 for r >= 4/3, monotone in between.

    Args:
        r: Radii

    Returns:
        np.ndarray: Profile values in [0, 1]
    """
    r = np.asarray(r, dtype=float)
    t = (r - CHI_INNER) / (CHI_OUTER - CHI_INNER)
    t = np.clip(t, 0.0, 1.0)
    up = _bump(1.0 - t)
    down = _bump(t)
    return up / (up + down)


def phi(r) -> np.ndarray:
    """Annular profile chi(r/2) - chi(r), supported in [3/4, 8/3]."""
    r = np.asarray(r, dtype=float)
    return chi(r / 2.0) - chi(r)


@dataclass(frozen=True)
class DyadicPartition:
    """
    Lattice evaluations of chi and phi(2^-j .) for j = 0..j_max.

    Attributes:
        grid (Grid2D): Grid the partition lives on
        j_max (int): Largest block index; blocks -1..j_max cover the dealiased band
        blocks (Dict[int, np.ndarray]): Multiplier of block j, j = -1 is chi
    """

    grid: Grid2D
    j_max: int
    blocks: Dict[int, np.ndarray] = field(repr=False, compare=False)

    @property
    def indices(self) -> range:
        return range(-1, self.j_max + 1)

    def block(self, j: int) -> np.ndarray:
        if j not in self.blocks:
            raise ConfigError(f"block index j={j} outside [-1, {self.j_max}]")
        return self.blocks[j]

    def low_pass(self, j: int) -> np.ndarray:
        """Multiplier of S_j, the sum of blocks -1..j-1."""
        if not 0 <= j <= self.j_max + 1:
            raise ConfigError(f"S_j index j={j} outside [0, {self.j_max + 1}]")
        total = np.zeros_like(self.grid.kmag)
        for k in range(-1, j):
            total = total + self.blocks[k]
        return total

    def unity_deviation(self) -> float:
        """Largest |chi + sum phi_j - 1| over the dealiased band."""
        total = sum(self.blocks[j] for j in self.indices)
        return float(np.max(np.abs(total - 1.0)[self.grid.dealias_mask]))


def resolvable_j_max(grid: Grid2D) -> int:
    """Smallest j_max whose blocks cover every retained mode, max radius sqrt(2)*k_cut."""
    k_cut = grid.band_limit * grid.k_unit
    return math.ceil(math.log2(math.sqrt(2.0) * k_cut)) - 1


@lru_cache(maxsize=16)
def build_partition(grid: Grid2D) -> DyadicPartition:
    """
    Evaluate the dyadic partition on a grid.

    Args:
        grid (Grid2D): Target grid

    Returns:
        DyadicPartition: Immutable lattice evaluations

    Raises:
        ConfigError: If the grid cannot host at least blocks 0..2
    """
    j_max = resolvable_j_max(grid)
    if j_max < 2:
        raise ConfigError(f"grid n={grid.n} too small for a dyadic partition (j_max={j_max} < 2)")
    kmag = grid.kmag
    blocks = {-1: chi(kmag)}
    for j in range(0, j_max + 1):
        blocks[j] = phi(kmag / 2.0**j)
    for array in blocks.values():
        array.setflags(write=False)
    logger.debug("built dyadic partition n=%d j_max=%d", grid.n, j_max)
    return DyadicPartition(grid=grid, j_max=j_max, blocks=blocks)


def delta_j(f: SpectralField2D, j: int, partition: Optional[DyadicPartition] = None) -> SpectralField2D:
    """Block operator: chi(D) for j = -1, phi(2^-j D) for j >= 0."""
    partition = partition or build_partition(f.grid)
    return SpectralField2D(partition.block(j) * f.coeffs, f.grid)


def s_j(f: SpectralField2D, j: int, partition: Optional[DyadicPartition] = None) -> SpectralField2D:
    """Low-frequency cutoff S_j f = sum of Delta_k f for -1 <= k <= j-1."""
    partition = partition or build_partition(f.grid)
    return SpectralField2D(partition.low_pass(j) * f.coeffs, f.grid)


def delta_tilde(f: SpectralField2D, j: int, partition: DyadicPartition) -> SpectralField2D:
    """Delta_{j-1} + Delta_j + Delta_{j+1}, omitting indices outside the partition."""
    m = sum(partition.blocks[k] for k in (j - 1, j, j + 1) if k in partition.blocks)
    return SpectralField2D(m * f.coeffs, f.grid)


_SPEC_PATTERN = re.compile(r"^B:(.*)$")


@dataclass(frozen=True)
class BesovNormSpec:
    """
    Parameters of a (weighted) Besov norm.

    The weight is g^weight evaluated at 2^j; weight = 0 is the unweighted norm.
    """

    s: float
    p: float = 2.0
    q: float = 2.0
    weight: float = 0.0
    homogeneous: bool = False

    def __post_init__(self):
        if not self.p >= 1 or not self.q >= 1:
            raise ValueError(f"Besov indices need p, q >= 1, got p={self.p}, q={self.q}")

    @classmethod
    def parse(cls, text: str) -> "BesovNormSpec":
        """
        Parse strings such as "B:s=0.5,p=2,q=2,w=g^-0.5" or "B:s=0,p=inf,q=1,h=1".

        Args:
            text (str): Norm description

        Returns:
            BesovNormSpec: Parsed spec
        """
        match = _SPEC_PATTERN.match(text.strip())
        if not match:
            raise ConfigError(f"Besov spec must start with 'B:', got '{text}'")
        values = {}
        for item in filter(None, match.group(1).split(",")):
            key, _, raw = item.partition("=")
            values[key.strip()] = raw.strip()
        unknown = set(values) - {"s", "p", "q", "w", "h"}
        if unknown:
            raise ConfigError(f"unknown Besov spec keys {sorted(unknown)} in '{text}'")
        weight = values.get("w", "none")
        if weight == "none":
            power = 0.0
        elif weight == "g":
            power = 1.0
        elif weight.startswith("g^"):
            power = float(weight[2:])
        else:
            raise ConfigError(f"unknown Besov weight '{weight}'")
        try:
            return cls(
                s=float(values.get("s", 0.0)),
                p=float(values.get("p", 2.0)),
                q=float(values.get("q", 2.0)),
                weight=power,
                homogeneous=values.get("h", "0") == "1",
            )
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def __str__(self) -> str:
        w = "none" if self.weight == 0 else f"g^{self.weight:g}"
        text = f"B:s={self.s:g},p={self.p:g},q={self.q:g},w={w}"
        return text + (",h=1" if self.homogeneous else "")


def block_weights(spec: BesovNormSpec, partition: DyadicPartition, g=None) -> Dict[int, float]:
    """2^(js) w(2^j) per block; the j = -1 block is evaluated at argument 1/2."""
    if spec.weight != 0 and g is None:
        raise ValueError("weighted Besov norm requires a symbol g")
    weights = {}
    for j in partition.indices:
        scale = 2.0 ** (j * spec.s)
        if spec.weight != 0:
            scale *= float(g(np.array([2.0**j]))[0]) ** spec.weight
        weights[j] = scale
    return weights


def block_norms(f: SpectralField2D, p: float, partition: Optional[DyadicPartition] = None) -> Dict[int, float]:
    """||Delta_j f||_{L^p} for every block."""
    partition = partition or build_partition(f.grid)
    return {j: lp_norm(inverse(delta_j(f, j, partition), validate=False), p) for j in partition.indices}


def besov_norm(f: SpectralField2D, spec: BesovNormSpec, g=None, partition: Optional[DyadicPartition] = None) -> float:
    """
    l^q over j of 2^(js) w(2^j) ||Delta_j f||_{L^p}.

    On the torus a mean-zero field has no modes below |k| = 1, where chi(k) = phi(2k), so
    the homogeneous norm is the same sum restricted to mean-zero fields.

    Args:
        f (SpectralField2D): Band-limited field
        spec (BesovNormSpec): Norm parameters
        g (SymbolG): Symbol for weighted norms
        partition (DyadicPartition): Optional precomputed partition

    Returns:
        float: The norm
    """
    partition = partition or build_partition(f.grid)
    if spec.homogeneous:
        scale = max(1.0, float(np.max(np.abs(f.coeffs))))
        if abs(f.coeffs[0, 0]) > 1e-12 * scale:
            raise MeanModeError("homogeneous Besov norms are defined on mean-zero fields only")
    weights = block_weights(spec, partition, g)
    norms = block_norms(f, spec.p, partition)
    terms = np.array([weights[j] * norms[j] for j in partition.indices])
    if math.isinf(spec.q):
        return float(np.max(terms))
    return float(np.sum(terms**spec.q) ** (1.0 / spec.q))


def hs_norm(f: SpectralField2D, s: float) -> float:
    """Fourier-sum H^s norm."""
    return sobolev_norm(f, s)


def bony_decompose(
    u: SpectralField2D, v: SpectralField2D, partition: Optional[DyadicPartition] = None
) -> Tuple[SpectralField2D, SpectralField2D, SpectralField2D]:
    """
    Split uv into the paraproducts T_u v, T_v u and the remainder R(u, v).

    T_u v = sum_j S_{j-1}u Delta_j v and R(u, v) = sum_j Delta_j u Delta~_j v with
    Delta~_j = Delta_{j-1} + Delta_j + Delta_{j+1}. Each product is dealiased, so the
    three parts sum to the dealiased product uv.

    Args:
        u (SpectralField2D): Band-limited factor
        v (SpectralField2D): Band-limited factor
        partition (DyadicPartition): Optional precomputed partition

    Returns:
        Tuple[SpectralField2D, SpectralField2D, SpectralField2D]: (T_u v, T_v u, R)
    """
    partition = partition or build_partition(u.grid)
    grid = u.grid
    t_uv = SpectralField2D.zeros(grid)
    t_vu = SpectralField2D.zeros(grid)
    remainder = SpectralField2D.zeros(grid)
    for j in partition.indices:
        du = delta_j(u, j, partition)
        dv = delta_j(v, j, partition)
        if j >= 1:
            t_uv = t_uv + product(s_j(u, j - 1, partition), dv)
            t_vu = t_vu + product(s_j(v, j - 1, partition), du)
        remainder = remainder + product(du, delta_tilde(v, j, partition))
    return t_uv, t_vu, remainder
