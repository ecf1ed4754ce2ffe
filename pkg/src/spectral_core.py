#!/usr/bin/env python3
"""
Spectral core for the rb-lab application.
Periodic grid bookkeeping, discrete Fourier transforms, differential operators,
Biot-Savart inversion, 2/3-rule dealiasing and grid Lebesgue norms.

Coefficients are normalised so that f(x) = sum_k f_hat(k) exp(i k.x), i.e.
cos(x1) has coefficient 1/2 at k = (+-1, 0). Arrays are indexed [i1, i2] with
x1 along axis 0 and x2 along axis 1.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple, Union

import numpy as np

from src.errors import MeanModeError, NonFiniteFieldError, SymmetryError

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-10
IMAG_RESIDUE_TOL = 1e-12
MEAN_TOL = 1e-13


@dataclass(frozen=True)
class Grid2D:
    """
    Uniform n x n collocation grid on the periodic box [0, L)^2.

    Attributes:
        n (int): Grid points per dimension (power of two, at least 8)
        box_length (float): Physical period L of the box
    """

    n: int = 128
    box_length: float = 2.0 * math.pi

    def __post_init__(self):
        if self.n < 8 or self.n & (self.n - 1) != 0:
            raise ValueError(f"grid size n must be a power of two >= 8, got {self.n}")
        if not self.box_length > 0 or not math.isfinite(self.box_length):
            raise ValueError(f"box_length must be positive and finite, got {self.box_length}")

    @cached_property
    def dx(self) -> float:
        return self.box_length / self.n

    @cached_property
    def area(self) -> float:
        return self.box_length**2

    @cached_property
    def k_unit(self) -> float:
        """Physical wavenumber of the fundamental mode, 2*pi/L."""
        return 2.0 * math.pi / self.box_length

    @cached_property
    def k_int(self) -> Tuple[np.ndarray, np.ndarray]:
        """Integer wavenumber lattice (k1, k2), fftfreq ordering."""
        k = np.fft.fftfreq(self.n, d=1.0 / self.n)
        k1, k2 = np.meshgrid(k, k, indexing="ij")
        return k1, k2

    @cached_property
    def k1(self) -> np.ndarray:
        return self.k_int[0] * self.k_unit

    @cached_property
    def k2(self) -> np.ndarray:
        return self.k_int[1] * self.k_unit

    @cached_property
    def ksq(self) -> np.ndarray:
        return self.k1**2 + self.k2**2

    @cached_property
    def kmag(self) -> np.ndarray:
        return np.sqrt(self.ksq)

    @cached_property
    def nyquist(self) -> np.ndarray:
        """Mask of the Nyquist row and column."""
        k1, k2 = self.k_int
        half = self.n // 2
        return (np.abs(k1) == half) | (np.abs(k2) == half)

    @cached_property
    def k1_odd(self) -> np.ndarray:
        """k1 with the Nyquist row zeroed, for odd-order multipliers."""
        return np.where(np.abs(self.k_int[0]) == self.n // 2, 0.0, self.k1)

    @cached_property
    def k2_odd(self) -> np.ndarray:
        """k2 with the Nyquist column zeroed, for odd-order multipliers."""
        return np.where(np.abs(self.k_int[1]) == self.n // 2, 0.0, self.k2)

    @cached_property
    def band_limit(self) -> int:
        """Largest integer wavenumber kept by the 2/3 rule."""
        return self.n // 3

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        k1, k2 = self.k_int
        return np.maximum(np.abs(k1), np.abs(k2)) <= self.band_limit

    @cached_property
    def coordinates(self) -> Tuple[np.ndarray, np.ndarray]:
        """Collocation points (x1, x2) as two n x n arrays."""
        x = np.arange(self.n) * self.dx
        return np.meshgrid(x, x, indexing="ij")

    def mode_index(self, k1: int, k2: int) -> Tuple[int, int]:
        """
        Array index of the integer mode (k1, k2).

        Args:
            k1 (int): Integer wavenumber along x1
            k2 (int): Integer wavenumber along x2

        Returns:
            Tuple[int, int]: Index into an n x n coefficient array
        """
        return int(k1) % self.n, int(k2) % self.n

    def mode_of_index(self, i1: int, i2: int) -> Tuple[int, int]:
        k1, k2 = self.k_int
        return int(k1[i1, i2]), int(k2[i1, i2])


@dataclass(frozen=True)
class RealField2D:
    """Real samples of a scalar field on the collocation lattice."""

    values: np.ndarray
    grid: Grid2D

    def __post_init__(self):
        if self.values.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"expected shape {(self.grid.n, self.grid.n)}, got {self.values.shape}")

    def __add__(self, other: "RealField2D") -> "RealField2D":
        return RealField2D(self.values + other.values, self.grid)

    def __sub__(self, other: "RealField2D") -> "RealField2D":
        return RealField2D(self.values - other.values, self.grid)

    def __mul__(self, other: Union["RealField2D", float]) -> "RealField2D":
        if isinstance(other, RealField2D):
            return RealField2D(self.values * other.values, self.grid)
        return RealField2D(self.values * other, self.grid)

    __rmul__ = __mul__

    @classmethod
    def from_function(cls, grid: Grid2D, fn) -> "RealField2D":
        """Sample fn(x1, x2) on the collocation lattice."""
        x1, x2 = grid.coordinates
        return cls(np.asarray(fn(x1, x2), dtype=float) * np.ones_like(x1), grid)


@dataclass(frozen=True)
class SpectralField2D:
    """Complex Fourier coefficients of a real scalar field."""

    coeffs: np.ndarray
    grid: Grid2D

    def __post_init__(self):
        if self.coeffs.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"expected shape {(self.grid.n, self.grid.n)}, got {self.coeffs.shape}")

    @classmethod
    def zeros(cls, grid: Grid2D) -> "SpectralField2D":
        return cls(np.zeros((grid.n, grid.n), dtype=complex), grid)

    @property
    def mean(self) -> float:
        """Mean value of the field (the k = 0 coefficient)."""
        return float(self.coeffs[0, 0].real)

    def coefficient(self, k1: int, k2: int) -> complex:
        return complex(self.coeffs[self.grid.mode_index(k1, k2)])

    def __add__(self, other: "SpectralField2D") -> "SpectralField2D":
        return SpectralField2D(self.coeffs + other.coeffs, self.grid)

    def __sub__(self, other: "SpectralField2D") -> "SpectralField2D":
        return SpectralField2D(self.coeffs - other.coeffs, self.grid)

    def __neg__(self) -> "SpectralField2D":
        return SpectralField2D(-self.coeffs, self.grid)

    def __mul__(self, scalar: float) -> "SpectralField2D":
        return SpectralField2D(self.coeffs * scalar, self.grid)

    __rmul__ = __mul__

    def symmetry_deviation(self) -> Tuple[float, Tuple[int, int]]:
        """
        Largest Hermitian-symmetry violation |c(k) - conj(c(-k))|, relative to max |c|.

        Returns:
            Tuple[float, Tuple[int, int]]: Relative deviation and the offending integer mode
        """
        scale = float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0
        if scale == 0.0:
            return 0.0, (0, 0)
        dev = np.abs(self.coeffs - np.conj(reflect(self.coeffs)))
        idx = np.unravel_index(int(np.argmax(dev)), dev.shape)
        return float(dev[idx]) / scale, self.grid.mode_of_index(*idx)


@dataclass(frozen=True)
class VectorField2D:
    """Two-component field (u1, u2); both components real or both spectral."""

    c1: Union[RealField2D, SpectralField2D]
    c2: Union[RealField2D, SpectralField2D]

    @property
    def grid(self) -> Grid2D:
        return self.c1.grid

    @property
    def is_spectral(self) -> bool:
        return isinstance(self.c1, SpectralField2D)


def reflect(coeffs: np.ndarray) -> np.ndarray:
    """Return the array a with a[k] replaced by a[-k] (modulo n)."""
    return np.roll(np.flip(coeffs, axis=(0, 1)), shift=1, axis=(0, 1))


def forward(real: RealField2D) -> SpectralField2D:
    """
    Transform collocation samples to Fourier coefficients.

    Args:
        real (RealField2D): Field samples

    Returns:
        SpectralField2D: Coefficients normalised so that cos(x1) -> 1/2 at k = (+-1, 0)

    Raises:
        NonFiniteFieldError: If any sample is NaN or infinite
    """
    values = real.values
    if not np.all(np.isfinite(values)):
        bad = np.argwhere(~np.isfinite(values))[0]
        raise NonFiniteFieldError(f"non-finite sample at grid index {tuple(int(i) for i in bad)}")
    n = real.grid.n
    return SpectralField2D(np.fft.fft2(values) / (n * n), real.grid)


def inverse(spec: SpectralField2D, validate: bool = True) -> RealField2D:
    """
    Transform Fourier coefficients back to collocation samples.

    Args:
        spec (SpectralField2D): Coefficients of a real field
        validate (bool): Check Hermitian symmetry and the imaginary residue

    Returns:
        RealField2D: Real samples

    Raises:
        NonFiniteFieldError: If a coefficient is NaN or infinite
        SymmetryError: If the coefficients are not Hermitian within tolerance, or the
            samples keep an imaginary residue above tolerance
    """
    n = spec.grid.n
    coeffs = spec.coeffs
    if validate:
        if not np.all(np.isfinite(coeffs)):
            bad = np.argwhere(~np.isfinite(coeffs))[0]
            raise NonFiniteFieldError(f"non-finite coefficient at index {tuple(int(i) for i in bad)}")
        deviation, mode = spec.symmetry_deviation()
        if deviation > SYMMETRY_TOL:
            raise SymmetryError(mode, deviation)
        coeffs = 0.5 * (coeffs + np.conj(reflect(coeffs)))
    values = np.fft.ifft2(coeffs) * (n * n)
    if validate:
        magnitude = max(float(np.sum(np.abs(coeffs))), 1e-300)
        residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
        if not residue <= IMAG_RESIDUE_TOL * magnitude:
            raise SymmetryError(mode, residue / magnitude)
    return RealField2D(np.ascontiguousarray(values.real), spec.grid)


def gradient(spec: SpectralField2D) -> VectorField2D:
    """Spectral gradient: component i is multiplication by i*k_i."""
    grid = spec.grid
    return VectorField2D(
        SpectralField2D(1j * grid.k1_odd * spec.coeffs, grid),
        SpectralField2D(1j * grid.k2_odd * spec.coeffs, grid),
    )


def divergence(vec: VectorField2D) -> SpectralField2D:
    grid = vec.grid
    return SpectralField2D(1j * grid.k1_odd * vec.c1.coeffs + 1j * grid.k2_odd * vec.c2.coeffs, grid)


def curl(vec: VectorField2D) -> SpectralField2D:
    """Scalar curl d1 u2 - d2 u1 of a spectral vector field."""
    grid = vec.grid
    return SpectralField2D(1j * grid.k1_odd * vec.c2.coeffs - 1j * grid.k2_odd * vec.c1.coeffs, grid)


def biot_savart(omega: SpectralField2D) -> VectorField2D:
    """
    Recover the divergence-free velocity u = grad_perp(Laplacian^-1 omega).

    With grad_perp = (-d2, d1) the multiplier is u_hat = (i k2, -i k1) omega_hat / |k|^2,
    and u_hat(0) = 0.

    Args:
        omega (SpectralField2D): Vorticity with zero mean

    Returns:
        VectorField2D: Spectral velocity components

    Raises:
        MeanModeError: If the mean vorticity exceeds the tolerance
    """
    grid = omega.grid
    scale = max(1.0, float(np.max(np.abs(omega.coeffs))))
    if abs(omega.coeffs[0, 0]) > MEAN_TOL * scale:
        raise MeanModeError(
            f"mean vorticity {omega.coeffs[0, 0]:.3e} is incompatible with periodic Biot-Savart"
        )
    inv_ksq = np.zeros_like(grid.ksq)
    np.divide(1.0, grid.ksq, out=inv_ksq, where=grid.ksq > 0)
    psi = -omega.coeffs * inv_ksq
    return VectorField2D(
        SpectralField2D(-1j * grid.k2_odd * psi, grid),
        SpectralField2D(1j * grid.k1_odd * psi, grid),
    )


def dealias(spec: SpectralField2D) -> SpectralField2D:
    """Zero every coefficient with max(|k1|, |k2|) > n/3 (2/3 rule)."""
    return SpectralField2D(np.where(spec.grid.dealias_mask, spec.coeffs, 0.0), spec.grid)


def product(a: SpectralField2D, b: SpectralField2D, dealiased: bool = True) -> SpectralField2D:
    """
    Pseudo-spectral product of two fields, formed in physical space.

    Args:
        a (SpectralField2D): First factor
        b (SpectralField2D): Second factor
        dealiased (bool): Apply the 2/3 rule to the result

    Returns:
        SpectralField2D: Coefficients of a*b
    """
    grid = a.grid
    n = grid.n
    pa = np.fft.ifft2(a.coeffs).real * (n * n)
    pb = np.fft.ifft2(b.coeffs).real * (n * n)
    out = SpectralField2D(np.fft.fft2(pa * pb) / (n * n), grid)
    return dealias(out) if dealiased else out


def advect(u: VectorField2D, f: SpectralField2D, dealiased: bool = True) -> SpectralField2D:
    """Transport term u.grad(f), products formed in physical space."""
    grad_f = gradient(f)
    return product(u.c1, grad_f.c1, dealiased) + product(u.c2, grad_f.c2, dealiased)


def to_physical(vec: VectorField2D) -> VectorField2D:
    return VectorField2D(inverse(vec.c1, validate=False), inverse(vec.c2, validate=False))


def lp_norm(real: RealField2D, p: float) -> float:
    """
    Grid Lebesgue norm (sum |f|^p dx^2)^(1/p); p = inf gives the collocation maximum.

    The collocation maximum is a lower bound on the true supremum.

    Args:
        real (RealField2D): Field samples
        p (float): Exponent, p >= 1 or inf

    Returns:
        float: The norm
    """
    if not p >= 1:
        raise ValueError(f"Lebesgue exponent must satisfy p >= 1, got {p}")
    absf = np.abs(real.values)
    if math.isinf(p):
        return float(np.max(absf))
    cell = real.grid.dx**2
    if p == 2:
        return float(math.sqrt(np.sum(absf * absf) * cell))
    return float((np.sum(absf**p) * cell) ** (1.0 / p))


def magnitude(vec: VectorField2D) -> RealField2D:
    """Pointwise Euclidean length of a vector field."""
    if vec.is_spectral:
        vec = to_physical(vec)
    return RealField2D(np.hypot(vec.c1.values, vec.c2.values), vec.grid)


def vector_lp_norm(vec: VectorField2D, p: float) -> float:
    return lp_norm(magnitude(vec), p)


def gradient_magnitude_max(vec: VectorField2D) -> float:
    """Collocation maximum of the Frobenius norm of grad(u) for a spectral vector field."""
    g1 = to_physical(gradient(vec.c1))
    g2 = to_physical(gradient(vec.c2))
    frob = np.sqrt(g1.c1.values**2 + g1.c2.values**2 + g2.c1.values**2 + g2.c2.values**2)
    return float(np.max(frob))


def inner(a: SpectralField2D, b: SpectralField2D) -> float:
    """L^2 inner product of two real fields computed by Parseval."""
    return float(a.grid.area * np.real(np.sum(a.coeffs * np.conj(b.coeffs))))


def sobolev_norm(spec: SpectralField2D, s: float, homogeneous: bool = False) -> float:
    """
    Fourier-sum Sobolev norm (area * sum (1+|k|^2)^s |f_hat|^2)^(1/2).

    Args:
        spec (SpectralField2D): Field coefficients
        s (float): Regularity index
        homogeneous (bool): Use |k|^(2s) and drop the mean mode

    Returns:
        float: The norm
    """
    grid = spec.grid
    power = np.abs(spec.coeffs) ** 2
    if homogeneous:
        weight = np.zeros_like(grid.ksq)
        np.power(grid.ksq, s, out=weight, where=grid.ksq > 0)
    else:
        weight = (1.0 + grid.ksq) ** s
    return float(math.sqrt(grid.area * np.sum(weight * power)))


def random_band_field(
    grid: Grid2D,
    k_lo: float,
    k_hi: int,
    amplitude: float = 1.0,
    rng: Optional[np.random.Generator] = None,
) -> SpectralField2D:
    """
    Random real field with a flat spectrum on the integer shell k_lo <= |k| <= k_hi.

    The draw depends only on (k_lo, k_hi, rng state), not on n, so the same seed gives
    the same continuous field on every grid that resolves it.

    Args:
        grid (Grid2D): Target grid
        k_lo (float): Smallest retained integer wavenumber magnitude
        k_hi (int): Largest retained integer wavenumber magnitude (<= n/3)
        amplitude (float): Root-mean-square value of the field
        rng (np.random.Generator): Random source

    Returns:
        SpectralField2D: Hermitian, band-limited coefficients
    """
    k_hi = int(k_hi)
    if k_hi > grid.band_limit:
        raise ValueError(f"band upper edge {k_hi} exceeds the dealiased band {grid.band_limit}")
    if k_lo > k_hi or k_lo < 0:
        raise ValueError(f"invalid band [{k_lo}, {k_hi}]")
    if not math.isfinite(amplitude):
        raise ValueError("amplitude must be finite")
    rng = rng if rng is not None else np.random.default_rng(0)
    m = np.arange(-k_hi, k_hi + 1)
    m1, m2 = np.meshgrid(m, m, indexing="ij")
    box = rng.standard_normal(m1.shape) + 1j * rng.standard_normal(m1.shape)
    radius = np.sqrt(m1**2 + m2**2)
    box = np.where((radius >= k_lo) & (radius <= k_hi), box, 0.0)
    box = 0.5 * (box + np.conj(box[::-1, ::-1]))
    energy = float(np.sum(np.abs(box) ** 2))
    coeffs = np.zeros((grid.n, grid.n), dtype=complex)
    if energy > 0:
        coeffs[m1 % grid.n, m2 % grid.n] = box * (amplitude / math.sqrt(energy))
    return SpectralField2D(coeffs, grid)


def band_limited(spec: SpectralField2D) -> bool:
    """True when no coefficient lies outside the dealiased band."""
    return not np.any(spec.coeffs[~spec.grid.dealias_mask])
