"""
Tests for the spectral core.
"""
import math
import os
import sys

import numpy as np
import pytest

# Add the src directory to the path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.errors import MeanModeError, NonFiniteFieldError, SymmetryError
from src.spectral_core import (
    Grid2D,
    RealField2D,
    SpectralField2D,
    band_limited,
    biot_savart,
    curl,
    dealias,
    divergence,
    forward,
    gradient,
    inner,
    inverse,
    lp_norm,
    product,
    random_band_field,
    sobolev_norm,
)


class TestGrid2D:
    """Test cases for Grid2D."""

    def test_rejects_invalid_sizes(self):
        """Test that non powers of two are rejected."""
        with pytest.raises(ValueError):
            Grid2D(48)
        with pytest.raises(ValueError):
            Grid2D(4)
        with pytest.raises(ValueError):
            Grid2D(32, box_length=0.0)

    def test_wavenumbers(self):
        """Test the lattice layout and the dealiasing band."""
        grid = Grid2D(16)
        assert grid.mode_index(-1, 2) == (15, 2)
        assert grid.mode_of_index(15, 2) == (-1, 2)
        assert grid.band_limit == 5
        assert grid.dealias_mask[grid.mode_index(5, -5)]
        assert not grid.dealias_mask[grid.mode_index(6, 0)]
        assert grid.k1_odd[grid.mode_index(-8, 0)] == 0.0

    def test_box_length_scales_wavenumbers(self):
        """Test that a box of length pi doubles the fundamental wavenumber."""
        grid = Grid2D(16, box_length=math.pi)
        assert grid.k_unit == pytest.approx(2.0)
        assert grid.kmag[grid.mode_index(1, 0)] == pytest.approx(2.0)


class TestTransforms:
    """Test cases for forward and inverse transforms."""

    def setup_method(self):
        """Set up test fixtures."""
        self.grid = Grid2D(32)
        self.x1, self.x2 = self.grid.coordinates

    def test_cosine_coefficients(self):
        """Test the coefficient normalisation cos(x1) -> 1/2 at (+-1, 0)."""
        spec = forward(RealField2D(np.cos(self.x1), self.grid))
        assert spec.coefficient(1, 0) == pytest.approx(0.5)
        assert spec.coefficient(-1, 0) == pytest.approx(0.5)
        assert abs(spec.coefficient(0, 1)) < 1e-15

    def test_round_trip(self):
        """Test that inverse(forward(f)) reproduces f."""
        f = inverse(random_band_field(self.grid, 1, 10, 1.0, np.random.default_rng(3)))
        back = inverse(forward(f))
        assert np.max(np.abs(back.values - f.values)) <= 1e-12 * np.max(np.abs(f.values))

    def test_non_finite_samples_rejected(self):
        """Test that NaN samples raise NonFiniteFieldError."""
        values = np.zeros((32, 32))
        values[3, 4] = np.nan
        with pytest.raises(NonFiniteFieldError):
            forward(RealField2D(values, self.grid))

    def test_non_hermitian_rejected(self):
        """Test that a lone complex mode raises SymmetryError naming the mode."""
        coeffs = np.zeros((32, 32), dtype=complex)
        coeffs[self.grid.mode_index(1, 2)] = 1.0
        with pytest.raises(SymmetryError) as info:
            inverse(SpectralField2D(coeffs, self.grid))
        assert info.value.mode == (1, 2)

    def test_non_finite_coefficients_rejected(self):
        """Test that an infinite coefficient raises NonFiniteFieldError."""
        coeffs = np.zeros((32, 32), dtype=complex)
        coeffs[self.grid.mode_index(1, 0)] = np.inf
        coeffs[self.grid.mode_index(-1, 0)] = np.inf
        with pytest.raises(NonFiniteFieldError):
            inverse(SpectralField2D(coeffs, self.grid))

    def test_imaginary_residue_raises(self, monkeypatch):
        """Test that the residue check raises SymmetryError rather than asserting."""
        monkeypatch.setattr("src.spectral_core.IMAG_RESIDUE_TOL", -1.0)
        spec = forward(RealField2D(np.cos(self.x1), self.grid))
        with pytest.raises(SymmetryError):
            inverse(spec)

    def test_validation_can_be_skipped(self):
        """Test that validate=False returns the real part without checking."""
        coeffs = np.zeros((32, 32), dtype=complex)
        coeffs[self.grid.mode_index(1, 0)] = 1.0
        real = inverse(SpectralField2D(coeffs, self.grid), validate=False)
        assert np.allclose(real.values, np.cos(self.x1))


class TestOperators:
    """Test cases for differential operators and Biot-Savart."""

    def setup_method(self):
        """Set up test fixtures."""
        self.grid = Grid2D(32)
        self.x1, self.x2 = self.grid.coordinates

    def test_gradient_of_sine(self):
        """Test d1 sin(x1) = cos(x1)."""
        grad = gradient(forward(RealField2D(np.sin(self.x1), self.grid)))
        assert np.allclose(inverse(grad.c1).values, np.cos(self.x1), atol=1e-13)
        assert np.allclose(inverse(grad.c2).values, 0.0, atol=1e-13)

    def test_biot_savart_sign(self):
        """Test omega = sin(x1) gives u = (0, -cos(x1))."""
        u = biot_savart(forward(RealField2D(np.sin(self.x1), self.grid)))
        assert np.allclose(inverse(u.c1).values, 0.0, atol=1e-13)
        assert np.allclose(inverse(u.c2).values, -np.cos(self.x1), atol=1e-13)

    def test_biot_savart_inverts_curl(self):
        """Test that the velocity is divergence free and recovers the vorticity."""
        omega = random_band_field(self.grid, 1, 8, 1.0, np.random.default_rng(1))
        u = biot_savart(omega)
        assert np.max(np.abs(divergence(u).coeffs)) < 1e-14
        assert np.max(np.abs(curl(u).coeffs - omega.coeffs)) < 1e-14

    def test_biot_savart_rejects_mean(self):
        """Test that a nonzero mean vorticity raises MeanModeError."""
        omega = forward(RealField2D(1.0 + np.sin(self.x1), self.grid))
        with pytest.raises(MeanModeError):
            biot_savart(omega)

    def test_dealiased_product(self):
        """Test cos(3x1) cos(2x1) = (cos(5x1) + cos(x1)) / 2."""
        a = forward(RealField2D(np.cos(3 * self.x1), self.grid))
        b = forward(RealField2D(np.cos(2 * self.x1), self.grid))
        expected = 0.5 * (np.cos(5 * self.x1) + np.cos(self.x1))
        assert np.allclose(inverse(product(a, b)).values, expected, atol=1e-13)

    def test_dealias_zeroes_upper_third(self):
        """Test that dealias removes modes beyond n/3."""
        spec = forward(RealField2D(np.cos(12 * self.x1) + np.cos(self.x2), self.grid))
        assert not band_limited(spec)
        clean = dealias(spec)
        assert band_limited(clean)
        assert np.allclose(inverse(clean).values, np.cos(self.x2), atol=1e-13)


class TestNorms:
    """Test cases for Lebesgue and Sobolev norms."""

    def setup_method(self):
        """Set up test fixtures."""
        self.grid = Grid2D(32)
        self.x1, self.x2 = self.grid.coordinates

    def test_lebesgue_norms(self):
        """Test L^2 and L^inf norms of simple fields."""
        one = RealField2D(np.ones((32, 32)), self.grid)
        assert lp_norm(one, 2) == pytest.approx(2.0 * math.pi)
        assert lp_norm(one, math.inf) == pytest.approx(1.0)
        cosine = RealField2D(np.cos(self.x1), self.grid)
        assert lp_norm(cosine, 2) == pytest.approx(math.pi * math.sqrt(2.0))
        with pytest.raises(ValueError):
            lp_norm(one, 0.5)

    def test_sobolev_norm_of_cosine(self):
        """Test ||cos(x1)||_{H^s} = pi sqrt(2) 2^(s/2)."""
        spec = forward(RealField2D(np.cos(self.x1), self.grid))
        assert sobolev_norm(spec, 0.0) == pytest.approx(math.pi * math.sqrt(2.0))
        assert sobolev_norm(spec, 1.0) == pytest.approx(math.pi * math.sqrt(2.0) * math.sqrt(2.0))
        assert sobolev_norm(spec, 1.0, homogeneous=True) == pytest.approx(math.pi * math.sqrt(2.0))

    def test_parseval(self):
        """Test that inner(f, f) equals ||f||_2^2."""
        f = random_band_field(self.grid, 1, 8, 1.5, np.random.default_rng(5))
        assert inner(f, f) == pytest.approx(lp_norm(inverse(f), 2) ** 2, rel=1e-12)


class TestRandomBandField:
    """Test cases for random_band_field."""

    def test_same_field_on_every_grid(self):
        """Test that a seed gives the same continuous field at two resolutions."""
        coarse = inverse(random_band_field(Grid2D(32), 1, 8, 1.0, np.random.default_rng(11)))
        fine = inverse(random_band_field(Grid2D(64), 1, 8, 1.0, np.random.default_rng(11)))
        assert np.allclose(fine.values[::2, ::2], coarse.values, atol=1e-12)

    def test_amplitude_and_band(self):
        """Test the RMS normalisation, zero mean and band limits."""
        grid = Grid2D(64)
        f = random_band_field(grid, 2, 6, 2.0, np.random.default_rng(0))
        assert f.mean == 0.0
        assert math.sqrt(np.sum(np.abs(f.coeffs) ** 2)) == pytest.approx(2.0)
        occupied = grid.kmag[np.abs(f.coeffs) > 0]
        assert occupied.min() >= 2.0 and occupied.max() <= 6.0

    def test_band_beyond_dealiasing_rejected(self):
        """Test that k_hi above n/3 raises ValueError."""
        with pytest.raises(ValueError):
            random_band_field(Grid2D(16), 1, 8)
