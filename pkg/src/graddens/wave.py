"""
Wave-function estimator.
The density of s = S' is read off the normalized power spectrum of exp(iS/tau).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import fft

from graddens.catalog import discrete_derivative
from graddens.core import MASS_TOL, ComplexField, DensityEstimate, GridSpec, ScalarField
from graddens.errors import (
    InvalidDomainError,
    NormalizationError,
    SpectralCoverageError,
    TauTooLargeError,
)

__all__ = [
    'SpectrumRaw',
    'validate_tau',
    'spectral_coverage',
    'build_wavefunction',
    'scaled_transform',
    'estimate_density_wave',
]

logger = logging.getLogger(__name__)

# Fewest spectral bins allowed across the support of s
MIN_BINS_ACROSS_SUPPORT = 8


def validate_tau(tau: float) -> float:
    tau = float(tau)
    if not (tau > 0 and math.isfinite(tau)):
        raise InvalidDomainError(f"tau must be positive and finite (got tau={tau})")
    return tau


def spectral_coverage(grid: GridSpec, tau: float) -> float:
    """Largest |u| the spectrum of a field on ``grid`` can represent."""
    return math.pi * tau / grid.dx


@dataclass(frozen=True)
class SpectrumRaw:
    """
    Centered DFT coefficients of a wave field.

    Coefficient k sits at u_k = 2*pi*tau*k/L. The continuous normalization
    is applied only when converting to density values.
    """

    grid: GridSpec
    tau: float
    coefficients: np.ndarray

    @property
    def k(self) -> np.ndarray:
        n = self.grid.n
        return fft.fftshift(fft.fftfreq(n, d=1.0 / n))

    @property
    def du(self) -> float:
        return 2 * math.pi * self.tau / self.grid.length

    @property
    def u(self) -> np.ndarray:
        return self.k * self.du

    def power(self) -> np.ndarray:
        """|F_tau(u_k)|^2, i.e. the unrenormalized density values."""
        g = self.grid
        return np.abs(self.coefficients) ** 2 * (g.dx ** 2 / (2 * math.pi * self.tau * g.length))

    def mass(self) -> float:
        return float(np.sum(self.power()) * self.du)


def build_wavefunction(S: ScalarField, tau: float) -> ComplexField:
    """phi = exp(iS/tau) on S's grid."""
    tau = validate_tau(tau)
    return ComplexField(S.grid, np.exp(1j * (S.values / tau)))


def scaled_transform(phi: ComplexField, tau: float) -> SpectrumRaw:
    """Centered DFT of a wave field."""
    tau = validate_tau(tau)
    coefficients = fft.fftshift(fft.fft(phi.values))
    coefficients.flags.writeable = False
    return SpectrumRaw(phi.grid, tau, coefficients)


def estimate_density_wave(
    S: ScalarField,
    tau: float,
    s: Optional[ScalarField] = None,
    check_coverage: bool = True,
) -> DensityEstimate:
    """
    Estimate the density of S' from the power spectrum of exp(iS/tau).

    Args:
        S: Sampled function values
        tau: Free parameter; smaller values give finer spectral bins
        s: Sampled derivative used for the support checks; estimated from S when omitted
        check_coverage: Raise when the support of s exceeds the spectral range

    Returns:
        DensityEstimate on u_k = 2*pi*tau*k/L
    """
    tau = validate_tau(tau)
    grid = S.grid
    cover = spectral_coverage(grid, tau)
    du = 2 * math.pi * tau / grid.length
    logger.debug(f"Wave estimate: n={grid.n}, tau={tau:g}, du={du:.4g}, coverage |u| <= {cover:.4g}")

    if tau > grid.dx:
        logger.warning(
            f"tau={tau:g} exceeds the sample spacing dx={grid.dx:.4g}; resonance widths are under-resolved"
        )

    if s is None and grid.n >= 3:
        s = discrete_derivative(S)
    if s is not None:
        lo, hi = float(np.min(s.values)), float(np.max(s.values))
        reach = max(abs(lo), abs(hi))
        if check_coverage and reach > cover:
            raise SpectralCoverageError(
                f"max|s|={reach:.6g} exceeds the spectral coverage {cover:.6g} at tau={tau:g}, "
                f"dx={grid.dx:.4g}; use tau >= {reach * grid.dx / math.pi:.4g}"
            )
        span = hi - lo
        if span > 1e-9 * max(1.0, reach) and du > span / MIN_BINS_ACROSS_SUPPORT:
            raise TauTooLargeError(
                f"bin width du={du:.4g} leaves fewer than {MIN_BINS_ACROSS_SUPPORT} bins "
                f"across the support of width {span:.4g} (tau={tau:g})"
            )

    spectrum = scaled_transform(build_wavefunction(S, tau), tau)
    p = spectrum.power()
    mass = float(np.sum(p) * du)
    if abs(mass - 1.0) > MASS_TOL:
        raise NormalizationError(f"spectral mass is {mass:.12g} before renormalization, expected 1")
    return DensityEstimate(spectrum.u, p / mass, du)
