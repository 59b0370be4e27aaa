"""
Characteristic-function baseline estimator.

psi(omega) = E[exp(i*omega*s(X))] is summed directly over the samples for
integer omega, then inverted with an FFT on [-pi, pi). The direct sum is the
O(n*m) path whose cost the complexity benchmark measures.
"""

import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import fft

from graddens.core import DensityEstimate, ScalarField
from graddens.errors import ExcessImaginaryError, InvalidDomainError
from graddens.utils import worker_count

__all__ = [
    'CALL_COUNTS',
    'CharFuncTable',
    'characteristic_function',
    'density_from_charfunc',
    'estimate_density_charfunc',
    'omega_count',
]

logger = logging.getLogger(__name__)

# Process-wide evaluation counter, keyed by operation name
CALL_COUNTS: Counter = Counter()

# Largest phase block (omegas x samples) held in memory at once
BLOCK_ELEMENTS = 2 ** 22
IMAG_TOL = 1e-6


@dataclass(frozen=True)
class CharFuncTable:
    """psi on the centered integer grid -(m-1)/2 .. (m-1)/2."""

    omegas: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        omegas = np.asarray(self.omegas, dtype=float)
        psi = np.asarray(self.psi, dtype=complex)
        m = omegas.size
        if m % 2 == 0 or psi.shape != omegas.shape:
            raise InvalidDomainError(f"table needs an odd number of omegas matching psi (got {m}, {psi.size})")
        half = (m - 1) // 2
        if not np.array_equal(omegas, np.arange(-half, half + 1, dtype=float)):
            raise InvalidDomainError("omegas must be the consecutive integers centered at 0")
        omegas.flags.writeable = False
        psi.flags.writeable = False
        object.__setattr__(self, 'omegas', omegas)
        object.__setattr__(self, 'psi', psi)

    @property
    def m(self) -> int:
        return self.omegas.size


def omega_count(n: int) -> int:
    """Number of integer frequencies for n samples: n when odd, n + 1 when even."""
    return n if n % 2 == 1 else n + 1


def _psi_block(omegas: np.ndarray, s: np.ndarray) -> np.ndarray:
    phase = np.outer(omegas, s)
    return np.cos(phase).mean(axis=1) + 1j * np.sin(phase).mean(axis=1)


def characteristic_function(s: ScalarField, m: int, workers: Optional[int] = None) -> CharFuncTable:
    """
    Direct-sum characteristic function of the sampled derivative.

    Only omega >= 0 is summed; negative frequencies are filled by conjugation,
    so psi(0) = 1 and Hermitian symmetry hold exactly.

    Args:
        s: Sampled derivative values
        m: Odd number of integer frequencies
        workers: Thread count for the omega loop (None = GRADDENS_THREADS)

    Returns:
        CharFuncTable
    """
    if m < 1 or m % 2 == 0:
        raise InvalidDomainError(f"omega count must be a positive odd integer (got m={m})")
    CALL_COUNTS['characteristic_function'] += 1

    half = (m - 1) // 2
    positive = np.arange(half + 1, dtype=float)
    values = s.values
    block = max(1, BLOCK_ELEMENTS // values.size)
    chunks = [positive[i:i + block] for i in range(0, positive.size, block)]

    n_workers = min(worker_count(workers), len(chunks))
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as executor:
            parts = list(executor.map(lambda w: _psi_block(w, values), chunks))
    else:
        parts = [_psi_block(w, values) for w in chunks]
    psi_pos = np.concatenate(parts)

    psi = np.concatenate((np.conj(psi_pos[:0:-1]), psi_pos))
    omegas = np.arange(-half, half + 1, dtype=float)
    logger.debug(f"Characteristic function: n={values.size}, m={m}, workers={n_workers}")
    return CharFuncTable(omegas, psi)


def density_from_charfunc(table: CharFuncTable) -> DensityEstimate:
    """
    Invert a characteristic-function table on u_j = 2*pi*(j - M)/m.

    Negative values left by the truncated series are clipped and the clipped
    mass is logged before renormalizing.

    Args:
        table: Characteristic function on the integer grid

    Returns:
        DensityEstimate on [-pi, pi) with du = 2*pi/m
    """
    m = table.m
    half = (m - 1) // 2
    raw = fft.fftshift(fft.fft(fft.ifftshift(table.psi))) / (2 * math.pi)

    real = raw.real
    residue = float(np.max(np.abs(raw.imag)))
    if residue > IMAG_TOL * max(1.0, float(np.max(np.abs(real)))):
        raise ExcessImaginaryError(
            f"inverse transform left an imaginary residue of {residue:.3g}; psi is not Hermitian"
        )

    du = 2 * math.pi / m
    u = (np.arange(m) - half) * du
    clipped = float(-np.sum(real[real < 0]) * du)
    if clipped > 0:
        logger.info(f"Clipped {clipped:.3g} of negative mass from the inverse transform")
    return DensityEstimate.normalized(u, np.clip(real, 0.0, None), du)


def estimate_density_charfunc(s: ScalarField, workers: Optional[int] = None) -> DensityEstimate:
    """Density of s by inverting its characteristic function on omega_count(n) integer frequencies."""
    table = characteristic_function(s, omega_count(s.grid.n), workers=workers)
    return density_from_charfunc(table)
