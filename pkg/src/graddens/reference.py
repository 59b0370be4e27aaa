"""
Closed-form reference densities and cross-checks.

Level sets of s, the degenerate sets B (zeros of S'') and C (their images
plus the endpoint derivative values), the histogram oracle and the
stationary-phase form of the scaled transform.
"""

import json
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect

from graddens.catalog import TestFunction
from graddens.config import DEFAULT_SCAN_N
from graddens.core import DensityEstimate, ScalarField
from graddens.errors import (
    DegenerateQueryError,
    EverywhereDegenerateError,
    InvalidDomainError,
    ScanTooCoarseError,
)
from graddens.utils import retry_on_coarse_scan
from graddens.wave import validate_tau

__all__ = [
    'EPS_B_REL',
    'EPS_C',
    'LevelSet',
    'DegeneracyReport',
    'find_level_set',
    'detect_degenerate',
    'analytic_density_at',
    'analytic_density_grid',
    'histogram_oracle',
    'stationary_phase_transform',
    'averaged_spa_power',
]

logger = logging.getLogger(__name__)

# Curvature threshold, relative to max|S''| on the scan grid
EPS_B_REL = 1e-8
# Absolute distance in u below which a value counts as a member of C
EPS_C = 1e-6
# Bisection tolerance, relative to the domain length
ROOT_XTOL_REL = 1e-13
GRID_BISECTION_STEPS = 64


@dataclass(frozen=True)
class LevelSet:
    """All x in the open domain with s(x) = u0, with S''(x) at each."""

    u0: float
    roots: np.ndarray
    curvatures: np.ndarray

    def __len__(self) -> int:
        return int(self.roots.size)


@dataclass(frozen=True)
class DegeneracyReport:
    b_points: np.ndarray
    c_values: np.ndarray
    eta: float = 0.0
    u0: Optional[float] = None
    clean: bool = False
    eps_b: float = 0.0

    def to_dict(self) -> dict:
        return {
            'u0': self.u0,
            'clean': self.clean,
            'eta': self.eta,
            'b_points': [float(x) for x in self.b_points],
            'c_values': [float(c) for c in self.c_values],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _bracket_roots(f: Callable[[np.ndarray], np.ndarray], b1: float, b2: float, scan_n: int) -> np.ndarray:
    """Roots of f on [b1, b2] by sign-change bracketing on a scan grid and bisection."""
    xs = np.linspace(b1, b2, scan_n)
    fx = f(xs)
    roots = list(xs[fx == 0.0])
    xtol = ROOT_XTOL_REL * (b2 - b1)
    scalar = lambda x: float(f(np.array([x]))[0])
    for i in np.flatnonzero(fx[:-1] * fx[1:] < 0):
        roots.append(bisect(scalar, xs[i], xs[i + 1], xtol=xtol))
    return np.sort(np.asarray(roots, dtype=float))


@lru_cache(maxsize=64)
def _degenerate_sets(tf: TestFunction, scan_n: int) -> Tuple[np.ndarray, np.ndarray, float]:
    xs = np.linspace(tf.b1, tf.b2, scan_n)
    curv = np.abs(tf.S2(xs))
    eps_b = EPS_B_REL * float(np.max(curv))
    flat = float(np.mean(curv <= eps_b))
    if flat > 0.5:
        raise EverywhereDegenerateError(
            f"S'' vanishes on {flat:.0%} of the domain of {tf.name}; "
            f"the zero set of S'' must have measure zero"
        )

    b_points = _bracket_roots(tf.S2, tf.b1, tf.b2, scan_n)
    images = np.concatenate((tf.s(b_points), tf.s(np.array([tf.b1, tf.b2]))))
    images = np.sort(images)
    c_values: List[float] = []
    for c in images:
        if not c_values or c - c_values[-1] > EPS_C:
            c_values.append(float(c))
    c_values = np.asarray(c_values)
    b_points.flags.writeable = False
    c_values.flags.writeable = False
    return b_points, c_values, eps_b


def detect_degenerate(
    tf: TestFunction,
    u0: Optional[float] = None,
    scan_n: int = DEFAULT_SCAN_N,
) -> DegeneracyReport:
    """
    Locate the sets B and C and classify a query value.

    Args:
        tf: Test function
        u0: Optional query; clean when its distance to C exceeds EPS_C
        scan_n: Scan grid size for bracketing the zeros of S''

    Returns:
        DegeneracyReport with eta = half the distance from u0 to C when clean
    """
    b_points, c_values, eps_b = _degenerate_sets(tf, scan_n)
    if u0 is None:
        return DegeneracyReport(b_points, c_values, eps_b=eps_b)
    distance = float(np.min(np.abs(c_values - u0)))
    clean = distance > EPS_C
    return DegeneracyReport(
        b_points, c_values, eta=0.5 * distance if clean else 0.0, u0=float(u0), clean=clean, eps_b=eps_b
    )


def find_level_set(tf: TestFunction, u0: float, scan_n: int = DEFAULT_SCAN_N) -> LevelSet:
    """
    Solve s(x) = u0 on the open domain.

    Args:
        tf: Test function
        u0: Query value, away from C
        scan_n: Scan grid size for bracketing

    Returns:
        LevelSet with roots in ascending order
    """
    ends = tf.s(np.array([tf.b1, tf.b2]))
    if np.any(np.abs(ends - u0) <= EPS_C):
        raise DegenerateQueryError(f"u0={u0:g} is within {EPS_C:g} of an endpoint derivative value {ends}")

    roots = _bracket_roots(lambda x: tf.s(x) - u0, tf.b1, tf.b2, scan_n)
    cell = (tf.b2 - tf.b1) / (scan_n - 1)
    if roots.size > 1 and np.min(np.diff(roots)) < 2 * cell:
        raise ScanTooCoarseError(
            f"roots of s - {u0:g} closer than two scan cells (scan_n={scan_n})"
        )

    curvatures = tf.S2(roots) if roots.size else np.empty(0)
    eps_b = EPS_B_REL * float(np.max(np.abs(tf.S2(np.linspace(tf.b1, tf.b2, scan_n)))))
    if np.any(np.abs(curvatures) <= eps_b):
        raise DegenerateQueryError(f"u0={u0:g} has a root with vanishing curvature; u0 lies in C")
    return LevelSet(float(u0), roots, np.asarray(curvatures, dtype=float))


_find_level_set_refining = retry_on_coarse_scan(max_retries=3, factor=4)(find_level_set)


def _clean_level_set(tf: TestFunction, u0: float, scan_n: int) -> LevelSet:
    report = detect_degenerate(tf, u0, scan_n=scan_n)
    if not report.clean:
        raise DegenerateQueryError(
            f"u0={u0:g} lies within {EPS_C:g} of the degenerate set C = {list(report.c_values)}"
        )
    return _find_level_set_refining(tf, u0, scan_n=scan_n)


def analytic_density_at(tf: TestFunction, u0: float, scan_n: int = DEFAULT_SCAN_N) -> float:
    """(1/L) * sum 1/|S''(x_k)| over the level set of u0; 0 when it is empty."""
    level = _clean_level_set(tf, u0, scan_n)
    if len(level) == 0:
        return 0.0
    return float(np.sum(1.0 / np.abs(level.curvatures)) / tf.length)


def analytic_density_grid(tf: TestFunction, u: Sequence[float], scan_n: int = DEFAULT_SCAN_N) -> np.ndarray:
    """
    Vectorized closed-form density at many points.

    s is monotone between consecutive points of {b1} + B + {b2}; each piece
    contributes one root per covered u, found by array bisection. Points
    within EPS_C of C get 0.

    Args:
        tf: Test function
        u: Evaluation points
        scan_n: Scan grid size for the set B

    Returns:
        np.ndarray of density values, same shape as ``u``
    """
    u = np.asarray(u, dtype=float)
    b_points, c_values, _ = _degenerate_sets(tf, scan_n)
    breaks = np.unique(np.concatenate(([tf.b1], b_points, [tf.b2])))
    total = np.zeros_like(u)

    for a, b in zip(breaks[:-1], breaks[1:]):
        sa, sb = tf.s(np.array([a, b]))
        lo, hi = min(sa, sb), max(sa, sb)
        inside = (u > lo) & (u < hi)
        if not np.any(inside):
            continue
        target = u[inside]
        left = np.full(target.shape, a)
        right = np.full(target.shape, b)
        increasing = sb > sa
        for _ in range(GRID_BISECTION_STEPS):
            mid = 0.5 * (left + right)
            below = tf.s(mid) < target
            go_right = below if increasing else ~below
            left = np.where(go_right, mid, left)
            right = np.where(go_right, right, mid)
        x = 0.5 * (left + right)
        total[inside] += 1.0 / np.abs(tf.S2(x))

    near_c = np.min(np.abs(u[..., None] - c_values), axis=-1) <= EPS_C
    total[near_c] = 0.0
    return total / tf.length


def histogram_oracle(s: ScalarField, bins: int = 256) -> DensityEstimate:
    """
    Brute-force histogram of the sampled derivative values.

    Bin centers run from min(s) to max(s), so the outer bins extend half a bin
    past the data range.

    Args:
        s: Sampled derivative values
        bins: Number of bins (at least 8)

    Returns:
        DensityEstimate with unit mass
    """
    if bins < 8:
        raise InvalidDomainError(f"histogram oracle needs at least 8 bins (got {bins})")
    values = s.values
    lo, hi = float(np.min(values)), float(np.max(values))
    span = hi - lo
    if span > 0:
        du = span / (bins - 1)
        centers = lo + np.arange(bins) * du
    else:
        du = max(abs(lo), 1.0) / bins
        centers = lo + (np.arange(bins) - bins // 2) * du
    edges = np.append(centers - 0.5 * du, centers[-1] + 0.5 * du)
    counts, _ = np.histogram(values, bins=edges)
    return DensityEstimate.normalized(centers, counts.astype(float), du)


def stationary_phase_transform(
    tf: TestFunction,
    u0: float,
    tau: float,
    scan_n: int = DEFAULT_SCAN_N,
) -> complex:
    """
    Leading stationary-phase approximation of the scaled transform at u0.

    Args:
        tf: Test function
        u0: Clean query value
        tau: Free parameter
        scan_n: Scan grid size for the level set

    Returns:
        complex: (1/sqrt(L)) * sum exp(i(S - u0 x)/tau) * exp(+-i pi/4) / sqrt|S''|
    """
    tau = validate_tau(tau)
    level = _clean_level_set(tf, u0, scan_n)
    if len(level) == 0:
        return 0j
    x, curv = level.roots, level.curvatures
    phase = (tf.S(x) - u0 * x) / tau + np.sign(curv) * (math.pi / 4)
    terms = np.exp(1j * phase) / np.sqrt(np.abs(curv))
    return complex(np.sum(terms) / math.sqrt(tf.length))


def averaged_spa_power(
    tf: TestFunction,
    u0: float,
    taus: Sequence[float],
    scan_n: int = DEFAULT_SCAN_N,
) -> float:
    """Mean of |stationary_phase_transform|^2 over a set of tau values."""
    taus = np.asarray(taus, dtype=float)
    if taus.size == 0 or np.any(~(taus > 0)):
        raise InvalidDomainError("averaging needs at least one positive tau")
    level = _clean_level_set(tf, u0, scan_n)
    if len(level) == 0:
        return 0.0
    x, curv = level.roots, level.curvatures
    phase = np.outer(1.0 / taus, tf.S(x) - u0 * x) + np.sign(curv) * (math.pi / 4)
    values = np.exp(1j * phase) @ (1.0 / np.sqrt(np.abs(curv))) / math.sqrt(tf.length)
    return float(np.mean(np.abs(values) ** 2))
