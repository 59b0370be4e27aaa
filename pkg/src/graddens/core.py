"""
Core containers for gradient density estimation.
Grids, sampled fields, density estimates and the metrics shared by every estimator.
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Tuple, Union

import numpy as np

from graddens.errors import (
    ArtifactIOError,
    GridMismatchError,
    IngestError,
    InvalidDomainError,
    NormalizationError,
    OutOfRangeError,
)

__all__ = [
    'MASS_TOL',
    'GridSpec',
    'ScalarField',
    'ComplexField',
    'DensityEstimate',
    'IntervalQuery',
    'make_grid',
    'l1_distance',
    'l1_mass_distance',
    'resample_density',
    'rebin_density',
    'interval_mass',
    'analysis_grid',
    'read_density_csv',
    'read_table',
    'write_table',
]

logger = logging.getLogger(__name__)

# Unit-mass tolerance for every DensityEstimate
MASS_TOL = 1e-9
# Two u grids are the same grid when their centers agree this closely
GRID_TOL = 1e-12

PathLike = Union[str, Path]


def _readonly(values: np.ndarray) -> np.ndarray:
    values = np.array(values, copy=True)
    values.flags.writeable = False
    return values


def _fmt(x: float) -> str:
    return f"{x:.17g}"


@dataclass(frozen=True)
class GridSpec:
    """Uniform midpoint sampling of the closed interval [b1, b2]."""

    b1: float
    b2: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.b1) and np.isfinite(self.b2)):
            raise InvalidDomainError(f"domain bounds must be finite (got b1={self.b1}, b2={self.b2})")
        if self.b2 <= self.b1:
            raise InvalidDomainError(f"b2 must exceed b1 (got b1={self.b1}, b2={self.b2})")
        if int(self.n) != self.n or self.n < 2:
            raise InvalidDomainError(f"grid needs at least 2 samples (got n={self.n})")
        object.__setattr__(self, 'b1', float(self.b1))
        object.__setattr__(self, 'b2', float(self.b2))
        object.__setattr__(self, 'n', int(self.n))

    @property
    def length(self) -> float:
        return self.b2 - self.b1

    @property
    def dx(self) -> float:
        return (self.b2 - self.b1) / self.n

    def points(self) -> np.ndarray:
        """Sample locations x_i = b1 + (i + 1/2) dx."""
        return self.b1 + (np.arange(self.n) + 0.5) * self.dx

    def same_interval(self, b1: float, b2: float, tol: float = 1e-12) -> bool:
        scale = max(1.0, abs(b1), abs(b2))
        return abs(self.b1 - b1) <= tol * scale and abs(self.b2 - b2) <= tol * scale


@dataclass(frozen=True)
class ScalarField:
    """Real samples (S or s) on a grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise InvalidDomainError(
                f"field has {values.size} values but the grid has {self.grid.n} samples"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidDomainError("field values must all be finite")
        object.__setattr__(self, 'values', _readonly(values))

    def __add__(self, other: Union[float, np.ndarray]) -> 'ScalarField':
        return ScalarField(self.grid, self.values + other)

    def to_csv(self, path: PathLike, name: str = 'S') -> None:
        """Write the field as an ``x,<name>`` CSV with 17 significant digits."""
        rows = zip(self.grid.points(), self.values)
        write_table(path, ('x', name), ((_fmt(x), _fmt(v)) for x, v in rows))


@dataclass(frozen=True)
class ComplexField:
    """Complex samples on a grid; a wave field is unimodular."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n,):
            raise InvalidDomainError(
                f"field has {values.size} values but the grid has {self.grid.n} samples"
            )
        object.__setattr__(self, 'values', _readonly(values))

    def is_unimodular(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(np.abs(self.values) - 1.0) <= tol))


@dataclass(frozen=True)
class DensityEstimate:
    """
    A discrete density on uniformly spaced bin centers.

    ``p`` holds density values (not bin masses); the total mass is
    ``sum(p) * du`` and is always 1 within MASS_TOL.
    """

    u: np.ndarray
    p: np.ndarray
    du: float

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        p = np.asarray(self.p, dtype=float)
        du = float(self.du)
        if u.ndim != 1 or u.shape != p.shape or u.size == 0:
            raise InvalidDomainError(f"u and p must be equal-length vectors (got {u.shape} and {p.shape})")
        if not (du > 0 and np.isfinite(du)):
            raise InvalidDomainError(f"bin width must be positive (got du={du})")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(p))):
            raise InvalidDomainError("density grid and values must be finite")
        if np.any(p < 0):
            raise InvalidDomainError(f"density values must be nonnegative (min p={p.min():.3g})")
        if u.size > 1:
            tol = 1e-9 * du + 8 * np.finfo(float).eps * np.max(np.abs(u))
            if np.max(np.abs(np.diff(u) - du)) > tol:
                raise InvalidDomainError("bin centers must be uniformly spaced by du")
        mass = float(np.sum(p) * du)
        if abs(mass - 1.0) > MASS_TOL:
            raise NormalizationError(f"density mass is {mass:.12g}, expected 1")
        object.__setattr__(self, 'u', _readonly(u))
        object.__setattr__(self, 'p', _readonly(p))
        object.__setattr__(self, 'du', du)

    @classmethod
    def normalized(cls, u: np.ndarray, p: np.ndarray, du: float) -> 'DensityEstimate':
        """Build an estimate after rescaling ``p`` to unit mass."""
        p = np.asarray(p, dtype=float)
        mass = float(np.sum(p) * du)
        if not mass > 0:
            raise NormalizationError("cannot normalize a density with zero mass")
        return cls(u, p / mass, du)

    @property
    def m(self) -> int:
        return self.u.size

    @property
    def edges(self) -> np.ndarray:
        """Bin edges, one more than the number of bins."""
        return np.append(self.u - 0.5 * self.du, self.u[-1] + 0.5 * self.du)

    def mass(self) -> float:
        return float(np.sum(self.p) * self.du)

    def cdf(self) -> np.ndarray:
        """Cumulative mass at each bin's right edge."""
        return np.cumsum(self.p) * self.du

    def mean(self) -> float:
        return float(np.sum(self.u * self.p) * self.du)

    def value_at(self, u: Union[float, np.ndarray]) -> np.ndarray:
        """Piecewise-constant lookup; zero outside the binned range."""
        u = np.asarray(u, dtype=float)
        idx = np.floor((u - self.edges[0]) / self.du).astype(int)
        inside = (idx >= 0) & (idx < self.m)
        return np.where(inside, self.p[np.clip(idx, 0, self.m - 1)], 0.0)

    def same_grid(self, other: 'DensityEstimate') -> bool:
        return (
            self.m == other.m
            and abs(self.du - other.du) <= GRID_TOL
            and float(np.max(np.abs(self.u - other.u))) <= GRID_TOL
        )

    def _cdf_at(self, points: np.ndarray) -> np.ndarray:
        # The CDF of a piecewise-constant density is piecewise linear, so
        # interpolating it at arbitrary points is exact fractional-overlap weighting.
        cdf = np.concatenate(([0.0], self.cdf()))
        return np.interp(points, self.edges, cdf)

    def to_csv(self, path: PathLike) -> None:
        """Write the estimate as a ``u,p`` CSV with 17 significant digits."""
        write_table(path, ('u', 'p'), ((_fmt(u), _fmt(p)) for u, p in zip(self.u, self.p)))


@dataclass(frozen=True)
class IntervalQuery:
    """The interval [u0, u0 + alpha]."""

    u0: float
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidDomainError(f"interval width must be positive (got alpha={self.alpha})")


def make_grid(b1: float, b2: float, n: int) -> GridSpec:
    """
    Build a uniform midpoint grid on [b1, b2].

    Args:
        b1: Domain start
        b2: Domain end
        n: Number of samples (at least 2)

    Returns:
        GridSpec with spacing (b2 - b1) / n
    """
    return GridSpec(b1, b2, n)


def uniform_centers(target_u: Sequence[float]) -> Tuple[np.ndarray, float]:
    """Validate a uniform, strictly increasing vector of bin centers and return it with its spacing."""
    target = np.asarray(target_u, dtype=float)
    if target.ndim != 1 or target.size < 2:
        raise InvalidDomainError("target grid needs at least two centers")
    steps = np.diff(target)
    du = float((target[-1] - target[0]) / (target.size - 1))
    if not du > 0 or np.any(steps <= 0):
        raise InvalidDomainError("target grid must be strictly increasing")
    if np.max(np.abs(steps - du)) > 1e-9 * du + 8 * np.finfo(float).eps * np.max(np.abs(target)):
        raise InvalidDomainError("target grid must be uniform")
    return target, du


def l1_distance(a: DensityEstimate, b: DensityEstimate, resample: bool = True) -> float:
    """
    Sum of absolute bin-value differences between two estimates.

    The sum is taken over raw density values, not multiplied by du.

    Args:
        a: Reference estimate; its grid is the comparison grid
        b: Estimate to compare
        resample: Resample ``b`` onto ``a``'s grid when the grids differ

    Returns:
        float: sum_k |a.p_k - b.p_k|
    """
    if not a.same_grid(b):
        if not resample:
            raise GridMismatchError(
                f"estimates live on different grids (m={a.m}, du={a.du:.6g} vs m={b.m}, du={b.du:.6g})"
            )
        b = resample_density(b, a.u)
    return float(np.sum(np.abs(a.p - b.p)))


def l1_mass_distance(a: DensityEstimate, b: DensityEstimate, resample: bool = True) -> float:
    """l1 distance between bin probability vectors, in [0, 2]."""
    return l1_distance(a, b, resample=resample) * a.du


def resample_density(
    d: DensityEstimate,
    target_u: Sequence[float],
    pad_zeros: bool = False,
) -> DensityEstimate:
    """
    Linearly interpolate an estimate onto new bin centers and renormalize.

    Args:
        d: Estimate to resample
        target_u: Uniform, strictly increasing bin centers
        pad_zeros: Accept targets reaching further than one bin past ``d``'s range

    Returns:
        DensityEstimate on ``target_u``
    """
    target, du = uniform_centers(target_u)
    lo, hi = d.u[0] - d.du, d.u[-1] + d.du
    if not pad_zeros and (target[0] < lo - GRID_TOL or target[-1] > hi + GRID_TOL):
        raise OutOfRangeError(
            f"target grid [{target[0]:.6g}, {target[-1]:.6g}] extends more than one bin "
            f"past the estimate's range [{d.u[0]:.6g}, {d.u[-1]:.6g}]"
        )
    p = np.interp(target, d.u, d.p, left=0.0, right=0.0)
    if not np.sum(p) > 0:
        raise OutOfRangeError("target grid does not overlap the estimate's support")
    return DensityEstimate.normalized(target, p, du)


def rebin_density(d: DensityEstimate, target_u: Sequence[float]) -> DensityEstimate:
    """
    Project an estimate onto new bins by integrating it over each target bin.

    Every target value is the interval mass of ``d`` over that bin divided by
    the bin width. Mass falling outside the target range is dropped and the
    result renormalized.

    Args:
        d: Estimate to project
        target_u: Uniform, strictly increasing bin centers

    Returns:
        DensityEstimate on ``target_u``
    """
    target, du = uniform_centers(target_u)
    edges = np.append(target - 0.5 * du, target[-1] + 0.5 * du)
    masses = np.diff(d._cdf_at(edges))
    kept = float(np.sum(masses))
    if not kept > 0:
        raise OutOfRangeError("target grid does not overlap the estimate's support")
    lost = 1.0 - kept
    if lost > 1e-6:
        logger.warning(f"Rebinning dropped {lost:.3g} of the mass outside [{edges[0]:.4g}, {edges[-1]:.4g}]")
    return DensityEstimate.normalized(target, np.clip(masses, 0.0, None) / du, du)


def interval_mass(d: DensityEstimate, q: IntervalQuery) -> float:
    """
    Mass of an estimate over [u0, u0 + alpha].

    Edge bins are weighted by their fractional overlap with the interval.

    Args:
        d: Density estimate
        q: Interval query

    Returns:
        float: Integral of the piecewise-constant density over the interval
    """
    lo, hi = q.u0, q.u0 + q.alpha
    first, last = d.edges[0], d.edges[-1]
    slack = GRID_TOL * max(1.0, abs(first), abs(last))
    if lo < first - slack or hi > last + slack:
        raise OutOfRangeError(
            f"interval [{lo:.6g}, {hi:.6g}] is outside the estimate's range [{first:.6g}, {last:.6g}]"
        )
    left, right = d._cdf_at(np.array([lo, hi]))
    return float(right - left)


def analysis_grid(lo: float, hi: float, bins: int, pad: float = 0.25) -> np.ndarray:
    """
    Bin centers of a fixed comparison grid covering [lo, hi].

    The range is widened by ``pad`` times its width on each side so that the
    spectral leakage of either estimator stays inside.

    Args:
        lo: Smallest derivative value
        hi: Largest derivative value
        bins: Number of bins
        pad: Relative padding on each side

    Returns:
        np.ndarray: Uniform bin centers
    """
    if bins < 2:
        raise InvalidDomainError(f"analysis grid needs at least 2 bins (got {bins})")
    width = hi - lo
    if width <= 0:
        width = max(abs(lo), 1.0)
    start, stop = lo - pad * width, hi + pad * width
    du = (stop - start) / bins
    return start + (np.arange(bins) + 0.5) * du


def read_density_csv(path: PathLike) -> DensityEstimate:
    """
    Read an estimate written by DensityEstimate.to_csv.

    Args:
        path: CSV file with header ``u,p``

    Returns:
        DensityEstimate
    """
    rows = read_table(path, ('u', 'p'))
    if len(rows) < 2:
        raise IngestError(f"{path}: a density CSV needs at least two rows")
    u = np.array([r[0] for r in rows])
    p = np.array([r[1] for r in rows])
    du = float((u[-1] - u[0]) / (u.size - 1))
    return DensityEstimate(u, p, du)


def write_table(path: PathLike, header: Sequence[str], rows) -> None:
    try:
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        raise ArtifactIOError(e.errno, f"Failed to write {path}: {e.strerror}", str(path)) from e


def read_table(path: PathLike, header: Sequence[str]):
    try:
        with open(path, newline='') as f:
            reader = csv.reader(f)
            first = next(reader, None)
            if first is None or [h.strip() for h in first] != list(header):
                raise IngestError(f"{path}: expected header {','.join(header)}")
            try:
                return [tuple(float(x) for x in row) for row in reader if row]
            except ValueError as e:
                raise IngestError(f"{path}: unparsable number ({e})") from e
    except OSError as e:
        raise ArtifactIOError(e.errno, f"Failed to read {path}: {e.strerror}", str(path)) from e
