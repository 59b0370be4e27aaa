"""
Experiment harness.
Tau sweeps, method comparison, runtime scaling and their CSV artifacts.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from graddens.catalog import TestFunction, sample
from graddens.charfunc import estimate_density_charfunc
from graddens.config import DEFAULT_BINS
from graddens.core import (
    DensityEstimate,
    GridSpec,
    IntervalQuery,
    ScalarField,
    analysis_grid,
    interval_mass,
    l1_distance,
    make_grid,
    read_table,
    rebin_density,
    resample_density,
    write_table,
)
from graddens.errors import DomainError, IngestError, UsageError
from graddens.reference import analytic_density_at
from graddens.utils import best_of, format_seconds, is_power_of_two
from graddens.wave import estimate_density_wave, spectral_coverage

__all__ = [
    'ALIGNMENTS',
    'SweepResult',
    'TimingTable',
    'Comparison',
    'ConvergenceTrace',
    'tau_sweep',
    'sweep_fields',
    'compare_methods',
    'compare_fields',
    'benchmark_scaling',
    'scaling_slopes',
    'interval_convergence',
    'export_sweep',
    'export_timing',
    'load_sweep',
    'load_timing',
]

logger = logging.getLogger(__name__)

ALIGNMENTS = ('rebin', 'resample')
MIN_REPS = 3

PathLike = Union[str, Path]


@dataclass(frozen=True)
class SweepResult:
    """l1 error per tau; NaN marks a tau whose estimate failed."""

    taus: np.ndarray
    errors: np.ndarray
    function_name: str
    n: int
    failures: Dict[float, str] = field(default_factory=dict)

    def __post_init__(self):
        taus = np.asarray(self.taus, dtype=float)
        errors = np.asarray(self.errors, dtype=float)
        if taus.shape != errors.shape:
            raise UsageError(f"{taus.size} taus but {errors.size} errors")
        if taus.size > 1 and np.any(np.diff(taus) >= 0):
            raise UsageError("sweep taus must be strictly descending")
        object.__setattr__(self, 'taus', taus)
        object.__setattr__(self, 'errors', errors)


@dataclass(frozen=True)
class TimingTable:
    """Best-of-reps wall-clock seconds for both estimators per grid size."""

    ns: np.ndarray
    wave_seconds: np.ndarray
    charfunc_seconds: np.ndarray
    repetitions: int

    def __post_init__(self):
        ns = np.asarray(self.ns, dtype=int)
        wave = np.asarray(self.wave_seconds, dtype=float)
        cf = np.asarray(self.charfunc_seconds, dtype=float)
        if not (ns.shape == wave.shape == cf.shape):
            raise UsageError("timing columns must have equal length")
        _check_sizes(ns)
        if np.any(wave <= 0) or np.any(cf <= 0):
            raise UsageError("timings must be positive")
        object.__setattr__(self, 'ns', ns)
        object.__setattr__(self, 'wave_seconds', wave)
        object.__setattr__(self, 'charfunc_seconds', cf)


class Comparison(NamedTuple):
    wave: DensityEstimate
    charfunc: DensityEstimate
    error: float


class ConvergenceTrace(NamedTuple):
    """Interval-averaged wave density per tau next to the closed-form density at u0."""

    query: IntervalQuery
    taus: np.ndarray
    averages: np.ndarray
    analytic: float


def _check_taus(taus: np.ndarray) -> None:
    if np.any(~(taus > 0)) or np.any(~np.isfinite(taus)):
        raise UsageError(f"taus must be positive (got {list(taus)})")
    if taus.size > 1 and np.any(np.diff(taus) >= 0):
        raise UsageError(f"taus must be strictly descending (got {list(taus)})")


def _check_sizes(ns: Sequence[int]) -> None:
    ns = list(ns)
    if not ns or not all(is_power_of_two(int(n)) for n in ns):
        raise UsageError(f"grid sizes must be powers of two (got {ns})")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise UsageError(f"grid sizes must be strictly ascending (got {ns})")


def _check_alignment(alignment: str) -> None:
    if alignment not in ALIGNMENTS:
        raise UsageError(f"alignment must be one of {', '.join(ALIGNMENTS)} (got '{alignment}')")


def _align(
    wave: DensityEstimate,
    charfunc: DensityEstimate,
    s: ScalarField,
    alignment: str,
    bins: int,
) -> Tuple[DensityEstimate, DensityEstimate]:
    """Put both estimates on a common grid."""
    if alignment == 'rebin':
        centers = analysis_grid(float(np.min(s.values)), float(np.max(s.values)), bins)
        return rebin_density(wave, centers), rebin_density(charfunc, centers)
    return wave, resample_density(charfunc, wave.u, pad_zeros=True)


def compare_fields(
    S: ScalarField,
    s: ScalarField,
    tau: float,
    bins: int = DEFAULT_BINS,
    alignment: str = 'rebin',
    charfunc: Optional[DensityEstimate] = None,
    check_coverage: bool = True,
    workers: Optional[int] = None,
) -> Comparison:
    """
    Compare both estimators on sampled data at one tau.

    Args:
        S: Sampled function values
        s: Sampled derivative values
        tau: Free parameter of the wave estimator
        bins: Analysis-grid bins for the "rebin" alignment
        alignment: "rebin" (both onto the analysis grid) or "resample" (charfunc onto the wave grid)
        charfunc: Precomputed charfunc estimate to reuse
        check_coverage: Forwarded to the wave estimator
        workers: Threads for the characteristic-function sum

    Returns:
        Comparison with both estimates on the common grid and their l1 distance
    """
    _check_alignment(alignment)
    wave = estimate_density_wave(S, tau, s=s, check_coverage=check_coverage)
    if charfunc is None:
        charfunc = estimate_density_charfunc(s, workers=workers)
    wave, charfunc = _align(wave, charfunc, s, alignment, bins)
    return Comparison(wave, charfunc, l1_distance(wave, charfunc, resample=False))


def compare_methods(
    tf: TestFunction,
    grid: GridSpec,
    tau: float,
    bins: int = DEFAULT_BINS,
    alignment: str = 'rebin',
    workers: Optional[int] = None,
) -> Comparison:
    """Single-tau comparison of the wave and characteristic-function estimates of a catalog member."""
    S, s = sample(tf, grid)
    return compare_fields(S, s, tau, bins=bins, alignment=alignment, workers=workers)


def sweep_fields(
    S: ScalarField,
    s: ScalarField,
    taus: Sequence[float],
    function_name: str = 'samples',
    bins: int = DEFAULT_BINS,
    alignment: str = 'rebin',
    allow_aliasing: bool = False,
    workers: Optional[int] = None,
) -> SweepResult:
    """
    Run a tau sweep on sampled data.

    The characteristic-function estimate has no tau dependence and is
    computed once. A tau whose estimate fails is logged and recorded as NaN.

    Args:
        S: Sampled function values
        s: Sampled derivative values
        taus: Strictly descending positive taus
        function_name: Label stored in the result
        bins: Analysis-grid bins for the "rebin" alignment
        alignment: "rebin" or "resample"
        allow_aliasing: Accept taus below the spectral coverage limit
        workers: Threads for the characteristic-function sum

    Returns:
        SweepResult
    """
    taus = np.asarray(taus, dtype=float)
    _check_taus(taus)
    _check_alignment(alignment)
    grid = S.grid
    if taus.size == 0:
        return SweepResult(taus, np.empty(0), function_name, grid.n)

    reach = float(np.max(np.abs(s.values)))
    tau_min = reach * grid.dx / math.pi
    if not allow_aliasing and taus[-1] < tau_min:
        raise UsageError(
            f"tau={taus[-1]:g} is below the coverage limit {tau_min:.4g} for n={grid.n} "
            f"(pass allow_aliasing to override)"
        )

    charfunc = estimate_density_charfunc(s, workers=workers)
    errors = np.full(taus.size, np.nan)
    failures: Dict[float, str] = {}
    for i, tau in enumerate(taus):
        try:
            result = compare_fields(
                S, s, tau, bins=bins, alignment=alignment, charfunc=charfunc,
                check_coverage=not allow_aliasing,
            )
        except DomainError as e:
            logger.error(f"Sweep of {function_name} failed at tau={tau:g}: {e}")
            failures[float(tau)] = str(e)
            continue
        errors[i] = result.error
        logger.info(f"{function_name}: tau={tau:g} -> E={result.error:.6g}")
    return SweepResult(taus, errors, function_name, grid.n, failures)


def tau_sweep(
    tf: TestFunction,
    grid: GridSpec,
    taus: Sequence[float],
    bins: int = DEFAULT_BINS,
    alignment: str = 'rebin',
    allow_aliasing: bool = False,
    workers: Optional[int] = None,
) -> SweepResult:
    """Tau sweep of a catalog member; see sweep_fields."""
    S, s = sample(tf, grid)
    return sweep_fields(
        S, s, taus, tf.name, bins=bins, alignment=alignment,
        allow_aliasing=allow_aliasing, workers=workers,
    )


def benchmark_scaling(
    tf: TestFunction,
    ns: Sequence[int],
    tau: float,
    reps: int = 5,
) -> TimingTable:
    """
    Time both estimators over increasing grid sizes.

    Runs serially with a single worker thread; each time is the minimum over
    ``reps`` repetitions.

    Args:
        tf: Test function
        ns: Strictly ascending powers of two
        tau: Free parameter of the wave estimator
        reps: Repetitions per size (at least 3)

    Returns:
        TimingTable
    """
    if reps < MIN_REPS:
        raise UsageError(f"reps must be at least {MIN_REPS} (got {reps})")
    _check_sizes(ns)

    wave_times: List[float] = []
    cf_times: List[float] = []
    for n in ns:
        grid = make_grid(tf.b1, tf.b2, int(n))
        S, s = sample(tf, grid)
        cover = spectral_coverage(grid, tau)
        if float(np.max(np.abs(s.values))) > cover:
            logger.warning(f"n={n}: tau={tau:g} covers only |u| <= {cover:.3g}; wave timing runs aliased")
        wave_times.append(best_of(lambda: estimate_density_wave(S, tau, s=s, check_coverage=False), reps))
        cf_times.append(best_of(lambda: estimate_density_charfunc(s, workers=1), reps))
        logger.info(
            f"n={n}: wave {format_seconds(wave_times[-1])}, charfunc {format_seconds(cf_times[-1])}"
        )
    return TimingTable(np.asarray(ns), np.asarray(wave_times), np.asarray(cf_times), reps)


def scaling_slopes(table: TimingTable) -> Tuple[float, float]:
    """Least-squares slopes of log2(time) against log2(n) as (wave, charfunc)."""
    if table.ns.size < 2:
        raise UsageError("slopes need at least two grid sizes")
    x = np.log2(table.ns)
    wave = np.polyfit(x, np.log2(table.wave_seconds), 1)[0]
    charfunc = np.polyfit(x, np.log2(table.charfunc_seconds), 1)[0]
    return float(wave), float(charfunc)


def interval_convergence(
    tf: TestFunction,
    grid: GridSpec,
    query: IntervalQuery,
    taus: Sequence[float],
) -> ConvergenceTrace:
    """
    Interval mass of the wave estimate divided by the interval width, per tau.

    Args:
        tf: Test function
        grid: Sampling grid
        query: Interval [u0, u0 + alpha]
        taus: Strictly descending positive taus

    Returns:
        ConvergenceTrace with the closed-form density at u0
    """
    taus = np.asarray(taus, dtype=float)
    _check_taus(taus)
    S, s = sample(tf, grid)
    averages = np.array([
        interval_mass(estimate_density_wave(S, tau, s=s), query) / query.alpha for tau in taus
    ])
    return ConvergenceTrace(query, taus, averages, analytic_density_at(tf, query.u0))


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def export_sweep(result: SweepResult, path: PathLike) -> None:
    """Write ``tau,l1_error`` rows."""
    rows = ((_fmt(t), _fmt(e)) for t, e in zip(result.taus, result.errors))
    write_table(path, ('tau', 'l1_error'), rows)
    logger.info(f"Wrote sweep of {result.taus.size} taus to {path}")


def export_timing(table: TimingTable, path: PathLike) -> None:
    """Write ``n,wave_seconds,charfunc_seconds`` rows."""
    rows = (
        (str(int(n)), _fmt(w), _fmt(c))
        for n, w, c in zip(table.ns, table.wave_seconds, table.charfunc_seconds)
    )
    write_table(path, ('n', 'wave_seconds', 'charfunc_seconds'), rows)
    logger.info(f"Wrote timings for {table.ns.size} grid sizes to {path}")


def load_sweep(path: PathLike, function_name: str = 'loaded', n: int = 0) -> SweepResult:
    rows = read_table(path, ('tau', 'l1_error'))
    if any(len(r) != 2 for r in rows):
        raise IngestError(f"{path}: every sweep row needs tau and l1_error")
    return SweepResult(
        np.array([r[0] for r in rows]), np.array([r[1] for r in rows]), function_name, n
    )


def load_timing(path: PathLike, repetitions: int = 0) -> TimingTable:
    rows = read_table(path, ('n', 'wave_seconds', 'charfunc_seconds'))
    if any(len(r) != 3 for r in rows):
        raise IngestError(f"{path}: every timing row needs n, wave_seconds and charfunc_seconds")
    return TimingTable(
        np.array([int(r[0]) for r in rows]),
        np.array([r[1] for r in rows]),
        np.array([r[2] for r in rows]),
        repetitions,
    )
