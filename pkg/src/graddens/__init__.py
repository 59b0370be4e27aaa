"""Gradient density estimation from the power spectrum of exp(iS/tau)."""

from graddens.catalog import TestFunction, catalog_lookup, discrete_derivative, sample
from graddens.charfunc import characteristic_function, density_from_charfunc, estimate_density_charfunc
from graddens.core import (
    DensityEstimate,
    GridSpec,
    IntervalQuery,
    ScalarField,
    interval_mass,
    l1_distance,
    make_grid,
    resample_density,
)
from graddens.harness import benchmark_scaling, compare_methods, tau_sweep
from graddens.reference import analytic_density_at, detect_degenerate, find_level_set, histogram_oracle
from graddens.wave import build_wavefunction, estimate_density_wave, scaled_transform

__version__ = "0.1.0"
