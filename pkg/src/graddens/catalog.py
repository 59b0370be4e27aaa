"""
Catalog of analytic test functions.
Each member carries exact S, s = S' and S'' and is scaled so that max|s| = 1.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from graddens.config import DEFAULT_DOMAIN
from graddens.core import GridSpec, ScalarField
from graddens.errors import (
    DomainMismatchError,
    InvalidParamsError,
    TooFewSamplesError,
    UnknownFunctionError,
)

__all__ = [
    'CATALOG_DEFAULTS',
    'TestFunction',
    'catalog_lookup',
    'list_functions',
    'sample',
    'discrete_derivative',
]

logger = logging.getLogger(__name__)

# Scan size for locating max|s| before refinement
NORMALIZATION_SCAN_N = 2 ** 15 + 1

RealFn = Callable[[np.ndarray], np.ndarray]

# Default parameters of every member; "b1"/"b2" are accepted by all of them
CATALOG_DEFAULTS: Dict[str, Dict[str, float]] = {
    'quadratic': {'curvature': 8.0},
    'sinusoid': {'freq': 8 * math.pi},
    'exponential': {'rate': 8.0},
    'sum_of_sinusoids': {'freq1': 8 * math.pi, 'freq2': 8 * math.pi * math.sqrt(2.0), 'weight': 0.5},
    'linear_degenerate': {},
}


@dataclass(frozen=True)
class TestFunction:
    """
    Analytic triple (S, s, S'') on [b1, b2].

    The callables already include ``scale``; ``params`` is stored as a sorted
    tuple of pairs so instances stay hashable.
    """

    __test__ = False

    name: str
    b1: float
    b2: float
    S: RealFn
    s: RealFn
    S2: RealFn
    scale: float
    params: Tuple[Tuple[str, float], ...] = ()

    @property
    def domain(self) -> Tuple[float, float]:
        return (self.b1, self.b2)

    @property
    def length(self) -> float:
        return self.b2 - self.b1

    def param_dict(self) -> Dict[str, float]:
        return dict(self.params)


def _const(value: float) -> RealFn:
    return lambda x: np.full_like(np.asarray(x, dtype=float), value)


def _raw_triple(name: str, p: Mapping[str, float]) -> Tuple[RealFn, RealFn, RealFn]:
    """Unscaled S, s, S'' for a catalog member."""
    if name == 'quadratic':
        c = p['curvature']
        if c == 0:
            raise InvalidParamsError("quadratic curvature must be nonzero")
        return (lambda x: 0.5 * c * np.square(x), lambda x: c * np.asarray(x, dtype=float), _const(c))

    if name == 'sinusoid':
        f = p['freq']
        if f == 0:
            raise InvalidParamsError("sinusoid freq must be nonzero")
        return (
            lambda x: -np.cos(f * x) / f,
            lambda x: np.sin(f * x),
            lambda x: f * np.cos(f * x),
        )

    if name == 'exponential':
        lam = p['rate']
        if lam == 0:
            raise InvalidParamsError("exponential rate must be nonzero")
        return (
            lambda x: np.exp(lam * x) / lam,
            lambda x: np.exp(lam * x),
            lambda x: lam * np.exp(lam * x),
        )

    if name == 'sum_of_sinusoids':
        f1, f2, w = p['freq1'], p['freq2'], p['weight']
        if f1 == 0 or f2 == 0:
            raise InvalidParamsError("sum_of_sinusoids frequencies must be nonzero")
        return (
            lambda x: -np.cos(f1 * x) / f1 - w * np.cos(f2 * x) / f2,
            lambda x: np.sin(f1 * x) + w * np.sin(f2 * x),
            lambda x: f1 * np.cos(f1 * x) + w * f2 * np.cos(f2 * x),
        )

    # linear_degenerate
    return (lambda x: np.asarray(x, dtype=float), _const(1.0), _const(0.0))


def _max_abs(s: RealFn, b1: float, b2: float) -> float:
    """max |s| on [b1, b2]: dense scan, then bounded refinement around the best scan point."""
    xs = np.linspace(b1, b2, NORMALIZATION_SCAN_N)
    values = np.abs(s(xs))
    i = int(np.argmax(values))
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, xs.size - 1)]
    res = minimize_scalar(
        lambda x: -abs(float(s(np.array([x]))[0])),
        bounds=(lo, hi),
        method='bounded',
        options={'xatol': 1e-14 * (b2 - b1)},
    )
    return max(float(values[i]), -float(res.fun))


def _scaled(fn: RealFn, scale: float) -> RealFn:
    return lambda x: scale * fn(x)


def list_functions() -> List[str]:
    return list(CATALOG_DEFAULTS)


def catalog_lookup(name: str, params: Optional[Mapping[str, float]] = None) -> TestFunction:
    """
    Look up a catalog member and normalize it so max|s| = 1.

    Args:
        name: One of the CATALOG_DEFAULTS keys
        params: Overrides of the member's parameters, plus optional "b1"/"b2"

    Returns:
        TestFunction on [-0.125, 0.125] unless the domain is overridden
    """
    if name not in CATALOG_DEFAULTS:
        raise UnknownFunctionError(
            f"unknown function '{name}' (choose from {', '.join(CATALOG_DEFAULTS)})"
        )
    params = dict(params or {})
    b1 = float(params.pop('b1', DEFAULT_DOMAIN[0]))
    b2 = float(params.pop('b2', DEFAULT_DOMAIN[1]))
    if not (math.isfinite(b1) and math.isfinite(b2) and b2 > b1):
        raise InvalidParamsError(f"invalid domain for {name} (got b1={b1}, b2={b2})")

    merged = dict(CATALOG_DEFAULTS[name])
    unknown = set(params) - set(merged)
    if unknown:
        raise InvalidParamsError(f"unknown parameter(s) for {name}: {', '.join(sorted(unknown))}")
    for key, value in params.items():
        value = float(value)
        if not math.isfinite(value):
            raise InvalidParamsError(f"parameter {key} must be finite (got {value})")
        merged[key] = value

    S_raw, s_raw, S2_raw = _raw_triple(name, merged)
    peak = _max_abs(s_raw, b1, b2)
    if not peak > 0:
        raise InvalidParamsError(f"{name} has a vanishing derivative on [{b1}, {b2}]")
    scale = 1.0 / peak
    logger.debug(f"Catalog {name}: max|s| = {peak:.15g} on [{b1}, {b2}], scale = {scale:.15g}")

    stored = tuple(sorted({**merged, 'b1': b1, 'b2': b2}.items()))
    return TestFunction(
        name=name,
        b1=b1,
        b2=b2,
        S=_scaled(S_raw, scale),
        s=_scaled(s_raw, scale),
        S2=_scaled(S2_raw, scale),
        scale=scale,
        params=stored,
    )


def sample(tf: TestFunction, grid: GridSpec) -> Tuple[ScalarField, ScalarField]:
    """
    Evaluate S and s exactly at the grid points.

    Args:
        tf: Test function
        grid: Grid over tf's domain

    Returns:
        Tuple of (S field, s field)
    """
    if not grid.same_interval(tf.b1, tf.b2):
        raise DomainMismatchError(
            f"grid [{grid.b1}, {grid.b2}] does not match the domain of {tf.name} [{tf.b1}, {tf.b2}]"
        )
    x = grid.points()
    return ScalarField(grid, tf.S(x)), ScalarField(grid, tf.s(x))


def discrete_derivative(S: ScalarField) -> ScalarField:
    """Central differences inside, second-order one-sided differences at both ends."""
    if S.grid.n < 3:
        raise TooFewSamplesError(f"discrete derivative needs at least 3 samples (got {S.grid.n})")
    return ScalarField(S.grid, np.gradient(S.values, S.grid.dx, edge_order=2))
