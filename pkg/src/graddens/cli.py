#!/usr/bin/env python3
"""
Command-line front end for graddens.
Runs the estimators on catalog members or ingested samples and writes CSV/JSON artifacts.
"""

import argparse
import logging
import math
import os
import re
import sys
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ValidationError, field_validator, model_validator

from graddens.catalog import catalog_lookup, discrete_derivative, list_functions, sample
from graddens.charfunc import estimate_density_charfunc
from graddens.config import (
    BENCH_NS,
    BENCH_REPS,
    DEFAULT_BINS,
    DEFAULT_N,
    FULL_N,
    DEFAULT_TAU,
    LOG_DIR,
    LOG_LEVEL,
    OUTPUT_DIR,
    SWEEP_TAUS,
)
from graddens.core import GridSpec, ScalarField, read_table
from graddens.errors import (
    EXIT_OK,
    GradDensError,
    IngestError,
    UsageError,
    exit_status_for,
)
from graddens.harness import (
    benchmark_scaling,
    compare_fields,
    export_sweep,
    export_timing,
    scaling_slopes,
    sweep_fields,
)
from graddens.reference import detect_degenerate, histogram_oracle
from graddens.wave import estimate_density_wave

__all__ = [
    'RunConfig',
    'parse_number',
    'parse_args',
    'ingest_samples',
    'dispatch',
    'setup_logging',
    'main',
]

logger = logging.getLogger(__name__)

COMMANDS = ('estimate', 'compare', 'sweep', 'bench', 'degeneracy')
MIN_INGEST_ROWS = 8
SPACING_RTOL = 1e-9

_PI_NUMBER = re.compile(r'^([+-]?(?:(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?)\s*\*?\s*pi$', re.IGNORECASE)


class RunConfig(BaseModel):
    """Validated settings for one CLI invocation."""

    command: Literal['estimate', 'compare', 'sweep', 'bench', 'degeneracy']
    function: Optional[str] = None
    input: Optional[Path] = None
    params: Dict[str, float] = {}
    domain: Optional[Tuple[float, float]] = None
    n: Optional[int] = None
    method: Literal['wave', 'charfunc', 'histogram'] = 'wave'
    tau: float = DEFAULT_TAU
    taus: List[float] = list(SWEEP_TAUS)
    ns: List[int] = list(BENCH_NS)
    reps: int = BENCH_REPS
    bins: int = DEFAULT_BINS
    alignment: Literal['rebin', 'resample'] = 'rebin'
    allow_aliasing: bool = False
    u0: Optional[float] = None
    out: Optional[Path] = None
    out_dir: Optional[Path] = None
    format: Literal['csv', 'json'] = 'csv'
    log_level: str = LOG_LEVEL
    threads: Optional[int] = None

    @field_validator('n')
    @classmethod
    def check_n(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 3:
            raise ValueError(f"--n must be at least 3 (got {v})")
        return v

    @field_validator('tau')
    @classmethod
    def check_tau(cls, v: float) -> float:
        if not (v > 0 and math.isfinite(v)):
            raise ValueError(f"--tau must be positive (got {v})")
        return v

    @field_validator('bins')
    @classmethod
    def check_bins(cls, v: int) -> int:
        if v < 8:
            raise ValueError(f"--bins must be at least 8 (got {v})")
        return v

    @field_validator('log_level')
    @classmethod
    def check_log_level(cls, v: str) -> str:
        v = v.upper()
        if v not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            raise ValueError(f"--log-level must be a logging level name (got {v})")
        return v

    @model_validator(mode='after')
    def check_sources(self) -> 'RunConfig':
        if self.function is not None and self.input is not None:
            raise ValueError("--function and --input are conflicting sources; give exactly one")
        if self.function is None and self.input is None:
            raise ValueError("one of --function or --input is required")
        if self.input is not None and self.command in ('bench', 'degeneracy'):
            raise ValueError(f"{self.command} needs --function; samples from --input have no closed form")
        if self.input is not None and (self.domain is not None or self.params):
            raise ValueError("--domain and --param apply to --function only")
        return self


def parse_number(text: str, flag: str = 'value') -> float:
    """
    Parse a real number, accepting multiples of pi ("pi", "8pi", "2.5*pi").

    Args:
        text: Raw flag value
        flag: Flag name for the error message

    Returns:
        float
    """
    raw = text.strip()
    match = _PI_NUMBER.match(raw)
    try:
        if match:
            coeff = match.group(1)
            if coeff in ('', '+', '-'):
                coeff += '1'
            return float(coeff) * math.pi
        value = float(raw)
    except ValueError:
        value = float('nan')
    if not math.isfinite(value):
        raise UsageError(f"unparsable number '{text}' for {flag}")
    return value


def _number_list(text: str, flag: str) -> List[float]:
    parts = [p for p in text.split(',') if p.strip()]
    return [parse_number(p, flag) for p in parts]


def _int_list(text: str, flag: str) -> List[int]:
    values = _number_list(text, flag)
    if any(v != int(v) for v in values):
        raise UsageError(f"{flag} expects integers (got '{text}')")
    return [int(v) for v in values]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument('--log-level', default=LOG_LEVEL, help=f'Logging level (default: {LOG_LEVEL})')
    common.add_argument('--threads', type=int, help='Worker threads for the characteristic function (0 = auto)')
    common.add_argument('--format', choices=['csv', 'json'], default='csv', help='Report format')

    source = _Parser(add_help=False)
    source.add_argument('--function', help=f"Catalog member ({', '.join(list_functions())})")
    source.add_argument('--input', type=Path, help='CSV of samples with header x,S')
    source.add_argument('--param', action='append', default=[], metavar='K=V', help='Catalog parameter override')
    source.add_argument('--domain', metavar='B1,B2', help='Domain override for catalog members')
    source.add_argument('--n', help=f"Number of samples (default: {DEFAULT_N}, doubled up to {FULL_N} until tau covers max|s|)")

    parser = _Parser(prog='graddens', description='Estimate the density of a function\'s derivative')
    sub = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)

    p = sub.add_parser('estimate', parents=[common, source], help='Estimate the gradient density')
    p.add_argument('--method', choices=['wave', 'charfunc', 'histogram'], default='wave')
    p.add_argument('--tau', help=f'Free parameter (default: {DEFAULT_TAU})')
    p.add_argument('--bins', type=int, default=DEFAULT_BINS, help='Bins for the histogram method')
    p.add_argument('--out', type=Path, help='Output CSV (default: <method>.csv)')

    p = sub.add_parser('compare', parents=[common, source], help='Compare the wave and characteristic-function estimates')
    p.add_argument('--tau', help=f'Free parameter (default: {DEFAULT_TAU})')
    p.add_argument('--bins', type=int, default=DEFAULT_BINS, help='Analysis-grid bins')
    p.add_argument('--alignment', choices=['rebin', 'resample'], default='rebin')
    p.add_argument('--out-dir', type=Path, help='Directory for wave.csv and charfunc.csv')

    p = sub.add_parser('sweep', parents=[common, source], help='l1 error over a descending tau list')
    p.add_argument('--taus', help='Comma-separated descending taus')
    p.add_argument('--bins', type=int, default=DEFAULT_BINS, help='Analysis-grid bins')
    p.add_argument('--alignment', choices=['rebin', 'resample'], default='rebin')
    p.add_argument('--allow-aliasing', action='store_true', help='Accept taus below the coverage limit')
    p.add_argument('--out', type=Path, help='Output CSV (default: sweep.csv)')

    p = sub.add_parser('bench', parents=[common, source], help='Runtime scaling of both estimators')
    p.add_argument('--ns', help='Comma-separated ascending powers of two')
    p.add_argument('--tau', help=f'Free parameter (default: {DEFAULT_TAU})')
    p.add_argument('--reps', type=int, default=BENCH_REPS, help=f'Repetitions per size (default: {BENCH_REPS})')
    p.add_argument('--out', type=Path, help='Output CSV (default: timing.csv)')

    p = sub.add_parser('degeneracy', parents=[common, source], help='Report the degenerate sets B and C')
    p.add_argument('--u0', help='Query value to classify')
    return parser


def _parse_params(items: Sequence[str]) -> Dict[str, float]:
    params: Dict[str, float] = {}
    for item in items:
        key, sep, value = item.partition('=')
        if not sep or not key.strip():
            raise UsageError(f"--param expects K=V (got '{item}')")
        params[key.strip()] = parse_number(value, f'--param {key.strip()}')
    return params


def parse_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """
    Parse and validate command-line arguments.

    Args:
        argv: Arguments without the program name (default: sys.argv[1:])

    Returns:
        RunConfig
    """
    args = _build_parser().parse_args(argv)
    values = {
        'command': args.command,
        'function': args.function,
        'input': args.input,
        'params': _parse_params(args.param),
        'log_level': args.log_level,
        'threads': args.threads,
        'format': args.format,
    }
    if args.domain is not None:
        bounds = _number_list(args.domain, '--domain')
        if len(bounds) != 2:
            raise UsageError(f"--domain expects B1,B2 (got '{args.domain}')")
        values['domain'] = tuple(bounds)
    if args.n is not None:
        n = parse_number(args.n, '--n')
        if n != int(n):
            raise UsageError(f"--n expects an integer (got '{args.n}')")
        values['n'] = int(n)
    if getattr(args, 'tau', None) is not None:
        values['tau'] = parse_number(args.tau, '--tau')
    if getattr(args, 'taus', None) is not None:
        values['taus'] = _number_list(args.taus, '--taus')
    if getattr(args, 'ns', None) is not None:
        values['ns'] = _int_list(args.ns, '--ns')
    if getattr(args, 'u0', None) is not None:
        values['u0'] = parse_number(args.u0, '--u0')
    for name in ('method', 'bins', 'alignment', 'allow_aliasing', 'reps', 'out', 'out_dir'):
        if getattr(args, name, None) is not None:
            values[name] = getattr(args, name)

    try:
        return RunConfig(**values)
    except ValidationError as e:
        messages = '; '.join(err['msg'].removeprefix('Value error, ') for err in e.errors())
        raise UsageError(f"{args.command}: {messages}") from e


def ingest_samples(path: Path) -> ScalarField:
    """
    Read function samples from a CSV with header ``x,S``.

    The grid is inferred from the x column, which must be strictly increasing
    and uniform within SPACING_RTOL.

    Args:
        path: CSV file

    Returns:
        ScalarField of S on the inferred midpoint grid
    """
    rows = read_table(path, ('x', 'S'))
    if len(rows) < MIN_INGEST_ROWS:
        raise IngestError(f"{path}: need at least {MIN_INGEST_ROWS} samples (got {len(rows)})")
    if any(len(r) != 2 for r in rows):
        raise IngestError(f"{path}: every row needs x and S")
    data = np.array(rows)
    x, S = data[:, 0], data[:, 1]
    if not np.all(np.isfinite(data)):
        raise IngestError(f"{path}: samples contain NaN or infinite values")
    steps = np.diff(x)
    if np.any(steps <= 0):
        raise IngestError(f"{path}: x must be strictly increasing")
    dx = float((x[-1] - x[0]) / (x.size - 1))
    if np.max(np.abs(steps - dx)) > SPACING_RTOL * dx:
        raise IngestError(f"{path}: x spacing is not uniform within {SPACING_RTOL:g} relative")
    grid = GridSpec(x[0] - 0.5 * dx, x[-1] + 0.5 * dx, x.size)
    logger.info(f"Ingested {x.size} samples from {path} on [{grid.b1:.6g}, {grid.b2:.6g}], dx={dx:.4g}")
    return ScalarField(grid, S)


def _sample_count(config: RunConfig, length: float) -> int:
    """
    Grid size for a catalog member when --n is not given.

    Catalog members have max|s| = 1, so the spectrum covers them once
    pi * tau * n / L >= 1. Starting at DEFAULT_N, n is doubled until the
    smallest tau in use is covered or FULL_N is reached.
    """
    if config.n is not None:
        return config.n
    tau = min(config.taus) if config.command == 'sweep' and config.taus else config.tau
    n = DEFAULT_N
    while n < FULL_N and math.pi * tau * n / length < 1.0:
        n *= 2
    if n != DEFAULT_N:
        logger.info(f"Using n={n} so that tau={tau:g} covers max|s|=1 (pass --n to override)")
    return n


def _fields(config: RunConfig) -> Tuple[ScalarField, ScalarField, str]:
    """S and s fields for the configured source."""
    if config.input is not None:
        S = ingest_samples(config.input)
        return S, discrete_derivative(S), config.input.stem
    tf = _test_function(config)
    S, s = sample(tf, GridSpec(tf.b1, tf.b2, _sample_count(config, tf.length)))
    return S, s, tf.name


def _test_function(config: RunConfig):
    params = dict(config.params)
    if config.domain is not None:
        params['b1'], params['b2'] = config.domain
    return catalog_lookup(config.function, params)


def _output(config: RunConfig, default_name: str) -> Path:
    if config.out is not None:
        return config.out
    return Path(OUTPUT_DIR) / default_name


def _run_estimate(config: RunConfig) -> None:
    S, s, name = _fields(config)
    if config.method == 'wave':
        density = estimate_density_wave(S, config.tau, s=s)
    elif config.method == 'charfunc':
        density = estimate_density_charfunc(s, workers=config.threads)
    else:
        density = histogram_oracle(s, config.bins)
    path = _output(config, f'{config.method}.csv')
    density.to_csv(path)
    logger.info(f"{name}: {config.method} estimate with {density.m} bins written to {path}")
    print(path)


def _run_compare(config: RunConfig) -> None:
    S, s, name = _fields(config)
    result = compare_fields(
        S, s, config.tau, bins=config.bins, alignment=config.alignment, workers=config.threads
    )
    out_dir = config.out_dir if config.out_dir is not None else Path(OUTPUT_DIR)
    out_dir.mkdir(parents=True, exist_ok=True)
    result.wave.to_csv(out_dir / 'wave.csv')
    result.charfunc.to_csv(out_dir / 'charfunc.csv')
    logger.info(f"{name}: compared at tau={config.tau:g}, wrote wave.csv and charfunc.csv to {out_dir}")
    print(f"E={result.error:.17g}")


def _run_sweep(config: RunConfig) -> None:
    S, s, name = _fields(config)
    result = sweep_fields(
        S, s, config.taus, name, bins=config.bins, alignment=config.alignment,
        allow_aliasing=config.allow_aliasing, workers=config.threads,
    )
    path = _output(config, 'sweep.csv')
    export_sweep(result, path)
    for tau, error in zip(result.taus, result.errors):
        print(f"tau={tau:g} E={error:.6g}")
    if result.failures:
        logger.warning(f"{len(result.failures)} of {result.taus.size} taus failed; see the log above")


def _run_bench(config: RunConfig) -> None:
    tf = _test_function(config)
    table = benchmark_scaling(tf, config.ns, config.tau, reps=config.reps)
    path = _output(config, 'timing.csv')
    export_timing(table, path)
    if table.ns.size >= 2:
        wave_slope, charfunc_slope = scaling_slopes(table)
        print(f"wave_slope={wave_slope:.3f} charfunc_slope={charfunc_slope:.3f}")


def _run_degeneracy(config: RunConfig) -> None:
    tf = _test_function(config)
    report = detect_degenerate(tf, config.u0)
    if config.format == 'json':
        print(report.to_json())
        return
    print('kind,value')
    for b in report.b_points:
        print(f"B,{b:.17g}")
    for c in report.c_values:
        print(f"C,{c:.17g}")
    if report.u0 is not None:
        print(f"clean,{int(report.clean)}")
        print(f"eta,{report.eta:.17g}")


RUNNERS = {
    'estimate': _run_estimate,
    'compare': _run_compare,
    'sweep': _run_sweep,
    'bench': _run_bench,
    'degeneracy': _run_degeneracy,
}


def dispatch(config: RunConfig) -> int:
    """
    Run the configured command and map failures to exit statuses.

    Args:
        config: Validated run configuration

    Returns:
        int: 0 on success, 1 domain error, 2 usage error, 3 I/O error
    """
    try:
        RUNNERS[config.command](config)
    except (GradDensError, OSError) as e:
        status = exit_status_for(e)
        logger.debug(f"{config.command} failed", exc_info=True)
        print(f"graddens {config.command}: error: {type(e).__name__}: {e}", file=sys.stderr)
        return status
    return EXIT_OK


def setup_logging(level: str = LOG_LEVEL, log_dir: str = LOG_DIR) -> logging.Logger:
    """Set up logging configuration."""
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
        handlers.append(logging.FileHandler(os.path.join(log_dir, 'graddens.log')))
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )
    return logging.getLogger('graddens')


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Console-script entry point."""
    try:
        config = parse_args(argv)
    except UsageError as e:
        print(f"{e}", file=sys.stderr)
        return exit_status_for(e)
    setup_logging(config.log_level)
    logger.debug(f"Run configuration: {config.model_dump()}")
    return dispatch(config)


if __name__ == "__main__":
    sys.exit(main())
