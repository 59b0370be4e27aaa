"""
Configuration file for the graddens package.
Loads environment variables and provides configuration settings.
"""

import math
import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
env_path = Path(__file__).parent.parent.parent / '.env'
if env_path.exists():
    load_dotenv(env_path)


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name, '')
    try:
        return int(raw) if raw.strip() else default
    except ValueError:
        return default


# Runtime settings
THREADS = _env_int('GRADDENS_THREADS', 0)  # 0 = auto
LOG_LEVEL = os.getenv('GRADDENS_LOG_LEVEL', 'INFO').upper()
LOG_DIR = os.getenv('GRADDENS_LOG_DIR', '')
OUTPUT_DIR = os.getenv('GRADDENS_OUTPUT_DIR', '.')
PROFILE = os.getenv('GRADDENS_PROFILE', 'ci').lower()

# Experimental setup
DEFAULT_DOMAIN = (-0.125, 0.125)
SWEEP_TAUS = (3e-4, 1e-4, 5e-5, 1e-5)
DEFAULT_TAU = 1e-5
DEFAULT_BINS = 256
DEFAULT_SCAN_N = 4096
CI_N = 2 ** 12
FULL_N = 2 ** 15
DEFAULT_N = FULL_N if PROFILE == 'full' else CI_N
BENCH_NS = tuple(2 ** k for k in range(10, 15))
BENCH_REPS = 5

# Configuration settings
CONFIG = {
    'threads': THREADS,
    'log_level': LOG_LEVEL,
    'log_dir': LOG_DIR,
    'output_dir': OUTPUT_DIR,
    'profile': PROFILE,
    'default_n': DEFAULT_N,
    'default_tau': DEFAULT_TAU,
    'default_bins': DEFAULT_BINS,
    'default_domain': DEFAULT_DOMAIN,
    'sweep_taus': SWEEP_TAUS,
    'sinusoid_freq': 8 * math.pi,
}
