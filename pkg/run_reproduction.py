#!/usr/bin/env python3
"""
Run the full reproduction: comparison, tau sweep and runtime scaling at n = 2**15.
"""

import os
import sys

# Select the full profile before graddens reads its configuration
if not os.getenv('GRADDENS_PROFILE'):
    os.environ['GRADDENS_PROFILE'] = 'full'

if not os.getenv('GRADDENS_OUTPUT_DIR'):
    os.environ['GRADDENS_OUTPUT_DIR'] = 'results'

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), 'src'))

from graddens.cli import main
from graddens.config import DEFAULT_N, OUTPUT_DIR, SWEEP_TAUS

FUNCTIONS = ('sinusoid', 'quadratic', 'exponential', 'sum_of_sinusoids')

if __name__ == '__main__':
    os.makedirs(OUTPUT_DIR, exist_ok=True)
    taus = ','.join(f'{t:g}' for t in SWEEP_TAUS)
    print(f"Reproducing at n={DEFAULT_N}, writing to {OUTPUT_DIR}/")
    status = 0
    for name in FUNCTIONS:
        out = os.path.join(OUTPUT_DIR, name)
        os.makedirs(out, exist_ok=True)
        status |= main(['compare', '--function', name, '--n', str(DEFAULT_N), '--out-dir', out])
        status |= main(['sweep', '--function', name, '--n', str(DEFAULT_N), '--taus', taus,
                        '--out', os.path.join(out, 'sweep.csv')])
    status |= main(['bench', '--function', 'sinusoid', '--out', os.path.join(OUTPUT_DIR, 'timing.csv')])
    sys.exit(status)
