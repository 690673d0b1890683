"""
Config parsing and tabular output.
"""

from cnoma_solver.tools.config_parser import (
    apply_overrides,
    load_config,
    parse_config,
    parse_entries
)
from cnoma_solver.tools.utils import (
    bench_frame,
    network_frame,
    pair_frame,
    sweep_frame,
    verification_frame,
    write_csv
)

__all__ = [
    'apply_overrides',
    'load_config',
    'parse_config',
    'parse_entries',
    'bench_frame',
    'network_frame',
    'pair_frame',
    'sweep_frame',
    'verification_frame',
    'write_csv'
]
