"""
cnoma-solver: joint user pairing and power control for cooperative NOMA cells.

Closed-form HD/FD relay power policies, Hungarian pairing, brute-force oracles and a
Monte-Carlo simulator for reproducing cell-level sum-rate trends.
"""

__version__ = "0.1.0"
