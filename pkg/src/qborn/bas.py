"""Bars-and-stripes target distributions.

An n x m binary image is valid iff all columns are constant (a bar
pattern) or all rows are constant (a stripe pattern); the all-zeros and
all-ones images belong to both families and are counted once, giving
2^n + 2^m - 2 valid patterns. Pixels flatten row-major: pixel (r, c)
maps to bit index r*m + c (0-based), matching the big-endian bitstring
convention of the simulator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qborn.distributions import DiscreteDistribution


@dataclass(frozen=True)
class BasSpec:
    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be >= 1")

    @property
    def num_bits(self) -> int:
        return self.rows * self.cols

    @property
    def num_patterns(self) -> int:
        return 2**self.rows + 2**self.cols - 2


def bas_patterns(spec: BasSpec) -> set[str]:
    """All valid bar and stripe bitstrings (row-major flattening)."""
    n, m = spec.rows, spec.cols
    patterns = set()
    for code in range(2**m):  # bars: column c on iff bit c of code
        cols = format(code, f"0{m}b")
        patterns.add(cols * n)
    for code in range(2**n):  # stripes: row r on iff bit r of code
        rows = format(code, f"0{n}b")
        patterns.add("".join(bit * m for bit in rows))
    return patterns


def bas_distribution(spec: BasSpec) -> DiscreteDistribution:
    """Uniform over valid patterns, zero elsewhere."""
    mass = np.zeros(2**spec.num_bits)
    for bits in bas_patterns(spec):
        mass[int(bits, 2)] = 1.0
    return DiscreteDistribution(spec.num_bits, mass / mass.sum())
