"""Discrete distributions over bitstrings: TV, coverage, CSV export."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

MASS_TOL = 1e-9


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability mass over length-num_bits bitstrings (big-endian index)."""

    num_bits: int
    mass: np.ndarray

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=float)
        object.__setattr__(self, "mass", mass)
        if mass.shape != (2**self.num_bits,):
            raise ValueError("mass vector length must be 2^num_bits")
        if (mass < -MASS_TOL).any():
            raise ValueError("negative probability mass")
        total = mass.sum()
        if abs(total - 1.0) >= MASS_TOL:
            raise ValueError(f"masses sum to {total!r}, not 1")
        mass.setflags(write=False)

    def prob(self, bits: str) -> float:
        return float(self.mass[int(bits, 2)])

    def support(self, tol: float = 0.0) -> list[str]:
        n = self.num_bits
        return [format(i, f"0{n}b") for i in np.nonzero(self.mass > tol)[0]]

    @staticmethod
    def point_mass(num_bits: int, bits: str) -> "DiscreteDistribution":
        mass = np.zeros(2**num_bits)
        mass[int(bits, 2)] = 1.0
        return DiscreteDistribution(num_bits, mass)

    @staticmethod
    def uniform(num_bits: int) -> "DiscreteDistribution":
        return DiscreteDistribution(num_bits, np.full(2**num_bits, 2.0**-num_bits))


def empirical_distribution(samples: list[str], num_bits: int) -> DiscreteDistribution:
    """Normalized counts of the sample list."""
    if not samples:
        raise ValueError("empty sample list")
    counts = np.zeros(2**num_bits)
    for bits in samples:
        if len(bits) != num_bits:
            raise ValueError(f"sample {bits!r} has wrong length")
        counts[int(bits, 2)] += 1
    return DiscreteDistribution(num_bits, counts / counts.sum())


def total_variation(
    p: DiscreteDistribution, q: DiscreteDistribution, normalized: bool = True
) -> float:
    """Sum of |p - q| with (normalized) or without the 1/2 factor.

    The unnormalized variant ranges over [0, 2]; it is exposed because
    published figures for this benchmark sometimes omit the 1/2.
    """
    if p.num_bits != q.num_bits:
        raise ValueError("dimension mismatch")
    tv = float(np.abs(p.mass - q.mass).sum())
    return tv / 2 if normalized else tv


@dataclass(frozen=True)
class ModeCoverage:
    covered: list[str]
    missed: list[str]
    invalid_mass: float

    @property
    def num_covered(self) -> int:
        return len(self.covered)


def mode_coverage(
    p: DiscreteDistribution, target: DiscreteDistribution, threshold: float = 0.5
) -> ModeCoverage:
    """Which target modes receive at least threshold * target(x) mass.

    invalid_mass is the total mass p puts outside the target support.
    """
    if not 0 < threshold < 1:
        raise ValueError("threshold must be in (0, 1)")
    if p.num_bits != target.num_bits:
        raise ValueError("dimension mismatch")
    covered, missed = [], []
    for bits in target.support():
        (covered if p.prob(bits) >= threshold * target.prob(bits) else missed).append(bits)
    invalid = float(p.mass[target.mass == 0].sum())
    return ModeCoverage(covered, missed, invalid)


def to_csv(dist: DiscreteDistribution) -> str:
    """`bitstring,probability` rows, lexicographic order, 17 significant digits."""
    buf = io.StringIO()
    buf.write("bitstring,probability\n")
    n = dist.num_bits
    for i in range(2**n):
        buf.write(f"{format(i, f'0{n}b')},{dist.mass[i]:.17g}\n")
    return buf.getvalue()


def from_csv(text: str) -> DiscreteDistribution:
    lines = [ln for ln in text.strip().splitlines() if ln]
    if not lines or lines[0] != "bitstring,probability":
        raise ValueError("missing bitstring,probability header")
    rows = [ln.split(",") for ln in lines[1:]]
    num_bits = len(rows[0][0])
    mass = np.zeros(2**num_bits)
    for bits, prob in rows:
        mass[int(bits, 2)] = float(prob)
    return DiscreteDistribution(num_bits, mass)
