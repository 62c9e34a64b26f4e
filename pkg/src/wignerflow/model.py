"""The two separable prey-predator Hamiltonians and their derivative oracles.

Both models are of the form H(x, k) = K(k) + V(x) on dimensionless phase
space, with the species map y = e^-x (predator), z = e^-k (prey) and the
equilibrium at the origin (y = z = 1).

    LV:   H = a x + k + a e^-x + e^-k
    Toda: H = cosh k + a cosh x
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, UsageError

__all__ = [
    "HamiltonianKind",
    "SeparableHamiltonian",
    "PhasePoint",
    "SpeciesPair",
    "energy",
    "odd_derivative",
    "species_from_phase",
    "harmonic_residual",
]


class HamiltonianKind(Enum):
    LV = "lv"
    TODA = "toda"


@dataclass(frozen=True)
class PhasePoint:
    """Dimensionless phase-space point (position x, momentum k)."""

    x: float
    k: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.k)):
            raise DomainError("phase point coordinates must be finite")


@dataclass(frozen=True)
class SpeciesPair:
    """Normalized predator (y) and prey (z) populations."""

    y: float
    z: float

    def __post_init__(self):
        if not (self.y > 0.0 and self.z > 0.0):
            raise DomainError("species populations must be positive")


@dataclass(frozen=True)
class SeparableHamiltonian:
    """Model selector plus the anisotropy parameter a > 0."""

    kind: HamiltonianKind
    a: float = 1.0

    def __post_init__(self):
        if not isinstance(self.kind, HamiltonianKind):
            raise UsageError("kind must be a HamiltonianKind")
        if not (isinstance(self.a, (int, float)) and self.a > 0.0
                and math.isfinite(self.a)):
            raise DomainError("anisotropy parameter a must be positive and finite")

    def kinetic(self, k):
        if self.kind is HamiltonianKind.TODA:
            return np.cosh(k)
        return k + np.exp(-k)

    def potential(self, x):
        if self.kind is HamiltonianKind.TODA:
            return self.a * np.cosh(x)
        return self.a * (x + np.exp(-x))


def energy(h, p):
    """H(x, k); bounded below by 1 + a with equality only at the origin."""
    return float(h.kinetic(p.k) + h.potential(p.x))


def energy_xy(h, x, k):
    """Vectorized H over coordinate arrays."""
    return h.kinetic(np.asarray(k, dtype=float)) + h.potential(np.asarray(x, dtype=float))


def odd_derivative(h, side, order, coord):
    """Odd derivative of the kinetic (d/dk) or potential (d/dx) part.

    For the Toda model every odd derivative of cosh collapses to sinh; for the
    LV model d^n/dc^n e^-c = (-1)^n e^-c gives -e^-c at every odd order >= 3.
    """
    if side not in ("kinetic", "potential"):
        raise UsageError("side must be 'kinetic' or 'potential'")
    if order < 1 or order % 2 == 0:
        raise UsageError("odd_derivative requires an odd order >= 1")
    c = coord
    if h.kind is HamiltonianKind.TODA:
        base = math.sinh(c)
        return base if side == "kinetic" else h.a * base
    if side == "kinetic":
        return 1.0 - math.exp(-c) if order == 1 else -math.exp(-c)
    if order == 1:
        return h.a * (1.0 - math.exp(-c))
    return -h.a * math.exp(-c)


def species_from_phase(p):
    """Map a phase point to populations: y = e^-x, z = e^-k."""
    return SpeciesPair(y=math.exp(-p.x), z=math.exp(-p.k))


def harmonic_residual(h, p):
    """H minus its quadratic expansion (1 + a) + (a x^2 + k^2)/2 about the origin.

    Diagnostic only: O(x^4, k^4) for the even Toda model, O(x^3) for LV.
    """
    quad = (1.0 + h.a) + 0.5 * (h.a * p.x * p.x + p.k * p.k)
    return energy(h, p) - quad
