"""Canonical (thermal) ensemble for the Toda-like Hamiltonian.

Classical Maxwell-Boltzmann distribution with Bessel-form partition function,
the quadratic-order corrected stationary distribution and its currents, the
flow-divergence quantifier, and internal energy / heat capacity at both
orders.  The corrected quantities live on the validity domain Z_ST > 0; its
boundary beta*(a) is located once by bisection and quoted in errors.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import UsageError, ValidityError
from .errors import DomainError
from .specfun import bessel_k

__all__ = [
    "ThermalEnsembleParams",
    "ThermalObservables",
    "z0_closed",
    "z_st_closed",
    "beta_star",
    "w0",
    "epsilon_correction",
    "w_st2",
    "currents_td",
    "div_w_td",
    "observables",
    "quadrature_box",
]


def z0_closed(beta, a):
    """Classical partition function Z0 = 4 K0(beta) K0(a beta)."""
    if not (beta > 0.0 and a > 0.0):
        raise DomainError("beta and a must be positive")
    return 4.0 * bessel_k(0, beta) * bessel_k(0, a * beta)


def z_st_closed(beta, a):
    """Corrected partition function
    Z_ST = 4 [K0(beta) K0(a beta) - (a beta^2 / 24) K1(beta) K1(a beta)].

    Positive only below beta*(a); the sign is checked by callers.
    """
    if not (beta > 0.0 and a > 0.0):
        raise DomainError("beta and a must be positive")
    return 4.0 * (bessel_k(0, beta) * bessel_k(0, a * beta)
                  - a * beta * beta / 24.0 * bessel_k(1, beta) * bessel_k(1, a * beta))


@lru_cache(maxsize=None)
def beta_star(a):
    """Validity boundary: the root of Z_ST(beta, a) = 0, found by bisection."""
    lo, hi = 1e-3, 1.0
    while z_st_closed(hi, a) > 0.0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            return math.inf
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if z_st_closed(mid, a) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ThermalEnsembleParams:
    """Inverse temperature, anisotropy, and expansion order."""

    beta: float
    a: float = 1.0
    order: str = "classical"  # 'classical' or 'h2'

    def __post_init__(self):
        if not (isinstance(self.beta, (int, float)) and self.beta > 0.0
                and math.isfinite(self.beta)):
            raise DomainError("beta must be positive and finite")
        if not (self.a > 0.0 and math.isfinite(self.a)):
            raise DomainError("a must be positive and finite")
        if self.order not in ("classical", "h2"):
            raise UsageError("order must be 'classical' or 'h2'")
        if self.order == "h2" and z_st_closed(self.beta, self.a) <= 0.0:
            raise ValidityError(
                f"Z_ST <= 0 at beta = {self.beta}: the quadratic-order ensemble "
                f"is valid only for beta < beta*(a={self.a}) = "
                f"{beta_star(self.a):.6f}")


def w0_xy(params, x, k):
    """Classical distribution exp(-beta H_T) / Z0, vectorized."""
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    b, a = params.beta, params.a
    return np.exp(-b * (a * np.cosh(x) + np.cosh(k))) / z0_closed(b, a)


def w0(params, p):
    """Classical Maxwell-Boltzmann weight at a phase point; normalized."""
    return float(w0_xy(params, p.x, p.k))


def epsilon_correction_xy(params, x, k):
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    b, a = params.beta, params.a
    return (a * b * b / 8.0 * np.cosh(k) * np.cosh(x)
            * (b / 3.0 * (a * np.tanh(x) * np.sinh(x)
                          + np.tanh(k) * np.sinh(k)) - 1.0))


def epsilon_correction(params, p):
    """Quadratic-order relative correction: even in (x, k) -> (-x, -k) and
    equal to -a beta^2 / 8 at the origin."""
    return float(epsilon_correction_xy(params, p.x, p.k))


def w_st2_xy(params, x, k):
    if params.order != "h2":
        raise UsageError("w_st2 requires order='h2' parameters")
    b, a = params.beta, params.a
    pref = z0_closed(b, a) / z_st_closed(b, a)
    return pref * w0_xy(params, x, k) * (1.0 + epsilon_correction_xy(params, x, k))


def w_st2(params, p):
    """Corrected stationary distribution (Z0/Z_ST) W0 (1 + eps); normalized."""
    return float(w_st2_xy(params, p.x, p.k))


def currents_td_xy(params, x, k):
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    b, a = params.beta, params.a
    w = w0_xy(params, x, k)
    if params.order == "classical":
        return np.sinh(k) * w, -a * np.sinh(x) * w
    eps = epsilon_correction_xy(params, x, k)
    jx = np.sinh(k) * (1.0 + eps - a * b / 24.0
                       * (a * b * np.sinh(x) ** 2 - np.cosh(x))) * w
    jk = -a * np.sinh(x) * (1.0 + eps - b / 24.0
                            * (b * np.sinh(k) ** 2 - np.cosh(k))) * w
    return jx, jk


def currents_td(params, p):
    """Thermal current components (J_x, J_k).

    Classical order gives (sinh k, -a sinh x) W0; the h2 order adds the
    printed quadratic-order bracket and eps corrections.  J_x vanishes on
    k = 0 and J_k on x = 0 at either order.
    """
    jx, jk = currents_td_xy(params, p.x, p.k)
    return float(jx), float(jk)


def div_w_td_xy(params, x, k):
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    b, a = params.beta, params.a
    return (a * b * b / 12.0 * np.sinh(x) * np.sinh(k)
            * (a * np.cosh(x) - np.cosh(k)))


def div_w_td(params, p):
    """Flow-divergence quantifier of the corrected thermal velocity field:

        div w = (a beta^2 / 12) sinh x sinh k [a cosh x - cosh k].

    Vanishes on both axes and, for a = 1, on |x| = |k|; a nonzero value marks
    the departure from divergence-free classical transport.
    """
    return float(div_w_td_xy(params, p.x, p.k))


@dataclass(frozen=True)
class ThermalObservables:
    """Partition functions, internal energy and heat capacity at one order."""

    z0: float
    z_st: float
    energy: float
    heat_capacity: float
    order: str


def _log_z(beta, a, order):
    z = z0_closed(beta, a) if order == "classical" else z_st_closed(beta, a)
    if z <= 0.0:
        raise ValidityError(
            f"Z_ST <= 0 at beta = {beta}; validity boundary beta*(a={a}) = "
            f"{beta_star(a):.6f}")
    return math.log(z)


def observables(params):
    """Internal energy E = -d ln Z / d beta and heat capacity
    C = beta^2 d^2 ln Z / d beta^2.

    The classical energy is evaluated analytically through K0' = -K1 as
    E = K1(beta)/K0(beta) + a K1(a beta)/K0(a beta); the corrected-order
    energy and both heat capacities use central differences of ln Z with
    step beta * 1e-4 (a single second difference for C, avoiding a nested
    cancellation).
    """
    b, a, order = params.beta, params.a, params.order
    h = b * 1e-4
    if order == "h2":
        # stay two finite-difference steps clear of the validity boundary
        limit = beta_star(a)
        if b + 2.0 * h >= limit:
            raise ValidityError(
                f"beta = {b} is within two finite-difference steps of the "
                f"validity boundary beta*(a={a}) = {limit:.6f}")
    lz_m, lz_0, lz_p = (_log_z(b - h, a, order), _log_z(b, a, order),
                        _log_z(b + h, a, order))
    heat = b * b * (lz_p - 2.0 * lz_0 + lz_m) / (h * h)
    if order == "classical":
        energy = (bessel_k(1, b) / bessel_k(0, b)
                  + a * bessel_k(1, a * b) / bessel_k(0, a * b))
    else:
        energy = -(lz_p - lz_m) / (2.0 * h)
    return ThermalObservables(z0=z0_closed(b, a), z_st=z_st_closed(b, a),
                              energy=energy, heat_capacity=heat, order=order)


def quadrature_box(beta, a, tail=37.0):
    """Half-widths (x_max, k_max) beyond which exp(-beta H) is below
    e^-tail times its peak; used to truncate plane integrals."""
    return (math.acosh(1.0 + tail / (a * beta)),
            math.acosh(1.0 + tail / beta))
