"""Self-contained special-function kernel and adaptive quadrature engine.

Everything downstream (partition functions, closed-form currents, elliptic
parameterizations) is built on the functions here, and the quadrature engine
doubles as the independent oracle in the test suite.  All evaluations are
pure: identical inputs give bit-identical outputs.
"""

import heapq
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, NumericalError, UsageError

__all__ = [
    "QuadratureSpec",
    "EllipticConvention",
    "integrate_1d",
    "bessel_k",
    "elliptic_k_complete",
    "elliptic_k_linear_sin",
    "jacobi_sn",
    "hermite_odd",
    "faddeeva_w",
    "erf_complex",
    "im_erf_offset",
    "im_erf_offset_scaled",
]


# ---------------------------------------------------------------------------
# adaptive Gauss-Kronrod quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and subdivision budget for :func:`integrate_1d`."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.abs_tol > 0.0 and self.rel_tol > 0.0):
            raise UsageError("quadrature tolerances must be strictly positive")
        if self.max_subdivisions < 1:
            raise UsageError("max_subdivisions must be >= 1")


# 15-point Kronrod extension of 7-point Gauss (nodes on [-1, 1], positive half).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate((-_XGK[:7], _XGK[7:], _XGK[6::-1]))
_WEIGHTS_K = np.concatenate((_WGK[:7], _WGK[7:], _WGK[6::-1]))
# Gauss points sit at the odd Kronrod indices.
_GAUSS_IDX = np.array([1, 3, 5, 7, 9, 11, 13])
_WEIGHTS_G = np.concatenate((_WG[:3], _WG[3:], _WG[2::-1]))


def _gk15(f, a, b):
    """One Gauss-Kronrod panel on [a, b]; returns (value, error estimate)."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    fv = np.array([f(c + h * t) for t in _NODES], dtype=float)
    vk = h * float(_WEIGHTS_K @ fv)
    vg = h * float(_WEIGHTS_G @ fv[_GAUSS_IDX])
    # QUADPACK-style sharpened error estimate
    resabs = h * float(_WEIGHTS_K @ np.abs(fv))
    resasc = h * float(_WEIGHTS_K @ np.abs(fv - vk / (2.0 * h)))
    err = abs(vk - vg)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    noise = 50.0 * np.finfo(float).eps * resabs
    return vk, max(err, noise)


def _integrate_finite(f, lo, hi, spec):
    value, err = _gk15(f, lo, hi)
    heap = [(-err, 0, lo, hi, value, err)]
    total_v, total_e = value, err
    counter = 1
    for _ in range(spec.max_subdivisions):
        if total_e <= max(spec.abs_tol, spec.rel_tol * abs(total_v)):
            return total_v, total_e
        _, _, a, b, v, e = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        if mid == a or mid == b:
            # interval at floating-point resolution, nothing left to split
            heapq.heappush(heap, (0.0, counter, a, b, v, e))
            counter += 1
            continue
        v1, e1 = _gk15(f, a, mid)
        v2, e2 = _gk15(f, mid, b)
        total_v += (v1 + v2) - v
        total_e += (e1 + e2) - e
        heapq.heappush(heap, (-e1, counter, a, mid, v1, e1))
        heapq.heappush(heap, (-e2, counter + 1, mid, b, v2, e2))
        counter += 2
    if total_e <= max(spec.abs_tol, spec.rel_tol * abs(total_v)):
        return total_v, total_e
    raise NumericalError(
        f"quadrature did not converge: estimate {total_v!r}, error bound {total_e:.3e}",
        payload=(total_v, total_e),
    )


def _decay_transform(f, anchor, sign):
    """Map [anchor, sign*inf) onto u in [0, 1) with t = anchor + sign*(-ln(1-u)).

    Suitable for integrands decaying at least exponentially; the Gauss-Kronrod
    nodes never touch u = 1.
    """

    def g(u):
        t = anchor - sign * math.log1p(-u)
        fv = f(t)
        if fv == 0.0:
            return 0.0
        return fv / (1.0 - u)

    return g


def integrate_1d(f, lo, hi, spec=None):
    """Adaptive quadrature of ``f`` over [lo, hi]; the limits may be infinite.

    Returns the integral estimate; raises NumericalError (carrying the best
    estimate and error bound) if the subdivision budget is exhausted before
    the tolerance is met.  Deterministic for fixed inputs.
    """
    spec = spec or QuadratureSpec()
    if math.isnan(lo) or math.isnan(hi):
        raise DomainError("quadrature limits must not be NaN")
    if lo == hi:
        return 0.0
    if lo > hi:
        return -integrate_1d(f, hi, lo, spec)
    lo_inf = math.isinf(lo)
    hi_inf = math.isinf(hi)
    if not lo_inf and not hi_inf:
        value, _ = _integrate_finite(f, lo, hi, spec)
        return value
    if lo_inf and hi_inf:
        half = QuadratureSpec(spec.abs_tol / 2.0, spec.rel_tol / 2.0,
                              spec.max_subdivisions)
        left, _ = _integrate_finite(_decay_transform(f, 0.0, -1.0), 0.0, 1.0, half)
        right, _ = _integrate_finite(_decay_transform(f, 0.0, 1.0), 0.0, 1.0, half)
        return left + right
    if hi_inf:
        value, _ = _integrate_finite(_decay_transform(f, lo, 1.0), 0.0, 1.0, spec)
        return value
    value, _ = _integrate_finite(_decay_transform(f, hi, -1.0), 0.0, 1.0, spec)
    return value


# ---------------------------------------------------------------------------
# modified Bessel K_0, K_1
# ---------------------------------------------------------------------------

_BESSEL_ASYMPTOTIC_CUTOVER = 16.0
_BESSEL_QUAD = QuadratureSpec(abs_tol=1e-300, rel_tol=1e-13, max_subdivisions=400)


def _bessel_k_integral(order, x):
    # K_nu(x) = e^-x * Int_0^inf e^{-x(cosh t - 1)} cosh(nu t) dt,
    # with cosh t - 1 = 2 sinh^2(t/2) to keep the exponent exact near t = 0.
    def integrand(t):
        if t > 700.0:
            return 0.0
        s = math.sinh(0.5 * t)
        w = 2.0 * x * s * s
        if w > 745.0:
            return 0.0
        base = math.exp(-w)
        return base if order == 0 else base * math.cosh(t)

    return math.exp(-x) * integrate_1d(integrand, 0.0, math.inf, _BESSEL_QUAD)


def _bessel_k_asymptotic(order, x):
    # K_nu(x) ~ sqrt(pi/2x) e^-x sum_n a_n(nu)/x^n; below x ~ 16 the optimal
    # truncation error exceeds 1e-12 relative, hence the cutover above.
    mu = 4.0 * order * order
    term = 1.0
    total = 1.0
    for n in range(1, 40):
        factor = (mu - (2 * n - 1) ** 2) / (8.0 * n * x)
        nxt = term * factor
        if abs(nxt) >= abs(term):
            break
        term = nxt
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    return math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) * total


def bessel_k(order, arg):
    """Modified Bessel function of the second kind, order 0 or 1.

    Evaluated from the integral representation for moderate argument and the
    large-argument asymptotic series beyond; relative accuracy <= 1e-12.
    """
    if order not in (0, 1):
        raise UsageError("bessel_k supports orders 0 and 1 only")
    if not (isinstance(arg, (int, float)) and math.isfinite(arg)):
        raise DomainError("bessel_k argument must be a finite real")
    if arg <= 0.0:
        raise DomainError("bessel_k requires a positive argument")
    if arg > _BESSEL_ASYMPTOTIC_CUTOVER:
        return _bessel_k_asymptotic(order, float(arg))
    return _bessel_k_integral(order, float(arg))


# ---------------------------------------------------------------------------
# elliptic integrals and Jacobi sn
# ---------------------------------------------------------------------------

class EllipticConvention(Enum):
    """Meaning of the second argument of sn: the parameter m or the modulus
    kappa with m = kappa**2."""

    PARAMETER = "parameter"
    MODULUS = "modulus"


def _agm(a, b):
    # quadratic convergence; the 1e-15 floor keeps 1-ulp oscillation from
    # stalling the loop, and the residual (a-b)^2 term is ~1e-30 relative
    for _ in range(60):
        if abs(a - b) <= 1e-15 * abs(a):
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def elliptic_k_complete(m):
    """Complete elliptic integral of the first kind K(m), parameter form.

    K(m) = Int_0^{pi/2} (1 - m sin^2 t)^{-1/2} dt = pi / (2 agm(1, sqrt(1-m))).
    """
    if not (0.0 <= m < 1.0):
        raise DomainError("elliptic parameter must lie in [0, 1)")
    return math.pi / (2.0 * _agm(1.0, math.sqrt(1.0 - m)))


_LINEAR_SIN_QUAD = QuadratureSpec(abs_tol=1e-14, rel_tol=1e-12, max_subdivisions=2000)


def elliptic_k_linear_sin(kappa):
    """Complete elliptic-type integral with a linear sine in the integrand:

        4 * Int_0^{pi/2} [1 - kappa sin(theta)]^{-1/2} dtheta.

    This is not the standard K(m); both are exposed so the closed-form period
    expression built on this integral can be compared against the measured
    orbital period.
    """
    if not (0.0 <= kappa < 1.0):
        raise DomainError("kappa must lie in [0, 1); the integrand is singular at 1")
    return 4.0 * integrate_1d(
        lambda t: 1.0 / math.sqrt(1.0 - kappa * math.sin(t)),
        0.0, 0.5 * math.pi, _LINEAR_SIN_QUAD)


def _sn_parameter(convention, m_or_kappa):
    if convention is EllipticConvention.PARAMETER:
        m = float(m_or_kappa)
    elif convention is EllipticConvention.MODULUS:
        m = float(m_or_kappa) ** 2
    else:
        raise UsageError(f"unknown elliptic convention {convention!r}")
    if not (0.0 <= m < 1.0):
        raise DomainError("sn parameter must lie in [0, 1)")
    return m


def jacobi_sn(u, m_or_kappa, convention=EllipticConvention.PARAMETER):
    """Jacobi elliptic sn(u | m) via the descending Landen (AGM) recurrence.

    The second argument is the parameter m by default; pass
    ``EllipticConvention.MODULUS`` for sn(u | kappa) with m = kappa**2.
    """
    m = _sn_parameter(convention, m_or_kappa)
    if m == 0.0:
        return math.sin(u)
    # reduce by full periods to keep the backward phase recurrence accurate
    period = 4.0 * elliptic_k_complete(m)
    u = u - period * round(u / period)
    a, b = 1.0, math.sqrt(1.0 - m)
    levels = []  # (a_n, c_n) for n = 1..N
    for _ in range(60):
        if abs(a - b) <= 1e-15 * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        levels.append((a, c))
    phi = (2.0 ** len(levels)) * a * u
    for a_n, c_n in reversed(levels):
        s = c_n * math.sin(phi) / a_n
        phi = 0.5 * (phi + math.asin(max(-1.0, min(1.0, s))))
    return math.sin(phi)


# ---------------------------------------------------------------------------
# Hermite polynomials (physicists' convention), odd orders
# ---------------------------------------------------------------------------

def hermite_odd(order, arg):
    """H_n(arg) for odd n >= 1 by the recurrence H_{n+1} = 2x H_n - 2n H_{n-1}."""
    if order < 1 or order % 2 == 0:
        raise UsageError("hermite_odd requires an odd order >= 1")
    h_prev = np.ones_like(np.asarray(arg, dtype=float))
    h = 2.0 * np.asarray(arg, dtype=float)
    for n in range(1, order):
        h, h_prev = 2.0 * np.asarray(arg, dtype=float) * h - 2.0 * n * h_prev, h
    if np.ndim(arg) == 0:
        return float(h)
    return h


# ---------------------------------------------------------------------------
# Faddeeva function and the offset imaginary error function
# ---------------------------------------------------------------------------

def _weideman_coefficients(n_terms=64):
    # Rational (Weideman) approximation of the Faddeeva function on the upper
    # half-plane; n_terms = 64 gives ~1e-15 relative error on |Im z| <= 2.
    m = 2 * n_terms
    k = np.arange(-m + 1, m)
    ell = math.sqrt(n_terms / math.sqrt(2.0))
    t = ell * np.tan(k * math.pi / (2 * m))
    f = np.concatenate(([0.0], np.exp(-t * t) * (ell * ell + t * t)))
    coef = np.real(np.fft.fft(np.fft.fftshift(f))) / (2.0 * m)
    return ell, coef[1:n_terms + 1][::-1]  # descending powers


_WEIDEMAN_L, _WEIDEMAN_COEF = _weideman_coefficients()
_ISQRTPI = 1.0 / math.sqrt(math.pi)


def faddeeva_w(z):
    """Faddeeva function w(z) = e^{-z^2} erfc(-iz) for Im z >= 0.

    Accepts scalars or arrays; vectorized rational evaluation.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag < -1e-300):
        raise DomainError("faddeeva_w is implemented for Im z >= 0")
    iz = 1j * z
    rm = _WEIDEMAN_L - iz
    ratio = (_WEIDEMAN_L + iz) / rm
    p = np.zeros_like(ratio)
    for c in _WEIDEMAN_COEF:
        p = p * ratio + c
    w = 2.0 * p / (rm * rm) + _ISQRTPI / rm
    if w.ndim == 0:
        return complex(w)
    return w


def erf_complex(z):
    """Error function for complex argument, via erf(z) = 1 - e^{-z^2} w(iz).

    Intended for moderate |Im z| (the strip where the closed-form currents
    live); reduced to the first quadrant by the reflection symmetries.
    """
    z = complex(z)
    if z.real < 0.0:
        return -erf_complex(-z)
    if z.imag < 0.0:
        return erf_complex(z.conjugate()).conjugate()
    w = faddeeva_w(1j * z)
    return complex(1.0 - np.exp(-z * z) * w)


def _im_erf_parts(alpha, chi):
    """Common core: returns (x, y, Im[e^{-2ixy} w(-y + ix)]) with x = alpha|chi|."""
    if not (isinstance(alpha, (int, float)) and math.isfinite(alpha) and alpha > 0.0):
        raise DomainError("alpha must be a positive finite real")
    chi_arr = np.asarray(chi, dtype=float)
    if not np.all(np.isfinite(chi_arr)):
        raise DomainError("chi must be finite")
    x = alpha * np.abs(chi_arr)
    y = 0.5 * alpha
    w = faddeeva_w(-y + 1j * x)
    phase = np.exp(-2j * x * y)
    return x, y, np.imag(phase * w)


def im_erf_offset(alpha, chi):
    """F(chi) = Im Erf(alpha (chi + i/2)).

    Even in chi; F(0) = erfi(alpha/2) > 0.  By conjugation symmetry the
    current bracket Erf[alpha(chi - i/2)] - Erf[alpha(chi + i/2)] equals
    -2i F(chi), so this single real function carries the whole closed form.
    """
    x, y, core = _im_erf_parts(alpha, chi)
    out = -np.exp(y * y - x * x) * core
    if out.ndim == 0:
        return float(out)
    return out


def im_erf_offset_scaled(alpha, chi):
    """e^{(alpha chi)^2} * F(chi): the Gaussian-cancelled form of F.

    This is the factor the quantum velocity field needs; evaluating it through
    the Faddeeva function avoids forming the catastrophic product of a huge
    exponential with a vanishing F.
    """
    x, y, core = _im_erf_parts(alpha, chi)
    out = -math.exp(y * y) * core
    if out.ndim == 0:
        return float(out)
    return out
