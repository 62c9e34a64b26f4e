"""Gaussian-ensemble Wigner flow for the Toda-like model, non-perturbative.

The closed forms rest on one scalar kernel, F(chi) = Im Erf[alpha(chi + i/2)]:
by conjugation symmetry the current bracket
Erf[alpha(chi - i/2)] - Erf[alpha(chi + i/2)] equals -2i F(chi), so

    J_x = + (alpha/sqrt(pi)) F(x) sinh(k) e^{-alpha^2 k^2}
    J_k = - (a alpha/sqrt(pi)) F(k) sinh(x) e^{-alpha^2 x^2}

    dJ_x/dx = -2   sinh(k) sin(alpha^2 x) e^{alpha^2/4} G
    dJ_k/dk = +2 a sinh(x) sin(alpha^2 k) e^{alpha^2/4} G

The overall sign is fixed by the classical limit: the eta = 0 term of the
current series is sinh(k) dG/dx = -2 alpha^2 x sinh(k) G, which the Hermite
generating identity extends to the sine form above with the minus sign.
(The same expressions are sometimes quoted with the opposite overall sign,
which contradicts their own leading term; the truncated series oracle
``series_currents`` pins the choice.)

The velocity field w = J/G is evaluated in the Gaussian-cancelled form
w_x = (sqrt(pi)/alpha) e^{alpha^2 x^2} F(x) sinh(k), where the exponential is
absorbed analytically into the kernel evaluation, so no large-times-small
product is ever formed.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .classical import OrbitSpec, Trajectory, integrate_orbit
from .errors import DomainError, NumericalError, UsageError
from .model import HamiltonianKind, PhasePoint, SeparableHamiltonian
from .specfun import (_ISQRTPI, _WEIDEMAN_COEF, _WEIDEMAN_L, im_erf_offset,
                      im_erf_offset_scaled)

__all__ = [
    "GaussianEnsembleParams",
    "FlowSample",
    "StagnationPoint",
    "TRUST_FACTOR",
    "gaussian_w",
    "purity",
    "currents_closed",
    "div_currents_closed",
    "velocity_w",
    "stationarity_div_j",
    "liouville_div_w",
    "vorticity",
    "flow_sample",
    "series_currents",
    "circulation_number",
    "find_stagnation_points",
    "integrate_quantum_trajectory",
]

SQRT_PI = math.sqrt(math.pi)

# the cancelled velocity form is well-conditioned for alpha*max(|x|,|k|) <= 6
TRUST_FACTOR = 6.0


@dataclass(frozen=True)
class GaussianEnsembleParams:
    """Gaussian spread parameter alpha and Toda anisotropy a."""

    alpha: float
    a: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.alpha, (int, float)) and self.alpha > 0.0
                and math.isfinite(self.alpha)):
            raise DomainError("alpha must be positive and finite")
        if not (self.a > 0.0 and math.isfinite(self.a)):
            raise DomainError("a must be positive and finite")

    def trust_limit(self):
        return TRUST_FACTOR / self.alpha


def _check_trust(params, x, k):
    lim = params.trust_limit()
    if np.max(np.abs(x)) > lim or np.max(np.abs(k)) > lim:
        raise DomainError(
            f"point outside the velocity trust region |x|,|k| <= {lim:.4f} "
            f"(alpha = {params.alpha})")


def trust_mask_xy(params, x, k):
    lim = params.trust_limit()
    return (np.abs(np.asarray(x)) <= lim) & (np.abs(np.asarray(k)) <= lim)


# ---------------------------------------------------------------------------
# Wigner function, purity
# ---------------------------------------------------------------------------

def gaussian_w_xy(params, x, k):
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    al2 = params.alpha * params.alpha
    return al2 / math.pi * np.exp(-al2 * (x * x + k * k))


def gaussian_w(params, p):
    """Isotropic Gaussian Wigner function (alpha^2/pi) e^{-alpha^2 (x^2+k^2)}."""
    return float(gaussian_w_xy(params, p.x, p.k))


def purity(params):
    """2 pi Int W^2 = alpha^2: above 1 the ensemble is a formal over-pure
    Gaussian rather than a physical state; reported, not rejected."""
    return params.alpha * params.alpha


# ---------------------------------------------------------------------------
# closed-form currents and their divergences
# ---------------------------------------------------------------------------

def currents_closed_xy(params, x, k):
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    al, a = params.alpha, params.a
    pref = al / SQRT_PI
    jx = pref * im_erf_offset(al, x) * np.sinh(k) * np.exp(-al * al * k * k)
    jk = -a * pref * im_erf_offset(al, k) * np.sinh(x) * np.exp(-al * al * x * x)
    return jx, jk


def currents_closed(params, p):
    """Error-function closed form of the Wigner current (J_x, J_k)."""
    jx, jk = currents_closed_xy(params, p.x, p.k)
    return float(jx), float(jk)


def div_currents_closed_xy(params, x, k):
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    al, a = params.alpha, params.a
    al2 = al * al
    env = 2.0 * math.exp(al2 / 4.0) * gaussian_w_xy(params, x, k)
    return (-env * np.sinh(k) * np.sin(al2 * x),
            env * a * np.sinh(x) * np.sin(al2 * k))


def div_currents_closed(params, p):
    """(dJ_x/dx, dJ_k/dk) in closed form; each vanishes on both axes."""
    djx, djk = div_currents_closed_xy(params, p.x, p.k)
    return float(djx), float(djk)


def stationarity_div_j_xy(params, x, k):
    djx, djk = div_currents_closed_xy(params, x, k)
    return djx + djk


def stationarity_div_j(params, p):
    """div J = -dW/dtau: the stationarity quantifier.  Identically zero on
    the diagonal x = k when a = 1."""
    return float(stationarity_div_j_xy(params, p.x, p.k))


# ---------------------------------------------------------------------------
# quantum velocity field and its quantifiers
# ---------------------------------------------------------------------------

def _wofz_scalar(z):
    # scalar Horner evaluation of the same rational approximation used by
    # specfun.faddeeva_w; Im z >= 0
    iz = 1j * z
    rm = _WEIDEMAN_L - iz
    ratio = (_WEIDEMAN_L + iz) / rm
    p = 0.0 + 0.0j
    for c in _WEIDEMAN_COEF:
        p = p * ratio + c
    return 2.0 * p / (rm * rm) + _ISQRTPI / rm


def _scaled_kernel_scalar(alpha, chi):
    # e^{(alpha chi)^2} F(chi) for a scalar chi, on the fast path
    x = alpha * abs(chi)
    y = 0.5 * alpha
    w = _wofz_scalar(complex(-y, x))
    phase = cmath.exp(complex(0.0, -2.0 * x * y))
    return -math.exp(y * y) * (phase * w).imag


def _velocity_scalar(params, x, k):
    al, a = params.alpha, params.a
    c = SQRT_PI / al
    return (c * _scaled_kernel_scalar(al, x) * math.sinh(k),
            -a * c * _scaled_kernel_scalar(al, k) * math.sinh(x))


def velocity_w_xy(params, x, k):
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    al, a = params.alpha, params.a
    c = SQRT_PI / al
    wx = c * im_erf_offset_scaled(al, x) * np.sinh(k)
    wk = -a * c * im_erf_offset_scaled(al, k) * np.sinh(x)
    return wx, wk


def velocity_w(params, p):
    """Quantum velocity w = J / G in the analytically cancelled form.

    w_x depends on x only through the scaled kernel and on k through sinh;
    the classical equilibrium at the origin survives: w(0, 0) = (0, 0).
    """
    _check_trust(params, p.x, p.k)
    wx, wk = _velocity_scalar(params, p.x, p.k)
    return wx, wk


def liouville_div_w_xy(params, x, k):
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    al, a = params.alpha, params.a
    al2 = al * al
    e4 = math.exp(al2 / 4.0)
    sx = im_erf_offset_scaled(al, x)
    sk = im_erf_offset_scaled(al, k)
    return (2.0 * SQRT_PI * al * x * sx * np.sinh(k)
            - 2.0 * e4 * np.sin(al2 * x) * np.sinh(k)
            - 2.0 * SQRT_PI * al * a * k * sk * np.sinh(x)
            + 2.0 * a * e4 * np.sin(al2 * k) * np.sinh(x))


def liouville_div_w(params, p):
    """div w, the quantumness (non-Liouville) quantifier, in closed form.

    Zero at the origin, nonzero generically; equals
    (W div J - J . grad W) / W^2 with the Gaussian cancelled analytically.
    """
    _check_trust(params, p.x, p.k)
    return float(liouville_div_w_xy(params, p.x, p.k))


def vorticity(params, p, field="quantum", h=1e-5):
    """z-component of the curl of the velocity field.

    The classical limit is minus the phase-space Laplacian of the
    Hamiltonian, -(a cosh x + cosh k); the quantum value is measured by
    central differences of the cancelled velocity field.
    """
    if field == "classical":
        return -(params.a * math.cosh(p.x) + math.cosh(p.k))
    if field != "quantum":
        raise UsageError("field must be 'quantum' or 'classical'")
    _check_trust(params, abs(p.x) + h, abs(p.k) + h)
    dwk_dx = (_velocity_scalar(params, p.x + h, p.k)[1]
              - _velocity_scalar(params, p.x - h, p.k)[1]) / (2.0 * h)
    dwx_dk = (_velocity_scalar(params, p.x, p.k + h)[0]
              - _velocity_scalar(params, p.x, p.k - h)[0]) / (2.0 * h)
    return dwk_dx - dwx_dk


def vorticity_xy(params, x, k, h=1e-5):
    wkp = velocity_w_xy(params, x + h, k)[1]
    wkm = velocity_w_xy(params, x - h, k)[1]
    wxp = velocity_w_xy(params, x, k + h)[0]
    wxm = velocity_w_xy(params, x, k - h)[0]
    return (wkp - wkm) / (2.0 * h) - (wxp - wxm) / (2.0 * h)


@dataclass(frozen=True)
class FlowSample:
    """All per-point flow quantities bundled for one phase point."""

    location: PhasePoint
    j: tuple
    w: tuple
    div_j: float
    div_w: float
    vorticity: float


def flow_sample(params, p):
    return FlowSample(
        location=p,
        j=currents_closed(params, p),
        w=velocity_w(params, p),
        div_j=stationarity_div_j(params, p),
        div_w=liouville_div_w(params, p),
        vorticity=vorticity(params, p),
    )


# ---------------------------------------------------------------------------
# truncated series reference for the divergences
# ---------------------------------------------------------------------------

def series_currents_xy(params, x, k, eta_max):
    if eta_max > 25:
        raise UsageError("eta_max above 25 exceeds the factorial guard")
    if eta_max < 0:
        raise UsageError("eta_max must be >= 0")
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    al, a = params.alpha, params.a
    g = gaussian_w_xy(params, x, k)
    ax, ak = al * x, al * k
    # odd Hermite values by the three-term recurrence, both arguments at once
    h_prev_x, h_x = np.ones_like(ax), 2.0 * ax
    h_prev_k, h_k = np.ones_like(ak), 2.0 * ak
    coeff = al  # alpha^{2 eta + 1} / (4^eta (2 eta + 1)!)
    djx = np.zeros_like(g)
    djk = np.zeros_like(g)
    sign = 1.0
    order = 1
    for eta in range(eta_max + 1):
        if eta > 0:
            for _ in range(2):
                h_x, h_prev_x = 2.0 * ax * h_x - 2.0 * order * h_prev_x, h_x
                h_k, h_prev_k = 2.0 * ak * h_k - 2.0 * order * h_prev_k, h_k
                order += 1
            coeff *= al * al / (4.0 * (2.0 * eta) * (2.0 * eta + 1.0))
            sign = -sign
        djx += -sign * coeff * h_x * np.sinh(k) * g
        djk += a * sign * coeff * h_k * np.sinh(x) * g
    return djx, djk


def series_currents(params, p, eta_max):
    """(dJ_x/dx, dJ_k/dk) truncated at series order eta_max.

    eta_max = 0 is the classical divergence (sinh k dG/dx, -a sinh x dG/dk);
    the sum converges to the closed sine form as eta_max grows.
    """
    djx, djk = series_currents_xy(params, p.x, p.k, eta_max)
    return float(djx), float(djk)


# ---------------------------------------------------------------------------
# flow topology: circulation and stagnation points
# ---------------------------------------------------------------------------

def circulation_number(params, center, radius, samples=720):
    """Circulation sense of the flow around a counterclockwise circle.

    Returns +1.0 when the velocity circulates the loop monotonically
    counterclockwise, -1.0 for monotonically clockwise, and 0.0 otherwise
    (saddles, nodes and loops that enclose no stagnation point all give 0:
    their tangential velocity component changes sign around the loop).  The
    +-1 values carry the measured direction-field winding, which is an
    integer to well below 1e-3 for any loop avoiding zeros of the field.
    """
    if radius <= 0.0:
        raise UsageError("radius must be positive")
    n = max(720, int(samples))
    phi = 2.0 * math.pi * np.arange(n) / n
    px = center.x + radius * np.cos(phi)
    pk = center.k + radius * np.sin(phi)
    _check_trust(params, px, pk)
    wx, wk = velocity_w_xy(params, px, pk)
    speed = np.hypot(wx, wk)
    if np.min(speed) < 1e-12:
        raise NumericalError(
            "velocity magnitude below 1e-12 on the loop; shrink or expand "
            "the radius", payload=float(np.min(speed)))
    tangential = (-np.sin(phi) * wx + np.cos(phi) * wk) / speed
    # accumulated direction angle around the closed loop, wrapped per step
    theta = np.arctan2(wk, wx)
    dtheta = np.diff(np.concatenate([theta, theta[:1]]))
    dtheta = (dtheta + math.pi) % (2.0 * math.pi) - math.pi
    winding = float(np.sum(dtheta)) / (2.0 * math.pi)
    if np.min(tangential) > 0.0:
        return abs(winding)
    if np.max(tangential) < 0.0:
        return -abs(winding)
    return 0.0


def _kernel_zeros(params, upper, probes):
    """Zeros of the current kernel F(chi) on (0, upper], by sign scan plus
    bisection on the scaled (Gaussian-cancelled) form."""
    al = params.alpha
    if upper <= 0.0:
        return []
    n = max(int(probes), 400)
    grid = np.linspace(0.0, upper, n + 1)
    vals = im_erf_offset_scaled(al, grid)
    zeros = []
    for i in range(n):
        v0, v1 = vals[i], vals[i + 1]
        if v0 == 0.0 and grid[i] > 0.0:
            zeros.append(float(grid[i]))
        elif (v0 > 0.0) != (v1 > 0.0):
            lo, hi = grid[i], grid[i + 1]
            flo = v0
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                fm = im_erf_offset_scaled(al, float(mid))
                if (fm > 0.0) == (flo > 0.0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            zeros.append(0.5 * (lo + hi))
    # merge near-coincident detections (exact grid-node zeros can otherwise
    # seed a second root in the neighboring cell)
    merged = []
    for z in zeros:
        if not merged or z - merged[-1] > 1e-9:
            merged.append(z)
    return merged


@dataclass(frozen=True)
class StagnationPoint:
    """Located zero of the Wigner current with its circulation class."""

    location: PhasePoint
    residual: float
    circulation: float
    kind: str  # 'vortex_cw' | 'vortex_ccw' | 'saddle_or_separatrix'


def _classify(gamma):
    if gamma >= 0.5:
        return "vortex_ccw"
    if gamma <= -0.5:
        return "vortex_cw"
    return "saddle_or_separatrix"


def find_stagnation_points(params, bbox, grid=200):
    """All zeros of the current inside bbox = (x_lo, x_hi, k_lo, k_hi).

    The zero set is separable: J_x = 0 on {k = 0} and {F(x) = 0}, J_k = 0 on
    {x = 0} and {F(k) = 0}, so stagnation points are the origin plus the
    lattice of kernel-zero pairs.  Each point is refined to |J| < 1e-10 and
    annotated with the circulation number measured on a loop of one third of
    its nearest-neighbor distance.  Sorted by (x, k) for reproducibility.
    """
    x_lo, x_hi, k_lo, k_hi = bbox
    if not (x_lo < x_hi and k_lo < k_hi):
        raise UsageError("bbox must satisfy x_lo < x_hi and k_lo < k_hi")
    lim = params.trust_limit()
    if max(abs(x_lo), abs(x_hi), abs(k_lo), abs(k_hi)) > lim:
        raise DomainError(
            f"bbox exceeds the velocity trust region |x|,|k| <= {lim:.4f}")
    upper = max(abs(x_lo), abs(x_hi), abs(k_lo), abs(k_hi))
    zeros = _kernel_zeros(params, upper, probes=max(grid * 4, 800))
    xs = [0.0] + [s * z for z in zeros for s in (+1.0, -1.0)]
    candidates = []
    for cx in xs:
        for ck in xs:
            if (cx == 0.0) != (ck == 0.0):
                continue  # axis points off the origin carry current
            if x_lo <= cx <= x_hi and k_lo <= ck <= k_hi:
                candidates.append((cx, ck))
    candidates = sorted(set(candidates))
    points = []
    for cx, ck in candidates:
        jx, jk = currents_closed_xy(params, cx, ck)
        residual = float(np.hypot(jx, jk))
        # nearest-neighbor distance controls the circulation loop radius
        nn = min((math.hypot(cx - ox, ck - ok)
                  for ox, ok in candidates if (ox, ok) != (cx, ck)),
                 default=min(x_hi - x_lo, k_hi - k_lo))
        radius = nn / 3.0
        max_r = lim - max(abs(cx), abs(ck))
        radius = min(radius, 0.9 * max_r) if max_r > 0.0 else radius
        gamma = circulation_number(params, PhasePoint(cx, ck), radius)
        points.append(StagnationPoint(location=PhasePoint(cx, ck),
                                      residual=residual,
                                      circulation=gamma,
                                      kind=_classify(gamma)))
    return points


# ---------------------------------------------------------------------------
# semiclassical trajectories of the quantum velocity field
# ---------------------------------------------------------------------------

def integrate_quantum_trajectory(params, start, step, duration):
    """Integrate dxi/dtau = w(xi) and the classical companion from the same
    start; returns (quantum, classical) trajectories.

    The quantum leg fails with the partial trajectory attached if it leaves
    the velocity trust region.
    """
    _check_trust(params, start.x, start.k)
    if not (step > 0.0 and duration > step):
        raise DomainError("require 0 < step < duration")
    n_steps = max(1, int(round(duration / step)))
    lim = params.trust_limit()
    xs = np.empty(n_steps + 1)
    ks = np.empty(n_steps + 1)
    dxs = np.empty(n_steps + 1)
    dks = np.empty(n_steps + 1)
    x, k = start.x, start.k
    h = step
    h2 = 0.5 * h
    fail_at = None
    for i in range(n_steps):
        d1 = _velocity_scalar(params, x, k)
        xs[i], ks[i], dxs[i], dks[i] = x, k, d1[0], d1[1]
        d2 = _velocity_scalar(params, x + h2 * d1[0], k + h2 * d1[1])
        d3 = _velocity_scalar(params, x + h2 * d2[0], k + h2 * d2[1])
        d4 = _velocity_scalar(params, x + h * d3[0], k + h * d3[1])
        x += h * (d1[0] + 2.0 * (d2[0] + d3[0]) + d4[0]) / 6.0
        k += h * (d1[1] + 2.0 * (d2[1] + d3[1]) + d4[1]) / 6.0
        if abs(x) > lim or abs(k) > lim:
            fail_at = i + 1
            break
    if fail_at is None:
        d = _velocity_scalar(params, x, k)
        xs[n_steps], ks[n_steps], dxs[n_steps], dks[n_steps] = x, k, d[0], d[1]
        m = n_steps + 1
    else:
        xs[fail_at], ks[fail_at] = x, k
        dxs[fail_at] = dks[fail_at] = 0.0
        m = fail_at + 1
    tau = step * np.arange(m)
    quantum = Trajectory(tau=tau, x=xs[:m], k=ks[:m],
                         y=np.exp(-xs[:m]), z=np.exp(-ks[:m]),
                         energy_residual=None, eps=None,
                         meta={"params": params, "step": step,
                               "dx": dxs[:m], "dk": dks[:m],
                               "kind": "quantum"})
    if fail_at is not None:
        raise NumericalError(
            f"quantum trajectory left the trust region at tau = {tau[-1]:.4f}",
            payload=quantum)
    model = SeparableHamiltonian(HamiltonianKind.TODA, params.a)
    spec = OrbitSpec.from_point(model, start, step=step, duration=duration)
    classical = integrate_orbit(spec)
    return quantum, classical
