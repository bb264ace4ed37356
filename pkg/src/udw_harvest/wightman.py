"""Uniformly accelerated trajectories and their iε-regulated Wightman kernels.

All four planar motions (linear, catenary, cusped, circular) share one
denominator once the torsion ratio ``bbar = b/a`` is introduced.  Writing
``x = 1 - bbar**2`` and ``z = (a*dtau/2)**2`` the single-detector
denominator is

    D(dtau) = dtau**2 * (1 + z * g(x*z)),    g(w) = (sinh(sqrt(w))**2 - w) / w**2

where ``g`` is entire, so the same expression covers the hyperbolic
(``x > 0``), trigonometric (``x < 0``) and cusped (``x = 0``) regimes.  Near
``w = 0`` it is evaluated from its Taylor series, which removes both the
cancellation between the ``sinh**2`` and ``dtau**2`` pieces around
``bbar = 1`` and the one at small ``dtau``.

The regulator is always applied as ``dtau -> dtau - i*eps``; the sum
``tauA + tauB`` is never deformed.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from math import factorial
from typing import NamedTuple

import numpy as np

FOUR_PI2 = 4.0 * math.pi**2

# |w| below which the entire functions are summed from their Taylor series
SERIES_RADIUS = 0.5
# |Re sqrt(w)| above which sinh overflows the denominator; the kernel is 0 there
_HUGE_ARG = 300.0

# g(w) = sum_{n>=2} 2^(2n-1)/(2n)! w^(n-2), highest power first for polyval
_G_COEF = np.array([2.0 ** (2 * n - 1) / factorial(2 * n) for n in range(2, 18)])[::-1]
# S(w) = sinh(sqrt(w))/sqrt(w) = sum_{n>=0} w^n/(2n+1)!
_S_COEF = np.array([1.0 / factorial(2 * n + 1) for n in range(0, 16)])[::-1]


class KernelEvaluationError(ArithmeticError):
    """Raised when a regulated kernel evaluates to a non-finite number."""

    def __init__(self, dtau):
        self.dtau = dtau
        super().__init__(f"non-finite Wightman kernel at dtau={dtau!r}")


class Motion(enum.Enum):
    LINEAR = "linear"
    CATENARY = "catenary"
    CUSPED = "cusped"
    CIRCULAR = "circular"


class Flavor(enum.Enum):
    STATIONARY = "stationary"
    NONSTATIONARY = "nonstationary"


@dataclass(frozen=True)
class TrajectoryParams:
    """Proper acceleration ``a`` (> 0) and torsion ratio ``bbar = b/a`` (>= 0)."""

    a: float
    bbar: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0):
            raise ValueError(f"acceleration must be positive and finite, got {self.a}")
        if not (math.isfinite(self.bbar) and self.bbar >= 0):
            raise ValueError(f"bbar must be finite and >= 0, got {self.bbar}")

    @property
    def motion(self) -> Motion:
        if self.bbar == 0:
            return Motion.LINEAR
        if self.bbar < 1:
            return Motion.CATENARY
        if self.bbar == 1:
            return Motion.CUSPED
        return Motion.CIRCULAR


class RegulatedTime(NamedTuple):
    dtau: float
    eps: float


@dataclass(frozen=True)
class PairConfig:
    traj: TrajectoryParams
    L: float
    flavor: Flavor = Flavor.STATIONARY

    def __post_init__(self):
        if not (math.isfinite(self.L) and self.L >= 0):
            raise ValueError(f"separation must be finite and >= 0, got {self.L}")
        if not isinstance(self.flavor, Flavor):
            object.__setattr__(self, "flavor", Flavor(self.flavor))


@dataclass(frozen=True)
class CircularDerived:
    R: float
    omega: float
    gamma: float
    v: float


def circular_derived(traj: TrajectoryParams) -> CircularDerived:
    """Radius, coordinate angular velocity, Lorentz factor and speed of a circular orbit."""
    bb = traj.bbar
    if bb <= 1:
        raise ValueError(f"circular motion needs bbar > 1, got {bb}")
    a = traj.a
    v = 1.0 / bb
    omega = a * bb * (1.0 - v * v)
    gamma = bb / math.sqrt(bb * bb - 1.0)
    R = 1.0 / (a * (bb * bb - 1.0))
    return CircularDerived(R=R, omega=omega, gamma=gamma, v=v)


def _g(w):
    """(sinh(sqrt w)^2 - w)/w^2 and a mask of points where sinh overflows."""
    w = np.asarray(w, dtype=complex)
    out = np.empty_like(w)
    huge = np.zeros(w.shape, dtype=bool)
    small = np.abs(w) < SERIES_RADIUS
    out[small] = np.polyval(_G_COEF, w[small])
    big = ~small
    if big.any():
        wb = w[big]
        r = np.sqrt(wb)
        over = np.abs(r.real) > _HUGE_ARG
        r = np.where(over, 0.0, r)
        sh = np.sinh(r)
        out[big] = np.where(over, np.inf, (sh * sh - wb) / (wb * wb))
        huge[big] = over
    return out, huge


def _sinhc(w):
    """sinh(sqrt w)/sqrt w and overflow mask."""
    w = np.asarray(w, dtype=complex)
    out = np.empty_like(w)
    huge = np.zeros(w.shape, dtype=bool)
    small = np.abs(w) < SERIES_RADIUS
    out[small] = np.polyval(_S_COEF, w[small])
    big = ~small
    if big.any():
        r = np.sqrt(w[big])
        over = np.abs(r.real) > _HUGE_ARG
        r = np.where(over, 1.0, r)
        out[big] = np.where(over, np.inf, np.sinh(r) / r)
        huge[big] = over
    return out, huge


def single_denominator(traj: TrajectoryParams, dtau):
    """Unified denominator D(dtau) for complex or real ``dtau``.

    Returns ``(D, huge)`` where ``huge`` marks points at which |D| overflows.
    """
    dtau = np.asarray(dtau, dtype=complex)
    x = 1.0 - traj.bbar**2
    z = (0.5 * traj.a * dtau) ** 2
    g, huge = _g(x * z)
    with np.errstate(invalid="ignore", over="ignore"):
        d = dtau * dtau * (1.0 + z * g)
    return d, huge


def _cross_term(traj: TrajectoryParams, L, dtau, dplus):
    """(4L/((1-bbar^2) a)) sinh(c dtau/2) sinh(c dplus/2), c = sqrt(1-bbar^2) a."""
    x = 1.0 - traj.bbar**2
    p = 0.5 * traj.a * np.asarray(dtau, dtype=complex)
    q = 0.5 * traj.a * np.asarray(dplus, dtype=complex)
    sp, hp = _sinhc(x * p * p)
    sq, hq = _sinhc(x * q * q)
    with np.errstate(invalid="ignore", over="ignore"):
        term = (4.0 * L / traj.a) * p * q * sp * sq
    return term, hp | hq


def pair_denominator(cfg: PairConfig, dtau, dplus=0.0):
    """Denominator of the pair kernel at (possibly complex) ``dtau`` and real ``dplus``."""
    d, huge = single_denominator(cfg.traj, dtau)
    d = d - cfg.L**2
    if cfg.flavor is Flavor.NONSTATIONARY and cfg.L != 0:
        cross, h2 = _cross_term(cfg.traj, cfg.L, dtau, dplus)
        with np.errstate(invalid="ignore"):
            d = d - cross
        huge = huge | h2
    return d, huge


def real_pair_denominator(cfg: PairConfig, dtau, dplus=0.0):
    """Unregulated pair denominator on the real axis (used for light-cone search)."""
    d, huge = pair_denominator(cfg, np.asarray(dtau, dtype=float), dplus)
    d = d.real
    # overflowed points keep the sign of the dominant term, which is irrelevant
    # to root finding inside any sensible window
    return np.where(huge, np.copysign(np.inf, np.nan_to_num(d)), d)


def _kernel_from_denominator(d, huge, dtau):
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(huge, 0.0, -1.0 / (FOUR_PI2 * np.where(huge, 1.0, d)))
    if not np.all(np.isfinite(k)):
        bad = np.broadcast_to(np.asarray(dtau), k.shape)[~np.isfinite(k)]
        raise KernelEvaluationError(bad.ravel()[0] if bad.size else dtau)
    return k


def _check_eps(eps):
    if not eps > 0:
        raise ValueError(f"regulator eps must be > 0, got {eps}")


def eval_single(traj: TrajectoryParams, dtau, eps):
    """Regulated single-detector kernel  -1/(4 pi^2 D(dtau - i eps)).

    Vectorised over ``dtau``; returns complex values in units of 1/length^2.
    """
    _check_eps(eps)
    dt = np.asarray(dtau, dtype=float) - 1j * eps
    d, huge = single_denominator(traj, dt)
    k = _kernel_from_denominator(d, huge, dtau)
    return k if k.ndim else complex(k)


def eval_cusped_series(a: float, dtau, eps):
    """Exact cusped-motion kernel  -1/(4 pi^2 (dt^2 + a^2 dt^4/12)),  dt = dtau - i eps."""
    _check_eps(eps)
    dt = np.asarray(dtau, dtype=float) - 1j * eps
    d = dt * dt * (1.0 + (a * a / 12.0) * dt * dt)
    k = _kernel_from_denominator(d, np.zeros(d.shape, dtype=bool), dtau)
    return k if k.ndim else complex(k)


def eval_pair(cfg: PairConfig, tauA, tauB, eps, reverse: bool = False):
    """Regulated pair kernel W(x_A(tauA), x_B(tauB)).

    With ``reverse=True`` the operator order is swapped, giving
    W(x_B(tauB), x_A(tauA)), i.e. the complex conjugate on real times.
    """
    _check_eps(eps)
    tauA = np.asarray(tauA, dtype=float)
    tauB = np.asarray(tauB, dtype=float)
    u = tauA - tauB
    s = tauA + tauB
    dt = u + (1j * eps if reverse else -1j * eps)
    d, huge = pair_denominator(cfg, dt, s)
    k = _kernel_from_denominator(d, huge, u)
    return k if k.ndim else complex(k)


def eval_pair_us(cfg: PairConfig, u, s, eps, time_ordered: bool = False):
    """Pair kernel in rotated coordinates u = tauA - tauB, s = tauA + tauB.

    ``time_ordered=True`` returns the Heaviside-joined combination entering
    the nonlocal element: W(x_A, x_B) for u > 0 and W(x_B, x_A) for u < 0,
    with weight 1/2 on each ordering at u = 0.
    """
    _check_eps(eps)
    u = np.asarray(u, dtype=float)
    if time_ordered:
        sgn = np.sign(u)
        dt = u - 1j * eps * np.where(sgn == 0, 1.0, sgn)
    else:
        dt = u - 1j * eps
    d, huge = pair_denominator(cfg, dt, s)
    k = _kernel_from_denominator(d, huge, u)
    if time_ordered and np.any(u == 0):
        d0, h0 = pair_denominator(cfg, u + 1j * eps, s)
        k0 = _kernel_from_denominator(d0, h0, u)
        k = np.where(u == 0, 0.5 * (k + k0), k)
    return k


def lightcone_crossings(cfg: PairConfig, halfwidth: float, dplus: float = 0.0):
    """Real roots in dtau of the pair denominator on [-halfwidth, halfwidth].

    A non-empty result means the detectors are in light-cone contact inside
    the window and the quadrature has to resolve regulated poles there.
    """
    from .quad import detect_real_poles

    return detect_real_poles(
        lambda u: real_pair_denominator(cfg, u, dplus), (-halfwidth, halfwidth)
    )
