"""Independent reference computations used to cross-check the main pipeline."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import mpmath
import numpy as np
from scipy.special import erfc

from . import harvest, wightman
from .response import DetectorParams, transition_probability
from .wightman import Flavor, Motion, PairConfig, TrajectoryParams

ABS_FLOOR = 1e-300
# eigenvalues of the assembled state in [-PSD_CLAMP, 0) are set to zero
PSD_CLAMP = 1e-12
# floor for laa + lbb in the fourth-order diagonal completion
COMPLETION_FLOOR = 1e-300


class OracleInapplicable(ValueError):
    """The oracle's preconditions do not hold for the given input."""


@dataclass(frozen=True)
class OracleReport:
    name: str
    lhs: complex
    rhs: complex
    rel_diff: float
    tol: float
    passed: bool

    def to_dict(self):
        d = asdict(self)
        for k in ("lhs", "rhs"):
            v = complex(d[k])
            d[k] = v.real if v.imag == 0 else [v.real, v.imag]
        return d


def rel_diff(lhs, rhs, abs_floor: float = ABS_FLOOR) -> float:
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), abs_floor)


def compare(name, lhs, rhs, tol, abs_floor: float = ABS_FLOOR, absolute: bool = False):
    d = abs(lhs - rhs) if absolute else rel_diff(lhs, rhs, abs_floor)
    return OracleReport(name, lhs, rhs, d, tol, bool(d <= tol))


# ---------------------------------------------------------------- inertial limit

def inertial_closed_form(det: DetectorParams) -> float:
    """Inertial excitation probability / lambda^2 for Gaussian switching."""
    y = det.omega * det.sigma
    return (math.exp(-y * y) - math.sqrt(math.pi) * y * erfc(y)) / (4 * math.pi)


def inertial_mp(omega_sigma, dps: int = 50, shift: float = 1.0):
    """Same quantity by direct integration at ``dps`` digits.

    The eps -> 0 contour runs below the double pole at u = 0, so it can be
    moved to Im u = -shift where the integrand is smooth.
    """
    with mpmath.workdps(dps):
        y = mpmath.mpf(omega_sigma)
        d = mpmath.mpf(shift)

        def f(v):
            u = v - 1j * d
            return mpmath.exp(-u * u / 4 - 1j * y * u) / u**2

        val = mpmath.quad(f, [-mpmath.inf, -5, 0, 5, mpmath.inf])
        val = -mpmath.sqrt(mpmath.pi) * val / (4 * mpmath.pi**2)
        return complex(val)


def validate_inertial(gaps=(0.0, 0.5, 1.0, 2.0, 4.0), tol: float = 1e-12):
    reports = []
    for g in gaps:
        hi = inertial_mp(g)
        reports.append(compare(f"inertial_closed_form[Omega*sigma={g}]",
                               inertial_closed_form(DetectorParams(g)), hi.real, tol))
        reports.append(OracleReport(f"inertial_mp_imag[Omega*sigma={g}]", hi.imag, 0.0,
                                    abs(hi.imag), tol, abs(hi.imag) <= tol))
    return reports


def inertial_response_check(omega_sigma, a_sigma: float = 1e-4, tol: float = 1e-4):
    det = DetectorParams(omega_sigma)
    res = transition_probability(TrajectoryParams(a_sigma), det)
    return compare(f"inertial_vs_response[Omega*sigma={omega_sigma}]",
                   res.prob_over_lambda2, inertial_closed_form(det), tol)


# ---------------------------------------------------------------- position space

def worldline(traj: TrajectoryParams, tau):
    """Explicit (t, x, y, z) of a single accelerated worldline; accepts complex tau."""
    tau = np.asarray(tau, dtype=complex)
    a, bb = traj.a, traj.bbar
    zero = np.zeros_like(tau)
    motion = traj.motion
    if motion is Motion.CUSPED:
        return (tau + a * a * tau**3 / 6, 0.5 * a * tau**2, a * a * tau**3 / 6, zero)
    if motion is Motion.CIRCULAR:
        c = wightman.circular_derived(traj)
        ph = c.omega * c.gamma * tau
        return (c.gamma * tau, c.R * np.cos(ph), c.R * np.sin(ph), zero)
    # linear (bbar = 0) and catenary share the hyperbolic form
    k = a * math.sqrt(1 - bb * bb)
    pre = a / k**2
    return (pre * np.sinh(k * tau), pre * np.cosh(k * tau), a * bb * tau / k, zero)


def _offset(cfg: PairConfig):
    """Spatial offset of detector A relative to its congruent partner B."""
    if cfg.flavor is Flavor.STATIONARY:
        return (0.0, 0.0, 0.0, -cfg.L)
    # the compact circular cross term corresponds to A displaced by -L
    sign = -1.0 if cfg.traj.motion is Motion.CIRCULAR else 1.0
    return (0.0, sign * cfg.L, 0.0, 0.0)


def position_space_kernel(cfg: PairConfig, tauA, tauB, eps, mapping: str = "proper"):
    """-1/(4 pi^2 sigma^2) from explicit four-vectors.

    ``mapping="proper"`` regulates by complex proper times tauA - i eps/2 and
    tauB + i eps/2, which is the placement used by the compact kernels.
    ``mapping="coordinate"`` uses the textbook (dt - i eps)^2 - |dx|^2.
    """
    if mapping == "proper":
        ta = np.asarray(tauA, dtype=float) - 0.5j * eps
        tb = np.asarray(tauB, dtype=float) + 0.5j * eps
        shift = 0.0
    elif mapping == "coordinate":
        ta = np.asarray(tauA, dtype=float)
        tb = np.asarray(tauB, dtype=float)
        shift = eps
    else:
        raise ValueError(f"unknown mapping {mapping!r}")
    xa = worldline(cfg.traj, ta)
    xb = worldline(cfg.traj, tb)
    off = _offset(cfg)
    dt = xa[0] - xb[0] - 1j * shift
    dx2 = sum((xa[i] + off[i] - xb[i]) ** 2 for i in (1, 2, 3))
    k = -1.0 / (wightman.FOUR_PI2 * (dt * dt - dx2))
    return k if np.ndim(k) else complex(k)


def kernel_grid_check(cfg: PairConfig, eps: float = 1e-3, mapping: str = "proper",
                      tol: float = 1e-10, n: int = 10, span: float = 2.0):
    """Max relative difference between compact and position-space kernels on an n x n grid."""
    g = np.linspace(-span, span, n)
    ta, tb = np.meshgrid(g, g)
    lhs = wightman.eval_pair(cfg, ta.ravel(), tb.ravel(), eps)
    rhs = position_space_kernel(cfg, ta.ravel(), tb.ravel(), eps, mapping)
    d = np.abs(lhs - rhs) / np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), ABS_FLOOR)
    i = int(np.argmax(d))
    name = (f"position_space[{cfg.traj.motion.value},{cfg.flavor.value},a={cfg.traj.a},"
            f"bbar={cfg.traj.bbar},L={cfg.L},{mapping}]")
    return OracleReport(name, complex(lhs[i]), complex(rhs[i]), float(d[i]), tol, bool(d[i] <= tol))


def coordinate_mapping_order(cfg: PairConfig, eps: float = 1e-3, tol: float = 0.2):
    """The coordinate-time regulator differs from the compact one at first order in eps.

    Reports the ratio of the grid discrepancies at eps and eps/10, which
    should be close to 10.
    """
    d1 = kernel_grid_check(cfg, eps, "coordinate").rel_diff
    d2 = kernel_grid_check(cfg, eps / 10, "coordinate").rel_diff
    name = f"coordinate_mapping_order[{cfg.traj.motion.value},{cfg.flavor.value}]"
    return compare(name, d1 / d2, 10.0, tol)


# ---------------------------------------------------------------- 1D vs 2D

def single_vs_double(cfg: PairConfig, det: DetectorParams, tol: float = 1e-5):
    """Compare M and L_AB from the 1D reduction and from the 2D time-ordered path."""
    one = harvest.elements_stationary(cfg, det)
    two = harvest.elements_2d(cfg, det)
    tag = f"{cfg.traj.motion.value},a={cfg.traj.a},bbar={cfg.traj.bbar},L={cfg.L}"
    return [compare(f"1d_vs_2d_M[{tag}]", one.m, two.m, tol),
            compare(f"1d_vs_2d_LAB[{tag}]", one.lab, two.lab, tol)], one


# ---------------------------------------------------------------- Wootters

def assemble_state(blocks, lam: float) -> np.ndarray:
    """Two-qubit state with lambda^2 reinstated and the fourth-order corner completed."""
    l2 = lam * lam
    laa, lbb, lab, m = blocks.laa, blocks.lbb, complex(blocks.lab), complex(blocks.m)
    tot = laa + lbb
    if tot <= COMPLETION_FLOOR and m != 0:
        raise OracleInapplicable("nonlocal element without local excitation is not a state")
    r44 = l2 * l2 * abs(m) ** 2 / max(tot, COMPLETION_FLOOR)
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1 - l2 * tot - r44
    rho[1, 1] = l2 * lbb
    rho[2, 2] = l2 * laa
    rho[3, 3] = r44
    rho[0, 3] = l2 * m.conjugate()
    rho[3, 0] = l2 * m
    rho[1, 2] = l2 * lab.conjugate()
    rho[2, 1] = l2 * lab
    return rho


def _psd_sqrt(rho):
    w, v = np.linalg.eigh(rho)
    if w.min() < -PSD_CLAMP:
        raise OracleInapplicable(f"assembled state has eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def wootters_concurrence(blocks, lam: float) -> float:
    """Concurrence of the assembled state from the spin-flip eigenvalues."""
    rho = assemble_state(blocks, lam)
    yy = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])
    flipped = yy @ rho.conj() @ yy
    s = _psd_sqrt(rho)
    prod = s @ flipped @ s
    ev = np.linalg.eigvalsh(0.5 * (prod + prod.conj().T))
    w = np.sort(np.sqrt(np.clip(ev, 0.0, None)))[::-1]
    return max(0.0, w[0] - w[1] - w[2] - w[3])


def wootters_check(blocks, lam: float = 1e-3, tol: float = 1e-8, name: str = "wootters"):
    closed = lam * lam * harvest.concurrence(blocks)[0]
    return compare(name, closed, wootters_concurrence(blocks, lam), tol, absolute=True)


# ---------------------------------------------------------------- battery

BATTERY_MOTIONS = (0.0, 0.5, 1.0, 2.0)


def reduction_configs():
    """Twelve stationary configurations covering all four motions."""
    out = []
    for i, bb in enumerate(BATTERY_MOTIONS):
        for j, L in enumerate((0.5, 1.0, 3.0)):
            a = (1.0, 2.0)[(i + j) % 2]
            out.append(PairConfig(TrajectoryParams(a, bb), L))
    return out


def run_battery(include_2d: bool = True):
    """Every oracle comparison, as a list of OracleReports."""
    reports = validate_inertial()
    reports += [inertial_response_check(g) for g in (0.5, 1.0, 2.0, 4.0)]
    for bb in BATTERY_MOTIONS:
        for flavor in Flavor:
            cfg = PairConfig(TrajectoryParams(1.0, bb), 1.0, flavor)
            reports.append(kernel_grid_check(cfg))
            reports.append(coordinate_mapping_order(cfg))
    det = DetectorParams(1.0)
    for cfg in reduction_configs():
        if include_2d:
            rep, blocks = single_vs_double(cfg, det)
            reports += rep
        else:
            blocks = harvest.elements_stationary(cfg, det)
        tag = f"{cfg.traj.motion.value},a={cfg.traj.a},bbar={cfg.traj.bbar},L={cfg.L}"
        reports.append(wootters_check(blocks, name=f"wootters[{tag}]"))
    return reports
