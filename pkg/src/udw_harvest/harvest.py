"""Two-detector density-matrix elements and the correlations harvested from them.

All elements are reported with the coupling stripped (divided by lambda^2).
For identical detectors with gap Omega and Gaussian width sigma:

    L_AB = int dtA dtB  X(tA) X(tB) exp(-i Omega (tA - tB)) W(x_A(tA), x_B(tB))
    M    = -int dtA dtB X(tA) X(tB) exp(-i Omega (tA + tB)) T[W](tA, tB)

where X(t) = exp(-t^2 / 2 sigma^2) and T[W] is W(x_A, x_B) for tA > tB and
W(x_B, x_A) otherwise.  Splitting T[W] into real and imaginary parts gives
M = M_plus + i M_minus.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from . import wightman
from .quad import DEFAULT_1D, DEFAULT_2D, QuadResult, QuadSpec, integrate_timeordered_2d, integrate_windowed_1d
from .response import SQRT_PI, DetectorParams, eps_unit, transition_probability
from .sweep import run_rows
from .wightman import Flavor, PairConfig

# absolute slack (in units of lambda^2) below which tiny negatives count as zero
NEG_TOL = 1e-14


@dataclass(frozen=True)
class DensityMatrixBlocks:
    laa: float
    lbb: float
    lab: complex
    m: complex
    m_plus: complex
    m_minus: complex
    err_laa: float = 0.0
    err_lab: float = 0.0
    err_m: float = 0.0
    err_m_plus: float = 0.0
    err_m_minus: float = 0.0


@dataclass(frozen=True)
class CorrelationReport:
    concurrence: float
    concurrence_plus: float
    concurrence_minus: float
    mutual_info: float
    l_plus: float
    l_minus: float
    blocks: DensityMatrixBlocks | None = None


def _require_separated(cfg: PairConfig):
    # M is UV divergent for coincident detectors
    if cfg.L <= 0:
        raise ValueError("pair elements need L > 0; at L = 0 the nonlocal element diverges")


def _pair_poles_1d(cfg: PairConfig):
    return lambda u: wightman.real_pair_denominator(cfg, u, 0.0)


def transition_cross(cfg: PairConfig, det: DetectorParams, spec: QuadSpec | None = None,
                     method: str = "auto"):
    """Cross transition element L_AB / lambda^2 as a QuadResult.

    ``method`` is "1d" (stationary only), "2d", or "auto".
    """
    if method == "auto":
        method = "1d" if cfg.flavor is Flavor.STATIONARY else "2d"
    unit = eps_unit(cfg.traj.a, det)
    if method == "1d":
        if cfg.flavor is not Flavor.STATIONARY:
            raise ValueError("the 1D reduction needs a stationary configuration")
        spec = spec or DEFAULT_1D

        def kernel(u, eps):
            return wightman.eval_pair_us(cfg, u, 0.0, eps)

        double = -1.0 / wightman.FOUR_PI2 if cfg.L == 0 else 0.0
        res = integrate_windowed_1d(kernel, det.omega, det.sigma, spec,
                                    denominator=_pair_poles_1d(cfg) if cfg.L else None,
                                    double_pole=double, eps_unit=unit)
        scale = det.sigma * SQRT_PI
        return res.__class__(res.value * scale, res.err_estimate * scale, res.eps_extrapolated,
                             res.refinements_used, tuple(v * scale for v in res.eps_values))
    if method != "2d":
        raise ValueError(f"unknown method {method!r}")
    spec = spec or DEFAULT_2D

    def kernel2(ta, tb, eps):
        return wightman.eval_pair(cfg, ta, tb, eps)

    denom = None
    if cfg.L:
        denom = lambda ta, tb: wightman.real_pair_denominator(cfg, ta - tb, ta + tb)  # noqa: E731
    return integrate_timeordered_2d(kernel2, (det.omega, -det.omega), det.sigma, spec,
                                    denominator=denom, eps_unit=unit,
                                    double_pole=-1.0 / wightman.FOUR_PI2 if cfg.L == 0 else 0.0)


def _split(k):
    k = np.asarray(k)
    return np.stack([k.real.astype(complex), k.imag.astype(complex)])


def nonlocal_element(cfg: PairConfig, det: DetectorParams, spec: QuadSpec | None = None,
                     method: str = "auto"):
    """(M, M_plus, M_minus) / lambda^2 as a tuple of QuadResults."""
    _require_separated(cfg)
    if method == "auto":
        method = "1d" if cfg.flavor is Flavor.STATIONARY else "2d"
    unit = eps_unit(cfg.traj.a, det)
    if method == "1d":
        if cfg.flavor is not Flavor.STATIONARY:
            raise ValueError("the 1D reduction needs a stationary configuration")
        spec = spec or DEFAULT_1D

        def kernel(u, eps):
            return _split(wightman.eval_pair_us(cfg, u, 0.0, eps, time_ordered=True))

        rp, rm = integrate_windowed_1d(kernel, 0.0, det.sigma, spec,
                                       denominator=_pair_poles_1d(cfg), eps_unit=unit)
        scale = -det.sigma * SQRT_PI * math.exp(-(det.omega * det.sigma) ** 2)
    elif method == "2d":
        spec = spec or DEFAULT_2D

        def upper(ta, tb, eps):
            return _split(wightman.eval_pair(cfg, ta, tb, eps))

        def lower(ta, tb, eps):
            return _split(wightman.eval_pair(cfg, ta, tb, eps, reverse=True))

        def denom(ta, tb):
            return wightman.real_pair_denominator(cfg, ta - tb, ta + tb)

        rp, rm = integrate_timeordered_2d(upper, (det.omega, det.omega), det.sigma, spec,
                                          lower_kernel=lower, denominator=denom, eps_unit=unit)
        scale = -1.0
    else:
        raise ValueError(f"unknown method {method!r}")
    mp = rp.value * scale
    mm = rm.value * scale
    ep = rp.err_estimate * abs(scale)
    em = rm.err_estimate * abs(scale)
    used = max(rp.refinements_used, rm.refinements_used)
    return (QuadResult(mp + 1j * mm, ep + em, True, used),
            QuadResult(mp, ep, True, rp.refinements_used),
            QuadResult(mm, em, True, rm.refinements_used))


def _blocks(cfg, det, spec, method):
    _require_separated(cfg)
    local = transition_probability(cfg.traj, det, spec if method == "1d" and spec else DEFAULT_1D)
    lab = transition_cross(cfg, det, spec, method)
    m, mp, mm = nonlocal_element(cfg, det, spec, method)
    # identical detectors on congruent worldlines share one local element
    return DensityMatrixBlocks(
        laa=local.prob_over_lambda2, lbb=local.prob_over_lambda2, lab=lab.value,
        m=m.value, m_plus=mp.value, m_minus=mm.value,
        err_laa=local.err, err_lab=lab.err_estimate, err_m=m.err_estimate,
        err_m_plus=mp.err_estimate, err_m_minus=mm.err_estimate)


def elements_stationary(cfg: PairConfig, det: DetectorParams,
                        spec: QuadSpec | None = None) -> DensityMatrixBlocks:
    """Density-matrix blocks from single integrals over u = tauA - tauB."""
    if cfg.flavor is not Flavor.STATIONARY:
        raise ValueError("elements_stationary needs a stationary configuration")
    return _blocks(cfg, det, spec, "1d")


def elements_2d(cfg: PairConfig, det: DetectorParams,
                spec: QuadSpec | None = None) -> DensityMatrixBlocks:
    """Density-matrix blocks from the full time-ordered double integrals (any flavor)."""
    return _blocks(cfg, det, spec, "2d")


def elements_nonstationary(cfg: PairConfig, det: DetectorParams,
                           spec: QuadSpec | None = None) -> DensityMatrixBlocks:
    if cfg.flavor is not Flavor.NONSTATIONARY:
        raise ValueError("elements_nonstationary needs a nonstationary configuration")
    return _blocks(cfg, det, spec, "2d")


def elements(cfg: PairConfig, det: DetectorParams, spec: QuadSpec | None = None):
    if cfg.flavor is Flavor.STATIONARY:
        return elements_stationary(cfg, det, spec)
    return elements_nonstationary(cfg, det, spec)


def _check_local(b: DensityMatrixBlocks):
    for name, v, e in (("laa", b.laa, b.err_laa), ("lbb", b.lbb, b.err_laa)):
        if not math.isfinite(v):
            raise ValueError(f"{name} is not finite")
        if v < -(e + NEG_TOL):
            raise ValueError(f"{name} = {v:.3e} is negative beyond its error {e:.1e}")


def concurrence(b: DensityMatrixBlocks):
    """(C, C_plus, C_minus) / lambda^2 = 2 max(0, |m| - sqrt(laa lbb))."""
    _check_local(b)
    root = math.sqrt(max(b.laa, 0.0) * max(b.lbb, 0.0))
    return tuple(2.0 * max(0.0, abs(x) - root) for x in (b.m, b.m_plus, b.m_minus))


def mutual_information(b: DensityMatrixBlocks):
    """(I, L_plus, L_minus) / lambda^2 with 0 ln 0 = 0."""
    _check_local(b)
    laa, lbb = max(b.laa, 0.0), max(b.lbb, 0.0)
    disc = math.sqrt((laa - lbb) ** 2 + 4.0 * abs(b.lab) ** 2)
    lp = 0.5 * (laa + lbb + disc)
    lm = max(0.5 * (laa + lbb - disc), 0.0)
    info = xlogy(lp, lp) + xlogy(lm, lm) - xlogy(laa, laa) - xlogy(lbb, lbb)
    return float(info), lp, lm


def correlation_report(b: DensityMatrixBlocks) -> CorrelationReport:
    c, cp, cm = concurrence(b)
    info, lp, lm = mutual_information(b)
    return CorrelationReport(c, cp, cm, info, lp, lm, b)


@dataclass(frozen=True)
class HarvestPoint:
    a_sigma: float
    bbar: float
    omega_sigma: float
    L_sigma: float
    flavor: str = "stationary"

    def config(self) -> tuple[PairConfig, DetectorParams]:
        traj = wightman.TrajectoryParams(self.a_sigma, self.bbar)
        return PairConfig(traj, self.L_sigma, Flavor(self.flavor)), DetectorParams(self.omega_sigma)


def _harvest_row(point, spec):
    if isinstance(point, dict):
        point = HarvestPoint(**point)
    elif not isinstance(point, HarvestPoint):
        point = HarvestPoint(*point)
    cfg, det = point.config()
    return correlation_report(elements(cfg, det, spec))


def harvest_sweep(grid, spec: QuadSpec | None = None, jobs: int = 1):
    """Correlation reports on (a_sigma, bbar, omega_sigma, L_sigma, flavor) points, sigma = 1."""
    return run_rows(_harvest_row, list(grid), spec, jobs)
