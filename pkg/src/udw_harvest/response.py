"""Single-detector observables: transition probability and effective temperature."""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

from . import wightman
from .quad import DEFAULT_1D, QuadResult, QuadSpec, integrate_windowed_1d
from .sweep import run_rows

log = logging.getLogger(__name__)

SQRT_PI = math.sqrt(math.pi)
# leading small-dtau behaviour of every single-detector kernel
DOUBLE_POLE = -1.0 / wightman.FOUR_PI2


class UndefinedTemperatureWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class DetectorParams:
    """Energy gap ``omega``, Gaussian width ``sigma`` and coupling ``lam``."""

    omega: float
    sigma: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not math.isfinite(self.omega):
            raise ValueError("omega must be finite")

    def with_omega(self, omega: float) -> "DetectorParams":
        return DetectorParams(omega, self.sigma, self.lam)


@dataclass(frozen=True)
class ResponseResult:
    prob_over_lambda2: float
    err: float
    meta: QuadResult
    imag_residual: float = 0.0
    flagged: bool = False


def eps_unit(a: float, det: DetectorParams) -> float:
    """Regulator unit: the shortest of sigma, 1/a and 1/|Omega|."""
    scales = [det.sigma, 1.0 / a]
    if det.omega:
        scales.append(1.0 / abs(det.omega))
    return min(scales)


def transition_probability(traj: wightman.TrajectoryParams, det: DetectorParams,
                           spec: QuadSpec = DEFAULT_1D) -> ResponseResult:
    """Excitation probability L_jj / lambda^2 of one detector on ``traj``."""

    def kernel(u, eps):
        return wightman.eval_single(traj, u, eps)

    res = integrate_windowed_1d(kernel, det.omega, det.sigma, spec,
                                double_pole=DOUBLE_POLE, eps_unit=eps_unit(traj.a, det))
    pref = det.sigma * SQRT_PI
    value = pref * res.value
    err = pref * res.err_estimate
    imag = abs(value.imag)
    # Im must vanish identically; a large residue means the quadrature is off
    flagged = imag > max(err, 10 * spec.rel_tol * abs(value.real))
    if flagged:
        log.warning("transition probability has imaginary residue %.3e (value %.3e) at %s, %s",
                    imag, value.real, traj, det)
    return ResponseResult(value.real, err, res, imag, flagged)


def response_function(traj, det, spec=DEFAULT_1D) -> ResponseResult:
    """F(Omega, sigma) = L / (lambda^2 sigma)."""
    r = transition_probability(traj, det, spec)
    return ResponseResult(r.prob_over_lambda2 / det.sigma, r.err / det.sigma, r.meta,
                          r.imag_residual / det.sigma, r.flagged)


@dataclass(frozen=True)
class TemperatureResult:
    value: float
    err: float
    f_excite: float
    f_deexcite: float

    @property
    def defined(self) -> bool:
        return math.isfinite(self.value)


def effective_temperature_full(traj, det: DetectorParams, spec=DEFAULT_1D) -> TemperatureResult:
    """Effective temperature with the two response values it was built from."""
    if det.omega == 0:
        raise ValueError("effective temperature needs a nonzero gap")
    gap = abs(det.omega)
    up = response_function(traj, det.with_omega(gap), spec)
    down = response_function(traj, det.with_omega(-gap), spec)
    fu, fd = up.prob_over_lambda2, down.prob_over_lambda2
    if fu <= up.err or fd <= down.err:
        warnings.warn(f"response not positive within error (F+={fu:.3e}, F-={fd:.3e}); "
                      "effective temperature undefined", UndefinedTemperatureWarning,
                      stacklevel=2)
        return TemperatureResult(math.nan, math.nan, fu, fd)
    log_ratio = math.log(fd / fu)
    if log_ratio <= 0:
        warnings.warn("excitation not suppressed relative to de-excitation; "
                      "effective temperature undefined", UndefinedTemperatureWarning,
                      stacklevel=2)
        return TemperatureResult(math.nan, math.nan, fu, fd)
    t = gap / log_ratio
    dlog = up.err / fu + down.err / fd
    return TemperatureResult(t, t * t / gap * dlog, fu, fd)


def effective_temperature(traj, det: DetectorParams, spec=DEFAULT_1D) -> float:
    """T_eff = Omega / ln[F(-Omega)/F(Omega)]; NaN (with a warning) when undefined."""
    return effective_temperature_full(traj, det, spec).value


@dataclass(frozen=True)
class ResponsePoint:
    a_sigma: float
    bbar: float
    omega_sigma: float


def _response_row(point, spec):
    if isinstance(point, dict):
        point = ResponsePoint(**point)
    elif not isinstance(point, ResponsePoint):
        point = ResponsePoint(*point)
    traj = wightman.TrajectoryParams(point.a_sigma, point.bbar)
    return transition_probability(traj, DetectorParams(point.omega_sigma, 1.0), spec)


def response_sweep(grid, spec: QuadSpec = DEFAULT_1D, jobs: int = 1):
    """Transition probabilities on a list of (a_sigma, bbar, omega_sigma) points, sigma = 1.

    Returns one :class:`~udw_harvest.sweep.SweepRow` per point, in input
    order; a failing point is recorded in its row and the sweep continues.
    """
    return run_rows(_response_row, list(grid), spec, jobs)
