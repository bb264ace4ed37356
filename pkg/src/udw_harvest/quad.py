"""Regularised quadrature for Gaussian-windowed integrals of iε kernels.

Every integral is evaluated at each regulator in ``QuadSpec.eps_schedule``
and the results are extrapolated polynomially to eps -> 0.  The underlying
integrator is a vectorised adaptive Gauss-Kronrod (10/21) scheme whose
panels are split at u = 0 and at light-cone poles, with geometric grading
around each pole so the eps-wide peaks are resolved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.special import erfc, erfcx

# Gauss-Kronrod 21-point rule (QUADPACK qk21)
_XGK = np.array([
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0,
])
_WGK = np.array([
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208005015660, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])          # 21 nodes, ascending
WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
WG = np.zeros(21)
WG[1:10:2] = _WG
WG[11:20:2] = _WG[::-1]


class QuadratureError(RuntimeError):
    """Adaptive refinement did not reach the requested tolerance.

    ``partial`` carries the last per-eps values and error estimates.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial or {}


@dataclass(frozen=True)
class QuadSpec:
    """Regulator schedule and tolerances.

    ``eps_schedule`` is given in units of the caller's ``eps_unit`` (by
    default the Gaussian width sigma).  ``window_halfwidth`` bounds each
    proper time to ``|tau| <= window_halfwidth * sigma``; in the rotated
    variables this is ``|u|, |s| <= sqrt(2) * window_halfwidth * sigma``.
    """

    eps_schedule: tuple = (1e-2, 5e-3, 2.5e-3)
    rel_tol: float = 1e-7
    abs_floor: float = 1e-13
    window_halfwidth: float = 8.0
    max_refinements: int = 40

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps_schedule)
        object.__setattr__(self, "eps_schedule", eps)
        if len(eps) < 3:
            raise ValueError("eps_schedule needs at least 3 entries")
        if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps_schedule must be positive and strictly decreasing")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.abs_floor < 0:
            raise ValueError("abs_floor must be >= 0")
        if self.window_halfwidth < 6:
            raise ValueError("window_halfwidth must be >= 6")
        if self.max_refinements < 1:
            raise ValueError("max_refinements must be >= 1")

    def replace(self, **kw) -> "QuadSpec":
        d = dict(self.__dict__)
        d.update(kw)
        return QuadSpec(**d)


DEFAULT_1D = QuadSpec()
DEFAULT_2D = QuadSpec(rel_tol=1e-5)


@dataclass(frozen=True)
class QuadResult:
    value: complex
    err_estimate: float
    eps_extrapolated: bool
    refinements_used: int
    eps_values: tuple = field(default=(), repr=False)


class Bracket(NamedTuple):
    lo: float
    hi: float

    @property
    def root(self) -> float:
        return 0.5 * (self.lo + self.hi)


# ---------------------------------------------------------------------------
# adaptive core

def _gk_panels(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * NODES[None, :]
    y = np.asarray(f(x.ravel()))
    y = y.reshape(y.shape[:-1] + x.shape)                 # (k, P, 21)
    kron = (y * WK).sum(-1) * half
    gauss = (y * WG).sum(-1) * half
    return kron, np.abs(kron - gauss)


def adaptive_gk(f, breakpoints, rel_tol, abs_tol, max_iter, control=None):
    """Integrate a vector-valued ``f`` over the union of ``breakpoints`` panels.

    ``f`` maps a 1-D array of abscissae to an array of shape (k, n).
    ``control`` optionally selects the components that must meet the
    tolerance; the others are integrated along for free.
    Returns (values[k], errors[k], iterations).
    """
    edges = np.unique(np.asarray(breakpoints, dtype=float))
    a, b = edges[:-1], edges[1:]
    vals, errs = _gk_panels(f, a, b)
    k = vals.shape[0]
    ctrl = np.ones(k, dtype=bool) if control is None else np.asarray(control)
    abs_tol = np.broadcast_to(np.asarray(abs_tol, dtype=float), (k,))
    for it in range(max_iter + 1):
        total = vals.sum(1)
        err = errs.sum(1)
        tol = np.maximum(rel_tol * np.abs(total), abs_tol)
        bad_comp = (err > tol) & ctrl
        if not bad_comp.any():
            return total, err, it
        if it == max_iter:
            raise QuadratureError(
                f"no convergence after {max_iter} refinements",
                {"values": total, "errors": err, "tolerance": tol},
            )
        thresh = tol[bad_comp][:, None] / len(a)
        split = (errs[bad_comp] > 0.5 * thresh).any(0)
        worst = errs[bad_comp].argmax(1)
        split[worst] = True
        mid = 0.5 * (a[split] + b[split])
        na = np.concatenate([a[split], mid])
        nb = np.concatenate([mid, b[split]])
        nv, ne = _gk_panels(f, na, nb)
        keep = ~split
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        vals = np.concatenate([vals[:, keep], nv], axis=1)
        errs = np.concatenate([errs[:, keep], ne], axis=1)
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# extrapolation

def richardson_weights(eps: Sequence[float]) -> np.ndarray:
    """Weights of the Lagrange polynomial through (eps_j, .) evaluated at 0."""
    e = np.asarray(eps, dtype=float)
    w = np.ones(len(e))
    for j in range(len(e)):
        for m in range(len(e)):
            if m != j:
                w[j] *= e[m] / (e[m] - e[j])
    return w


def extrapolate(eps, values, errors):
    """Polynomial extrapolation to eps = 0 along the first axis.

    The error combines the propagated quadrature errors with the change
    obtained by dropping the largest regulator.
    """
    values = np.asarray(values)
    errors = np.asarray(errors, dtype=float)
    w = richardson_weights(eps)
    full = np.tensordot(w, values, axes=1)
    w_low = richardson_weights(eps[1:])
    low = np.tensordot(w_low, values[1:], axes=1)
    err = np.abs(full - low) + np.tensordot(np.abs(w), errors, axes=1)
    return full, err


# ---------------------------------------------------------------------------
# closed forms for the subtracted double pole at the origin

def gaussian_double_pole(omega: float, sigma: float) -> float:
    """Limit eps -> 0+ of  int du exp(-u^2/4 sigma^2 - i omega u) / (u - i eps)^2.

    Real-valued; equals -(pi/sigma) * [exp(-y^2)/sqrt(pi) - y erfc(y)], y = omega*sigma.
    """
    y = omega * sigma
    if y > 0:
        bracket = math.exp(-y * y) * (1.0 / math.sqrt(math.pi) - y * erfcx(y))
    else:
        bracket = math.exp(-y * y) / math.sqrt(math.pi) - y * erfc(y)
    return -(math.pi / sigma) * bracket


# ---------------------------------------------------------------------------
# pole detection

def detect_real_poles(denominator: Callable, search_window, n_samples: int = 1601,
                      tol: float = 1e-12) -> list:
    """Sign changes of a real ``denominator`` on ``search_window``, refined by bisection.

    Touching zeros (no sign change, e.g. the double zero at u = 0 of a
    single-detector denominator) are not reported.
    """
    lo, hi = map(float, search_window)
    x = np.linspace(lo, hi, n_samples)
    d = np.asarray(denominator(x), dtype=float)
    sd = np.sign(d)
    idx = np.nonzero(sd[:-1] * sd[1:] < 0)[0]
    # exact zeros on the grid with a genuine sign change across them
    z = np.nonzero(sd == 0)[0]
    z = z[(z > 0) & (z < len(x) - 1)]
    zero_roots = [x[i] for i in z if sd[i - 1] * sd[i + 1] < 0]
    a = x[idx].copy()
    b = x[idx + 1].copy()
    fa = d[idx].copy()
    for _ in range(200):
        if a.size == 0 or np.all(b - a <= tol):
            break
        m = 0.5 * (a + b)
        if np.all((m == a) | (m == b)):
            break
        fm = np.asarray(denominator(m), dtype=float)
        left = np.sign(fm) * np.sign(fa) <= 0
        b = np.where(left, m, b)
        a = np.where(left, a, m)
        fa = np.where(left, fa, fm)
    out = [Bracket(float(p), float(q)) for p, q in zip(a, b)]
    out += [Bracket(float(r), float(r)) for r in zero_roots]
    return sorted(out)


def _breakpoints(U, sigma, omega, poles, eps_min):
    width = min(0.5 * sigma, 2.0 / abs(omega)) if omega else 0.5 * sigma
    n = max(2, int(math.ceil(2 * U / width)))
    pts = [np.linspace(-U, U, n + 1), [0.0]]
    for p in list(poles) + [0.0]:
        if not -U < p < U:
            continue
        grade = eps_min * 2.0 ** np.arange(0, 60)
        grade = grade[grade < 0.5 * sigma]
        pts.append(p + grade)
        pts.append(p - grade)
        pts.append([p])
    bp = np.concatenate(pts)
    return np.unique(bp[(bp >= -U) & (bp <= U)])


def _component_count(y):
    return 1 if y.ndim == 1 else y.shape[0]


def _finish(eps, per_eps, per_err, iters):
    """Extrapolate (n_eps, m) arrays into a list of m QuadResults."""
    val, err = extrapolate(eps, per_eps, per_err)
    out = []
    for c in range(per_eps.shape[1]):
        v = complex(val[c])
        e = float(err[c])
        if not (np.isfinite(v.real) and np.isfinite(v.imag) and math.isfinite(e)):
            raise QuadratureError("non-finite extrapolated value",
                                  {"values": per_eps[:, c], "errors": per_err[:, c]})
        out.append(QuadResult(v, e, True, iters, tuple(complex(x) for x in per_eps[:, c])))
    return out


def _inner_1d(kernel, omega, sigma, eps_list, U, poles, double_pole, rel_tol,
              abs_floor, max_iter, weight_extra=None):
    """Per-eps values (n_eps, m) and errors of the windowed integral."""
    n_eps = len(eps_list)
    probe = np.asarray(kernel(np.array([0.1 * sigma]), eps_list[0]))
    m = _component_count(probe)

    def f(u):
        base = np.exp(-u * u / (4 * sigma * sigma) - 1j * omega * u)
        rows = []
        for e in eps_list:
            k = np.asarray(kernel(u, e)).reshape(m, -1)
            if double_pole:
                ut = u - 1j * e
                k = k - double_pole / (ut * ut)
            rows.append(k * base)
        return np.concatenate(rows, axis=0)

    bp = _breakpoints(U, sigma, omega, poles, min(eps_list))
    vals, errs, iters = adaptive_gk(f, bp, rel_tol, abs_floor, max_iter)
    vals = vals.reshape(n_eps, m)
    errs = errs.reshape(n_eps, m)
    if double_pole:
        vals = vals + double_pole * gaussian_double_pole(omega, sigma)
    return vals, errs, iters


def integrate_windowed_1d(kernel, phase_freq: float, sigma: float, spec: QuadSpec = DEFAULT_1D,
                          *, denominator=None, poles=(), double_pole: float = 0.0,
                          eps_unit: float | None = None):
    """int du exp(-u^2/4 sigma^2) exp(-i Omega u) kernel(u, eps), extrapolated to eps -> 0.

    ``kernel(u, eps)`` must be vectorised in ``u`` and may return several
    components stacked along the first axis, in which case a list of
    results is returned.  ``denominator`` (a real function of ``u``) enables
    automatic light-cone pole detection; explicit ``poles`` are added to it.
    ``double_pole = c`` declares kernel ~ c/(u - i eps)^2 near the origin:
    that term is subtracted and integrated in closed form.
    """
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    unit = sigma if eps_unit is None else eps_unit
    eps = [e * unit for e in spec.eps_schedule]
    U = math.sqrt(2.0) * spec.window_halfwidth * sigma
    poles = list(poles)
    if denominator is not None:
        poles += [b.root for b in detect_real_poles(denominator, (-U, U))]
    vals, errs, iters = _inner_1d(kernel, phase_freq, sigma, eps, U, poles, double_pole,
                                  spec.rel_tol, spec.abs_floor, spec.max_refinements)
    res = _finish(spec.eps_schedule, vals, errs, iters)
    probe = np.asarray(kernel(np.array([0.1 * sigma]), eps[0]))
    return res if probe.ndim > 1 else res[0]


def integrate_timeordered_2d(kernel, phases, sigma: float, spec: QuadSpec = DEFAULT_2D, *,
                             lower_kernel=None, half_plane: str | None = None,
                             denominator=None, double_pole: float = 0.0,
                             eps_unit: float | None = None):
    """Double integral over (tauA, tauB) with Gaussian switching and phases.

    Computes  int dtauA dtauB exp(-(tauA^2+tauB^2)/2 sigma^2)
    exp(-i (OmA tauA + OmB tauB)) K(tauA, tauB, eps)  in the rotated
    coordinates u = tauA - tauB, s = tauA + tauB (Jacobian 1/2).  ``K`` is
    ``kernel`` for u > 0 and ``lower_kernel`` (if given) for u < 0, which
    implements the time-ordered product.  ``half_plane`` in {"upper",
    "lower"} restricts the integral to one side of the diagonal.
    ``denominator(tauA, tauB)`` enables light-cone pole detection along u
    for every s.
    """
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    om_a, om_b = phases
    om_s = 0.5 * (om_a + om_b)
    om_u = 0.5 * (om_a - om_b)
    unit = sigma if eps_unit is None else eps_unit
    eps = [e * unit for e in spec.eps_schedule]
    n_eps = len(eps)
    U = math.sqrt(2.0) * spec.window_halfwidth * sigma
    if double_pole and (lower_kernel is not None or half_plane):
        raise ValueError("double-pole subtraction needs the full, un-ordered plane")
    inner_rtol = 0.1 * spec.rel_tol
    probe = np.asarray(kernel(np.array([0.1 * sigma]), np.array([0.0]), eps[0]))
    m = _component_count(probe)
    state = {"iters": 0}

    def inner_kernel(s):
        def k(u, e):
            ta = 0.5 * (s + u)
            tb = 0.5 * (s - u)
            out = np.asarray(kernel(ta, tb, e)).reshape(m, -1)
            if lower_kernel is not None:
                low = np.asarray(lower_kernel(ta, tb, e)).reshape(m, -1)
                out = np.where(u > 0, out, np.where(u < 0, low, 0.5 * (out + low)))
            if half_plane == "upper":
                out = np.where(u > 0, out, 0.0)
            elif half_plane == "lower":
                out = np.where(u < 0, out, 0.0)
            return out
        return k

    def outer(svals):
        rows = np.empty((2 * n_eps * m, len(svals)), dtype=complex)
        for j, s in enumerate(svals):
            poles = []
            if denominator is not None:
                poles = [b.root for b in detect_real_poles(
                    lambda u: denominator(0.5 * (s + u), 0.5 * (s - u)), (-U, U))]
            w = math.exp(-s * s / (4 * sigma * sigma)) * np.exp(-1j * om_s * s) * 0.5
            v, e, it = _inner_1d(inner_kernel(s), om_u, sigma, eps, U, poles, double_pole,
                                 inner_rtol, spec.abs_floor * 1e-2, spec.max_refinements)
            state["iters"] = max(state["iters"], it)
            rows[: n_eps * m, j] = (v * w).ravel()
            rows[n_eps * m:, j] = (e * abs(w)).ravel()
        return rows

    n_panels = max(4, int(math.ceil(2 * U / (2.0 * sigma))))
    bp = np.linspace(-U, U, n_panels + 1)
    if om_s:
        bp = np.union1d(bp, np.linspace(-U, U, int(math.ceil(U * abs(om_s))) + 1))
    control = np.r_[np.ones(n_eps * m, bool), np.zeros(n_eps * m, bool)]
    atol = np.r_[np.full(n_eps * m, spec.abs_floor), np.full(n_eps * m, np.inf)]
    vals, errs, iters = adaptive_gk(outer, bp, spec.rel_tol, atol, spec.max_refinements,
                                    control=control)
    per_eps = vals[: n_eps * m].reshape(n_eps, m)
    per_err = (errs[: n_eps * m] + vals[n_eps * m:].real).reshape(n_eps, m)
    res = _finish(spec.eps_schedule, per_eps, per_err, max(iters, state["iters"]))
    return res if probe.ndim > 1 else res[0]
