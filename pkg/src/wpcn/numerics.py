"""Special functions and small maximization primitives.

Contains the two special functions the closed-form throughput expressions
are built from (the exponential integral E1 and the principal Lambert-W
branch), an adaptive quadrature wrapper used as the ground-truth oracle for
every closed form, and 1-D / 2-D maximizers for the threshold searches.

The special functions accept floats or numpy arrays and preserve shape.
Everything is pure; there is no shared state.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

EULER_GAMMA = 0.5772156649015328606065121
#: Marker for an open upper integration bound, e.g. ``integrate(f, a, OPEN_END)``.
OPEN_END = math.inf

# Every integrand in this package decays at least like e^{-g}; truncating an
# open upper bound 40 units past the lower bound leaves a remainder below
# e^{-40} < 1e-17, under the double-precision noise floor of the results.
_TAIL_LENGTH = 40.0
_TINY = 1e-300

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


class ConvergenceError(RuntimeError):
    """An iterative routine failed to reach its requested tolerance."""


@dataclass(frozen=True)
class ToleranceSpec:
    """Stopping rule for iterative maximizers."""

    abs_tol: float = 1e-9
    rel_tol: float = 0.0
    max_iter: int = 200

    def __post_init__(self) -> None:
        if not self.abs_tol > 0.0:
            raise ValueError(f"abs_tol must be > 0, got {self.abs_tol}")
        if self.rel_tol < 0.0:
            raise ValueError(f"rel_tol must be >= 0, got {self.rel_tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class Interval:
    """Half-open interval [lo, hi); ``hi`` may be ``OPEN_END`` (math.inf)."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.lo):
            raise ValueError(f"interval lower bound must be finite, got {self.lo}")
        if math.isnan(self.hi):
            raise ValueError("interval upper bound is NaN")
        if self.lo > self.hi:
            raise ValueError(f"interval requires lo <= hi, got [{self.lo}, {self.hi})")

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.hi)

    @property
    def empty(self) -> bool:
        return self.lo == self.hi


def _as_array(x, name: str):
    arr = np.asarray(x, dtype=float)
    if np.isnan(arr).any():
        raise ValueError(f"{name} contains NaN")
    return arr, arr.ndim == 0


def _scalar_or_array(out: np.ndarray, scalar: bool):
    return float(out) if scalar else out


# ---------------------------------------------------------------------------
# Exponential integral E1
# ---------------------------------------------------------------------------

def _e1_series_scalar(x: float) -> float:
    # E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!),  for x <= 1
    total = 0.0
    term = x  # (-1)^{k+1} x^k / k!
    k = 1
    while k <= 60:
        total += term / k
        term *= -x / (k + 1)
        if abs(term) <= 1e-18 * max(abs(total), 1.0):
            break
        k += 1
    return -EULER_GAMMA - math.log(x) + total


def _e1_series(x: np.ndarray) -> np.ndarray:
    total = np.zeros_like(x)
    term = x.copy()
    for k in range(1, 41):
        total += term / k
        term *= -x / (k + 1)
    return -EULER_GAMMA - np.log(x) + total


def _e1_cf_scaled_scalar(x: float, tol: float = 5e-16, max_iter: int = 500) -> float:
    # Modified Lentz evaluation of the continued fraction for e^x E1(x):
    #   e^x E1(x) = 1/(x+1 - 1/(x+3 - 4/(x+5 - 9/(x+7 - ...))))
    # Converges for x > 1 (slowest near 1: roughly 90 iterations).
    b = x + 1.0
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, max_iter + 1):
        a = -float(i * i)
        b += 2.0
        d = a * d + b
        if d == 0.0:
            d = _TINY
        c = b + a / c
        if c == 0.0:
            c = _TINY
        d = 1.0 / d
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < tol:
            return h
    raise ConvergenceError(f"E1 continued fraction did not converge at x={x!r}")


def _e1_cf_scaled(x: np.ndarray, tol: float = 5e-16, max_iter: int = 500) -> np.ndarray:
    b = x + 1.0
    c = np.full_like(x, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for i in range(1, max_iter + 1):
        a = -float(i * i)
        b = b + 2.0
        d = a * d + b
        d[d == 0.0] = _TINY
        c = b + a / c
        c[c == 0.0] = _TINY
        d = 1.0 / d
        delta = c * d
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) >= tol
        if not active.any():
            return h
    raise ConvergenceError("E1 continued fraction did not converge")


def exp_integral_e1(x):
    """Exponential integral E1(x) = integral_x^inf e^{-t}/t dt, for x > 0.

    Power series below 1, continued fraction above; relative error is a few
    ulps (well inside 1e-12) across the supported domain.
    """
    arr, scalar = _as_array(x, "x")
    if np.any(arr <= 0.0):
        raise ValueError("exp_integral_e1 requires x > 0")
    if scalar:
        xv = float(arr)
        if xv <= 1.0:
            return _e1_series_scalar(xv)
        return math.exp(-xv) * _e1_cf_scaled_scalar(xv)
    out = np.empty_like(arr)
    lo = arr <= 1.0
    if lo.any():
        out[lo] = _e1_series(arr[lo])
    if (~lo).any():
        out[~lo] = np.exp(-arr[~lo]) * _e1_cf_scaled(arr[~lo])
    return out


def exp_scaled_e1(x):
    """Scaled exponential integral e^x E1(x), stable for arbitrarily large x.

    The throughput closed forms need products e^{y} E1(x) with y up to 1/SNR;
    evaluating the scaled form avoids overflow of the bare exponential.
    """
    arr, scalar = _as_array(x, "x")
    if np.any(arr <= 0.0):
        raise ValueError("exp_scaled_e1 requires x > 0")
    if scalar:
        xv = float(arr)
        if xv <= 1.0:
            return math.exp(xv) * _e1_series_scalar(xv)
        return _e1_cf_scaled_scalar(xv)
    out = np.empty_like(arr)
    lo = arr <= 1.0
    if lo.any():
        out[lo] = np.exp(arr[lo]) * _e1_series(arr[lo])
    if (~lo).any():
        out[~lo] = _e1_cf_scaled(arr[~lo])
    return out


def e1_asymptotic(x):
    """Shared small-x / large-x limit form of E1: e^{-x} ln(1 + 1/x)."""
    arr, scalar = _as_array(x, "x")
    if np.any(arr <= 0.0):
        raise ValueError("e1_asymptotic requires x > 0")
    return _scalar_or_array(np.exp(-arr) * np.log1p(1.0 / arr), scalar)


# ---------------------------------------------------------------------------
# Lambert W, principal branch
# ---------------------------------------------------------------------------

_NEG_INV_E = -math.exp(-1.0)


def _w0_initial(x: np.ndarray) -> np.ndarray:
    w = np.empty_like(x)
    near = x < -0.25
    if near.any():
        # branch-point series in p = sqrt(2(e x + 1))
        p = np.sqrt(np.clip(2.0 * (math.e * x[near] + 1.0), 0.0, None))
        w[near] = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 - p * 43.0 / 540.0)))
    mid = (~near) & (x < 1.0)
    w[mid] = x[mid]
    low = (x >= 1.0) & (x < 3.0)
    w[low] = 0.5671 + 0.2415 * (x[low] - 1.0)
    high = x >= 3.0
    if high.any():
        l1 = np.log(x[high])
        w[high] = l1 - np.log(l1)
    return w


def _w0_halley_scalar(x: float, w: float) -> float:
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1) if wp1 != 0.0 else 0.0
        if denom == 0.0 or not math.isfinite(denom):
            break
        step = f / denom
        w -= step
        if abs(step) <= 1e-16 * (abs(w) + 1.0):
            break
    return max(w, -1.0)


def lambert_w0(x):
    """Principal branch of the Lambert W function: w with w e^w = x, w >= -1.

    Defined for x >= -1/e. Initial guess per regime (branch-point series,
    identity, log asymptote) followed by Halley iterations; the residual
    |w e^w - x| lands within a few ulps of x.
    """
    arr, scalar = _as_array(x, "x")
    if np.any(arr < _NEG_INV_E - 1e-15):
        raise ValueError(f"lambert_w0 requires x >= -1/e ~ {_NEG_INV_E:.17g}")
    arr = np.maximum(arr, _NEG_INV_E)
    if scalar:
        xv = float(arr)
        w0 = float(_w0_initial(np.asarray([xv]))[0])
        return _w0_halley_scalar(xv, w0)
    w = _w0_initial(arr)
    for _ in range(100):
        ew = np.exp(w)
        f = w * ew - arr
        wp1 = w + 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        step = np.where(np.isfinite(step), step, 0.0)
        w = w - step
        if np.all(np.abs(step) <= 1e-16 * (np.abs(w) + 1.0)):
            break
    return np.maximum(w, -1.0)


# ---------------------------------------------------------------------------
# Adaptive quadrature
# ---------------------------------------------------------------------------

def integrate(f: Callable[[float], float], a: float, b: float, abs_tol: float = 1e-10) -> float:
    """Adaptive quadrature of f over [a, b]; b may be OPEN_END (infinity).

    Open upper bounds are truncated at a + 40 (see _TAIL_LENGTH), valid for
    the exponentially decaying integrands used throughout this package.
    Raises ConvergenceError instead of silently returning a poor estimate.
    """
    if math.isnan(a) or math.isnan(b):
        raise ValueError("integration bounds must not be NaN")
    hi = a + _TAIL_LENGTH if math.isinf(b) else b
    if hi < a:
        raise ValueError(f"integration bounds out of order: [{a}, {b}]")
    if hi == a:
        return 0.0
    res = quad(f, a, hi, epsabs=abs_tol * 1e-2, epsrel=1e-12, limit=400, full_output=1)
    value, err_estimate = res[0], res[1]
    if err_estimate > abs_tol:
        message = res[3] if len(res) > 3 else "error estimate above tolerance"
        raise ConvergenceError(
            f"quadrature on [{a}, {hi}] reached error {err_estimate:.3g} "
            f"(> {abs_tol:.3g}): {message}"
        )
    return value


# ---------------------------------------------------------------------------
# Scalar and grid maximization
# ---------------------------------------------------------------------------

def _golden_max(f, lo: float, hi: float, tol: ToleranceSpec):
    a, b = lo, hi
    h = b - a
    c = a + _INV_PHI2 * h
    d = a + _INV_PHI * h
    fc, fd = f(c), f(d)
    for _ in range(tol.max_iter):
        if h <= tol.abs_tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + _INV_PHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INV_PHI * h
            fd = f(d)
    else:
        warnings.warn("golden-section search exhausted max_iter; returning best so far")
    x = c if fc > fd else d
    return x, f(x)


def maximize_scalar(f: Callable[[float], float], domain: Interval,
                    tol: ToleranceSpec | None = None) -> tuple[float, float]:
    """Maximize a unimodal scalar function on a closed interval.

    Bisects on the sign of a central finite difference of f (step
    1e-7 * max(1, |x|)); if the endpoint derivative signs do not bracket an
    interior maximum the search falls back to golden section. Endpoints are
    always considered as candidates. Returns (argmax, f(argmax)).
    """
    if tol is None:
        tol = ToleranceSpec()
    lo, hi = domain.lo, domain.hi
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("maximize_scalar requires a bounded domain")
    if hi <= lo:
        return lo, f(lo)

    def dsign(x: float) -> float:
        h = 1e-7 * max(1.0, abs(x))
        x1 = max(lo, x - h)
        x2 = min(hi, x + h)
        return f(x2) - f(x1)

    d_lo = dsign(lo)
    d_hi = dsign(hi)
    if d_lo > 0.0 and d_hi < 0.0:
        a, b = lo, hi
        iterations = 0
        while b - a > tol.abs_tol and iterations < tol.max_iter:
            m = 0.5 * (a + b)
            if dsign(m) > 0.0:
                a = m
            else:
                b = m
            iterations += 1
        if b - a > tol.abs_tol:
            warnings.warn("derivative bisection exhausted max_iter; returning best so far")
        x = 0.5 * (a + b)
        fx = f(x)
    else:
        x, fx = _golden_max(f, lo, hi, tol)

    best_x, best_f = x, fx
    for cand in (lo, hi):
        fc = f(cand)
        if fc > best_f:
            best_x, best_f = cand, fc
    return best_x, best_f


def _grid_axis(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    # accumulation can overshoot hi by an ulp; keep points inside the domain
    return np.minimum(lo + step * np.arange(n), hi)


def grid_argmax_2d(f, domain: tuple[Interval, Interval], step: float,
                   constraint=None) -> tuple[tuple[float, float], float]:
    """Exhaustive maximization of f(x, y) over a regular grid.

    ``constraint(x, y)`` filters grid points (vectorized if possible). Ties
    break toward the lexicographically smallest (x, y) so results are
    reproducible. f is evaluated on numpy arrays when it supports them,
    element by element otherwise.
    """
    if step <= 0.0:
        raise ValueError(f"step must be positive, got {step}")
    dx, dy = domain
    if dx.unbounded or dy.unbounded:
        raise ValueError("grid search requires bounded intervals")
    xs = _grid_axis(dx.lo, dx.hi, step)
    ys = _grid_axis(dy.lo, dy.hi, step)
    # 'ij' + ravel gives lexicographic (x, y) order, so argmax ties resolve
    # toward the smallest point automatically.
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    gx, gy = gx.ravel(), gy.ravel()
    if constraint is not None:
        try:
            mask = np.asarray(constraint(gx, gy), dtype=bool)
            if mask.shape != gx.shape:
                raise TypeError
        except (TypeError, ValueError):
            mask = np.fromiter(
                (bool(constraint(float(x), float(y))) for x, y in zip(gx, gy)),
                dtype=bool, count=gx.size,
            )
        gx, gy = gx[mask], gy[mask]
    if gx.size == 0:
        raise ValueError("no feasible grid point under the given constraint")
    try:
        vals = np.asarray(f(gx, gy), dtype=float)
        if vals.shape != gx.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.fromiter(
            (float(f(float(x), float(y))) for x, y in zip(gx, gy)),
            dtype=float, count=gx.size,
        )
    i = int(np.argmax(vals))
    return (float(gx[i]), float(gy[i])), float(vals[i])
