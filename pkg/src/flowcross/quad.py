"""Numerical integration engine.

Provides a general adaptive integrator plus the two specialised integral
families used by the closed-form laws: the oscillatory-decaying integrals
with a ``sin(pi*v/a)`` factor under a Gaussian-times-sinh envelope, and the
Hartman-Watson function built on top of them.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import erfc

__all__ = [
    "QuadResult",
    "StabilityError",
    "ConvergenceError",
    "integrate_adaptive",
    "oscillatory_core",
    "hartman_watson_i",
    "OSC_A_MIN",
    "OSC_A_MAX",
]

# Stability window for the oscillatory family, in terms of a = l1*t.
# Below OSC_A_MIN the e^{pi^2/(2a)}-scale prefactors downstream amplify the
# float64 cancellation noise of the panel sum beyond any useful accuracy.
OSC_A_MIN = 0.05
OSC_A_MAX = 25.0

_EPS = np.finfo(float).eps

# Embedded Gauss-Legendre pair: the 21-point value is kept, the 10-point
# value only feeds the error estimate.  Nodes are open (no endpoint evals).
_X10, _W10 = leggauss(10)
_X21, _W21 = leggauss(21)


@dataclass(frozen=True)
class QuadResult:
    """Value of an integral with a rigorous error estimate."""

    value: float
    err_estimate: float
    evaluations: int

    def __post_init__(self):
        if self.err_estimate < 0.0:
            raise ValueError("err_estimate must be non-negative")


class StabilityError(ArithmeticError):
    """Requested evaluation sits outside the documented stability domain."""


class ConvergenceError(ArithmeticError):
    """Integration failed to reach the requested tolerance.

    Carries the best available estimate in ``best``.
    """

    def __init__(self, message, best: QuadResult):
        super().__init__(message)
        self.best = best


def _panel(f, a: float, b: float):
    """One embedded-pair evaluation on [a, b].

    Returns (value21, error_estimate, abs_integral, evaluations).
    """
    hw = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    y21 = np.asarray(f(mid + hw * _X21), dtype=float)
    y10 = np.asarray(f(mid + hw * _X10), dtype=float)
    v21 = hw * float(np.dot(_W21, y21))
    v10 = hw * float(np.dot(_W10, y10))
    vabs = hw * float(np.dot(_W21, np.abs(y21)))
    err = abs(v21 - v10) + _EPS * vabs
    return v21, err, vabs, 31


def integrate_adaptive(f, a: float, b: float, rel_tol: float = 1e-10,
                       abs_tol: float = 1e-14,
                       max_panels: int = 4096) -> QuadResult:
    """Adaptively integrate ``f`` over [a, b].

    ``f`` must accept a numpy array of abscissae and return the integrand
    values elementwise.  Panels are bisected worst-error-first until the
    summed error estimate drops below ``max(abs_tol, rel_tol*|value|)``.

    Raises ConvergenceError (carrying the best estimate) if the tolerance
    is not met within ``max_panels`` panels.
    """
    if not (a < b):
        raise ValueError("integration interval requires a < b")
    if rel_tol <= 0.0:
        raise ValueError("rel_tol must be positive")

    v, e, _, n = _panel(f, a, b)
    if not math.isfinite(v):
        raise ValueError("integrand is not finite on the interval")
    # heap entries: (-err, tie_breaker, lo, hi, value, err)
    heap = [(-e, 0, a, b, v, e)]
    total_v, total_e = v, e
    evals = n
    counter = 1
    while len(heap) < max_panels:
        if total_e <= max(abs_tol, rel_tol * abs(total_v)):
            break
        neg_e, _, lo, hi, pv, pe = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            # interval at float resolution; keep as is
            heapq.heappush(heap, (0.0, counter, lo, hi, pv, 0.0))
            counter += 1
            total_e -= pe
            continue
        v1, e1, _, n1 = _panel(f, lo, mid)
        v2, e2, _, n2 = _panel(f, mid, hi)
        evals += n1 + n2
        total_v += (v1 + v2) - pv
        total_e += (e1 + e2) - pe
        heapq.heappush(heap, (-e1, counter, lo, mid, v1, e1))
        heapq.heappush(heap, (-e2, counter + 1, mid, hi, v2, e2))
        counter += 2

    # Re-sum from panels for a cleaner value than the running updates.
    total_v = math.fsum(item[4] for item in heap)
    total_e = math.fsum(item[5] for item in heap)
    result = QuadResult(total_v, total_e, evals)
    if total_e > max(abs_tol, rel_tol * abs(total_v)):
        raise ConvergenceError(
            f"adaptive integration stalled at err={total_e:.3e} "
            f"for tolerance rel={rel_tol:.1e}/abs={abs_tol:.1e}", result)
    return result


def _refine_to(f, lo: float, hi: float, tol_abs: float, max_depth: int = 12):
    """Integrate [lo, hi] by recursive bisection to absolute tolerance.

    Returns (value, err, abs_integral, evaluations).
    """
    v, e, va, n = _panel(f, lo, hi)
    if e <= tol_abs or max_depth == 0:
        return v, e, va, n
    mid = 0.5 * (lo + hi)
    v1, e1, va1, n1 = _refine_to(f, lo, mid, 0.5 * tol_abs, max_depth - 1)
    v2, e2, va2, n2 = _refine_to(f, mid, hi, 0.5 * tol_abs, max_depth - 1)
    return v1 + v2, e1 + e2, va1 + va2, n + n1 + n2


def _gaussian_tail_bound(a: float, v_max: float) -> float:
    """Closed-form bound on int_{v_max}^inf exp(-v^2/(2a) + v) dv.

    Completes the square: the integral equals
    e^{a/2} * sqrt(2*pi*a) * Q((v_max - a)/sqrt(a)) with Q the standard
    normal upper tail.
    """
    x = (v_max - a) / math.sqrt(a)
    q = 0.5 * erfc(x / math.sqrt(2.0))
    return math.exp(0.5 * a) * math.sqrt(2.0 * math.pi * a) * q


def oscillatory_core(a: float, g, rel_tol: float = 1e-10) -> QuadResult:
    """Evaluate int_0^inf exp(-v^2/(2a)) * sinh(v) * sin(pi*v/a) * g(v) dv.

    ``g`` must be bounded on [0, inf) with a sign-definite, non-increasing
    envelope in the tail, and accept numpy arrays.  Panels are aligned to
    the half-periods of sin(pi*v/a) (width ``a``) so each panel integrand
    is sign-definite; cancellation happens only in the exact panel sum.
    The integral is truncated at v_max = a + 12*sqrt(a) + 5 and the
    discarded tail is bounded in closed form and folded into the error
    estimate, together with a float64 cancellation-noise floor.

    Raises StabilityError outside a in [OSC_A_MIN, OSC_A_MAX] and
    ConvergenceError when the requested tolerance cannot be certified.
    """
    if not (OSC_A_MIN <= a <= OSC_A_MAX):
        raise StabilityError(
            f"oscillatory core requires a in [{OSC_A_MIN}, {OSC_A_MAX}], "
            f"got a={a!r}")
    if rel_tol <= 0.0:
        raise ValueError("rel_tol must be positive")

    inv2a = 0.5 / a
    omega = math.pi / a

    def integrand(v):
        v = np.asarray(v, dtype=float)
        return np.exp(-inv2a * v * v) * np.sinh(v) * np.sin(omega * v) * g(v)

    v_max = a + 12.0 * math.sqrt(a) + 5.0
    n_panels = int(math.ceil(v_max / a))

    panel_vals = []
    panel_errs = []
    abs_sum = 0.0
    evals = 0
    for k in range(n_panels):
        lo = k * a
        hi = min((k + 1) * a, v_max)
        # scout pass sizes the panel; refining below the float noise of the
        # panel's absolute integral buys nothing
        v0, e0, va0, n0 = _panel(integrand, lo, hi)
        evals += n0
        tol_abs = max(4.0 * _EPS * va0, 1e-300)
        if e0 > tol_abs:
            v0, e0, va0, n0 = _refine_to(integrand, lo, hi, tol_abs)
            evals += n0
        panel_vals.append(v0)
        panel_errs.append(e0)
        abs_sum += abs(v0)

    value = math.fsum(panel_vals)
    refine_err = math.fsum(panel_errs)

    # tail bound: |sin| <= 1, sinh v <= e^v/2, g bounded by its tail values
    tail_pts = np.array([v_max, v_max + math.sqrt(a), v_max + 3.0 * math.sqrt(a)])
    g_tail = float(np.max(np.abs(np.asarray(g(tail_pts), dtype=float))))
    tail_bound = 0.5 * g_tail * _gaussian_tail_bound(a, v_max)

    noise = _EPS * abs_sum
    err = refine_err + tail_bound + noise
    result = QuadResult(value, err, evals)

    if abs_sum == 0.0 and tail_bound == 0.0:
        return result  # identically-zero integrand, exact
    if err > rel_tol * abs(value):
        raise ConvergenceError(
            f"oscillatory integral at a={a:g} cannot certify rel_tol="
            f"{rel_tol:.1e}: err={err:.3e}, |value|={abs(value):.3e} "
            f"(cancellation noise floor {noise:.3e})", result)
    return result


def hartman_watson_i(y: float, z: float, rel_tol: float = 1e-10) -> float:
    """Hartman-Watson function

        i_y(z) = z*e^{pi^2/(4y)} / (pi*sqrt(pi*y))
                 * int_0^inf exp(-z*cosh v - v^2/(4y)) sinh v sin(pi*v/(2y)) dv.

    The integral is the oscillatory core at a = 2y with g(v) = exp(-z cosh v);
    the exponentially large prefactor is combined in log space.  Valid for
    y in [OSC_A_MIN/2, OSC_A_MAX/2]; raises StabilityError outside.
    """
    if y <= 0.0 or z <= 0.0:
        raise ValueError("hartman_watson_i requires y > 0 and z > 0")

    def g(v):
        v = np.asarray(v, dtype=float)
        return np.exp(-z * np.cosh(v))

    try:
        core = oscillatory_core(2.0 * y, g, rel_tol=rel_tol)
    except StabilityError as exc:
        raise StabilityError(
            f"hartman_watson_i requires y in [{OSC_A_MIN / 2}, "
            f"{OSC_A_MAX / 2}], got y={y!r}") from exc
    if core.value == 0.0:
        # integrand underflowed everywhere (huge z); the function itself
        # underflows to zero
        return 0.0
    if core.value < 0.0:
        raise ConvergenceError(
            f"hartman_watson_i integral came out non-positive at "
            f"y={y!r}, z={z!r}", core)
    log_pref = (math.log(z) + math.pi ** 2 / (4.0 * y)
                - math.log(math.pi) - 0.5 * math.log(math.pi * y))
    return math.exp(log_pref + math.log(core.value))
