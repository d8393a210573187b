"""Absorption analytics of a walk from continuants of its coefficient sets.

The Fibonacci path solves the arrival and time equations as two-point
recurrence problems on either side of the start state.  The value at the
start comes from its own balance equation once the two sides are expressed
relative to it.  Starts at the right border are handled by mirroring the
walk.

Every public function takes a ``method``: ``"fib"`` forces the Fibonacci
path, ``"direct"`` uses the tridiagonal solver and ``"auto"`` (default) tries
the Fibonacci path and falls back to the direct solver when a coefficient
would divide by zero.  The fallback reason is kept on the result's
:class:`~fibwalk.walkmodel.MethodTag`.
"""

from __future__ import annotations

import math
from typing import Callable, Optional, Tuple

import numpy as np

from . import oracle
from .errors import DegenerateSpecError, NotAbsorbingError
from .fibcore import anchored_solution, continuant_tails
from .results import AbsorptionReport, ArrivalVector, TimeVector
from .scaled import ScaledReal
from .walkmodel import (
    Method,
    MethodTag,
    WalkSpec,
    arrival_coeffs_backward,
    arrival_coeffs_forward,
    reflect,
    time_coeffs_backward,
    time_coeffs_forward,
)

NOT_ABSORBING = "walk is not absorbed almost surely"


def _check_start(spec: WalkSpec, i0: int) -> int:
    if not 0 <= i0 <= spec.n:
        raise ValueError(f"state {i0} is outside 0..{spec.n}")
    return i0


def _finite(values) -> np.ndarray:
    try:
        out = np.array([float(v) for v in values])
    except OverflowError:
        raise DegenerateSpecError("continuant ratio overflowed") from None
    if not np.all(np.isfinite(out)):
        raise DegenerateSpecError("continuant ratio is not finite")
    return out


def _resolve(method, fib: Callable[[], np.ndarray],
             direct: Callable[[], np.ndarray]) -> Tuple[np.ndarray, MethodTag]:
    method = Method.parse(method)
    if method == Method.DIRECT:
        return direct(), MethodTag(Method.DIRECT, Method.DIRECT)
    try:
        return fib(), MethodTag(method, Method.FIBONACCI)
    except DegenerateSpecError as exc:
        if method == Method.FIBONACCI:
            raise
        return direct(), MethodTag(method, Method.DIRECT, f"fibonacci path unavailable: {exc}")


# ---------------------------------------------------------------------------
# expected arrivals
# ---------------------------------------------------------------------------


def _arrivals_from_left_border(spec: WalkSpec) -> np.ndarray:
    n = spec.n
    coeffs = arrival_coeffs_forward(spec, 0)
    q1 = spec.q[1] if n >= 1 else spec.ghost_right
    source = {0: -1.0 / q1}
    source.update({t: 0.0 for t in range(1, n + 1)})
    coeffs = type(coeffs)(coeffs.lam, coeffs.mu, source, coeffs.names)
    return _finite(anchored_solution(coeffs, 0, n + 1))


def _arrivals_fib(spec: WalkSpec, i0: int) -> np.ndarray:
    n = spec.n
    if i0 == 0:
        return _arrivals_from_left_border(spec)
    if i0 == n:
        return _arrivals_from_left_border(reflect(spec).with_start(0))[::-1].copy()

    fwd = arrival_coeffs_forward(spec, i0)
    bwd = arrival_coeffs_backward(spec, i0)
    right = continuant_tails(i0 + 1, n, fwd)
    left = continuant_tails(1 - i0, 0, bwd)
    if not right[i0 + 1] or not left[1 - i0]:
        raise DegenerateSpecError("boundary continuant vanished")
    # x[i0 -/+ 1] / x[i0], both non-positive multiples of theta and mu
    ratio_left = ScaledReal.of(bwd.mu_at(-i0)) * left[2 - i0] / left[1 - i0]
    ratio_right = ScaledReal.of(fwd.mu_at(i0)) * right[i0 + 2] / right[i0 + 1]
    denom = (1.0 - spec.r[i0]) + spec.p[i0 - 1] * float(ratio_left) + spec.q[i0 + 1] * float(ratio_right)
    if not denom > 0:
        raise DegenerateSpecError("arrival balance at the start has no positive solution")
    x0 = 1.0 / denom

    x = np.empty(n + 1)
    x[i0] = x0
    x[i0 + 1:] = _finite(anchored_solution(fwd, i0 + 1, n - i0, head0=x0))
    x[:i0] = _finite(anchored_solution(bwd, 1 - i0, i0, head0=x0))[::-1]
    return x


def expected_arrivals(spec: WalkSpec, i0: Optional[int] = None, method="auto") -> ArrivalVector:
    """Expected number of time steps spent in each state, starting from ``i0``.

    Time zero counts, so ``x[i0] >= 1``.  Raises :class:`NotAbsorbingError`
    when some reachable state cannot lead to absorption or exit.
    """
    i0 = _check_start(spec, spec.start if i0 is None else i0)
    if not oracle.is_absorbing(spec, i0):
        raise NotAbsorbingError(NOT_ABSORBING)

    def fib():
        if not oracle.is_absorbing_everywhere(spec):
            raise DegenerateSpecError("some state that cannot be reached from the start never ends")
        return _arrivals_fib(spec, i0)

    x, tag = _resolve(method, fib, lambda: oracle.solve_arrivals_direct(spec, i0).x)
    return ArrivalVector(i0, x, tag)


def visit_probability(spec: WalkSpec, i: int, j: int, method="auto") -> float:
    """Probability of ever occupying ``j`` from ``i`` (a return, when ``i == j``)."""
    x_i = expected_arrivals(spec, i, method).x
    if i == j:
        return 1.0 - 1.0 / x_i[i]
    if x_i[j] == 0.0:
        return 0.0
    return x_i[j] / expected_arrivals(spec, j, method).x[j]


def visit_probabilities(spec: WalkSpec, i0: Optional[int] = None, method="auto") -> np.ndarray:
    """``f[j]`` = probability of ever occupying ``j`` from ``i0``, for every ``j``."""
    i0 = spec.start if i0 is None else i0
    x = expected_arrivals(spec, i0, method).x
    f = np.zeros_like(x)
    for j in range(spec.n_states):
        if j == i0:
            f[j] = 1.0 - 1.0 / x[j]
        elif x[j] != 0.0:
            f[j] = x[j] / expected_arrivals(spec, j, method).x[j]
    return f


def occupancy_variance(spec: WalkSpec, i0: Optional[int] = None, method="auto") -> np.ndarray:
    """Variance of the number of steps spent in each state, starting from ``i0``.

    Each visit to ``j`` is followed by a geometric number of returns, which
    gives the second moment ``x[i0, j] * (2 * x[j, j] - 1)``.
    """
    i0 = spec.start if i0 is None else i0
    x = expected_arrivals(spec, i0, method).x
    diag = np.array([
        expected_arrivals(spec, j, method).x[j] if x[j] else 0.0 for j in range(spec.n_states)
    ])
    return np.maximum(x * (2.0 * diag - 1.0) - x * x, 0.0)


def absorption_report(spec: WalkSpec, i0: Optional[int] = None, method="auto") -> AbsorptionReport:
    """Where the walk from ``i0`` ends: in place per state, or off either border."""
    arrivals = expected_arrivals(spec, i0, method)
    x = arrivals.x
    g = np.asarray(spec.s) * x
    return AbsorptionReport(
        start=arrivals.start,
        g=g,
        leak_left=spec.q[0] * x[0],
        leak_right=spec.p[spec.n] * x[spec.n],
        u=math.fsum(g),
        method=arrivals.method,
    )


# ---------------------------------------------------------------------------
# expected time
# ---------------------------------------------------------------------------


def _time_from_left_border(spec: WalkSpec) -> np.ndarray:
    coeffs = time_coeffs_forward(spec, 0)
    return _finite(anchored_solution(coeffs, 0, spec.n + 1))


def _source_sum(coeffs, tails, first: int, last: int) -> ScaledReal:
    """``sum_t -inhom[t] * tails[t + 1]`` over ``t = first..last``."""
    total = ScaledReal()
    for t in range(first, last + 1):
        total = total + tails[t + 1] * (-coeffs.inhom_at(t))
    return total


def _time_fib(spec: WalkSpec, a: int) -> np.ndarray:
    n = spec.n
    if a == 0:
        return _time_from_left_border(spec)
    if a == n:
        return _time_from_left_border(reflect(spec).with_start(0))[::-1].copy()

    fwd = time_coeffs_forward(spec, a)
    bwd = time_coeffs_backward(spec, a)
    right = continuant_tails(a + 1, n, fwd)
    left = continuant_tails(1 - a, 0, bwd)
    if not right[a + 1] or not left[1 - a]:
        raise DegenerateSpecError("boundary continuant vanished")
    # m[a +/- 1] = slope * m[a] + offset, with non-negative slope and offset
    slope_r = float(ScaledReal.of(-fwd.mu_at(a)) * right[a + 2] / right[a + 1])
    offset_r = float(_source_sum(fwd, right, a + 1, n) / right[a + 1])
    slope_l = float(ScaledReal.of(-bwd.mu_at(-a)) * left[2 - a] / left[1 - a])
    offset_l = float(_source_sum(bwd, left, 1 - a, 0) / left[1 - a])
    p, q = spec.p[a], spec.q[a]
    denom = (1.0 - spec.r[a]) - p * slope_r - q * slope_l
    if not denom > 0:
        raise DegenerateSpecError("time balance at the anchor has no positive solution")
    m_a = ((1.0 - spec.s[a]) + p * offset_r + q * offset_l) / denom

    m = np.empty(n + 1)
    m[a] = m_a
    m[a + 1:] = _finite(anchored_solution(fwd, a + 1, n - a, head0=m_a))
    m[:a] = _finite(anchored_solution(bwd, 1 - a, a, head0=m_a))[::-1]
    return m


def expected_time(spec: WalkSpec, anchor: Optional[int] = None, method="auto") -> TimeVector:
    """Expected number of moves before the walk ends, for every start state.

    ``anchor`` is the state through which the Fibonacci path threads its two
    one-sided solutions; the result does not depend on it.
    """
    anchor = _check_start(spec, spec.start if anchor is None else anchor)
    if not oracle.is_absorbing_everywhere(spec):
        raise NotAbsorbingError(NOT_ABSORBING)
    m, tag = _resolve(method, lambda: _time_fib(spec, anchor), lambda: oracle.solve_time_direct(spec).m)
    return TimeVector(m, tag, anchor if tag.method == Method.FIBONACCI else None)


# ---------------------------------------------------------------------------
# the constant-coefficient family with absorbing borders
# ---------------------------------------------------------------------------


def constant_walk_x0(n: int, p: float, q: float) -> float:
    """``x_0`` of :func:`~fibwalk.walkmodel.constant_walk_spec` as a ratio of continuants.

    With constant coefficients the continuants are binomial sums in ``-p q``.
    """
    c = -p * q
    num = math.fsum(math.comb(n - k, k) * c**k for k in range(n // 2 + 1))
    den = math.fsum(math.comb(n + 1 - k, k) * c**k for k in range((n + 1) // 2 + 1))
    return num / den


def constant_walk_x0_printed(n: int, p: float, q: float) -> float:
    """The same quantity with binomials ``C(N+1, k)`` and ``C(N+2, k)``.

    Kept for comparison only; it disagrees with the walk (1.0 instead of 1.6
    at ``N = 3``, ``p = q = 1/2``).
    """
    c = -p * q
    num = math.fsum(math.comb(n + 1, k) * c**k for k in range((n + 1) // 2 + 1))
    den = math.fsum(math.comb(n + 2, k) * c**k for k in range((n + 2) // 2 + 1))
    return num / den
