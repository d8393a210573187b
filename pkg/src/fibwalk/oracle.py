"""Independent references for the analytic path.

Two kinds of check live here.  The direct solvers eliminate the tridiagonal
balance equations, one sweep per side and no pivoting.  The Monte Carlo
simulator plays the walk move by move.  :func:`is_absorbing` decides
structurally whether the quantities are finite at all.

Random numbers
--------------
The simulator needs draws that depend only on ``(seed, trial, draw)`` and
never on how trials are scheduled.  Everything is built from the SplitMix64
finaliser::

    mix64(z):  z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
               z ^= z >> 27; z *= 0x94D049BB133111EB
               z ^= z >> 31                             (all mod 2**64)

With ``GAMMA = 0x9E3779B97F4A7C15`` the key of trial ``t`` is
``mix64(seed + (t + 1) * GAMMA)`` and its ``k``-th draw (from 0) is
``mix64(key + (k + 1) * GAMMA)``.  Each trial therefore runs its own
SplitMix64 stream.  The 64-bit output ``z`` becomes a uniform in
``[0, 1)`` as ``(z >> 11) * 2**-53``.  A draw ``u`` picks forward if
``u < p``, backward if ``u < p + q``, stay if ``u < p + q + r`` and
absorption otherwise.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .errors import NotAbsorbingError
from .results import ArrivalVector, TimeVector
from .walkmodel import Method, MethodTag, WalkSpec

PIVOT_GUARD = 1e-13
DEFAULT_MAX_STEPS = 10**6

_DIRECT = MethodTag(Method.DIRECT, Method.DIRECT)

# ---------------------------------------------------------------------------
# structure
# ---------------------------------------------------------------------------


def _neighbours(spec: WalkSpec, i: int):
    if i < spec.n and spec.p[i] > 0:
        yield i + 1
    if i > 0 and spec.q[i] > 0:
        yield i - 1


def _reachable(spec: WalkSpec, i0: int) -> set:
    seen = {i0}
    todo = deque([i0])
    while todo:
        i = todo.popleft()
        for j in _neighbours(spec, i):
            if j not in seen:
                seen.add(j)
                todo.append(j)
    return seen


def _can_end(spec: WalkSpec) -> set:
    """States from which the walk ends with positive probability."""
    n = spec.n
    ending = {i for i in range(n + 1) if spec.s[i] > 0}
    if spec.q[0] > 0:
        ending.add(0)
    if spec.p[n] > 0:
        ending.add(n)
    # walk edges backwards from the ending states
    can_end = set(ending)
    todo = deque(ending)
    while todo:
        j = todo.popleft()
        for i in (j - 1, j + 1):
            if 0 <= i <= n and i not in can_end and j in _neighbours(spec, i):
                can_end.add(i)
                todo.append(i)
    return can_end


def is_absorbing(spec: WalkSpec, i0: Optional[int] = None) -> bool:
    """True if from every state reachable from ``i0`` the walk can still end.

    The walk ends by in-place absorption (``s > 0``) or by stepping off the
    interval (``q_0 > 0`` at state 0, ``p_N > 0`` at state N).
    """
    i0 = spec.start if i0 is None else i0
    return _reachable(spec, i0) <= _can_end(spec)


def is_absorbing_everywhere(spec: WalkSpec) -> bool:
    """True if the walk ends almost surely from every state."""
    return len(_can_end(spec)) == spec.n_states


def reachable_interval(spec: WalkSpec, i0: int):
    """Smallest ``(a, b)`` such that the walk from ``i0`` never leaves ``a..b``."""
    a = i0
    while a > 0 and spec.q[a] > 0:
        a -= 1
    b = i0
    while b < spec.n and spec.p[b] > 0:
        b += 1
    return a, b


# ---------------------------------------------------------------------------
# direct solvers
# ---------------------------------------------------------------------------


def _check_pivot(value: float, state: int) -> float:
    if not abs(value) >= PIVOT_GUARD:
        raise NotAbsorbingError(
            f"balance equations are singular at state {state} (pivot {value:.3g}); "
            "walk is not absorbed almost surely"
        )
    return value


def solve_arrivals_direct(spec: WalkSpec, i0: Optional[int] = None) -> ArrivalVector:
    """Solve ``(1-r_n) x_n - p_{n-1} x_{n-1} - q_{n+1} x_{n+1} = [n == i0]``.

    States outside the interval reachable from ``i0`` get ``x = 0``.  The
    system is eliminated from both ends towards ``i0``, so mirroring the walk
    reproduces the same operations in mirrored order.
    """
    i0 = spec.start if i0 is None else i0
    p, q, r = spec.p, spec.q, spec.r
    a, b = reachable_interval(spec, i0)
    x = np.zeros(spec.n_states)

    left = {}  # x_n = left[n] * x_{n+1}
    carry = 0.0
    for k in range(a, i0):
        piv = _check_pivot((1.0 - r[k]) - carry, k)
        left[k] = q[k + 1] / piv
        carry = p[k] * left[k]
    from_left = carry

    right = {}  # x_n = right[n] * x_{n-1}
    carry = 0.0
    for k in range(b, i0, -1):
        piv = _check_pivot((1.0 - r[k]) - carry, k)
        right[k] = p[k - 1] / piv
        carry = q[k] * right[k]
    from_right = carry

    x[i0] = 1.0 / _check_pivot((1.0 - r[i0]) - (from_left + from_right), i0)
    for k in range(i0 - 1, a - 1, -1):
        x[k] = left[k] * x[k + 1]
    for k in range(i0 + 1, b + 1):
        x[k] = right[k] * x[k - 1]
    return ArrivalVector(i0, x, _DIRECT)


def solve_time_direct(spec: WalkSpec) -> TimeVector:
    """Solve ``(1-r_i) m_i - p_i m_{i+1} - q_i m_{i-1} = 1 - s_i`` with ``m_{-1} = m_{N+1} = 0``."""
    n = spec.n
    p, q, r, s = spec.p, spec.q, spec.r, spec.s
    upper = np.zeros(n + 1)
    rhs = np.zeros(n + 1)
    for i in range(n + 1):
        lower = q[i] if i > 0 else 0.0
        piv = (1.0 - r[i]) - (lower * upper[i - 1] if i > 0 else 0.0)
        _check_pivot(piv, i)
        upper[i] = p[i] / piv if i < n else 0.0
        rhs[i] = ((1.0 - s[i]) + (lower * rhs[i - 1] if i > 0 else 0.0)) / piv
    m = np.zeros(n + 1)
    m[n] = rhs[n]
    for i in range(n - 1, -1, -1):
        m[i] = rhs[i] + upper[i] * m[i + 1]
    return TimeVector(m, _DIRECT, None)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

GAMMA = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(k) for k in (30, 27, 31, 11))


def mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finaliser on a ``uint64`` array (wrapping arithmetic)."""
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _mix64_int(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def trial_key(seed: int, trial: int) -> int:
    return _mix64_int((seed + (trial + 1) * GAMMA) & _MASK)


def trial_uniforms(seed: int, trial: int, count: int) -> List[float]:
    """Reference scalar implementation of the first ``count`` draws of a trial."""
    key = trial_key(seed, trial)
    return [(_mix64_int((key + (k + 1) * GAMMA) & _MASK) >> 11) * 2.0**-53 for k in range(count)]


def _thresholds(spec: WalkSpec) -> np.ndarray:
    """Cumulative cut points per state; a cut with nothing after it is exactly 1."""
    cuts = np.empty((spec.n_states, 3))
    for i in range(spec.n_states):
        probs = (spec.p[i], spec.q[i], spec.r[i], spec.s[i])
        for k in range(3):
            rest = probs[k + 1:]
            cuts[i, k] = 1.0 if not any(rest) else math.fsum(probs[: k + 1])
    return cuts


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Empirical outcome of ``trials`` independent walks from ``start``."""

    start: int
    trials: int
    seed: int
    max_steps: int
    absorb_counts: np.ndarray
    exit_left: int
    exit_right: int
    truncated: int
    mean_steps: float
    stderr_steps: float
    visit_means: np.ndarray
    absorb_by_step: Dict[int, int] = field(default_factory=dict)

    @property
    def absorb_fraction(self) -> np.ndarray:
        return self.absorb_counts / self.trials

    @property
    def u(self) -> float:
        return int(self.absorb_counts.sum()) / self.trials

    def absorbed_within(self, k: int) -> float:
        """Empirical probability of in-place absorption after at most ``k`` moves."""
        return sum(c for step, c in self.absorb_by_step.items() if step <= k) / self.trials


@dataclass
class _Tally:
    absorb: np.ndarray
    visits: np.ndarray
    exit_left: int = 0
    exit_right: int = 0
    truncated: int = 0
    finished: int = 0
    step_sum: int = 0
    step_sq: int = 0
    by_step: Dict[int, int] = field(default_factory=dict)

    def ended(self, count: int, steps: int) -> None:
        self.finished += count
        self.step_sum += count * steps
        self.step_sq += count * steps * steps


def _run_block(cuts: np.ndarray, i0: int, lo: int, hi: int, seed: int, max_steps: int) -> _Tally:
    n_states = cuts.shape[0]
    tally = _Tally(np.zeros(n_states, np.int64), np.zeros(n_states, np.int64))
    t = np.arange(lo, hi, dtype=np.uint64)
    keys = mix64(np.uint64(seed) + (t + np.uint64(1)) * np.uint64(GAMMA))
    state = np.full(hi - lo, i0, dtype=np.int64)
    k = 0
    while state.size:
        tally.visits += np.bincount(state, minlength=n_states)
        if k == max_steps:
            tally.truncated += int(state.size)
            break
        z = mix64(keys + np.uint64(((k + 1) * GAMMA) & _MASK))
        u = (z >> _S11).astype(np.float64) * 2.0**-53
        c = cuts[state]
        fwd = u < c[:, 0]
        bwd = ~fwd & (u < c[:, 1])
        absorb = u >= c[:, 2]
        n_abs = int(absorb.sum())
        if n_abs:
            tally.absorb += np.bincount(state[absorb], minlength=n_states)
            tally.by_step[k] = tally.by_step.get(k, 0) + n_abs
            tally.ended(n_abs, k)
        state = state + fwd - bwd
        off_left = state < 0
        off_right = state >= n_states
        n_left, n_right = int(off_left.sum()), int(off_right.sum())
        if n_left or n_right:
            tally.exit_left += n_left
            tally.exit_right += n_right
            tally.ended(n_left + n_right, k + 1)
        keep = ~(absorb | off_left | off_right)
        state = state[keep]
        keys = keys[keep]
        k += 1
    return tally


def simulate(spec: WalkSpec, i0: Optional[int] = None, trials: int = 100_000, seed: int = 0,
             max_steps: int = DEFAULT_MAX_STEPS, workers: int = 1) -> SimulationResult:
    """Play ``trials`` walks from ``i0``; the result does not depend on ``workers``."""
    i0 = spec.start if i0 is None else i0
    if trials < 1 or max_steps < 1:
        raise ValueError("trials and max_steps must be positive")
    seed &= _MASK
    cuts = _thresholds(spec)
    workers = max(1, min(int(workers), trials))
    bounds = [trials * w // workers for w in range(workers + 1)]
    jobs = [(cuts, i0, bounds[w], bounds[w + 1], seed, max_steps) for w in range(workers)]
    if workers == 1:
        parts = [_run_block(*jobs[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _run_block(*job), jobs))

    total = _Tally(np.zeros(spec.n_states, np.int64), np.zeros(spec.n_states, np.int64))
    for part in parts:
        total.absorb += part.absorb
        total.visits += part.visits
        total.exit_left += part.exit_left
        total.exit_right += part.exit_right
        total.truncated += part.truncated
        total.finished += part.finished
        total.step_sum += part.step_sum
        total.step_sq += part.step_sq
        for step, count in part.by_step.items():
            total.by_step[step] = total.by_step.get(step, 0) + count

    n = total.finished
    if n:
        mean = total.step_sum / n
        # exact integer variance numerator, so the value is partition independent
        var_num = n * total.step_sq - total.step_sum**2
        stderr = math.sqrt(var_num / (n * n * (n - 1))) if n > 1 else math.nan
    else:
        mean = stderr = math.nan
    return SimulationResult(
        start=i0,
        trials=trials,
        seed=seed,
        max_steps=max_steps,
        absorb_counts=total.absorb,
        exit_left=total.exit_left,
        exit_right=total.exit_right,
        truncated=total.truncated,
        mean_steps=mean,
        stderr_steps=stderr,
        visit_means=total.visits / trials,
        absorb_by_step=dict(sorted(total.by_step.items())),
    )
