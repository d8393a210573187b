"""Walk specification ``[p_i, q_i, r_i, s_i]`` on ``0..N`` and its recurrence coefficients.

Every coefficient set is derived from one balance equation per state, divided
through by the probability that links the state to the neighbour being
solved for.  Backward sets are stored under negated offsets so that a single
forward evaluator serves both directions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

from .errors import DegenerateSpecError, SpecValidationError
from .fibcore import CoefficientSet

ROW_SUM_TOL = 1e-12


class Method(str, enum.Enum):
    FIBONACCI = "fibonacci"
    DIRECT = "direct"
    AUTO = "auto"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, Method):
            return value
        aliases = {"fib": cls.FIBONACCI}
        try:
            return aliases.get(value) or cls(value)
        except ValueError:
            raise ValueError(f"unknown method {value!r}; expected fib, direct or auto") from None


@dataclass(frozen=True)
class MethodTag:
    """Which evaluation path produced a result.

    ``method`` is the path actually used (never ``AUTO``); ``fallback`` explains
    why a Fibonacci request ended up on the direct solver.
    """

    requested: Method
    method: Method
    fallback: Optional[str] = None

    def __post_init__(self):
        degraded = self.requested != Method.DIRECT and self.method == Method.DIRECT
        if degraded != bool(self.fallback):
            raise ValueError("fallback reason must be given exactly when a Fibonacci request was degraded")


def _floats(values) -> Tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class WalkSpec:
    """Per-state probabilities of a nearest-neighbour walk on ``0..N``.

    ``ghost_left`` is the artificial ``p_{-1}`` and ``ghost_right`` the
    artificial ``q_{N+1}``; only their positivity matters.  Construction
    checks shapes only; call :func:`validate` for the probability rules.
    """

    p: Tuple[float, ...]
    q: Tuple[float, ...]
    r: Tuple[float, ...]
    s: Tuple[float, ...]
    ghost_left: float = 1.0
    ghost_right: float = 1.0
    start: int = 0

    def __post_init__(self):
        for name in "pqrs":
            object.__setattr__(self, name, _floats(getattr(self, name)))
        object.__setattr__(self, "ghost_left", float(self.ghost_left))
        object.__setattr__(self, "ghost_right", float(self.ghost_right))
        lengths = {name: len(getattr(self, name)) for name in "pqrs"}
        if len(set(lengths.values())) != 1 or lengths["p"] == 0:
            raise SpecValidationError(
                f"p, q, r, s must be non-empty and of equal length, got {lengths}",
                [(None, "length", lengths)],
            )

    @property
    def n(self) -> int:
        """Index of the right boundary state (``N``)."""
        return len(self.p) - 1

    @property
    def n_states(self) -> int:
        return len(self.p)

    def with_start(self, start: int) -> "WalkSpec":
        return replace(self, start=start)


def validate(spec: WalkSpec) -> WalkSpec:
    """Return ``spec`` unchanged if every invariant holds, else raise.

    No renormalisation is attempted; the error lists every offending state.
    """
    problems = []
    for i in range(spec.n_states):
        values = {"p": spec.p[i], "q": spec.q[i], "r": spec.r[i], "s": spec.s[i]}
        for name, v in values.items():
            if not math.isfinite(v):
                problems.append((i, f"{name} finite", v))
            elif v < 0:
                problems.append((i, f"{name} >= 0", v))
        residual = math.fsum(values.values()) - 1.0
        if not abs(residual) <= ROW_SUM_TOL:
            problems.append((i, "p + q + r + s = 1", residual))
    for name in ("ghost_left", "ghost_right"):
        v = getattr(spec, name)
        if not (math.isfinite(v) and v > 0):
            problems.append((None, f"{name} > 0", v))
    if not 0 <= spec.start <= spec.n:
        problems.append((None, f"0 <= start <= {spec.n}", spec.start))
    if problems:
        lines = [
            f"state {st}: {what} (got {res!r})" if st is not None else f"{what} (got {res!r})"
            for st, what, res in problems
        ]
        raise SpecValidationError("invalid walk specification: " + "; ".join(lines), problems)
    return spec


def reflect(spec: WalkSpec) -> WalkSpec:
    """Mirror the walk: state ``i`` becomes ``N - i`` and forward/backward swap."""
    return WalkSpec(
        p=spec.q[::-1],
        q=spec.p[::-1],
        r=spec.r[::-1],
        s=spec.s[::-1],
        ghost_left=spec.ghost_right,
        ghost_right=spec.ghost_left,
        start=spec.n - spec.start,
    )


def _div(num: float, den: float, what: str) -> float:
    if den == 0.0:
        raise DegenerateSpecError(f"{what} = 0")
    return num / den


# -- expected arrivals -------------------------------------------------------


def arrival_coeffs_forward(spec: WalkSpec, start: Optional[int] = None) -> CoefficientSet:
    """Coefficients of ``x[i+1] = lam[i] x[i] + mu[i-1] x[i-1]`` right of ``start``.

    ``lam[j] = (1 - r_j) / q_{j+1}`` for ``j`` in ``start..N`` and
    ``mu[j] = -p_j / q_{j+2}`` for ``j`` in ``start..N-1``, with ``q_{N+1}``
    the right ghost.
    """
    start = spec.start if start is None else start
    n = spec.n

    def q(k):
        return spec.ghost_right if k == n + 1 else spec.q[k]

    lam = {j: _div(1.0 - spec.r[j], q(j + 1), f"q[{j + 1}]") for j in range(start, n + 1)}
    mu = {j: -_div(spec.p[j], q(j + 2), f"q[{j + 2}]") for j in range(start, n)}
    return CoefficientSet(lam, mu, names=("lambda", "mu", "inhom"))


def arrival_coeffs_backward(spec: WalkSpec, start: Optional[int] = None) -> CoefficientSet:
    """Coefficients of the leftward recurrence, stored at negated offsets.

    ``rho[j] = (1 - r_{-j}) / p_{-j-1}`` for ``j`` in ``1-start..0`` and
    ``theta[j] = -q_{-j} / p_{-j-2}`` for ``j`` in ``-start..-1``, with
    ``p_{-1}`` the left ghost.  Empty when ``start = 0``.
    """
    start = spec.start if start is None else start

    def p(k):
        return spec.ghost_left if k == -1 else spec.p[k]

    rho = {j: _div(1.0 - spec.r[-j], p(-j - 1), f"p[{-j - 1}]") for j in range(1 - start, 1)}
    theta = {j: -_div(spec.q[-j], p(-j - 2), f"p[{-j - 2}]") for j in range(-start, 0)}
    return CoefficientSet(rho, theta, names=("rho", "theta", "inhom"))


# -- expected time -----------------------------------------------------------
#
# Row i of the time equations is divided by p_i (forward) or q_i (backward).
# The boundary rows N and 0 only meet p_N and q_0 through m_{N+1} = m_{-1} = 0,
# so a zero there is replaced by the matching ghost without changing the
# system.


def _time_p(spec: WalkSpec, i: int) -> float:
    if i == spec.n and spec.p[i] == 0.0:
        return spec.ghost_right
    return spec.p[i]


def _time_q(spec: WalkSpec, i: int) -> float:
    if i == 0 and spec.q[0] == 0.0:
        return spec.ghost_left
    return spec.q[i]


def time_coeffs_forward(spec: WalkSpec, start: Optional[int] = None) -> CoefficientSet:
    """``m[i+1] = omega[i] m[i] + phi[i-1] m[i-1] + alpha[i]`` on rows ``start..N``."""
    start = spec.start if start is None else start
    n = spec.n
    den = {i: _time_p(spec, i) for i in range(start, n + 1)}
    omega = {j: _div(1.0 - spec.r[j], den[j], f"p[{j}]") for j in range(start, n + 1)}
    alpha = {j: -_div(1.0 - spec.s[j], den[j], f"p[{j}]") for j in range(start, n + 1)}
    phi = {j: -_div(spec.q[j + 1], den[j + 1], f"p[{j + 1}]") for j in range(start, n)}
    return CoefficientSet(omega, phi, alpha, names=("omega", "phi", "alpha"))


def time_coeffs_backward(spec: WalkSpec, start: Optional[int] = None) -> CoefficientSet:
    """Leftward time recurrence on rows ``0..start-1`` at negated offsets.

    ``eta[j] = (1 - r_{-j}) / q_{-j}``, ``beta[j] = -(1 - s_{-j}) / q_{-j}`` for
    ``j`` in ``1-start..0`` and ``zeta[j] = -p_{-j-1} / q_{-j-1}`` for ``j`` in
    ``-start..-1``.
    """
    start = spec.start if start is None else start
    den = {i: _time_q(spec, i) for i in range(0, start)}
    eta = {j: _div(1.0 - spec.r[-j], den[-j], f"q[{-j}]") for j in range(1 - start, 1)}
    beta = {j: -_div(1.0 - spec.s[-j], den[-j], f"q[{-j}]") for j in range(1 - start, 1)}
    zeta = {j: -_div(spec.p[-j - 1], den[-j - 1], f"q[{-j - 1}]") for j in range(-start, 0)}
    return CoefficientSet(eta, zeta, beta, names=("eta", "zeta", "beta"))


# -- standard families --------------------------------------------------------


def constant_walk_spec(n: int, p: float, q: float, start: int = 0) -> WalkSpec:
    """Constant interior moves ``p, q`` with ``r = 0`` and ``s = 1 - p - q``.

    The border states only move inwards: state 0 has ``p_0 = p``,
    ``s_0 = 1 - p`` and state N has ``q_N = q``, ``s_N = 1 - q``.
    """
    if n < 1:
        raise ValueError(f"need at least two states, got N={n}")
    s = 1.0 - p - q
    ps = [p] * n + [0.0]
    qs = [0.0] + [q] * n
    ss = [1.0 - p] + [s] * (n - 1) + [1.0 - q]
    return WalkSpec(ps, qs, [0.0] * (n + 1), ss, start=start)


def gamblers_ruin_spec(n: int, start: int = 0) -> WalkSpec:
    """Fair walk on ``0..N`` with certain absorption at both borders."""
    if n < 1:
        raise ValueError(f"need at least two states, got N={n}")
    inner = n - 1
    return WalkSpec(
        p=[0.0] + [0.5] * inner + [0.0],
        q=[0.0] + [0.5] * inner + [0.0],
        r=[0.0] * (n + 1),
        s=[1.0] + [0.0] * inner + [1.0],
        start=start,
    )
