"""Fibonacci-indexed solution of three-term recurrences.

The recurrence

    x[i+1] = lam[m+i] * x[i] + mu[m+i-1] * x[i-1],   x[0] = 1,  x[1] = lam[m]

has the solution ``A_i^(m)`` (a continuant).  It can be written as a sum of
``f_i`` products read column by column out of a symbol table (the tau-table),
where ``f`` is the Fibonacci sequence with ``f_0 = f_1 = 1``.  This module
provides

* the Fibonacci numbers and the greedy column reduction that locates the
  tau-table cell of any column,
* the tau-table itself, both from the three-band rule and from the recursive
  block construction,
* ``A_i^(m)`` by explicit sum of products (an oracle, capped at order 20) and
  by forward recurrence in overflow-free arithmetic,
* the shifted identity ``A_{N+1}^(m) = lam[m] A_N^(m+1) + mu[m] A_{N-1}^(m+2)``
  used as a backward sweep, and
* the solution of an inhomogeneous recurrence anchored on both sides, which is
  what the walk analytics consume.
"""

from __future__ import annotations

import bisect
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import CapacityError, DegenerateSpecError, OffsetRangeError
from .scaled import ONE, ZERO, CompensatedPair, ScaledReal

EXPLICIT_CAP = 20

LAM, MU, UNIT = 0, 1, 2

# ---------------------------------------------------------------------------
# Fibonacci numbers (f_0 = f_1 = 1)
# ---------------------------------------------------------------------------

_fib: List[int] = [1, 1]
_fib_lock = threading.Lock()


def fibonacci(n: int) -> int:
    """Return ``f_n`` with ``f_0 = f_1 = 1``."""
    if n < 0:
        raise ValueError(f"Fibonacci index must be non-negative, got {n}")
    if n >= len(_fib):
        with _fib_lock:
            while len(_fib) <= n:
                _fib.append(_fib[-1] + _fib[-2])
    return _fib[n]


def _bracket(j: int) -> int:
    """Unique ``n >= 1`` with ``f_n < j <= f_{n+1}`` (requires ``j >= 2``)."""
    n = len(_fib)
    while _fib[-1] < j:
        fibonacci(n)
        n += 1
    return bisect.bisect_left(_fib, j, lo=1) - 1


def reduction_chain(j: int, i: int) -> List[int]:
    """Column indices visited while reducing column ``j`` for row ``i``.

    The first entry is ``j``; each later entry subtracts the largest Fibonacci
    number strictly below the current index, until the index is at most
    ``f_{i+1}``.
    """
    if j < 1 or i < 1:
        raise ValueError(f"row and column must be positive, got i={i}, j={j}")
    limit = fibonacci(i + 1)
    chain = [j]
    while j > limit:
        j -= fibonacci(_bracket(j))
        chain.append(j)
    return chain


def reduce_column(j: int, i: int) -> int:
    """Map column ``j`` of any tau-table to the equivalent column ``<= f_{i+1}`` for row ``i``."""
    return reduction_chain(j, i)[-1]


def band(i: int, j: int) -> int:
    """Band of cell ``(i, j)``: ``LAM``, ``MU`` or ``UNIT``."""
    jr = reduce_column(j, i)
    if jr <= fibonacci(i - 1):
        return LAM
    if jr <= fibonacci(i):
        return MU
    return UNIT


# ---------------------------------------------------------------------------
# tau-table
# ---------------------------------------------------------------------------


class Cell(NamedTuple):
    kind: int
    offset: Optional[int] = None

    def __str__(self):
        if self.kind == LAM:
            return f"λ_{self.offset}"
        if self.kind == MU:
            return f"μ_{self.offset}"
        return "1"


UNIT_CELL = Cell(UNIT)


@dataclass(frozen=True)
class TauTable:
    """Symbolic tau-table of order ``n`` (rows ``1..n``, columns ``1..f_n``).

    Order 0 is stored as the single unit cell ``(1)``.
    """

    n: int
    entries: Tuple[Tuple[Cell, ...], ...]

    @property
    def n_columns(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def cell(self, i: int, j: int) -> Cell:
        return self.entries[i - 1][j - 1]

    def rows(self) -> List[List[str]]:
        return [[str(c) for c in row] for row in self.entries]

    @classmethod
    def from_rule(cls, n: int) -> "TauTable":
        """Fill every cell from the three-band rule and the column reduction."""
        if n == 0:
            return cls(0, ((UNIT_CELL,),))
        rows = []
        for i in range(1, n + 1):
            row = []
            for j in range(1, fibonacci(n) + 1):
                b = band(i, j)
                row.append(Cell(LAM, i - 1) if b == LAM else Cell(MU, i - 2) if b == MU else UNIT_CELL)
            rows.append(tuple(row))
        return cls(n, tuple(rows))

    @classmethod
    def from_blocks(cls, n: int) -> "TauTable":
        """Build order ``n`` by gluing orders ``n-1`` and ``n-2`` side by side."""
        return _table_from_blocks(n)


@lru_cache(maxsize=None)
def _table_from_blocks(n: int) -> TauTable:
    if n == 0:
        return TauTable(0, ((UNIT_CELL,),))
    if n == 1:
        return TauTable(1, ((Cell(LAM, 0),),))
    prev, prev2 = _table_from_blocks(n - 1), _table_from_blocks(n - 2)
    k = n - 1  # building F_{k+1} from F_k and F_{k-1}
    rows = []
    for i in range(1, k):
        rows.append(prev.entries[i - 1] + prev2.entries[i - 1])
    rows.append(prev.entries[k - 1] + (UNIT_CELL,) * fibonacci(k - 1))
    rows.append((Cell(LAM, k),) * fibonacci(k) + (Cell(MU, k - 1),) * fibonacci(k - 1))
    return TauTable(n, tuple(rows))


@lru_cache(maxsize=None)
def _band_matrix(n: int) -> np.ndarray:
    codes = np.empty((n, fibonacci(n)), dtype=np.int8)
    for i in range(1, n + 1):
        for j in range(1, fibonacci(n) + 1):
            codes[i - 1, j - 1] = band(i, j)
    codes.setflags(write=False)
    return codes


# ---------------------------------------------------------------------------
# coefficients
# ---------------------------------------------------------------------------


def _as_map(values) -> Dict[int, float]:
    out = {}
    for k, v in dict(values).items():
        v = float(v)
        if v != v or v in (float("inf"), float("-inf")):
            raise ValueError(f"coefficient at offset {k} is not finite: {v!r}")
        out[int(k)] = v
    return out


@dataclass(frozen=True)
class CoefficientSet:
    """Coefficient sequences indexed by (possibly negative) integer offsets.

    ``lam`` and ``mu`` play the roles of the two recurrence coefficients;
    ``inhom`` is the optional source term of an inhomogeneous recurrence.
    Reading an offset that is not present raises :class:`OffsetRangeError`.
    """

    lam: Mapping[int, float]
    mu: Mapping[int, float]
    inhom: Optional[Mapping[int, float]] = None
    names: Tuple[str, str, str] = ("lam", "mu", "inhom")

    def __post_init__(self):
        object.__setattr__(self, "lam", _as_map(self.lam))
        object.__setattr__(self, "mu", _as_map(self.mu))
        if self.inhom is not None:
            object.__setattr__(self, "inhom", _as_map(self.inhom))

    @classmethod
    def from_sequences(cls, lam: Sequence[float], mu: Sequence[float],
                       start: int = 0, inhom: Optional[Sequence[float]] = None) -> "CoefficientSet":
        """Sequences whose first element sits at offset ``start``."""
        def enum(seq):
            return {start + k: v for k, v in enumerate(seq)}
        return cls(enum(lam), enum(mu), None if inhom is None else enum(inhom))

    @property
    def valid_range(self) -> Tuple[int, int]:
        keys = list(self.lam) + list(self.mu) + list(self.inhom or ())
        if not keys:
            return (0, -1)
        return (min(keys), max(keys))

    def _get(self, which: int, table, k: int) -> float:
        try:
            return table[k]
        except (KeyError, TypeError):
            rng = (min(table), max(table)) if table else None
            raise OffsetRangeError(self.names[which], k, rng) from None

    def lam_at(self, k: int) -> float:
        return self._get(0, self.lam, k)

    def mu_at(self, k: int) -> float:
        return self._get(1, self.mu, k)

    def inhom_at(self, k: int) -> float:
        return self._get(2, self.inhom, k)

    def is_empty(self) -> bool:
        return not self.lam and not self.mu and not self.inhom


# ---------------------------------------------------------------------------
# A_i^(m)
# ---------------------------------------------------------------------------


def tau(i: int, j: int, m: int, coeffs: CoefficientSet) -> float:
    """Numeric value of cell ``(i, j)`` of the tau-table shifted by ``m``."""
    b = band(i, j)
    if b == LAM:
        return coeffs.lam_at(m + i - 1)
    if b == MU:
        return coeffs.mu_at(m + i - 2)
    return 1.0


def explicit_products(i: int, m: int, coeffs: CoefficientSet) -> np.ndarray:
    """The ``f_i`` column products whose sum is ``A_i^(m)``."""
    if i > EXPLICIT_CAP:
        raise CapacityError(f"explicit expansion is capped at order {EXPLICIT_CAP}, got {i}")
    if i < 0:
        raise ValueError(f"order must be non-negative, got {i}")
    if i == 0:
        return np.ones(1)
    codes = _band_matrix(i)
    prods = np.ones(codes.shape[1])
    for k in range(1, i + 1):
        # the mu band of row 1 is empty, so mu[m-1] is never needed there
        mu = coeffs.mu_at(m + k - 2) if k >= 2 else np.nan
        choices = np.array([coeffs.lam_at(m + k - 1), mu, 1.0])
        prods = prods * choices[codes[k - 1]]
    return prods


def a_explicit(i: int, m: int, coeffs: CoefficientSet) -> float:
    """``A_i^(m)`` as a plain left-to-right sum over tau-table columns."""
    prods = explicit_products(i, m, coeffs)
    return float(np.cumsum(prods)[-1])


def continuants(count: int, m: int, coeffs: CoefficientSet) -> List[ScaledReal]:
    """``[A_0^(m), A_1^(m), ..., A_count^(m)]`` by compensated forward recurrence."""
    pair = CompensatedPair(1.0, 0.0)
    out = [ONE]
    for i in range(count):
        mu = coeffs.mu_at(m + i - 1) if i > 0 else 0.0
        pair.step(coeffs.lam_at(m + i), mu)
        out.append(pair.current)
    return out


def a_recurrence(i: int, m: int, coeffs: CoefficientSet) -> ScaledReal:
    """``A_i^(m)`` for ``i >= -1`` (with ``A_{-1} = 0`` and ``A_0 = 1``)."""
    if i < -1:
        raise ValueError(f"order must be at least -1, got {i}")
    if i == -1:
        return ZERO
    return continuants(i, m, coeffs)[-1]


def continuant_tails(first: int, last: int, coeffs: CoefficientSet) -> Dict[int, ScaledReal]:
    """Map ``c -> A_{last-c+1}^(c)`` for ``c`` in ``first..last+2``.

    Computed right to left with ``A_{K+1}^(c) = lam[c] A_K^(c+1) + mu[c] A_{K-1}^(c+2)``,
    so every tail ending at offset ``last`` costs one step.
    """
    tails = {last + 2: ZERO, last + 1: ONE}
    pair = CompensatedPair(1.0, 0.0)
    for c in range(last, first - 1, -1):
        pair.step(coeffs.lam_at(c), coeffs.mu_at(c) if c < last else 0.0)
        tails[c] = pair.current
    return tails


def a_inhomogeneous(i: int, m: int, coeffs: CoefficientSet,
                    head0: float, head1: float) -> ScaledReal:
    """Forward general solution of the inhomogeneous recurrence.

    With ``y[m-1] = head0``, ``y[m] = head1`` and
    ``y[t+1] = lam[t] y[t] + mu[t-1] y[t-1] + inhom[t]`` this returns
    ``y[m+i] = head1 A_i^(m) + head0 mu[m-1] A_{i-1}^(m+1) + sum_n A_{i-n}^(m+n) inhom[m+n-1]``.
    """
    if i < 0:
        raise ValueError(f"order must be non-negative, got {i}")
    total = continuants(i, m, coeffs)[-1] * head1
    if i >= 1 and head0 != 0.0:
        total = total + a_recurrence(i - 1, m + 1, coeffs) * (head0 * coeffs.mu_at(m - 1))
    for n in range(1, i + 1):
        total = total + a_recurrence(i - n, m + n, coeffs) * coeffs.inhom_at(m + n - 1)
    return total


def cross_difference(m: int, n: int, i: int, length: int, coeffs: CoefficientSet) -> ScaledReal:
    """``A_{i-n}^(m+n) A_length^(m) - A_{length-n}^(m+n) A_i^(m)`` without cancellation.

    Two solutions of the same recurrence have a Casoratian that only picks up
    factors ``-mu[t]`` from step to step, which turns the difference into the
    single product ``-A_{n-1}^(m) * prod_{t=m+n-1}^{m+i-1} (-mu[t]) * A_{length-i-1}^(m+i+1)``.
    Valid for ``1 <= n <= i + 1`` and ``i <= length``.
    """
    if not (1 <= n <= i + 1 and i <= length):
        raise ValueError(f"need 1 <= n <= i+1 and i <= length, got n={n}, i={i}, length={length}")
    value = a_recurrence(n - 1, m, coeffs)
    for t in range(m + n - 1, m + i):
        value = value * (-coeffs.mu_at(t))
    return -(value * a_recurrence(length - i - 1, m + i + 1, coeffs))


def anchored_solution(coeffs: CoefficientSet, m: int, length: int,
                      head0: Optional[float] = None) -> List[ScaledReal]:
    """Solve the two-point problem behind the walk formulas.

    Finds ``y[m], ..., y[m+length-1]`` such that
    ``y[t+1] = lam[t] y[t] + mu[t-1] y[t-1] + inhom[t]`` for
    ``t = m .. m+length-1`` with ``y[m-1] = head0`` (zero when ``None``) and
    ``y[m+length] = 0``.

    The forward general solution is fixed by the far condition and every
    difference of continuant products is rewritten with
    :func:`cross_difference`.  What is left is

        y[m+i] = (G_i * A_{length-i-1}^(m+i+1) + A_i^(m) * Q_i) / A_length^(m)

    where ``G`` accumulates products of ``-mu`` and ``Q`` is a suffix sum of
    continuant tails.  For walk coefficients every term is non-negative, so
    nothing cancels.
    """
    if length < 1:
        raise ValueError(f"length must be positive, got {length}")
    last = m + length - 1
    tails = continuant_tails(m, last, coeffs)
    if not tails[m]:
        raise DegenerateSpecError(f"continuant A_{length}^({m}) vanished")
    prefix = continuants(length - 1, m, coeffs)

    if coeffs.inhom is None:
        src = [0.0] * (length + 1)
    else:
        src = [0.0] + [-coeffs.inhom_at(m + n - 1) for n in range(1, length + 1)]

    suffix = [ZERO] * (length + 1)
    for i in range(length - 1, -1, -1):
        suffix[i] = suffix[i + 1] + tails[m + i + 1] * src[i + 1]

    g = ZERO if head0 is None or head0 == 0.0 else ScaledReal.of(head0) * (-coeffs.mu_at(m - 1))
    out = []
    for i in range(length):
        if i > 0:
            g = (g + prefix[i - 1] * src[i]) * (-coeffs.mu_at(m + i - 1))
        out.append((g * tails[m + i + 1] + prefix[i] * suffix[i]) / tails[m])
    return out
