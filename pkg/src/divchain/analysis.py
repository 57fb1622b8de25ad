"""Empirical measurement of the growth, lcm, coverage and chain-length bounds,
plus the naive quadratic chain-permutation used as a baseline.

Ratios are diagnostics and use double-precision floats with natural logs.
Anything that is asserted (lcm equal to the larger neighbour, coverage) is
decided with exact integer arithmetic.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .chain import NON_ADJACENT, ChainViolation
from .errors import ChainError, DomainError
from .arith import sieve_primes
from .gamma import GammaStore, default_store
from .permutation import generate


@dataclass
class GrowthStats:
    horizon: int
    max_ratio: float
    argmax_n: int
    ratios_at_checkpoints: list[tuple[int, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return _stringify(asdict(self))


@dataclass
class CoverageStats:
    horizon: int
    min_missing: int
    present_up_to: int

    def to_dict(self) -> dict:
        return _stringify(asdict(self))


@dataclass
class LengthRow:
    p: int
    length: int
    ratio: float
    running_min: float | None


@dataclass
class BaselineResult:
    values: list[int]
    window: tuple[int, int]
    window_max: float
    argmax_n: int


def _stringify(obj):
    # JSON output carries every number as a decimal string.
    if isinstance(obj, dict):
        return {k: _stringify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_stringify(v) for v in obj]
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, (int, float)):
        return repr(obj)
    return obj


def _checkpoints(horizon: int, lo: int) -> list[int]:
    points = []
    n = 10
    while n < horizon:
        if n >= lo:
            points.append(n)
        n *= 10
    points.append(horizon)
    return points


def _prefix(N: int, values: Sequence[int] | None, store: GammaStore | None) -> Sequence[int]:
    if values is None:
        return generate(N, store)
    if len(values) < N:
        raise DomainError(f"need {N} values, got {len(values)}")
    return values


def n_log2(n: int) -> float:
    """n * (ln n)^2, the growth scale of the theorem."""
    return n * math.log(n) ** 2


def _max_ratio(numerators: Sequence[int], first_n: int, last_n: int, horizon: int) -> GrowthStats:
    # numerators[n - first_n] belongs to index n
    best, arg = -math.inf, first_n
    for n in range(first_n, last_n + 1):
        r = numerators[n - first_n] / n_log2(n)
        if r > best:
            best, arg = r, n
    points = [
        (n, numerators[n - first_n] / n_log2(n))
        for n in _checkpoints(last_n, first_n)
    ]
    return GrowthStats(horizon, best, arg, points)


def growth_ratio_series(values: Sequence[int]) -> list[tuple[int, float]]:
    """Plot-ready ``(n, f(n) / (n ln^2 n))`` for n >= 2."""
    return [(n, values[n - 1] / n_log2(n)) for n in range(2, len(values) + 1)]


def growth_report(N: int, values: Sequence[int] | None = None, store: GammaStore | None = None) -> GrowthStats:
    """Max of f(n) / (n ln^2 n) over 2 <= n <= N and where it is attained."""
    if N < 2:
        raise DomainError("growth_report needs N >= 2")
    vals = _prefix(N, values, store)
    return _max_ratio(vals[1:N], 2, N, N)


def lcm_values(values: Sequence[int]) -> list[int]:
    """lcm(f(n), f(n+1)) for consecutive terms; each must equal the larger term.

    Raises :class:`ChainError` at the first pair that is not a divisibility link.
    """
    out = []
    for i in range(len(values) - 1):
        a, b = values[i], values[i + 1]
        hi, lo = (a, b) if a >= b else (b, a)
        if hi % lo:
            raise ChainError(ChainViolation(NON_ADJACENT, i))
        out.append(hi)
    return out


def lcm_report(N: int, values: Sequence[int] | None = None, store: GammaStore | None = None) -> GrowthStats:
    """Max of lcm(f(n), f(n+1)) / (n ln^2 n) over 2 <= n <= N-1."""
    if N < 3:
        raise DomainError("lcm_report needs N >= 3")
    vals = _prefix(N, values, store)
    lcms = lcm_values(vals[:N])
    return _max_ratio(lcms[1:], 2, N - 1, N)


def lcm_nlogn_series(values: Sequence[int]) -> list[tuple[int, float]]:
    """Plot-ready ``(n, lcm(f(n), f(n+1)) / (n ln n))``, for inspection only."""
    lcms = lcm_values(values)
    return [(n, lcms[n - 1] / (n * math.log(n))) for n in range(2, len(lcms) + 1)]


def coverage_report(N: int, values: Sequence[int] | None = None, store: GammaStore | None = None) -> CoverageStats:
    if N < 1:
        raise DomainError("coverage_report needs N >= 1")
    return coverage_of(_prefix(N, values, store)[:N])


def coverage_of(values: Sequence[int]) -> CoverageStats:
    present = set(values)
    m = 1
    while m in present:
        m += 1
    return CoverageStats(len(values), m, m - 1)


def baseline_naive(N: int) -> BaselineResult:
    """The quadratic chain-permutation 1, 2, 2*3, 3, 3*4, 4, 4*5, 5, 5*7, 7, ...

    From the current value x, emit x*y and then y where y is the smallest
    unused integer. The limsup of f(n)/n^2 is tracked as the maximum over
    the trailing window [N/2, N].
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    values = [1]
    used = {1}
    x, y = 1, 2
    while len(values) < N:
        while y in used:
            y += 1
        if x > 1:
            values.append(x * y)
            used.add(x * y)
        if len(values) < N:
            values.append(y)
            used.add(y)
        x = y
    lo = max(1, N // 2)
    best, arg = 0.0, lo
    for n in range(lo, N + 1):
        r = values[n - 1] / (n * n)
        if r > best:
            best, arg = r, n
    return BaselineResult(values, (lo, N), best, arg)


def length_bound_report(p_max: int, store: GammaStore | None = None) -> list[LengthRow]:
    """Per prime: chain length, length * ln p / p^2, and its running minimum from p = 5."""
    if p_max < 3:
        raise DomainError("p_max must be >= 3")
    store = store or default_store()
    rows = []
    running = None
    for p in sieve_primes(p_max):
        n = len(store.get(p))
        ratio = n * math.log(p) / (p * p)
        if p >= 5:
            running = ratio if running is None else min(running, ratio)
        rows.append(LengthRow(p, n, ratio, running if p >= 5 else None))
    return rows


# -- writers ------------------------------------------------------------------


def rows_to_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def to_json(obj) -> str:
    if hasattr(obj, "to_dict"):
        obj = obj.to_dict()
    else:
        obj = _stringify(obj)
    return json.dumps(obj, sort_keys=True)
