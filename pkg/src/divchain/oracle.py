"""Brute-force re-derivations used to certify the fast paths at small scale.

Nothing here reuses the optimized code it checks: F is evaluated by literal
divisor enumeration, chains are found by complete search, and prefixes are
re-validated with bare remainder tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .errors import GuardError

BRUTE_BOUND_GUARD = 10**6
EXHAUSTIVE_PRIME_GUARD = 13


def _smallest_factor(d: int) -> int:
    t = 2
    while t * t <= d:
        if d % t == 0:
            return t
        t += 1
    return d


@lru_cache(maxsize=None)
def brute_f(m: int) -> int:
    """F(m) straight from its definition: max of d * P^-(d) over divisors d > 1."""
    if m == 1:
        return 1
    best = 0
    for d in range(2, m + 1):
        if m % d == 0:
            best = max(best, d * _smallest_factor(d))
    return best


def brute_squarefree(m: int) -> bool:
    t = 2
    while t * t <= m:
        if m % (t * t) == 0:
            return False
        t += 1
    return True


_table: list[tuple[int, int]] = []  # (squarefree m, F(m)) for m <= _table_limit
_table_limit = 0


def _squarefree_f_upto(limit: int) -> list[tuple[int, int]]:
    global _table_limit
    if limit > _table_limit:
        _table.extend((m, brute_f(m)) for m in range(_table_limit + 1, limit + 1) if brute_squarefree(m))
        _table_limit = limit
    return _table


def brute_dense_set(bound: int) -> list[int]:
    """Squarefree m with F(m) <= bound, by scanning every m <= bound/2."""
    if bound > BRUTE_BOUND_GUARD:
        raise GuardError(f"brute_dense_set is limited to bound <= {BRUTE_BOUND_GUARD}")
    if bound < 1:
        raise GuardError("bound must be positive")
    # F(m) >= 2m for m >= 2, so nothing above bound/2 qualifies.
    limit = max(1, bound // 2)
    out = []
    for m, f in _squarefree_f_upto(limit):
        if m > limit:
            break
        if f <= bound:
            out.append(m)
    return out


@dataclass
class SearchResult:
    found: bool
    chain: list[int] | None
    nodes_expanded: int
    count: int = 0


def exhaustive_gamma(p: int, census: bool = False) -> SearchResult:
    """Complete search for chains meeting the four contract properties for G(p).

    Explores every simple path 1, p, ..., 2 through squarefree p-smooth
    numbers <= 2p^2 (all subsets, all orders). Stops at the first chain
    unless ``census`` is set, in which case every chain is counted and the
    first one (in increasing-value search order) is returned.
    """
    if p > EXHAUSTIVE_PRIME_GUARD:
        raise GuardError(f"exhaustive_gamma is limited to p <= {EXHAUSTIVE_PRIME_GUARD}")
    if p < 2 or _smallest_factor(p) != p:
        raise GuardError(f"{p} is not a prime")
    bound = 2 * p * p
    verts = [m for m in range(1, bound + 1) if brute_squarefree(m) and _largest_factor(m) <= p]
    required = {m for m in verts if m <= p * p and brute_f(m) <= p * p}
    if p == 2:
        return SearchResult(True, [1, 2], 0, 1)
    nbrs = {v: [w for w in verts if w != v and (v % w == 0 or w % v == 0)] for v in verts}

    path = [1, p]
    on_path = {1, p}
    first: list[int] | None = None
    count = 0
    nodes = 0

    def dfs() -> bool:
        nonlocal first, count, nodes
        cur = path[-1]
        if cur % 2 == 0 and required <= on_path | {2}:
            count += 1
            if first is None:
                first = path + [2]
            if not census:
                return True
        for w in nbrs[cur]:
            if w in on_path or w == 2:
                continue
            nodes += 1
            path.append(w)
            on_path.add(w)
            if dfs():
                return True
            path.pop()
            on_path.discard(w)
        return False

    dfs()
    return SearchResult(first is not None, first, nodes, count)


def _largest_factor(m: int) -> int:
    best, t = 1, 2
    while t * t <= m:
        while m % t == 0:
            best, m = t, m // t
        t += 1
    return max(best, m) if m > 1 else best


@dataclass
class RecheckReport:
    ok: bool
    index: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def recheck_values(values: Sequence[int]) -> RecheckReport:
    """Re-validate a sequence with a hash set and remainder tests only."""
    seen = set()
    for i, v in enumerate(values):
        if v < 1:
            return RecheckReport(False, i, f"non-positive value {v}")
        if v in seen:
            return RecheckReport(False, i, f"value {v} repeated")
        seen.add(v)
        if i and values[i - 1] % v and v % values[i - 1]:
            return RecheckReport(False, i - 1, f"{values[i - 1]} and {v} do not divide one another")
    return RecheckReport(True)


def recheck_prefix(N: int, values: Sequence[int] | None = None) -> RecheckReport:
    """Re-validate f(1..N); ``values`` may supply an already generated prefix."""
    if values is None:
        from .permutation import generate

        values = generate(N)
    return recheck_values(list(values[:N]))


# -- fault injection ----------------------------------------------------------


def corrupt_one(values: Sequence[int], index: int, new_value: int | None = None) -> list[int]:
    """Copy of ``values`` with one entry replaced (by default, by max + 1)."""
    out = list(values)
    out[index] = new_value if new_value is not None else max(values) + 1
    return out


def swap_two(values: Sequence[int], i: int, j: int) -> list[int]:
    out = list(values)
    out[i], out[j] = out[j], out[i]
    return out
