"""Certified finite chains G(p) standing in for Gamma(2p^2, p).

Any chain works downstream as long as it meets four properties:

* P1: for p = 2 the chain is exactly 1-2;
* P2: for p >= 3 it starts 1-p and ends at 2;
* P3: every element m is squarefree, m <= 2p^2 and P+(m) <= p;
* P4: it contains every squarefree m with F(m) <= p^2.

Two builders are provided. ``"blocks"`` (the default) is a direct recursive
construction that runs in time linear in the output. ``"search"`` is a
deterministic backtracking search over the divisor graph with a node budget;
it is practical for small primes only. Both outputs go through the same
independent checker before they are handed out.
"""

from __future__ import annotations

import logging
import math
import os
import tempfile
import threading
from bisect import bisect_right
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .arith import (
    MAX_NAT,
    dense_squarefree_set,
    is_prime,
    is_squarefree,
    p_plus,
    sieve_primes,
    squarefree_smooth,
)
from .chain import FiniteChain, find_violation
from .errors import DomainError, GammaBuildError, GammaContractError, NatOverflowError

log = logging.getLogger(__name__)

DEFAULT_NODE_BUDGET = 10**7
DEFAULT_MAX_PRIME = 100_000
STRATEGIES = ("blocks", "search")
CACHE_HEADER = "GAMMA v1 p="
CACHE_TRAILER = "CHECKED=P1P2P3P4"


def _require_prime(p: int) -> None:
    if not is_prime(p):
        raise DomainError(f"expected a prime, got {p}")


def required_set(p: int) -> list[int]:
    """Squarefree m with F(m) <= p^2, increasing."""
    _require_prime(p)
    return dense_squarefree_set(p * p)


def allowed_set(p: int) -> list[int]:
    """Squarefree p-smooth m <= 2p^2, increasing."""
    _require_prime(p)
    return squarefree_smooth(2 * p * p, p)


def check_contract(p: int, elems: Sequence[int]) -> list[str]:
    """Names of the failed properties (empty list when the chain is certified).

    Recomputes everything from arith primitives. ``"CHAIN"`` flags a
    sequence that is not a finite chain at all.
    """
    _require_prime(p)
    failed = []
    if not elems or find_violation(elems) is not None:
        failed.append("CHAIN")
    if p == 2:
        if list(elems) != [1, 2]:
            failed.append("P1")
    elif len(elems) < 3 or elems[0] != 1 or elems[1] != p or elems[-1] != 2:
        failed.append("P2")
    bound = 2 * p * p
    if not all(m <= bound and is_squarefree(m) and p_plus(m) <= p for m in elems):
        failed.append("P3")
    present = set(elems)
    if not all(m in present for m in dense_squarefree_set(p * p)):
        failed.append("P4")
    return failed


@dataclass(frozen=True)
class GammaChain:
    p: int
    chain: FiniteChain
    elem_set: frozenset = field(repr=False, compare=False)

    def __contains__(self, m: int) -> bool:
        return m in self.elem_set

    def __len__(self) -> int:
        return len(self.chain)


# -- recursive block construction -------------------------------------------
#
# chain(x, hi, e): a chain from 1 to the prime e through squarefree numbers
# <= x built from primes[:hi], containing every such m with F(m) <= x/2.
# Numbers are grouped by largest prime factor r; the group of r is
# r * chain(x/r, primes below r, next), so it starts at r and ends at
# r * next where `next` is the prime of the following group. Groups are
# visited for every r with 2r^2 <= x (the only ones holding required
# numbers) plus 2, in decreasing order, with the group of e moved last and
# walked backwards (from 2e down to e).


def _block_chain(x: int, hi: int, e: int, primes: list[int], rank: dict, memo: dict) -> tuple[int, ...]:
    key = (x, hi, e)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if e > x or (e != 2 and 2 * e > x):
        raise ValueError(f"cannot end at {e} below {x}")
    k = 0
    while k < hi and 2 * primes[k] * primes[k] <= x:
        k += 1
    order = [primes[j] for j in range(k - 1, -1, -1) if primes[j] != e]
    if not order or order[-1] != 2:
        if e != 2:
            order.append(2)
    out = [1]
    for pos, r in enumerate(order):
        if r == 2:
            out.append(2)
            continue
        nxt = order[pos + 1] if pos + 1 < len(order) else e
        sub = _block_chain(x // r, rank[r], nxt, primes, rank, memo)
        out.extend(r * s for s in sub)
    if e == 2:
        out.append(2)
    else:
        sub = _block_chain(x // e, rank[e], 2, primes, rank, memo)
        out.extend(e * s for s in reversed(sub))
    result = tuple(out)
    memo[key] = result
    return result


def _build_blocks(p: int) -> tuple[int, ...]:
    primes = sieve_primes(max(p, 2))
    try:
        rank = {q: i for i, q in enumerate(primes)}
        return _block_chain(2 * p * p, bisect_right(primes, p), 2, primes, rank, {})
    except ValueError as exc:
        raise GammaBuildError(p, f"no chain found ({exc})") from exc


# -- backtracking search ------------------------------------------------------


def _divisor_graph(values: Sequence[int]) -> dict[int, list[int]]:
    index = set(values)
    top = values[-1]
    nbrs: dict[int, list[int]] = {v: [] for v in values}
    for v in values:
        for w in range(2 * v, top + 1, v):
            if w in index:
                nbrs[v].append(w)
                nbrs[w].append(v)
    return nbrs


def _build_search(p: int, node_budget: int) -> tuple[int, ...]:
    if p == 2:
        return (1, 2)
    allowed = allowed_set(p)
    required = set(required_set(p))
    nbrs = _divisor_graph(allowed)
    free_deg = {v: len(n) for v, n in nbrs.items()}
    visited: set[int] = set()
    path: list[int] = []
    missing = [len(required)]

    def visit(v):
        visited.add(v)
        path.append(v)
        if v in required:
            missing[0] -= 1
        for w in nbrs[v]:
            free_deg[w] -= 1

    def unvisit():
        v = path.pop()
        visited.discard(v)
        if v in required:
            missing[0] += 1
        for w in nbrs[v]:
            free_deg[w] += 1

    def candidates(v):
        # Vertex 2 is reserved for the final position.
        cands = [w for w in nbrs[v] if w not in visited and w != 2]
        cands.sort(key=lambda w: (w not in required, free_deg[w], w))
        return cands

    def frame(v):
        # Required vertices whose only free neighbour is v must come next.
        if free_deg[2] == 0 and v % 2:
            return iter(())
        dead = [w for w in nbrs[v] if w not in visited and w in required and w != 2 and free_deg[w] == 0]
        if len(dead) > 1:
            return iter(())
        if dead:
            return iter(dead)
        return iter(candidates(v))

    visit(1)
    visit(p)
    stack = [frame(p)]
    nodes = 0
    while stack:
        if missing[0] == 1 and path[-1] % 2 == 0:
            return tuple(path) + (2,)
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            if len(path) > 2:
                unvisit()
            continue
        nodes += 1
        if nodes > node_budget:
            raise GammaBuildError(p, f"node budget of {node_budget} exhausted")
        visit(nxt)
        stack.append(frame(nxt))
    raise GammaBuildError(p, "no chain found")


# -- public builders ----------------------------------------------------------


def construct(p: int, strategy: str = "blocks", node_budget: int = DEFAULT_NODE_BUDGET) -> tuple[int, ...]:
    """Raw builder output (uncertified)."""
    _require_prime(p)
    if 2 * p * p * p > MAX_NAT:
        raise NatOverflowError(f"G({p}) scaled values exceed 2^64-1")
    if strategy == "blocks":
        return _build_blocks(p)
    if strategy == "search":
        return _build_search(p, node_budget)
    raise DomainError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")


def certify(p: int, elems: Sequence[int]) -> GammaChain:
    failed = check_contract(p, elems)
    if failed:
        raise GammaContractError(p, failed)
    return GammaChain(p, FiniteChain(elems), frozenset(elems))


def build_gamma(
    p: int,
    strategy: str = "blocks",
    node_budget: int = DEFAULT_NODE_BUDGET,
    max_prime: int = DEFAULT_MAX_PRIME,
) -> GammaChain:
    """Build and certify G(p). Deterministic: the same p gives the same chain."""
    if p > max_prime:
        raise DomainError(f"p={p} exceeds the configured limit {max_prime}")
    return certify(p, construct(p, strategy, node_budget))


# -- disk cache ---------------------------------------------------------------


class GammaCache:
    """One text file per prime under ``<directory>/<strategy>/``.

    Writes go to a temporary file that is atomically renamed into place, so
    concurrent readers only ever see complete files. Loaded chains are
    re-certified; a file that fails is ignored (and later overwritten).
    """

    def __init__(self, directory: str | os.PathLike, strategy: str = "blocks"):
        self.root = Path(directory) / strategy
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, p: int) -> Path:
        return self.root / f"gamma_{p:07d}.txt"

    def load(self, p: int) -> GammaChain | None:
        path = self.path(p)
        try:
            lines = path.read_text().split("\n")
        except FileNotFoundError:
            return None
        while lines and not lines[-1]:
            lines.pop()
        if len(lines) < 3 or lines[0] != f"{CACHE_HEADER}{p}" or lines[-1] != CACHE_TRAILER:
            log.warning("ignoring malformed cache file %s", path)
            return None
        try:
            return certify(p, tuple(int(v) for v in lines[1:-1]))
        except (ValueError, GammaContractError) as exc:
            log.warning("ignoring cache file %s: %s", path, exc)
            return None

    def store(self, gamma: GammaChain) -> None:
        body = "\n".join([f"{CACHE_HEADER}{gamma.p}", *map(str, gamma.chain), CACHE_TRAILER]) + "\n"
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=f".gamma_{gamma.p}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(body)
            os.replace(tmp, self.path(gamma.p))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


class GammaStore:
    """Memoized access to certified chains, optionally backed by a disk cache.

    Keeps at most ``max_in_memory`` chains resident (least recently used are
    evicted); evicted chains are rebuilt or reloaded identically on demand.
    """

    def __init__(
        self,
        cache_dir: str | os.PathLike | None = None,
        strategy: str = "blocks",
        node_budget: int = DEFAULT_NODE_BUDGET,
        max_prime: int = DEFAULT_MAX_PRIME,
        max_in_memory: int = 256,
    ):
        if strategy not in STRATEGIES:
            raise DomainError(f"unknown strategy {strategy!r}")
        self.strategy = strategy
        self.node_budget = node_budget
        self.max_prime = max_prime
        self.max_in_memory = max_in_memory
        self.cache = GammaCache(cache_dir, strategy) if cache_dir is not None else None
        self._chains: OrderedDict[int, GammaChain] = OrderedDict()
        self._lock = threading.Lock()
        self.builds = 0
        self.loads = 0

    def get(self, p: int) -> GammaChain:
        with self._lock:
            gamma = self._chains.get(p)
            if gamma is not None:
                self._chains.move_to_end(p)
                return gamma
        gamma = self.cache.load(p) if self.cache else None
        if gamma is not None:
            self.loads += 1
        else:
            gamma = build_gamma(p, self.strategy, self.node_budget, self.max_prime)
            self.builds += 1
            if self.cache:
                self.cache.store(gamma)
        self._remember(gamma)
        return gamma

    def _remember(self, gamma: GammaChain) -> None:
        with self._lock:
            self._chains[gamma.p] = gamma
            self._chains.move_to_end(gamma.p)
            while len(self._chains) > self.max_in_memory:
                self._chains.popitem(last=False)

    def contains(self, p: int, m: int) -> bool:
        return m in self.get(p)

    def evict(self, p: int | None = None) -> None:
        with self._lock:
            if p is None:
                self._chains.clear()
            else:
                self._chains.pop(p, None)

    def prefetch(self, primes: Iterable[int], jobs: int = 1) -> None:
        """Build missing chains for ``primes``, in parallel when ``jobs > 1``."""
        todo = [p for p in primes if p not in self._chains and not (self.cache and self.cache.load(p))]
        if jobs <= 1 or len(todo) < 2:
            for p in todo:
                self.get(p)
            return
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            args = [(p, self.strategy, self.node_budget) for p in todo]
            for p, elems in zip(todo, pool.map(_construct_args, args)):
                gamma = certify(p, elems)
                self.builds += 1
                if self.cache:
                    self.cache.store(gamma)
                self._remember(gamma)


def _construct_args(args) -> tuple[int, ...]:
    return construct(*args)


_default_store = GammaStore()


def default_store() -> GammaStore:
    return _default_store


def gamma_contains(p: int, m: int, store: GammaStore | None = None) -> bool:
    _require_prime(p)
    return (store or _default_store).contains(p, m)


def gamma_length_stats(p_max: int, store: GammaStore | None = None) -> list[tuple[int, int, float]]:
    """Rows ``(p, length, length * ln p / p^2)`` for every prime p <= p_max."""
    if p_max < 2:
        raise DomainError("p_max must be >= 2")
    store = store or _default_store
    rows = []
    for p in sieve_primes(p_max):
        n = len(store.get(p))
        rows.append((p, n, n * math.log(p) / (p * p)))
    return rows
