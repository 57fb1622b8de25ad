"""Finite chains in the divisor graph: validation, concatenation, the D(p)
rotate-and-scale transform, lcm helpers and (de)serialization."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from math import gcd
from typing import Iterable, Sequence

from .arith import MAX_NAT, check_nat, is_prime, next_prime, p_plus
from .errors import ChainError, DomainError, NatOverflowError

DUPLICATE = "Duplicate"
NON_ADJACENT = "NonAdjacent"


@dataclass(frozen=True)
class ChainViolation:
    kind: str
    index: int


def adjacent(a: int, b: int) -> bool:
    """True iff one of ``a``, ``b`` divides the other."""
    return b % a == 0 or a % b == 0


def find_violation(seq: Sequence[int]) -> ChainViolation | None:
    """First violation in ``seq``, or None if it is a finite chain.

    A repeated value is reported at the index of its second occurrence; a
    broken divisibility link at the index of the left element of the pair.
    """
    seen: set[int] = set()
    prev = None
    for i, v in enumerate(seq):
        if v in seen:
            return ChainViolation(DUPLICATE, i)
        if prev is not None and not adjacent(prev, v):
            return ChainViolation(NON_ADJACENT, i - 1)
        seen.add(v)
        prev = v
    return None


class FiniteChain(Sequence[int]):
    """An immutable, certified finite chain.

    Build instances with :func:`validate`; the constructor does not check.
    """

    __slots__ = ("_elems",)

    def __init__(self, elems: Iterable[int]):
        self._elems = tuple(elems)

    @property
    def elems(self) -> tuple[int, ...]:
        return self._elems

    def __getitem__(self, i):
        return self._elems[i]

    def __len__(self) -> int:
        return len(self._elems)

    def __iter__(self):
        return iter(self._elems)

    def __eq__(self, other) -> bool:
        if isinstance(other, FiniteChain):
            return self._elems == other._elems
        if isinstance(other, (list, tuple)):
            return self._elems == tuple(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._elems)

    def __repr__(self) -> str:
        if len(self._elems) > 12:
            head = ", ".join(map(str, self._elems[:6]))
            tail = ", ".join(map(str, self._elems[-3:]))
            return f"FiniteChain([{head}, ..., {tail}], len={len(self._elems)})"
        return f"FiniteChain({list(self._elems)})"

    @property
    def first(self) -> int:
        return self._elems[0]

    @property
    def last(self) -> int:
        return self._elems[-1]


def validate(seq: Iterable[int]) -> FiniteChain:
    """Certify ``seq`` as a finite chain or raise :class:`ChainError`."""
    elems = tuple(int(v) for v in seq)
    if not elems:
        raise DomainError("a chain must contain at least one element")
    for v in elems:
        check_nat(v, "chain element")
    violation = find_violation(elems)
    if violation is not None:
        raise ChainError(violation)
    return FiniteChain(elems)


def concat(a: FiniteChain, b: FiniteChain) -> FiniteChain:
    """``a`` followed by ``b``; the junction and disjointness are checked."""
    if not adjacent(a.last, b.first):
        raise ChainError(ChainViolation(NON_ADJACENT, len(a) - 1))
    left = set(a)
    for j, v in enumerate(b):
        if v in left:
            raise ChainError(ChainViolation(DUPLICATE, len(a) + j))
    return FiniteChain(a.elems + b.elems)


def make_d(gamma: Sequence[int], p: int) -> FiniteChain:
    """Move the leading 1 of ``gamma`` to the end and scale by the prime after ``p``.

    >>> list(make_d([1, 2], 2))
    [6, 3]
    """
    if not gamma or gamma[0] != 1:
        raise DomainError("make_d expects a chain starting at 1")
    if not is_prime(p):
        raise DomainError(f"make_d expects a prime, got {p}")
    for g in gamma:
        if p_plus(g) > p:
            raise DomainError(f"element {g} is not {p}-smooth")
    ps = next_prime(p)
    if max(gamma) * ps > MAX_NAT:
        raise NatOverflowError(f"D({p}) exceeds 2^64-1")
    # Scaling a chain by a coprime factor preserves distinctness and divisibility.
    return FiniteChain([g * ps for g in gamma[1:]] + [ps])


def lcm_pair(a: int, b: int) -> int:
    check_nat(a, "a")
    check_nat(b, "b")
    return check_nat(a // gcd(a, b) * b, "lcm")


# -- serialization ---------------------------------------------------------


def to_json(chain: Iterable[int]) -> str:
    """JSON array of decimal strings (exact beyond 2^53)."""
    return json.dumps([str(v) for v in chain])


def from_json(text: str) -> FiniteChain:
    return validate(int(v) for v in json.loads(text))


def to_csv(chain: Iterable[int]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["value"])
    for v in chain:
        writer.writerow([v])
    return buf.getvalue()


def from_csv(text: str) -> FiniteChain:
    rows = csv.DictReader(io.StringIO(text))
    return validate(int(row["value"]) for row in rows)
