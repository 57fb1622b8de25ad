"""The chain-permutation f = 1 - C(2) - C(3) - C(5) - ... as a resumable stream.

C(p) is D(p) (the natural segment) unless p is the insertion prime q_k of
some k that no earlier segment supplies, in which case
C(p) = p*k^2, k, p'*p*k^2 followed by D(p), with p' the prime after p.
Insertion primes are the smallest primes satisfying q_k > q_{k-1} and
q_k >= k^2, which makes f fully deterministic.
"""

from __future__ import annotations

import json
import os
from collections import deque
from dataclasses import dataclass, field
from math import isqrt
from pathlib import Path
from typing import Iterator

from .arith import MAX_NAT, is_prime, is_squarefree, next_prime, p_plus, prec_prime
from .chain import FiniteChain, make_d
from .errors import DomainError, NatOverflowError, ScheduleError
from .gamma import GammaStore, default_store

NATURAL = "natural"
INSERTION = "insertion"
CHECKPOINT_HEADER = "FSTATE v1"


@dataclass
class Schedule:
    """Insertion decisions ``(k, q_k)`` for every k examined so far."""

    insertions: list[tuple[int, int]] = field(default_factory=list)
    q_prev: int = 1
    resolved_up_to: int = 0
    extra_values: set[int] = field(default_factory=set)

    def insertion_k(self, p: int) -> int | None:
        """The k inserted at prime ``p``, if any."""
        for k, q in reversed(self.insertions):
            if q == p:
                return k
            if q < p:
                return None
        return None


def _insertion_values(k: int, q: int) -> tuple[int, int, int]:
    head = q * k * k
    tail = next_prime(q) * head
    if tail > MAX_NAT:
        raise NatOverflowError(f"insertion of k={k} at q={q} exceeds 2^64-1")
    return head, k, tail


def in_natural_image(k: int, schedule: Schedule, store: GammaStore | None = None) -> bool:
    """True iff ``k`` is 1, was injected by an earlier insertion, or lies in some D(p).

    A value k >= 2 can only sit in D(p) for the p just below its largest
    prime factor, as P+(k) times an element of G(p).
    """
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    if k == 1 or k in schedule.extra_values:
        return True
    if not is_squarefree(k):
        return False
    top = p_plus(k)
    if top < 3:
        return False
    return (store or default_store()).contains(prec_prime(top), k // top)


def extend_schedule(schedule: Schedule, k_max: int, store: GammaStore | None = None) -> Schedule:
    """Resolve every k up to ``k_max`` in place and return the schedule."""
    for k in range(schedule.resolved_up_to + 1, k_max + 1):
        if not in_natural_image(k, schedule, store):
            q = next_prime(max(schedule.q_prev, k * k - 1))
            schedule.insertions.append((k, q))
            schedule.q_prev = q
            schedule.extra_values.update(_insertion_values(k, q))
        schedule.resolved_up_to = k
        # Values below k are never queried again.
        schedule.extra_values = {v for v in schedule.extra_values if v > k}
    return schedule


def resolve_schedule(k_max: int, store: GammaStore | None = None) -> Schedule:
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    return extend_schedule(Schedule(), k_max, store)


@dataclass(frozen=True)
class Segment:
    p: int
    kind: str
    k: int | None
    elems: FiniteChain

    def __len__(self) -> int:
        return len(self.elems)


def segment_for(p: int, schedule: Schedule, store: GammaStore | None = None) -> Segment:
    if not is_prime(p):
        raise DomainError(f"segments are indexed by primes, got {p}")
    if schedule.resolved_up_to < isqrt(p):
        raise ScheduleError(f"schedule resolved to k={schedule.resolved_up_to}, prime {p} needs {isqrt(p)}")
    gamma = (store or default_store()).get(p)
    d = make_d(gamma.chain, p)
    k = schedule.insertion_k(p)
    if k is None:
        return Segment(p, NATURAL, None, d)
    return Segment(p, INSERTION, k, FiniteChain(_insertion_values(k, p) + d.elems))


def iter_segments(p_max: int, store: GammaStore | None = None) -> Iterator[Segment]:
    """Segments C(2), C(3), ... for every prime up to ``p_max``."""
    schedule = Schedule()
    p = 2
    while p <= p_max:
        extend_schedule(schedule, isqrt(p) + 1, store)
        yield segment_for(p, schedule, store)
        p = next_prime(p)


# -- streaming ----------------------------------------------------------------


@dataclass
class StreamState:
    """Resumable position in the stream; ``last_value`` is f(position).

    ``position == 0`` means nothing has been emitted yet.
    """

    position: int = 0
    last_value: int = 0
    current_prime: int = 1
    buffer: deque = field(default_factory=deque)
    schedule: Schedule = field(default_factory=Schedule)

    def dumps(self) -> str:
        s = self.schedule
        lines = [
            CHECKPOINT_HEADER,
            f"position {self.position}",
            f"last_value {self.last_value}",
            f"current_prime {self.current_prime}",
            f"buffer {len(self.buffer)}",
            *map(str, self.buffer),
            f"q_prev {s.q_prev}",
            f"resolved_up_to {s.resolved_up_to}",
            f"insertions {len(s.insertions)}",
            *(f"{k} {q}" for k, q in s.insertions),
            f"extra_values {len(s.extra_values)}",
            *map(str, sorted(s.extra_values)),
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "StreamState":
        lines = iter(text.splitlines())

        def field_(name: str) -> int:
            line = next(lines, "")
            key, _, value = line.partition(" ")
            if key != name:
                raise DomainError(f"checkpoint: expected {name!r}, got {line!r}")
            return int(value)

        if next(lines, None) != CHECKPOINT_HEADER:
            raise DomainError("checkpoint: missing FSTATE v1 header")
        try:
            position = field_("position")
            last_value = field_("last_value")
            current_prime = field_("current_prime")
            buffer = deque([int(next(lines)) for _ in range(field_("buffer"))])
            q_prev = field_("q_prev")
            resolved = field_("resolved_up_to")
            insertions = []
            for _ in range(field_("insertions")):
                k, q = next(lines).split()
                insertions.append((int(k), int(q)))
            extra = {int(next(lines)) for _ in range(field_("extra_values"))}
        except (StopIteration, ValueError) as exc:
            raise DomainError(f"checkpoint: truncated or malformed ({exc})") from exc
        return cls(position, last_value, current_prime, buffer, Schedule(insertions, q_prev, resolved, extra))

    def save(self, path: str | os.PathLike) -> None:
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(self.dumps())
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "StreamState":
        return cls.loads(Path(path).read_text())


@dataclass(frozen=True)
class Term:
    n: int
    value: int
    segment_p: int
    kind: str

    def to_json(self) -> str:
        return json.dumps({"n": str(self.n), "f": str(self.value), "segment_p": str(self.segment_p), "kind": self.kind})


class FStream:
    """Sequential generator of f(1), f(2), ... that can be checkpointed.

    Iterating yields :class:`Term` records; the state is updated after
    every term, so ``state`` can be saved at any point and resumed later.
    """

    def __init__(self, state: StreamState | None = None, store: GammaStore | None = None, prefetch_jobs: int = 1):
        self.state = state or StreamState()
        self.store = store or default_store()
        self.prefetch_jobs = prefetch_jobs

    def _kind(self) -> str:
        p = self.state.current_prime
        if p == 1:
            return NATURAL
        return INSERTION if self.state.schedule.insertion_k(p) is not None else NATURAL

    def _load_next_segment(self) -> None:
        st = self.state
        p = next_prime(st.current_prime)
        extend_schedule(st.schedule, isqrt(p) + 1, self.store)
        if self.prefetch_jobs > 1:
            self._prefetch_from(p)
        if st.schedule.resolved_up_to < isqrt(p):
            raise ScheduleError(f"stream reached prime {p} ahead of the schedule")
        st.buffer = deque(segment_for(p, st.schedule, self.store).elems)
        st.current_prime = p

    def _prefetch_from(self, p: int) -> None:
        # Output order is unaffected; this only warms the store.
        primes = [p]
        while len(primes) < self.prefetch_jobs:
            primes.append(next_prime(primes[-1]))
        self.store.prefetch(primes, self.prefetch_jobs)

    def next_term(self) -> Term:
        st = self.state
        if st.position == 0:
            value = 1
        else:
            if not st.buffer:
                self._load_next_segment()
            value = st.buffer.popleft()
        st.position += 1
        st.last_value = value
        return Term(st.position, value, st.current_prime, self._kind())

    def __iter__(self) -> Iterator[Term]:
        while True:
            yield self.next_term()

    def take(self, n_terms: int) -> list[int]:
        return [self.next_term().value for _ in range(n_terms)]


def generate(n_terms: int, store: GammaStore | None = None) -> list[int]:
    """f(1), ..., f(n_terms)."""
    if n_terms < 1:
        raise DomainError("n_terms must be >= 1")
    return FStream(store=store).take(n_terms)


def position_of(value: int, horizon: int, store: GammaStore | None = None) -> int | None:
    """1-based n with f(n) == value among the first ``horizon`` terms, else None."""
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    stream = FStream(store=store)
    for _ in range(horizon):
        term = stream.next_term()
        if term.value == value:
            return term.n
    return None
