"""Prime and divisor primitives, the dense-divisor function F and its enumerations.

Every value handled here is a positive integer in the unsigned 64-bit range.
Python integers never wrap, so the range is enforced explicitly with
:func:`check_nat`; anything that would leave it raises
:class:`~divchain.errors.NatOverflowError`.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

import numpy as np
import sympy

from .errors import DomainError, NatOverflowError

MAX_NAT = 2**64 - 1

# Smallest-prime-factor table is grown on demand up to this size; larger
# inputs fall back to sympy.
SPF_CAP = 1 << 23


def check_nat(value: int, what: str = "value") -> int:
    if value < 1:
        raise DomainError(f"{what} must be a positive integer, got {value}")
    if value > MAX_NAT:
        raise NatOverflowError(f"{what} exceeds 2^64-1")
    return value


class _SpfTable:
    """Lazily grown smallest-prime-factor table (immutable snapshots)."""

    def __init__(self):
        self._lock = threading.Lock()
        self._spf = self._compute(1 << 12)

    @staticmethod
    def _compute(n: int) -> np.ndarray:
        spf = np.zeros(n + 1, dtype=np.int32)
        for p in range(2, isqrt(n) + 1):
            if spf[p] == 0:
                seg = spf[p * p :: p]
                seg[seg == 0] = p
        idx = np.nonzero(spf == 0)[0]
        spf[idx] = idx
        return spf

    def get(self, n: int) -> np.ndarray:
        spf = self._spf
        if n < len(spf):
            return spf
        with self._lock:
            if n >= len(self._spf):
                size = min(SPF_CAP, max(n, 2 * (len(self._spf) - 1)))
                self._spf = self._compute(size)
            return self._spf


_SPF = _SpfTable()


def sieve_primes(limit: int) -> list[int]:
    """All primes ``<= limit`` in increasing order."""
    if limit < 2:
        raise DomainError(f"sieve limit must be >= 2, got {limit}")
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.nonzero(flags)[0].tolist()


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n <= SPF_CAP:
        return int(_SPF.get(n)[n]) == n
    return bool(sympy.isprime(n))


def next_prime(p: int) -> int:
    """Smallest prime strictly greater than ``p``."""
    check_nat(p, "p")
    q = int(sympy.nextprime(p))
    if q > MAX_NAT:
        raise NatOverflowError(f"no prime after {p} fits in 64 bits")
    return q


def prec_prime(p: int) -> int:
    """Largest prime below the prime ``p``; by convention ``prec_prime(2) == 1``."""
    if not is_prime(p):
        raise DomainError(f"prec_prime expects a prime, got {p}")
    if p == 2:
        return 1
    return int(sympy.prevprime(p))


@dataclass(frozen=True)
class Factorization:
    """Prime factorization as ``(prime, exponent)`` pairs, primes increasing."""

    pairs: tuple[tuple[int, int], ...]

    @property
    def value(self) -> int:
        v = 1
        for q, a in self.pairs:
            v *= q**a
        return v

    @property
    def primes(self) -> list[int]:
        return [q for q, _ in self.pairs]


def factorize(n: int) -> Factorization:
    check_nat(n, "n")
    if n <= SPF_CAP:
        spf = _SPF.get(n)
        pairs: list[tuple[int, int]] = []
        while n > 1:
            q = int(spf[n])
            a = 0
            while n % q == 0:
                n //= q
                a += 1
            pairs.append((q, a))
        return Factorization(tuple(pairs))
    return Factorization(tuple(sorted((int(q), int(a)) for q, a in sympy.factorint(n).items())))


def p_plus(n: int) -> int:
    """Largest prime factor of ``n``, with ``p_plus(1) == 1``."""
    check_nat(n, "n")
    if n == 1:
        return 1
    return factorize(n).pairs[-1][0]


def p_minus(n: int) -> int:
    """Smallest prime factor of ``n >= 2``; undefined (error) at 1."""
    check_nat(n, "n")
    if n == 1:
        raise DomainError("smallest prime factor of 1 is undefined")
    if n <= SPF_CAP:
        return int(_SPF.get(n)[n])
    return factorize(n).pairs[0][0]


def is_squarefree(n: int) -> bool:
    return all(a == 1 for _, a in factorize(n).pairs)


def divisors(n: int) -> list[int]:
    """All divisors of ``n`` in increasing order."""
    divs = [1]
    for q, a in factorize(n).pairs:
        divs = [d * q**e for d in divs for e in range(a + 1)]
    return sorted(divs)


def big_f(n: int) -> int:
    """F(n) = max of d * P^-(d) over divisors d > 1 of n, and F(1) = 1.

    For a fixed smallest prime q_j the largest admissible divisor keeps
    q_j and every larger prime power, so F(n) is the maximum over j of
    q_j * prod_{i >= j} q_i^{a_i}.
    """
    pairs = factorize(n).pairs
    if not pairs:
        return 1
    best = 0
    tail = 1
    for q, a in reversed(pairs):
        tail *= q**a
        best = max(best, q * tail)
    if best > MAX_NAT:
        raise NatOverflowError(f"F({n}) exceeds 2^64-1")
    return best


def _as_fraction(y) -> Fraction:
    if isinstance(y, tuple):
        num, den = y
        y = Fraction(int(num), int(den))
    elif isinstance(y, float):
        raise DomainError("density y must be exact (int, Fraction or (num, den))")
    y = Fraction(y)
    if y <= 0:
        raise DomainError(f"density y must be positive, got {y}")
    return y


def is_y_dense(n: int, y) -> bool:
    """True iff F(n) <= y*n, compared exactly."""
    y = _as_fraction(y)
    return big_f(n) * y.denominator <= y.numerator * n


def dense_squarefree_set(bound: int) -> list[int]:
    """Increasing list of squarefree m with F(m) <= bound.

    Numbers are grown by appending a prime q above the current largest
    prime factor s, using F(s*q) = max(q^2, q*F(s)).
    """
    check_nat(bound, "bound")
    if bound < 4:
        return [1]
    primes = sieve_primes(isqrt(bound))
    out = [1]
    stack = [(1, 1, 0)]  # (m, F(m), index of the first admissible prime)
    while stack:
        m, fm, start = stack.pop()
        for i in range(start, len(primes)):
            q = primes[i]
            fq = max(q * q, q * fm)
            if fq > bound:
                break
            out.append(m * q)
            stack.append((m * q, fq, i + 1))
    out.sort()
    return out


def squarefree_smooth(bound: int, p: int) -> list[int]:
    """Increasing list of squarefree m <= bound with every prime factor <= p."""
    check_nat(bound, "bound")
    if p < 2:
        return [1]
    primes = sieve_primes(p)
    out = [1]
    stack = [(1, 0)]
    while stack:
        m, start = stack.pop()
        for i in range(start, len(primes)):
            mq = m * primes[i]
            if mq > bound:
                break
            out.append(mq)
            stack.append((mq, i + 1))
    out.sort()
    return out

