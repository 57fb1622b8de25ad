import math

import pytest

from divchain.arith import sieve_primes
from divchain.errors import DomainError, GammaBuildError, GammaContractError
from divchain.gamma import (
    CACHE_TRAILER,
    GammaCache,
    GammaStore,
    allowed_set,
    build_gamma,
    certify,
    check_contract,
    construct,
    gamma_contains,
    gamma_length_stats,
    required_set,
)
from divchain.oracle import brute_dense_set, exhaustive_gamma


def test_required_set_examples():
    assert required_set(2) == [1, 2]
    assert required_set(3) == [1, 2, 3]
    assert required_set(5) == [1, 2, 3, 5, 6, 10]
    for p in (2, 3, 5, 7, 11):
        assert required_set(p) == brute_dense_set(p * p)


def test_allowed_set_examples():
    assert allowed_set(2) == [1, 2]
    assert allowed_set(3) == [1, 2, 3, 6]
    assert allowed_set(5) == [1, 2, 3, 5, 6, 10, 15, 30]


def test_sets_reject_composites():
    with pytest.raises(DomainError):
        required_set(9)
    with pytest.raises(DomainError):
        build_gamma(1)


@pytest.mark.parametrize("p", sieve_primes(400))
def test_required_within_allowed(p):
    assert set(required_set(p)) <= set(allowed_set(p))


def test_required_sets_grow_with_p():
    primes = sieve_primes(200)
    for p, q in zip(primes, primes[1:]):
        assert set(required_set(p)) <= set(required_set(q))


def test_small_chains():
    assert list(build_gamma(2).chain) == [1, 2]
    assert list(build_gamma(3).chain) == [1, 3, 6, 2]
    g5 = build_gamma(5)
    assert g5.chain[:2] == (1, 5) and g5.chain[-1] == 2
    assert exhaustive_gamma(3, census=True).count == 1


@pytest.mark.parametrize("strategy", ["blocks", "search"])
@pytest.mark.parametrize("p", sieve_primes(61))
def test_builders_meet_contract(strategy, p):
    elems = construct(p, strategy)
    assert check_contract(p, elems) == []
    assert len(elems) >= len(required_set(p))
    assert set(elems) <= set(allowed_set(p))


@pytest.mark.parametrize("p", [127, 251, 503])
def test_blocks_builder_larger_primes(p):
    assert check_contract(p, construct(p)) == []


def test_checker_catches_each_property():
    good = list(build_gamma(5).chain)
    assert check_contract(5, good) == []
    assert "P1" in check_contract(2, [1, 2, 6])
    assert "P2" in check_contract(5, [1, 10, 5, 15, 3, 6, 30, 2])
    assert "P3" in check_contract(3, [1, 3, 6, 12, 2])
    assert "P4" in check_contract(5, [1, 5, 10, 2])
    assert "CHAIN" in check_contract(5, [1, 5, 3, 6, 2, 10])
    with pytest.raises(GammaContractError) as info:
        certify(5, [1, 5, 10, 2])
    assert info.value.failed == ["P4"]


def test_search_budget_is_a_hard_error():
    with pytest.raises(GammaBuildError) as info:
        construct(97, "search", node_budget=5)
    assert info.value.p == 97


def test_unknown_strategy():
    with pytest.raises(DomainError):
        construct(5, "magic")


def test_deterministic_rebuild():
    store = GammaStore(max_in_memory=2)
    first = {p: store.get(p).chain for p in (5, 7, 11, 13)}
    store.evict()
    assert {p: store.get(p).chain for p in (5, 7, 11, 13)} == first
    assert construct(211) == construct(211)


def test_gamma_contains():
    assert gamma_contains(3, 6)
    assert not gamma_contains(3, 5)
    for p in (2, 3, 5, 7, 11):
        assert gamma_contains(p, 1)


def test_length_stats():
    rows = gamma_length_stats(7)
    assert [r[0] for r in rows] == [2, 3, 5, 7]
    assert rows[0][:2] == (2, 2)
    assert rows[1][:2] == (3, 4)
    assert rows[1][2] == pytest.approx(4 * math.log(3) / 9, rel=1e-12)
    assert rows[1][2] == pytest.approx(0.488, abs=1e-3)
    for p, n, _ in gamma_length_stats(60):
        assert n >= len(required_set(p))
    with pytest.raises(DomainError):
        gamma_length_stats(1)


def test_cache_file_format(tmp_path):
    store = GammaStore(cache_dir=tmp_path)
    store.get(3)
    text = (tmp_path / "blocks" / "gamma_0000003.txt").read_text()
    assert text == "GAMMA v1 p=3\n1\n3\n6\n2\nCHECKED=P1P2P3P4\n"
    warm = GammaStore(cache_dir=tmp_path)
    assert list(warm.get(3).chain) == [1, 3, 6, 2]
    assert (warm.builds, warm.loads) == (0, 1)


def test_cache_rejects_tampered_file(tmp_path):
    cache = GammaCache(tmp_path)
    cache.store(build_gamma(7))
    path = cache.path(7)
    lines = path.read_text().splitlines()
    lines.remove("10")  # drop a required element
    path.write_text("\n".join(lines) + "\n")
    assert cache.load(7) is None
    store = GammaStore(cache_dir=tmp_path)
    assert store.get(7).chain == build_gamma(7).chain
    assert store.builds == 1
    assert path.read_text().endswith(CACHE_TRAILER + "\n")


def test_cache_rejects_wrong_header(tmp_path):
    cache = GammaCache(tmp_path)
    cache.store(build_gamma(5))
    cache.path(5).write_text(cache.path(5).read_text().replace("p=5", "p=7"))
    assert cache.load(5) is None


def test_parallel_prefetch_matches_serial(tmp_path):
    primes = sieve_primes(60)
    par = GammaStore(cache_dir=tmp_path)
    par.prefetch(primes, jobs=3)
    serial = GammaStore()
    for p in primes:
        assert par.get(p).chain == serial.get(p).chain
    assert par.builds == len(primes)


def test_max_prime_limit():
    with pytest.raises(DomainError):
        build_gamma(101, max_prime=100)
