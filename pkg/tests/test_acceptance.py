"""Exit criteria. Each test records a single PASS/FAIL line (see conftest)."""

import io
import math
import time
from contextlib import redirect_stdout, redirect_stderr
from pathlib import Path

import pytest

from divchain.arith import big_f, dense_squarefree_set, divisors, sieve_primes
from divchain.chain import find_violation, lcm_pair
from divchain.cli import main
from divchain.gamma import GammaStore, build_gamma, check_contract
from divchain.analysis import baseline_naive, growth_report, length_bound_report
from divchain.oracle import brute_dense_set, exhaustive_gamma, recheck_prefix
from divchain.permutation import FStream, generate, iter_segments, resolve_schedule

GOLDEN = Path(__file__).parent / "golden" / "schedule_k12.txt"


@pytest.fixture(scope="module")
def prefix_2e5():
    t0 = time.perf_counter()
    values = generate(200_000)
    return values, time.perf_counter() - t0


def _cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue()


def test_paper_prefix(criterion):
    t0 = time.perf_counter()
    p3, p10 = generate(3), generate(10)
    rechecked = bool(recheck_prefix(10, p10))
    dt = time.perf_counter() - t0
    ok = p3 == [1, 6, 3] and p10 == [1, 6, 3, 15, 30, 10, 5, 20, 2, 140] and rechecked and dt < 1
    criterion("paper prefix 1-6-3 and forced 10-term prefix", ok, f"{dt:.3f}s")


def test_baseline(criterion):
    t0 = time.perf_counter()
    code, out = _cli("baseline", "--terms", "12")
    first12 = [int(v) for v in out.split()]
    res = baseline_naive(10_000)
    dt = time.perf_counter() - t0
    ok = (
        code == 0
        and first12 == [1, 2, 6, 3, 12, 4, 20, 5, 35, 7, 56, 8]
        and 0.2375 <= res.window_max <= 0.2625
        and dt < 5
    )
    criterion("baseline chain and limsup f(n)/n^2 ~ 1/4", ok, f"window max {res.window_max:.5f}, {dt:.2f}s")


def test_gamma_contract(criterion):
    t0 = time.perf_counter()
    failures = {p: check_contract(p, build_gamma(p).chain) for p in sieve_primes(31)}
    failures = {p: f for p, f in failures.items() if f}
    exhaustive = {p: exhaustive_gamma(p).found for p in sieve_primes(13)}
    g3 = list(build_gamma(3).chain)
    dt = time.perf_counter() - t0
    ok = not failures and all(exhaustive.values()) and g3 == [1, 3, 6, 2] and dt < 120
    criterion("gamma contract P1-P4 for p <= 31, existence for p <= 13", ok, f"{dt:.2f}s")


def test_dense_set_oracle_equivalence(criterion):
    t0 = time.perf_counter()
    bad = [b for b in range(1, 10_001) if dense_squarefree_set(b) != brute_dense_set(b)]
    dt = time.perf_counter() - t0
    criterion("dense squarefree set equals brute force for B <= 1e4", not bad and dt < 60, f"{dt:.2f}s")


def test_f_identity(criterion):
    failures = 0
    for n in range(1, 10_001):
        divs = divisors(n)
        num, den = 1, 1
        for a, b in zip(divs, divs[1:]):
            if b * den > num * a:
                num, den = b, a
        if big_f(n) * den != num * n:
            failures += 1
    criterion("F(n)/n equals max consecutive divisor ratio for n <= 1e4", failures == 0, f"{failures} failures")


def test_theorem_desk_scale(criterion, prefix_2e5):
    values, gen_time = prefix_2e5
    N = 100_000
    head = values[:N]
    valid = find_violation(head) is None and len(set(head)) == N
    g1 = growth_report(N, head)
    g2 = growth_report(2 * N, values)
    ratio_at_n = head[-1] / (N * math.log(N) ** 2)
    ok = (
        valid
        and g1.argmax_n <= 100
        and ratio_at_n < g1.max_ratio
        and g2.max_ratio == g1.max_ratio
        and gen_time < 600
    )
    detail = (f"max {g1.max_ratio:.4f} at n={g1.argmax_n}, ratio(N)={ratio_at_n:.4f}, "
              f"max at 2N {g2.max_ratio:.4f}, gen {gen_time:.1f}s")
    criterion("f(n)/(n ln^2 n) bounded: max at n <= 100, unchanged at 2N", ok, detail)


def test_corollary(criterion, prefix_2e5):
    values = prefix_2e5[0][:100_000]
    bad = sum(1 for a, b in zip(values, values[1:]) if lcm_pair(a, b) != max(a, b))
    criterion("lcm of every adjacent pair equals the larger term (1e5 prefix)", bad == 0, f"{bad} exceptions")


def test_coverage(criterion):
    t0 = time.perf_counter()
    store = GammaStore(max_in_memory=16)
    small = {1}
    prev = 1
    junctions_ok = True
    for seg in iter_segments(1009, store):
        junctions_ok &= seg.elems[0] % prev == 0 or prev % seg.elems[0] == 0
        prev = seg.elems[-1]
        small.update(v for v in seg.elems if v <= 1000)
    min_missing = next(m for m in range(1, 1002) if m not in small)
    dt = time.perf_counter() - t0
    ok = all(k in small for k in range(1, 32)) and min_missing > 31 and junctions_ok
    criterion("every k <= 31 present after primes <= 1009", ok, f"min_missing={min_missing}, {dt:.1f}s")


def test_schedule_regression(criterion):
    golden = [tuple(map(int, line.split())) for line in GOLDEN.read_text().splitlines()
              if line and not line.startswith("#")]
    got = resolve_schedule(12).insertions
    criterion("schedule for k <= 12 matches golden file", got == golden, f"{got}")


def test_length_bound(criterion):
    rows = [r for r in length_bound_report(101) if r.p >= 5]
    minima = [r.running_min for r in rows]
    last3 = minima[-3:]
    c = min(r.ratio for r in rows)
    stable = max(last3) <= 1.2 * min(last3)
    criterion("length*ln p/p^2 bounded below on 5 <= p <= 101", c > 0 and stable,
              f"min {c:.4f}, last running minima {[round(v, 4) for v in last3]}")


def test_determinism(criterion, tmp_path):
    cache = tmp_path / "cache"
    cold_out, warm_out = tmp_path / "cold.txt", tmp_path / "warm.txt"
    _cli("generate", "--terms", "10000", "--cache-dir", str(cache), "--out", str(cold_out))
    files = sorted((cache / "blocks").iterdir())
    _cli("generate", "--terms", "10000", "--cache-dir", str(cache), "--out", str(warm_out))
    warm_store = GammaStore(cache_dir=cache)
    FStream(store=warm_store).take(10_000)
    s_cold = resolve_schedule(200, GammaStore()).insertions
    s_warm = resolve_schedule(200, GammaStore(cache_dir=cache)).insertions
    ok = (
        cold_out.read_bytes() == warm_out.read_bytes()
        and len(files) > 0
        and warm_store.builds == 0
        and s_cold == s_warm
    )
    criterion("cold and warm cache runs are byte-identical", ok,
              f"{len(files)} cached chains, warm builds={warm_store.builds}")
