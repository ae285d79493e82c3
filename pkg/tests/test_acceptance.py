"""Exit criteria.  Each test logs one PASS/FAIL line, summarized at the end of the run."""

import math
import time
from collections import Counter

import numpy as np
import pytest

from parkfun import stats, walks
from parkfun.cayley import (
    CayleyTree,
    bfs_ranks,
    enumerate_trees,
    prufer_encode,
    sample_uniform_parking,
    tree_to_parking,
)
from parkfun.cli import run
from parkfun.parking import enumerate_parking, oracle_joint_pmf
from parkfun.streams import map_replicates
from parkfun.walks import WeightQuery


def test_01_counting(acceptance_log):
    start = time.perf_counter()
    counts = [len(enumerate_parking(n)) for n in range(1, 8)]
    elapsed = time.perf_counter() - start
    ok = counts == [1, 3, 16, 125, 1296, 16807, 262144] and elapsed < 10
    acceptance_log("1 counting", ok, f"counts={counts} in {elapsed:.1f}s")
    assert ok


def test_02_bijection(acceptance_log):
    start = time.perf_counter()
    ok = True
    for m in range(1, 6):
        image = [tree_to_parking(t).places for t in enumerate_trees(m)]
        ok &= len(set(image)) == len(image)
        ok &= sorted(image) == [p.places for p in enumerate_parking(m)]
    elapsed = time.perf_counter() - start
    ok &= elapsed < 30
    acceptance_log("2 bijection", ok, f"m<=5 in {elapsed:.1f}s")
    assert ok


def test_03_figure1(acceptance_log):
    t = CayleyTree.from_parent_map({1: 3, 2: 3, 3: 0, 4: 0, 5: 3, 6: 0, 7: 8, 8: 6, 9: 8})
    code = prufer_encode(t).code
    r5 = bfs_ranks(t).parent_rank[5]
    places = tree_to_parking(t).places
    ok = code == (8, 8, 6, 0, 3, 0, 3, 3) and r5 == 2 and places == (2, 2, 1, 1, 2, 1, 8, 4, 8)
    acceptance_log("3 figure-1 vectors", ok, f"code={code} r(5)={r5} pf={places}")
    assert ok


def test_04_joint_pmf_vs_oracle(acceptance_log):
    start = time.perf_counter()
    worst = 0.0
    for n in range(1, 7):
        for k in range(1, min(n, 3) + 1):
            for key, p in oracle_joint_pmf(n, k).table.items():
                worst = max(worst, abs(walks.joint_pmf(n, key) - float(p)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 60
    acceptance_log("4 joint pmf = oracle", ok, f"max abs err {worst:.2e} in {elapsed:.1f}s")
    assert ok


def test_05_conditioned_walk_identities(acceptance_log):
    e1 = walks.conditioned_expectation(2, WeightQuery(((1, 1),)))
    e2 = walks.conditioned_expectation(2, WeightQuery(((2, 1),)))
    f2 = walks.conditioned_expectation(2, WeightQuery(((1, 2),)))
    ok = abs(e1 - 4 / 3) <= 1e-12 and abs(e2 - 2 / 3) <= 1e-12 and abs(f2 - 2 / 3) <= 1e-12
    bad = [n for n in range(1, 201) if not np.all(np.diff(walks.step_means(n)[:n]) <= 0)]
    ok &= not bad
    acceptance_log("5 walk identities + monotone means", ok, f"E[X1]={e1!r} E[X2]={e2!r} E[(X1)_2]={f2!r} violations={bad}")
    assert ok


def test_06_inequality(acceptance_log):
    worst = math.inf
    for n in range(2, 31):
        m = walks.pair_moments(n)
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                rhs = walks.product_height_expectation(n, (i, j))
                worst = min(worst, rhs - i * j * m[i - 1, j - 1])
    ok = worst >= -1e-12
    acceptance_log("6 product inequality", ok, f"min slack {worst:.3e}")
    assert ok


def test_07_cycle_lemma(acceptance_log):
    ok = True
    for n in range(1, 5):
        for x in walks.multinomial_outcomes(n):
            ok &= sum(walks.is_excursion(walks.rotate(x, r)) for r in range(n + 1)) == 1
    n = 50
    draws = map_replicates(lambda rng: walks.sample_conditioned_increments(n, rng), 10_000, seed=0, tag=3)
    for x in draws:
        s = np.cumsum(x - 1)
        # rotation by r is an excursion iff the rotated partial sums stay >= 0 before the end
        valid = 0
        for r in range(n + 1):
            y = np.concatenate((x[r:], x[:r]))
            valid += walks.is_excursion(y)
        ok &= valid == 1 and s[-1] == -1
    acceptance_log("7 cycle lemma", ok, "exhaustive n<=4, 10^4 draws at n=50")
    assert ok


def test_08_sampler_exactness(acceptance_log):
    samples = 160_000
    pfs = map_replicates(lambda rng: sample_uniform_parking(3, rng).places, samples, seed=0)
    counts = Counter(pfs)
    outcomes = [p.places for p in enumerate_parking(3)]
    observed = [counts.get(o, 0) for o in outcomes]
    p_pf = stats.chi_square_pvalue(observed, [samples / 16] * 16)
    ok = sum(observed) == samples and p_pf > 1e-3

    n, m = 50, 100_000
    xs = np.array(map_replicates(lambda rng: walks.sample_excursion_array(n, rng), m, seed=0, tag=2))
    x1_obs = np.bincount(xs[:, 0], minlength=n + 1)
    o, e = stats.pool_cells(x1_obs, walks.increment_laws(n)[0] * m)
    p_x1 = stats.chi_square_pvalue(o, e)
    t = n // 2
    h_obs = np.bincount(xs[:, :t].sum(axis=1) - t, minlength=n - t + 1)
    o, e = stats.pool_cells(h_obs, walks.height_laws(n)[t] * m)
    p_h = stats.chi_square_pvalue(o, e)
    ok &= p_x1 > 1e-3 and p_h > 1e-3
    acceptance_log("8 sampler exactness", ok, f"p(parking n=3)={p_pf:.3g} p(X_1)={p_x1:.3g} p(S_25)={p_h:.3g}")
    assert ok


def test_09_tv_scaling(acceptance_log):
    start = time.perf_counter()
    scaled = [stats.tv_distance(n, 1, stats.EXACT_DP).sqrt_n_times_value for n in (50, 100, 200)]
    elapsed = time.perf_counter() - start
    ok = max(scaled) / min(scaled) <= 2 and elapsed < 300
    acceptance_log("9 sqrt(n) d_TV(1,n) band", ok, f"values={[round(v, 4) for v in scaled]} in {elapsed:.1f}s")
    assert ok


def test_10_sum_clt(acceptance_log):
    start = time.perf_counter()
    rep = stats.sum_clt_test(10**5, 300, 2000)
    elapsed = time.perf_counter() - start
    ok = rep.ks_distance < 0.05 and elapsed < 300
    acceptance_log("10 sum CLT", ok, f"KS={rep.ks_distance:.4f} (threshold 0.05) in {elapsed:.1f}s")
    assert ok


def test_11_max_exponential(acceptance_log):
    start = time.perf_counter()
    rep = stats.max_exponential_test(10**5, 1000, 2000)
    elapsed = time.perf_counter() - start
    ok = rep.ks_distance < 0.05 and elapsed < 300
    acceptance_log("11 max exponential", ok, f"KS={rep.ks_distance:.4f} (threshold 0.05) in {elapsed:.1f}s")
    assert ok


def test_12_tail(acceptance_log):
    start = time.perf_counter()
    zero = stats.tail_comparison(2 * 10**4, 0.5, 0, 2000)
    ok = zero.lhs == 1.0 and zero.rhs == 1.0
    details = [f"a=0 lhs={zero.lhs} rhs={zero.rhs}"]
    for a in (1, 2):
        rep = stats.tail_comparison(2 * 10**4, 0.5, a, 5 * 10**4)
        z = abs(rep.lhs - rep.rhs) / rep.combined_stderr
        ok &= z <= 3
        details.append(f"a={a} lhs={rep.lhs:.4f} rhs={rep.rhs:.4f} |diff|/se={z:.2f} n'={rep.approx_n}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 600
    acceptance_log("12 tail limit", ok, "; ".join(details) + f" in {elapsed:.0f}s")
    assert ok


REPRO_COMMANDS = [
    ["sample", "--n", "40", "--samples", "20", "--seed", "17"],
    ["tv", "--n", "5", "--k", "2", "--method", "monte-carlo", "--samples", "2000", "--seed", "3"],
    ["kolmogorov", "--n", "300", "--method", "monte-carlo", "--samples", "1000"],
    ["limit-sum", "--n", "2000", "--k", "40", "--samples", "300", "--seed", "5"],
    ["limit-max", "--n", "2000", "--k", "40", "--samples", "300", "--format", "json"],
    ["tail", "--n", "400", "--c", "0.5", "--a", "1", "--samples", "1000"],
    ["pmf", "--n", "6", "--k", "3"],
]


def test_13_reproducibility(acceptance_log, tmp_path):
    ok = True
    for idx, argv in enumerate(REPRO_COMMANDS):
        outputs = []
        path = tmp_path / f"out{idx}"
        for threads in ("1", "1", "3"):
            assert run(argv + ["--threads", threads, "--out", str(path)]) == 0
            outputs.append(path.read_bytes())
        ok &= outputs[0] == outputs[1] == outputs[2]
    acceptance_log("13 reproducibility", ok, f"{len(REPRO_COMMANDS)} commands x threads 1,1,3")
    assert ok
