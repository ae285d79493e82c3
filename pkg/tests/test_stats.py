import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from scipy import stats as sps
from scipy.special import ndtr

from parkfun import stats, walks
from parkfun.errors import InvalidInputError, SizeLimitError
from parkfun.parking import oracle_joint_pmf


def oracle_kolmogorov(n, k):
    """Brute-force max CDF deviation from exact rational prefix sums."""
    pmf = oracle_joint_pmf(n, k).table
    best = Fraction(0)
    for point in product(range(1, n + 1), repeat=k):
        cdf = sum(p for key, p in pmf.items() if all(a <= b for a, b in zip(key, point)))
        best = max(best, abs(cdf - Fraction(math.prod(point), n**k)))
    return float(best)


def test_tv_examples():
    assert stats.tv_distance(2, 1, stats.EXACT_DP).value == pytest.approx(1 / 3)
    assert stats.tv_distance(2, 1, stats.EXACT_ENUM).value == pytest.approx(1 / 3)
    assert stats.tv_distance(1, 1).value == pytest.approx(0.0, abs=1e-15)


def test_kolmogorov_examples():
    assert stats.kolmogorov_distance(2, 1).value == pytest.approx(1 / 6)
    assert stats.kolmogorov_distance(1, 1).value == pytest.approx(0.0, abs=1e-15)
    assert stats.kolmogorov_distance(3, 2, stats.EXACT_ENUM).value == pytest.approx(oracle_kolmogorov(3, 2), abs=1e-15)


@pytest.mark.parametrize("n,k", [(n, k) for n in range(1, 7) for k in range(1, min(n, 2) + 1)])
def test_dp_and_enumeration_agree(n, k):
    for fn in (stats.tv_distance, stats.kolmogorov_distance):
        dp = fn(n, k, stats.EXACT_DP).value
        en = fn(n, k, stats.EXACT_ENUM).value
        assert dp == pytest.approx(en, abs=1e-12)


@pytest.mark.parametrize("n", range(3, 7))
def test_distance_orderings(n):
    tv = [stats.tv_distance(n, k, stats.EXACT_ENUM).value for k in (1, 2, 3)]
    dk = [stats.kolmogorov_distance(n, k, stats.EXACT_ENUM).value for k in (1, 2, 3)]
    assert tv[0] <= tv[1] <= tv[2]
    assert dk[0] <= dk[1] <= dk[2]
    assert all(d <= t + 1e-15 for d, t in zip(dk, tv))
    assert all(t <= 2 for t in tv) and all(d <= 1 for d in dk)


def test_method_guards():
    with pytest.raises(SizeLimitError):
        stats.tv_distance(201, 1, stats.EXACT_DP)
    with pytest.raises(SizeLimitError):
        stats.tv_distance(10, 3, stats.EXACT_DP)
    with pytest.raises(SizeLimitError):
        stats.kolmogorov_distance(7, 1, stats.EXACT_ENUM)
    with pytest.raises(InvalidInputError):
        stats.tv_distance(3, 4)
    with pytest.raises(InvalidInputError):
        stats.tv_distance(3, 1, "bogus")


def test_auto_method():
    assert stats.resolve_method(100, 2, stats.AUTO) == stats.EXACT_DP
    assert stats.resolve_method(6, 3, stats.AUTO) == stats.EXACT_ENUM
    assert stats.resolve_method(500, 1, stats.AUTO) == stats.MONTE_CARLO


def test_monte_carlo_close_to_exact():
    n = 4
    exact = stats.kolmogorov_distance(n, 2, stats.EXACT_ENUM).value
    mc = stats.kolmogorov_distance(n, 2, stats.MONTE_CARLO, samples=20_000, seed=3)
    assert mc.method == stats.MONTE_CARLO and mc.samples == 20_000
    assert abs(mc.value - exact) <= 4 * mc.stderr + 0.01
    tv_exact = stats.tv_distance(n, 1, stats.EXACT_ENUM).value
    tv_mc = stats.tv_distance(n, 1, stats.MONTE_CARLO, samples=20_000, seed=3)
    assert abs(tv_mc.value - tv_exact) <= tv_mc.stderr


def test_monte_carlo_random_grid_flagged():
    rep = stats.kolmogorov_distance(5, 3, stats.MONTE_CARLO, samples=2000, seed=1, grid_points=3000)
    assert rep.lower_bound
    exact = stats.kolmogorov_distance(5, 3, stats.EXACT_ENUM).value
    assert rep.value <= exact + 4 * rep.stderr + 0.01


def test_tv_scaling_report_column():
    rep = stats.tv_distance(50, 1)
    assert rep.sqrt_n_times_value == pytest.approx(math.sqrt(50) * rep.value)


# -- generic statistics ----------------------------------------------------


def test_ks_self_test_matches_scipy():
    x = np.random.default_rng(0).standard_normal(10_000)
    ks = stats.ks_statistic(x, ndtr)
    assert ks < 0.02
    assert ks == pytest.approx(sps.kstest(x, "norm").statistic, abs=1e-12)


def test_ks_empty():
    with pytest.raises(InvalidInputError):
        stats.ks_statistic([], ndtr)


def test_chi_square():
    assert stats.chi_square([10, 20, 30], [10, 20, 30]) == 0.0
    assert stats.chi_square([12, 8], [10, 10]) == pytest.approx(0.8)
    with pytest.raises(InvalidInputError):
        stats.chi_square([], [])
    with pytest.raises(InvalidInputError):
        stats.chi_square([1, 2], [2, 1])
    o, e = stats.pool_cells([1, 2, 10, 1], [2, 4, 10, 1])
    assert o.tolist() == [3, 11] and e.tolist() == [6, 11]
    assert stats.chi_square_pvalue([50, 50], [50, 50]) == pytest.approx(1.0)


# -- limit harnesses -------------------------------------------------------


def test_limit_reports_reproducible():
    a = stats.sum_clt_test(500, 10, 300, seed=9)
    b = stats.sum_clt_test(500, 10, 300, seed=9, threads=3)
    assert a == b
    assert 0 <= a.ks_distance <= 1


def test_sum_clt_k1_has_no_verdict():
    rep = stats.sum_clt_test(100, 1, 200)
    assert rep.passed is None and rep.threshold is None


def test_max_exponential_degenerate():
    rep = stats.max_exponential_test(1, 1, 100)
    # statistic is identically 0, an atom the continuous Exp(1) law does not have
    assert rep.ks_distance == pytest.approx(1.0)


def test_limit_sample_guard():
    with pytest.raises(InvalidInputError):
        stats.sum_clt_test(100, 5, 50)


def test_ks_shrinks_with_samples():
    n, k = 2000, 40
    small = stats.max_exponential_test(n, k, 500, seed=2).ks_distance
    large = stats.max_exponential_test(n, k, 4000, seed=2).ks_distance
    assert large <= small + 1.36 / math.sqrt(500)


def test_sampled_max_matches_exact_cdf():
    """Parking-side sampler against the exact symmetric CDF from the walk DP."""
    n, k, samples = 100, 50, 20_000
    _, maxes = stats.sample_sum_max(n, k, samples, seed=4)
    for a in (0, 1, 2, 5):
        p = walks.cdf_symmetric(n, k, a)
        emp = float(np.mean(maxes <= n - a))
        assert abs(emp - p) <= 4 * math.sqrt(p * (1 - p) / samples) + 1e-12


# -- tail comparison -------------------------------------------------------


def test_tail_a0_exact():
    rep = stats.tail_comparison(200, 0.5, 0, 500, approx_n=100)
    assert rep.lhs == 1.0 and rep.rhs == 1.0
    assert rep.lhs_stderr == 0.0 and rep.rhs_stderr == 0.0


def test_tail_c1_counts_top_height():
    samples, approx_n = 20_000, 200
    rhs, se = stats.tail_rhs(approx_n, 1.0, 1, samples, seed=8)
    p = walks.height_laws(approx_n)[approx_n - 1][1]
    assert abs(rhs - p) <= 4 * math.sqrt(p * (1 - p) / samples)
    assert rhs == pytest.approx(stats.tail_rhs_exact(approx_n, 1.0, 1), abs=4 * se)


def test_tail_rhs_matches_exact():
    for a in (1, 3):
        rhs, se = stats.tail_rhs(300, 0.5, a, 20_000, seed=12)
        assert abs(rhs - stats.tail_rhs_exact(300, 0.5, a)) <= 4 * se


def test_tail_lhs_matches_exact_cdf():
    n, c, samples = 120, 0.5, 20_000
    k = stats.tail_k(n, c)
    for a in (1, 2):
        lhs, se = stats.tail_lhs(n, c, a, samples, seed=13)
        assert abs(lhs - walks.cdf_symmetric(n, k, a)) <= 4 * se


def test_tail_argument_checks():
    with pytest.raises(InvalidInputError):
        stats.tail_comparison(100, 0.0, 1, 100)
    with pytest.raises(InvalidInputError):
        stats.tail_comparison(100, 1.5, 1, 100)
    with pytest.raises(InvalidInputError):
        stats.tail_comparison(100, 0.5, 21, 100)


def test_tail_auto_horizon_small():
    rep = stats.tail_comparison(400, 0.5, 1, 4000, seed=1, start_n=64)
    assert rep.approx_n >= 128
    assert 0 <= rep.rhs <= 1 and 0 <= rep.lhs <= 1
