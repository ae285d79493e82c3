"""Distances to i.i.d. uniform places, limit-theorem harnesses and the tail comparison.

``tv_distance`` is the plain sum of absolute pmf differences over ``[1, n]^k``,
i.e. twice the usual total-variation distance.  ``kolmogorov_distance`` is
the largest absolute deviation between the joint CDF of the first ``k``
places and ``i_1 ... i_k / n^k``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats as sps
from scipy.special import ndtr

from . import walks
from .cayley import sample_places
from .errors import InvalidInputError, SizeLimitError
from .parking import oracle_joint_pmf
from .streams import DEFAULT_SEED, TAG_EXCURSION, TAG_GRID, TAG_PARKING, map_replicates
from . import _kernels

EXACT_DP = "exact-dp"
EXACT_ENUM = "exact-enumeration"
MONTE_CARLO = "monte-carlo"
AUTO = "auto"
METHODS = (EXACT_DP, EXACT_ENUM, MONTE_CARLO, AUTO)

DP_MAX_N = 200
DP_MAX_K = 2
ENUM_MAX_N = 6
MC_TV_MAX_CELLS = 10**6
MC_FULL_GRID_MAX_K = 2
MC_RANDOM_GRID_POINTS = 10**5

KS_THRESHOLD = 0.05


@dataclass
class DistanceReport:
    kind: str  # "tv" or "kolmogorov"
    n: int
    k: int
    value: float
    method: str
    samples: int = 0
    stderr: float = 0.0
    # True when the value is a max over a random sub-grid (a lower bound on the full max)
    lower_bound: bool = False

    @property
    def sqrt_n_times_value(self) -> float:
        return math.sqrt(self.n) * self.value

    def as_dict(self) -> dict:
        d = asdict(self)
        d["sqrt_n_times_value"] = self.sqrt_n_times_value
        return d


@dataclass
class LimitTestReport:
    statistic: str  # "sum-clt" or "max-exponential"
    n: int
    k: int
    samples: int
    ks_distance: float
    passed: Optional[bool]
    threshold: Optional[float]

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class TailReport:
    c: float
    a: int
    n: int
    k: int
    samples: int
    lhs: float
    lhs_stderr: float
    rhs: float
    rhs_stderr: float
    approx_n: int

    @property
    def combined_stderr(self) -> float:
        return math.hypot(self.lhs_stderr, self.rhs_stderr)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["combined_stderr"] = self.combined_stderr
        return d


# ---------------------------------------------------------------------------
# generic statistics


def ks_statistic(sample: Sequence[float], cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """One-sample Kolmogorov-Smirnov sup distance between the empirical CDF and ``cdf``."""
    x = np.sort(np.asarray(sample, dtype=float))
    m = x.size
    if m == 0:
        raise InvalidInputError("empty sample")
    f = np.asarray(cdf(x), dtype=float)
    hi = np.arange(1, m + 1) / m - f
    lo = f - np.arange(m) / m
    return float(max(hi.max(), lo.max(), 0.0))


def chi_square(observed: Sequence[float], expected: Sequence[float]) -> float:
    """Pearson statistic; every expected count must be at least 5."""
    o = np.asarray(observed, dtype=float)
    e = np.asarray(expected, dtype=float)
    if o.size == 0 or o.shape != e.shape:
        raise InvalidInputError("observed and expected must be nonempty and equally shaped")
    if (e < 5).any():
        raise InvalidInputError("expected counts must be >= 5 per cell (pool cells first)")
    return float(((o - e) ** 2 / e).sum())


def pool_cells(observed, expected, min_expected: float = 5.0):
    """Merge adjacent cells (in order) until each pooled expected count reaches ``min_expected``."""
    o_out, e_out = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, expected):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            o_out.append(o_acc)
            e_out.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if e_out:
            o_out[-1] += o_acc
            e_out[-1] += e_acc
        else:
            o_out.append(o_acc)
            e_out.append(e_acc)
    return np.array(o_out), np.array(e_out)


def chi_square_pvalue(observed, expected, ddof: int = 0) -> float:
    """Upper-tail p-value of the Pearson statistic with ``cells - 1 - ddof`` degrees of freedom."""
    stat = chi_square(observed, expected)
    dof = len(observed) - 1 - ddof
    if dof < 1:
        raise InvalidInputError("need at least two cells")
    return float(sps.chi2.sf(stat, dof))


# ---------------------------------------------------------------------------
# exact laws


def _check_nk(n: int, k: int) -> None:
    if n < 1 or not 1 <= k <= n:
        raise InvalidInputError(f"need 1 <= k <= n, got n={n}, k={k}")


def resolve_method(n: int, k: int, method: str, kind: str = "tv") -> str:
    if method not in METHODS:
        raise InvalidInputError(f"unknown method {method!r}")
    if method != AUTO:
        return method
    if k <= DP_MAX_K and n <= DP_MAX_N:
        return EXACT_DP
    if n <= ENUM_MAX_N:
        return EXACT_ENUM
    return MONTE_CARLO


def exact_pmf_array(n: int, k: int, method: str = EXACT_DP) -> np.ndarray:
    """Joint pmf of the first ``k`` places as an array of shape ``(n,) * k``."""
    _check_nk(n, k)
    if method == EXACT_DP:
        if k > DP_MAX_K or n > DP_MAX_N:
            raise SizeLimitError(f"exact-dp needs k <= {DP_MAX_K} and n <= {DP_MAX_N}")
        if k == 1:
            return walks.step_means(n)[:n] / n
        return walks.pair_moments(n) / (n * (n - 1))
    if method == EXACT_ENUM:
        if n > ENUM_MAX_N:
            raise SizeLimitError(f"exact-enumeration needs n <= {ENUM_MAX_N}")
        pmf = oracle_joint_pmf(n, k)
        arr = np.zeros((n,) * k)
        for key, p in pmf.table.items():
            arr[tuple(i - 1 for i in key)] = float(p)
        return arr
    raise InvalidInputError(f"{method!r} is not an exact method")


def _uniform_cdf_grid(n: int, k: int) -> np.ndarray:
    g = np.arange(1, n + 1) / n
    out = g
    for _ in range(k - 1):
        out = np.multiply.outer(out, g)
    return out


def _cdf_from_pmf(pmf: np.ndarray) -> np.ndarray:
    cdf = pmf
    for ax in range(pmf.ndim):
        cdf = np.cumsum(cdf, axis=ax)
    return cdf


# ---------------------------------------------------------------------------
# Monte Carlo prefixes


def sample_prefixes(n: int, k: int, samples: int, seed: int = DEFAULT_SEED, threads: int = 1) -> np.ndarray:
    """First ``k`` places of ``samples`` uniform parking functions, shape ``(samples, k)``."""
    _check_nk(n, k)
    rows = map_replicates(lambda rng: sample_places(n, rng)[:k].copy(), samples, seed, TAG_PARKING, threads)
    return np.array(rows, dtype=np.int64).reshape(samples, k)


def sample_sum_max(n: int, k: int, samples: int, seed: int = DEFAULT_SEED, threads: int = 1):
    """Sum and max of the first ``k`` places for each replicate."""
    _check_nk(n, k)
    rows = map_replicates(
        lambda rng: _kernels.prefix_sum_max(sample_places(n, rng), k), samples, seed, TAG_PARKING, threads
    )
    arr = np.array(rows, dtype=np.int64).reshape(samples, 2)
    return arr[:, 0], arr[:, 1]


def _mc_pmf(prefixes: np.ndarray, n: int) -> np.ndarray:
    samples, k = prefixes.shape
    flat = np.ravel_multi_index(tuple((prefixes - 1).T), (n,) * k)
    return np.bincount(flat, minlength=n**k).reshape((n,) * k) / samples


# ---------------------------------------------------------------------------
# distances


def tv_distance(
    n: int,
    k: int,
    method: str = AUTO,
    samples: int = 0,
    seed: int = DEFAULT_SEED,
    threads: int = 1,
) -> DistanceReport:
    """Sum over ``[1, n]^k`` of ``|P(first k places = i) - n^-k|``.

    The Monte Carlo estimate is the plug-in sum over empirical cell
    frequencies; it is biased upward and its ``stderr`` is the
    triangle-inequality bound ``sum_c sqrt(p_c (1 - p_c) / N)``.
    """
    _check_nk(n, k)
    method = resolve_method(n, k, method)
    if method == MONTE_CARLO:
        if n**k > MC_TV_MAX_CELLS:
            raise SizeLimitError(f"monte-carlo tv needs n^k <= {MC_TV_MAX_CELLS}")
        if samples < 1:
            raise InvalidInputError("monte-carlo needs samples >= 1")
        p = _mc_pmf(sample_prefixes(n, k, samples, seed, threads), n)
        value = float(np.abs(p - n**-k).sum())
        se = float(np.sqrt(p * (1 - p) / samples).sum())
        return DistanceReport("tv", n, k, value, method, samples, se)
    pmf = exact_pmf_array(n, k, method)
    return DistanceReport("tv", n, k, float(np.abs(pmf - float(n) ** -k).sum()), method)


def kolmogorov_distance(
    n: int,
    k: int,
    method: str = AUTO,
    samples: int = 0,
    seed: int = DEFAULT_SEED,
    threads: int = 1,
    grid_points: int = MC_RANDOM_GRID_POINTS,
) -> DistanceReport:
    """Max over ``i`` in ``[1, n]^k`` of ``|P(first k places <= i) - i_1 ... i_k / n^k|``.

    Monte Carlo scans the full grid for ``k <= 2``; for larger ``k`` it scans
    ``grid_points`` random grid points and flags the value as a lower bound.
    ``stderr`` is the binomial standard error of the empirical CDF at the
    maximizing point.
    """
    _check_nk(n, k)
    method = resolve_method(n, k, method, kind="kolmogorov")
    if method != MONTE_CARLO:
        cdf = _cdf_from_pmf(exact_pmf_array(n, k, method))
        return DistanceReport("kolmogorov", n, k, float(np.abs(cdf - _uniform_cdf_grid(n, k)).max()), method)

    if samples < 1:
        raise InvalidInputError("monte-carlo needs samples >= 1")
    pref = sample_prefixes(n, k, samples, seed, threads)
    if k <= MC_FULL_GRID_MAX_K:
        if n**k > 4 * 10**7:
            raise SizeLimitError("full-grid scan too large")
        ecdf = _cdf_from_pmf(_mc_pmf(pref, n))
        dev = np.abs(ecdf - _uniform_cdf_grid(n, k))
        idx = np.unravel_index(int(np.argmax(dev)), dev.shape)
        f = float(ecdf[idx])
        return DistanceReport(
            "kolmogorov", n, k, float(dev[idx]), method, samples, math.sqrt(f * (1 - f) / samples)
        )
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=int(seed), spawn_key=(TAG_GRID,))))
    pts = rng.integers(1, n + 1, size=(grid_points, k))
    best, best_f = -1.0, 0.0
    for lo in range(0, grid_points, 2000):
        chunk = pts[lo : lo + 2000]
        ecdf = (pref[:, None, :] <= chunk[None, :, :]).all(axis=2).mean(axis=0)
        dev = np.abs(ecdf - np.prod(chunk / n, axis=1))
        j = int(np.argmax(dev))
        if dev[j] > best:
            best, best_f = float(dev[j]), float(ecdf[j])
    return DistanceReport(
        "kolmogorov", n, k, best, method, samples, math.sqrt(best_f * (1 - best_f) / samples), lower_bound=True
    )


# ---------------------------------------------------------------------------
# limit theorems


def _check_limit_args(n: int, k: int, samples: int) -> None:
    _check_nk(n, k)
    if samples < 100:
        raise InvalidInputError("samples must be >= 100")


def sum_clt_test(
    n: int,
    k: int,
    samples: int,
    seed: int = DEFAULT_SEED,
    threads: int = 1,
    threshold: float = KS_THRESHOLD,
) -> LimitTestReport:
    """KS distance of ``sqrt(12/k) * (sum_{j<=k} pi(j) / n - k/2)`` to N(0, 1).

    For ``k = 1`` the statistic is not expected to be normal; the report then
    carries no pass verdict.
    """
    _check_limit_args(n, k, samples)
    sums, _ = sample_sum_max(n, k, samples, seed, threads)
    stat = math.sqrt(12.0 / k) * (sums / n - k / 2.0)
    ks = ks_statistic(stat, ndtr)
    if k == 1:
        return LimitTestReport("sum-clt", n, k, samples, ks, None, None)
    return LimitTestReport("sum-clt", n, k, samples, ks, ks < threshold, threshold)


def max_exponential_test(
    n: int,
    k: int,
    samples: int,
    seed: int = DEFAULT_SEED,
    threads: int = 1,
    threshold: float = KS_THRESHOLD,
) -> LimitTestReport:
    """KS distance of ``k * (1 - max_{j<=k} pi(j) / n)`` to Exp(1)."""
    _check_limit_args(n, k, samples)
    _, maxes = sample_sum_max(n, k, samples, seed, threads)
    stat = k * (1.0 - maxes / n)
    ks = ks_statistic(stat, lambda x: -np.expm1(-np.maximum(x, 0.0)))
    return LimitTestReport("max-exponential", n, k, samples, ks, ks < threshold, threshold)


# ---------------------------------------------------------------------------
# tail of the maximum when k ~ c n


def tail_k(n: int, c: float) -> int:
    return int(math.floor(c * n + 0.5))


def tail_lhs(n: int, c: float, a: int, samples: int, seed: int = DEFAULT_SEED, threads: int = 1):
    """Empirical ``P(n - max_{j<=k} pi(j) >= a)`` with ``k = round(c n)`` and its stderr."""
    k = tail_k(n, c)
    _, maxes = sample_sum_max(n, k, samples, seed, threads)
    p = float(np.mean(n - maxes >= a))
    return p, math.sqrt(p * (1 - p) / samples)


def tail_rhs(approx_n: int, c: float, a: int, samples: int, seed: int = DEFAULT_SEED, threads: int = 1):
    """Mean of ``(1-c)^(a - S_{n'-a})`` over excursions of horizon ``n'`` and its stderr.

    ``S_{n'-a} = a - (X_{n'-a+1} + ... + X_{n'+1})`` only involves the last
    ``a + 1`` increments.
    """
    if a > approx_n - 1:
        raise InvalidInputError("approximation horizon must exceed a")

    def one(rng):
        x = walks.sample_excursion_array(approx_n, rng)
        return a - int(x[approx_n - a :].sum())

    s = np.array(map_replicates(one, samples, seed, TAG_EXCURSION, threads), dtype=float)
    vals = np.power(1.0 - c, a - s)
    se = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return float(vals.mean()), se


def tail_rhs_exact(approx_n: int, c: float, a: int) -> float:
    """Exact ``E_{n'}[(1-c)^(a - S_{n'-a})]`` from the height law at time ``n' - a``."""
    law = walks.height_laws(approx_n)[approx_n - a]
    h = np.arange(law.size)
    return float((law * np.power(1.0 - c, a - h)).sum())


def tail_comparison(
    n: int,
    c: float,
    a: int,
    samples: int,
    seed: int = DEFAULT_SEED,
    threads: int = 1,
    approx_n: Optional[int] = None,
    start_n: int = 256,
    max_approx_n: int = 1 << 15,
) -> TailReport:
    """Compare the parking-side tail of the max with its walk-side limit.

    Without an explicit ``approx_n`` the excursion horizon starts at
    ``start_n`` and doubles until the estimate moves by at most one standard
    error.
    """
    if not 0 < c <= 1:
        raise InvalidInputError(f"c must lie in (0, 1], got {c}")
    if not 0 <= a <= 20:
        raise InvalidInputError(f"a must lie in [0, 20], got {a}")
    k = tail_k(n, c)
    if not 1 <= k <= n:
        raise InvalidInputError(f"k = round(c n) = {k} outside [1, {n}]")
    if samples < 2:
        raise InvalidInputError("samples must be >= 2")
    lhs, lhs_se = tail_lhs(n, c, a, samples, seed, threads)
    if approx_n is not None:
        rhs, rhs_se = tail_rhs(approx_n, c, a, samples, seed, threads)
    else:
        approx_n = max(start_n, 4 * (a + 1))
        rhs, rhs_se = tail_rhs(approx_n, c, a, samples, seed, threads)
        while approx_n < max_approx_n:
            nxt, nxt_se = tail_rhs(2 * approx_n, c, a, samples, seed, threads)
            moved = abs(nxt - rhs)
            approx_n, rhs, prev_se, rhs_se = 2 * approx_n, nxt, rhs_se, nxt_se
            if moved <= max(prev_se, nxt_se):
                break
    return TailReport(c, a, n, k, samples, lhs, lhs_se, rhs, rhs_se, approx_n)
