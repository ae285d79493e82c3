"""Poisson(1) random walk conditioned to first hit -1 at time n + 1.

With ``X_i`` i.i.d. Poisson(1) and ``S_m = sum_{i<=m} (X_i - 1)``, the
conditioned law ``P_n`` is that of the excursion ``S_m >= 0`` for ``m <= n``,
``S_{n+1} = -1``.  Expectations under ``P_n`` are computed by a forward
transfer over (time, height); the same law is sampled exactly by rotating a
multinomial vector with the cycle lemma.

Step weights are ``1/x!``; the common factor ``e^{-(n+1)}`` is dropped because
every conditioned quantity is a ratio of path sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import InvalidInputError, SizeLimitError

HeightFactor = Callable[[np.ndarray], np.ndarray]

EXCURSION_ENUM_MAX_N = 8


def poisson_weights(size: int) -> np.ndarray:
    """``1/x!`` for ``x = 0..size-1`` (unnormalized Poisson(1) pmf)."""
    return np.exp(-gammaln(np.arange(size) + 1.0))


def falling_factorial(x, m: int):
    """``x (x-1) ... (x-m+1)``; zero whenever ``m`` exceeds the nonnegative integer ``x``."""
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    for j in range(m):
        out = out * np.maximum(x - j, 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class WeightQuery:
    """Distinct step indices ``j_s`` with multiplicities ``m_s``."""

    entries: tuple[tuple[int, int], ...]

    def __post_init__(self):
        entries = tuple(sorted((int(j), int(m)) for j, m in self.entries))
        idx = [j for j, _ in entries]
        if len(set(idx)) != len(idx):
            raise InvalidInputError("query indices must be distinct")
        if any(m < 1 for _, m in entries):
            raise InvalidInputError("multiplicities must be >= 1")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_indices(cls, indices: Iterable[int]) -> "WeightQuery":
        counts: dict[int, int] = {}
        for i in indices:
            counts[int(i)] = counts.get(int(i), 0) + 1
        return cls(tuple(counts.items()))

    @property
    def k(self) -> int:
        return sum(m for _, m in self.entries)

    def validate(self, n: int) -> None:
        for j, _ in self.entries:
            if not 1 <= j <= n + 1:
                raise InvalidInputError(f"query index {j} outside [1, {n + 1}]")


@dataclass(frozen=True)
class ExcursionPath:
    """Increments ``(X_1, ..., X_{n+1})`` of an excursion."""

    x: tuple[int, ...]

    def __post_init__(self):
        x = tuple(int(v) for v in self.x)
        object.__setattr__(self, "x", x)
        if not is_excursion(x):
            raise InvalidInputError(f"not an excursion: {x}")

    @property
    def n(self) -> int:
        return len(self.x) - 1

    def heights(self) -> np.ndarray:
        """``(S_1, ..., S_{n+1})``."""
        return np.cumsum(np.asarray(self.x) - 1)


def is_excursion(x: Sequence[int]) -> bool:
    x = np.asarray(x, dtype=np.int64)
    if x.size < 1 or (x < 0).any():
        return False
    s = np.cumsum(x - 1)
    return bool(s[-1] == -1 and (s[:-1] >= 0).all())


@dataclass
class DpTable:
    """Forward transfer table.

    ``rows[t]`` holds path weights at time ``t`` over heights ``0..n-t`` (for
    ``t <= n``), scaled by ``exp(-log_scale[t])``; ``rows[n+1]`` is the single
    terminal cell at height -1.
    """

    n: int
    rows: list
    log_scale: np.ndarray

    def value(self, t: int, h: int) -> float:
        """Path-weight sum at (t, h), without the dropped ``e^{-(n+1)}`` factor."""
        if t == self.n + 1:
            if h != -1:
                return 0.0
            return float(self.rows[t][0] * math.exp(self.log_scale[t]))
        if not 0 <= h < len(self.rows[t]):
            return 0.0
        return float(self.rows[t][h] * math.exp(self.log_scale[t]))

    @property
    def log_terminal(self) -> float:
        """Log of the terminal weight sum (``-inf`` if no path survives)."""
        v = self.rows[self.n + 1][0]
        return float(self.log_scale[self.n + 1] + math.log(v)) if v > 0 else -math.inf

    def terminal_mass(self) -> float:
        """Terminal mass including the Poisson normalization ``e^{-(n+1)}``."""
        return math.exp(self.log_terminal - (self.n + 1))


def _check_n(n: int) -> None:
    if int(n) < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")


def _forward_step(row: np.ndarray, w: np.ndarray, t: int, n: int) -> np.ndarray:
    # row: heights 0..n-t+1 at time t-1; new height = h + x - 1.
    if t == n + 1:
        return row[:1] * w[0]
    conv = np.convolve(row, w[: n - t + 2])
    return conv[1 : n - t + 2].copy()


def _normalize(row: np.ndarray) -> tuple[np.ndarray, float]:
    mx = row.max() if row.size else 0.0
    if mx > 0:
        return row / mx, math.log(mx)
    return row, 0.0


def _forward(
    n: int,
    step_weights: Optional[Mapping[int, np.ndarray]] = None,
    height_factors: Optional[Mapping[int, HeightFactor]] = None,
) -> DpTable:
    step_weights = step_weights or {}
    height_factors = height_factors or {}
    base = poisson_weights(n + 2)
    rows = [np.ones(1)]
    logs = np.zeros(n + 2)
    for t in range(1, n + 2):
        row = _forward_step(rows[-1], step_weights.get(t, base), t, n)
        if t in height_factors:
            h = np.arange(row.size) if t <= n else np.array([-1])
            row = row * height_factors[t](h)
        row, lg = _normalize(row)
        rows.append(row)
        logs[t] = logs[t - 1] + lg
    return DpTable(n, rows, logs)


def _query_weights(n: int, q: Optional[WeightQuery]) -> dict[int, np.ndarray]:
    if q is None:
        return {}
    q.validate(n)
    base = poisson_weights(n + 2)
    xs = np.arange(n + 2)
    return {j: base * falling_factorial(xs, m) for j, m in q.entries}


def dp_build(n: int, q: Optional[WeightQuery] = None) -> DpTable:
    """Forward table where step ``j_s`` carries the extra factor ``(x)_{m_s}``."""
    _check_n(n)
    return _forward(n, _query_weights(n, q))


def _ratio(table: DpTable, reference: DpTable) -> float:
    if table.log_terminal == -math.inf:
        return 0.0
    return math.exp(table.log_terminal - reference.log_terminal)


def conditioned_expectation(n: int, q: WeightQuery) -> float:
    """``E_n[prod_s (X_{j_s})_{m_s}]``."""
    return _ratio(dp_build(n, q), dp_build(n))


def joint_pmf(n: int, indices: Sequence[int]) -> float:
    """``P(pi(1) = i_1, ..., pi(k) = i_k)`` for a uniform parking function of size ``n``.

    Equals ``(n-k)!/n! * E_n[prod_s (X_{j_s})_{m_s}]`` where ``j_s`` are the
    distinct values among the indices and ``m_s`` their multiplicities.
    """
    _check_n(n)
    indices = [int(i) for i in indices]
    k = len(indices)
    if not 1 <= k <= n:
        raise InvalidInputError(f"need 1 <= k <= n, got k={k}, n={n}")
    if any(not 1 <= i <= n for i in indices):
        raise InvalidInputError(f"indices must lie in [1, {n}]: {indices}")
    table = dp_build(n, WeightQuery.from_indices(indices))
    if table.log_terminal == -math.inf:
        return 0.0
    log_p = table.log_terminal - dp_build(n).log_terminal + gammaln(n - k + 1) - gammaln(n + 1)
    return float(math.exp(log_p))


def product_height_expectation(n: int, indices: Sequence[int]) -> float:
    """``E_n[prod_j (S_{i_j} + i_j)]``; ``S_i + i`` counts the steps ``X_1 + ... + X_i``."""
    _check_n(n)
    counts: dict[int, int] = {}
    for i in indices:
        i = int(i)
        if not 1 <= i <= n:
            raise InvalidInputError(f"indices must lie in [1, {n}]: {list(indices)}")
        counts[i] = counts.get(i, 0) + 1
    factors = {t: (lambda h, t=t, m=m: (h + t).astype(float) ** m) for t, m in counts.items()}
    return _ratio(_forward(n, height_factors=factors), dp_build(n))


def _log_falling(x: np.ndarray, k: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, -np.inf)
    ok = x >= k
    out[ok] = gammaln(x[ok] + 1) - gammaln(x[ok] - k + 1)
    return out


def cdf_symmetric(n: int, k: int, a: int) -> float:
    """``P(pi(1), ..., pi(k) <= n - a) = (n-k)!/n! * E_n[(S_{n-a} + n - a)_k]``."""
    _check_n(n)
    if not 1 <= k <= n:
        raise InvalidInputError(f"need 1 <= k <= n, got k={k}")
    if not 0 <= a <= n - 1:
        raise InvalidInputError(f"need 0 <= a <= n-1, got a={a}")
    t = n - a
    log_norm = gammaln(n + 1) - gammaln(n - k + 1)

    def factor(h):
        return np.exp(_log_falling(h + t, k) - log_norm)

    return _ratio(_forward(n, height_factors={t: factor}), dp_build(n))


# ---------------------------------------------------------------------------
# forward-backward marginals


def _backward(n: int) -> tuple[list, np.ndarray]:
    """Backward rows padded to heights ``-1..n-t`` at time ``t`` (``B[t][0]`` is height -1).

    ``B[t][h + 1]`` is the weight of completing an excursion from height h at time t.
    """
    w = poisson_weights(n + 2)
    rows = [None] * (n + 2)
    logs = np.zeros(n + 2)
    rows[n + 1] = np.array([1.0])
    for t in range(n, -1, -1):
        nxt = rows[t + 1]  # heights -1..n-t-1
        # B_t[h] = sum_x w[x] nxt[h + x], h = 0..n-t
        conv = np.convolve(nxt[::-1], w[: nxt.size])
        cur = conv[: n - t + 1][::-1]
        cur, lg = _normalize(cur)
        logs[t] = logs[t + 1] + lg
        rows[t] = np.concatenate(([0.0], cur))
    return rows, logs


def _weighted_back(nxt: np.ndarray, w: np.ndarray, width: int) -> np.ndarray:
    # sum_x w[x] nxt[h + x] for h = 0..width-1 where nxt is padded (index = height + 1)
    conv = np.convolve(nxt[::-1], w[: nxt.size])
    out = np.zeros(width)
    m = min(width, nxt.size)
    out[:m] = conv[nxt.size - 1 - np.arange(m)]
    return out


def increment_laws(n: int) -> np.ndarray:
    """Matrix ``L`` with ``L[i-1, x] = P_n(X_i = x)`` for ``i = 1..n+1``, ``x = 0..n``."""
    _check_n(n)
    fwd = _forward(n)
    back, _ = _backward(n)
    w = poisson_weights(n + 2)
    out = np.zeros((n + 1, n + 1))
    for i in range(1, n + 2):
        f = fwd.rows[i - 1]
        b = back[i]
        c = np.convolve(f[::-1], b)[f.size - 1 : f.size - 1 + b.size]
        law = w[: b.size] * c
        out[i - 1, : law.size] = law[: n + 1] / law.sum()
    return out


def step_means(n: int) -> np.ndarray:
    """``E_n[X_i]`` for ``i = 1..n+1``."""
    laws = increment_laws(n)
    return laws @ np.arange(n + 1)


def height_laws(n: int) -> list[np.ndarray]:
    """``P_n(S_t = h)`` for ``t = 0..n`` as arrays over ``h = 0..n-t``."""
    _check_n(n)
    fwd = _forward(n)
    back, _ = _backward(n)
    out = []
    for t in range(n + 1):
        p = np.zeros(n - t + 1)
        f = fwd.rows[t]
        p[: f.size] = f * back[t][1 : f.size + 1]
        out.append(p / p.sum())
    return out


def pair_moments(n: int) -> np.ndarray:
    """Matrix ``M`` over steps ``1..n``: ``M[i-1, j-1] = E_n[X_i X_j]`` for ``i != j``
    and ``M[j-1, j-1] = E_n[(X_j)_2]``."""
    _check_n(n)
    fwd = _forward(n)
    back, blogs = _backward(n)
    w = poisson_weights(n + 2)
    xs = np.arange(n + 2, dtype=float)
    wx = w * xs
    wxx = w * xs * np.maximum(xs - 1, 0)
    log_z = fwd.log_terminal
    # bx[j]: heights at time j-1, weight x at step j
    bx = {}
    for j in range(1, n + 1):
        width = n - j + 2
        bx[j] = _weighted_back(back[j], wx, width)
    m = np.zeros((n, n))
    for j in range(1, n + 1):
        f = fwd.rows[j - 1]
        bxx = _weighted_back(back[j], wxx, f.size)
        m[j - 1, j - 1] = np.exp(fwd.log_scale[j - 1] + blogs[j] - log_z) * (f @ bxx)
    for i in range(1, n):
        g = _forward_step(fwd.rows[i - 1], wx, i, n)
        g, lg = _normalize(g)
        log_g = fwd.log_scale[i - 1] + lg
        for j in range(i + 1, n + 1):
            # g: heights at time j-1
            val = g @ bx[j][: g.size]
            m[i - 1, j - 1] = m[j - 1, i - 1] = np.exp(log_g + blogs[j] - log_z) * val
            if j < n:
                g = _forward_step(g, w, j, n)
                g, lg = _normalize(g)
                log_g += lg
    return m


# ---------------------------------------------------------------------------
# sampling


def sample_conditioned_increments(n: int, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. Poisson(1) vector of length ``n + 1`` conditioned on summing to ``n``.

    This conditional law is Multinomial(n; uniform over n + 1 cells), drawn
    here by dropping ``n`` balls into uniform cells.
    """
    _check_n(n)
    return np.bincount(rng.integers(0, n + 1, size=n), minlength=n + 1).astype(np.int64)


def cycle_rotation(xs: Sequence[int]) -> int:
    """Offset ``rho`` such that ``xs[rho:] + xs[:rho]`` is an excursion.

    The increments ``x - 1`` are at least -1 and sum to -1, so exactly one
    rotation works: start right after the first time the walk reaches its
    minimum.
    """
    x = np.asarray(xs, dtype=np.int64)
    if x.size < 1 or (x < 0).any():
        raise InvalidInputError("entries must be nonnegative integers")
    s = np.cumsum(x - 1)
    if s[-1] != -1:
        raise InvalidInputError(f"increments must sum to -1, got {int(s[-1])}")
    return int((np.argmin(s) + 1) % x.size)


def rotate(xs: Sequence[int], rho: int) -> np.ndarray:
    x = np.asarray(xs, dtype=np.int64)
    return np.concatenate((x[rho:], x[:rho]))


def sample_excursion_array(n: int, rng: np.random.Generator) -> np.ndarray:
    x = sample_conditioned_increments(n, rng)
    s = np.cumsum(x - 1)
    rho = (int(np.argmin(s)) + 1) % x.size
    return np.concatenate((x[rho:], x[:rho]))


def sample_excursion(n: int, rng: np.random.Generator) -> ExcursionPath:
    """Exact draw from ``P_n``: multinomial increments rotated by the cycle lemma."""
    return ExcursionPath(tuple(sample_excursion_array(n, rng).tolist()))


# ---------------------------------------------------------------------------
# brute-force oracles


def enumerate_excursions(n: int) -> list[tuple[tuple[int, ...], Fraction]]:
    """Every excursion of length ``n + 1`` with its exact ``P_n`` probability."""
    _check_n(n)
    if n > EXCURSION_ENUM_MAX_N:
        raise SizeLimitError(f"enumerate_excursions requires n <= {EXCURSION_ENUM_MAX_N}")
    out = []
    for x in _compositions(n, n + 1):
        if is_excursion(x):
            out.append((x, Fraction(1, math.prod(math.factorial(v) for v in x))))
    total = sum(p for _, p in out)
    return [(x, p / total) for x, p in out]


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def multinomial_outcomes(n: int):
    """All nonnegative integer vectors of length ``n + 1`` summing to ``n``."""
    return _compositions(n, n + 1)


def conditional_poisson_pmf(x: Sequence[int]) -> Fraction:
    """``P(X = x | sum X = n)`` for i.i.d. Poisson(1), computed from the Poisson pmf directly."""
    x = tuple(int(v) for v in x)
    n = sum(x)
    cells = len(x)
    # e^{-cells} cancels; P(sum = n) = e^{-cells} cells^n / n!
    joint = Fraction(1, math.prod(math.factorial(v) for v in x))
    total = Fraction(cells**n, math.factorial(n))
    return joint / total


def all_tuples(n: int, k: int):
    return product(range(1, n + 1), repeat=k)
