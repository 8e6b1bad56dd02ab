"""Brute-force ground truth for small instances.

Everything here is exact: big integers and fractions only, no floating
point.  The module exists to be unimpeachable, so it recomputes closed
forms in rational arithmetic rather than trusting the double-precision
analysis module, and it enumerates rearrangements outright rather than
trusting the codec.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import math

import numpy as np

from .host import Message, as_samples, capacity_bits, compute_histogram, multinomial_exact
from .coder import StegoKey, perm_encode

DEFAULT_BUDGET = 10**6


class BudgetExceeded(ValueError):
    pass


@dataclass(eq=False)
class RearrangementSet:
    """All distinct rearrangements of a host, lexicographically ordered."""

    host: np.ndarray
    array: np.ndarray  # (r, n) int64
    r: int

    def __iter__(self):
        return iter(self.array)

    def __post_init__(self):
        self._members = None

    def contains(self, y) -> bool:
        if self._members is None:
            self._members = {row.tobytes() for row in self.array}
        return np.ascontiguousarray(y, dtype=np.int64).tobytes() in self._members


def enumerate_rearrangements(x, budget: int = DEFAULT_BUDGET) -> RearrangementSet:
    """Generate every distinct ordering of the host, lexicographic."""
    samples = as_samples(x)
    r = multinomial_exact(compute_histogram(samples).counts)
    if r > budget:
        raise BudgetExceeded(f"r = {r} exceeds the enumeration budget {budget}")
    seq = sorted(int(v) for v in samples)
    n = len(seq)
    out = np.empty((r, n), dtype=np.int64)
    out[0] = seq
    # classic next-permutation over the multiset
    for row in range(1, r):
        i = n - 2
        while seq[i] >= seq[i + 1]:
            i -= 1
        j = n - 1
        while seq[j] <= seq[i]:
            j -= 1
        seq[i], seq[j] = seq[j], seq[i]
        seq[i + 1 :] = reversed(seq[i + 1 :])
        out[row] = seq
    return RearrangementSet(samples.copy(), out, r)


@dataclass
class ExactMetrics:
    """Exact rational averages over all rearrangements."""

    r: int
    avg_power: Fraction
    max_power: Fraction
    nu_bar: Fraction
    var_power: Fraction
    eps_bar_coeff: Fraction  # eps_bar = coeff * log2(r)
    eps_bar: float | None    # None when r = 1

    # closed forms, also exact
    avg_power_closed: Fraction
    max_power_closed: Fraction
    nu_bar_closed: Fraction
    var_power_closed: Fraction
    eps_lower_coeff: Fraction  # eps_l = coeff * log2(r)


def exact_metrics(x, budget: int = DEFAULT_BUDGET) -> ExactMetrics:
    """Enumerated averages next to their closed forms, all exact.

    The average embedding efficiency excludes the identity rearrangement
    (zero-efficiency convention for y = x); it equals coeff * log2(r) with
    an exact rational coeff.
    """
    rset = enumerate_rearrangements(x, budget)
    xs = rset.host
    n = len(xs)
    diffs = rset.array - xs[None, :]
    if int(np.abs(diffs).max(initial=0)) ** 2 * n >= (1 << 62):
        raise ValueError("host values too large for exact int64 accumulation")
    powers = np.einsum("ij,ij->i", diffs, diffs)
    changes = np.count_nonzero(diffs, axis=1)
    r = rset.r

    sum_p = int(powers.astype(object).sum())
    sum_p2 = int((powers.astype(object) ** 2).sum())
    avg_power = Fraction(sum_p, r)
    var_power = Fraction(sum_p2, r) - avg_power * avg_power
    nu_bar = Fraction(int(changes.sum()), r * n)
    # eps = (1/r) sum_{y != x} log2(r)/changes(y) = log2(r) * harmonic / r
    change_hist = np.bincount(changes, minlength=n + 1)
    harmonic = sum(Fraction(int(cnt), c) for c, cnt in enumerate(change_hist) if c > 0 and cnt)
    eps_coeff = Fraction(harmonic, r)
    eps_bar = float(eps_coeff) * math.log2(r) if r > 1 else None

    # closed forms in exact arithmetic
    sx = [int(v) for v in xs]
    norm2 = sum(v * v for v in sx)
    s1 = sum(sx)
    avg_closed = 2 * Fraction(n * norm2 - s1 * s1, n)
    asc = sorted(sx)
    max_closed = Fraction(2 * (norm2 - sum(a * b for a, b in zip(asc, reversed(asc)))))
    hist = compute_histogram(xs)
    h2 = sum(int(c) * int(c) for c in hist.counts)
    nu_closed = 1 - Fraction(h2, n * n)
    var_closed = avg_closed * avg_closed / (n - 1) if n > 1 else Fraction(0)
    eps_l_coeff = (
        Fraction((r - 1) ** 2, r * r) * Fraction(1, n) / nu_closed if r > 1 and nu_closed > 0 else Fraction(0)
    )
    return ExactMetrics(
        r=r,
        avg_power=avg_power,
        max_power=Fraction(int(powers.max())),
        nu_bar=nu_bar,
        var_power=var_power,
        eps_bar_coeff=eps_coeff,
        eps_bar=eps_bar,
        avg_power_closed=avg_closed,
        max_power_closed=max_closed,
        nu_bar_closed=nu_closed,
        var_power_closed=var_closed,
        eps_lower_coeff=eps_l_coeff,
    )


@lru_cache(maxsize=None)
def _all_permutations(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.int64)


@dataclass
class PermutationExpectations:
    e_pi: np.ndarray             # Fractions, enumerated over S_n
    e_pi_closed: np.ndarray      # (1/n) 1 1^t
    e_pxxp: np.ndarray           # Fractions, enumerated over S_n
    e_pxxp_rearr: np.ndarray     # Fractions, averaged over distinct rearrangements
    e_pxxp_closed: np.ndarray    # a I + b 1 1^t
    a: Fraction
    b: Fraction


def permutation_expectations(x, max_n: int = 9) -> PermutationExpectations:
    """First- and second-order expectations over uniformly random
    permutation matrices, enumerated and in closed form (all exact)."""
    xs = as_samples(x)
    n = len(xs)
    if n > max_n:
        raise ValueError(f"n = {n} too large for S_n enumeration")
    perms = _all_permutations(n)
    nfact = math.factorial(n)

    # E{Pi}: count, per (i, j), permutations with sigma_i = j
    counts = np.stack([np.bincount(perms[:, i], minlength=n) for i in range(n)])
    e_pi = np.array([[Fraction(int(c), nfact) for c in row] for row in counts], dtype=object)
    e_pi_closed = np.full((n, n), Fraction(1, n), dtype=object)

    # E{Pi x x^t Pi^t} over S_n: rows of y_all are x permuted by each sigma.
    # int64 matmuls stay exact while n! * max(x)^2 < 2^63.
    if nfact * int(np.abs(xs).max()) ** 2 >= (1 << 62):
        raise ValueError("host values too large for exact int64 accumulation")
    y_all = xs[perms]
    gram = y_all.T @ y_all
    e_pxxp = np.array([[Fraction(int(g), nfact) for g in row] for row in gram], dtype=object)

    rset = enumerate_rearrangements(xs)
    gram_r = rset.array.T @ rset.array
    e_pxxp_rearr = np.array([[Fraction(int(g), rset.r) for g in row] for row in gram_r], dtype=object)

    sx = [int(v) for v in xs]
    norm2 = sum(v * v for v in sx)
    s1 = sum(sx)
    b = Fraction(s1 * s1 - norm2, n * (n - 1)) if n > 1 else Fraction(0)
    a = Fraction(norm2, n) - b
    e_closed = np.full((n, n), b, dtype=object)
    for i in range(n):
        e_closed[i, i] = a + b
    return PermutationExpectations(e_pi, e_pi_closed, e_pxxp, e_pxxp_rearr, e_closed, a, b)


@dataclass
class TableCodecReport:
    r: int
    capacity: int
    injective: bool
    all_in_set: bool
    coverage: Fraction


def table_codec(x, key: StegoKey | None = None, budget: int = DEFAULT_BUDGET) -> TableCodecReport:
    """Exhaustively embed all 2^c messages and check the map against the
    enumerated rearrangement set."""
    samples = as_samples(x)
    rset = enumerate_rearrangements(samples, budget)
    members = {tuple(int(v) for v in row) for row in rset.array}
    c = capacity_bits(compute_histogram(samples))
    seen = set()
    all_in = True
    for m in range(1 << c):
        y = perm_encode(samples, Message.from_int(m, c), key=key)
        ty = tuple(int(v) for v in y)
        seen.add(ty)
        if ty not in members:
            all_in = False
    return TableCodecReport(
        r=rset.r,
        capacity=c,
        injective=len(seen) == (1 << c),
        all_in_set=all_in,
        coverage=Fraction(1 << c, rset.r),
    )
