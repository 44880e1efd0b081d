"""Closed-form expected changed-bit counts for random and biased coset
coding, with Monte Carlo validators.

``e_rcc`` gives the expectation of the minimum Hamming distance achieved by
the best of N independent random cosets on an n-bit block; ``e_bcc`` gives
the expectation for per-section inversion coding (k sections, each carrying
its own flag bit).  Reduction curves are reported relative to the n/2
changes an unencoded random write costs; the random-coset curve charges
log2(N)/2 extra changed bits for the auxiliary index.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


@dataclass(frozen=True)
class ExpectationQuery:
    n: int
    coset_count: int = 1
    p_bit: float = 0.5
    sections: int = 1

    def __post_init__(self):
        if self.n < 1 or self.coset_count < 1:
            raise ValueError("n and coset count must be >= 1")
        if not 0.0 <= self.p_bit <= 1.0:
            raise ValueError("p_bit must be a probability")
        if self.sections < 1 or self.n % self.sections:
            raise ValueError("section count must divide n")


def _e_rcc_exact_half(n: int, big_n: int) -> float:
    # p = 1/2 makes every tail probability a dyadic rational; the whole
    # sum stays exact in integer arithmetic and rounds once at the end.
    tails = []
    tail = 0
    for i in range(n, -1, -1):
        tail += math.comb(n, i)
        tails.append(tail)  # tails[j] = P(X >= n - j) * 2^n
    total = 0
    for m in range(n):  # P(X > m) = tails[n - m - 1] / 2^n
        total += tails[n - m - 1] ** big_n
    return float(Fraction(total, 2 ** (n * big_n)))


def _e_rcc_log_space(n: int, big_n: int, p: float) -> float:
    if p in (0.0, 1.0):
        # degenerate data: every coset changes exactly the same bit count
        return n * p
    log_p, log_q = math.log(p), math.log(1.0 - p)
    log_pmf = [
        math.lgamma(n + 1) - math.lgamma(i + 1) - math.lgamma(n - i + 1)
        + i * log_p + (n - i) * log_q
        for i in range(n + 1)
    ]
    pmf = [math.exp(v) for v in log_pmf]
    total = 0.0
    cum = 0.0
    for m in range(n):
        cum = min(1.0, cum + pmf[m])
        if cum >= 1.0:
            break
        # (1 - cdf(m))^N, evaluated as exp(N*log1p(-cdf)) for stability
        total += math.exp(big_n * math.log1p(-cum))
    return total


def e_rcc(n: int, coset_count: int, p_bit: float = 0.5) -> float:
    """Expected changed bits with the best of ``coset_count`` random cosets.

    Excludes the auxiliary index bits; callers add log2(N)/2 when charging
    them.  p_bit = 0.5 is evaluated in exact rational arithmetic.
    """
    ExpectationQuery(n, coset_count, p_bit)
    if p_bit == 0.5:
        return _e_rcc_exact_half(n, coset_count)
    return _e_rcc_log_space(n, coset_count, p_bit)


def e_bcc(n: int, k: int) -> float:
    """Expected changed bits for k-section inversion coding (flags included)."""
    ExpectationQuery(n, sections=k)
    width = n // k + 1  # section plus its flag bit
    total = 0
    for i in range(width + 1):
        total += min(i, width - i) * math.comb(width, i)
    return float(k * Fraction(total, 2 ** width))


def reduction_rcc(n: int, coset_count: int) -> float:
    """Fractional reduction vs unencoded, charging the aux index bits."""
    half = n / 2.0
    return (half - e_rcc(n, coset_count) - math.log2(coset_count) / 2.0) / half


def reduction_bcc(n: int, k: int) -> float:
    return (n / 2.0 - e_bcc(n, k)) / (n / 2.0)


@dataclass(frozen=True)
class McResult:
    mean: float
    stderr: float
    trials: int


def mc_rcc_changes(n: int, coset_count: int, trials: int, seed: int,
                   batch: int = 1 << 14) -> McResult:
    """Simulate min-over-N-random-cosets changed-bit counts directly."""
    if not 1 <= n <= 64:
        raise ValueError("n must be in 1..64 for the simulator")
    rng = np.random.default_rng(seed)
    mask = np.uint64((1 << n) - 1)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < trials:
        cur = min(batch, trials - done)
        # data ^ old ^ coset is uniform; sample the XOR result directly
        words = rng.integers(0, 1 << 64, size=(cur, coset_count), dtype=np.uint64)
        counts = np.bitwise_count(words & mask).min(axis=1)
        total += counts.sum()
        total_sq += (counts.astype(np.float64) ** 2).sum()
        done += cur
    mean = total / trials
    var = max(total_sq / trials - mean ** 2, 0.0)
    return McResult(mean, math.sqrt(var / trials), trials)


def mc_bcc_changes(n: int, k: int, trials: int, seed: int,
                   batch: int = 1 << 16) -> McResult:
    """Simulate per-section flip-or-keep coding, flag bit included."""
    width = n // k + 1
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < trials:
        cur = min(batch, trials - done)
        direct = rng.binomial(width, 0.5, size=(cur, k))
        counts = np.minimum(direct, width - direct).sum(axis=1)
        total += counts.sum()
        total_sq += (counts.astype(np.float64) ** 2).sum()
        done += cur
    mean = total / trials
    var = max(total_sq / trials - mean ** 2, 0.0)
    return McResult(mean, math.sqrt(var / trials), trials)


@dataclass(frozen=True)
class SawMcResult:
    observed_rate: float
    reduction: float  # NaN when the fault rate is 0 (no faults to reduce)
    trials: int


def expected_saw_reduction_mc(n: int, coset_count: int, fault_rate: float,
                              trials: int, seed: int = 0,
                              batch: int = 1 << 12) -> SawMcResult:
    """Monte Carlo mean observed error rate with best-of-N random cosets.

    Each trial draws a block of n/2 MLC cells, a Bernoulli stuck mask with
    uniformly frozen values, and N random coset candidates; the candidate
    with the fewest stuck mismatches is kept.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    cells = n // 2
    rng = np.random.default_rng(seed)
    mismatches = 0
    done = 0
    while done < trials:
        cur = min(batch, trials - done)
        stuck = rng.random((cur, cells)) < fault_rate
        frozen = rng.integers(0, 4, size=(cur, cells), dtype=np.uint8)
        cands = rng.integers(0, 4, size=(cur, coset_count, cells), dtype=np.uint8)
        bad = (stuck[:, None, :] & (cands != frozen[:, None, :])).sum(axis=2)
        mismatches += int(bad.min(axis=1).sum())
        done += cur
    observed = mismatches / (trials * cells)
    reduction = float("nan") if fault_rate == 0 else 1.0 - observed / fault_rate
    return SawMcResult(observed, reduction, trials)


def write_reduction_curve_csv(path, n: int, coset_counts) -> None:
    """Emit the analytic reduction curves (random vs biased cosets)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "N_or_k", "technique", "expected_changed_bits",
                         "reduction_fraction"])
        for big_n in coset_counts:
            k = int(math.log2(big_n))
            writer.writerow([n, big_n, "rcc",
                             f"{e_rcc(n, big_n) + k / 2.0:.6f}",
                             f"{reduction_rcc(n, big_n):.6f}"])
            writer.writerow([n, k, "bcc", f"{e_bcc(n, k):.6f}",
                             f"{reduction_bcc(n, k):.6f}"])
