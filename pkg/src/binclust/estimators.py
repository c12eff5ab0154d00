"""Point estimates from a trace, all conditional on the modal partition.

Groups are ordered by index, so the j-th parameter draw always describes
the j-th group and draws can be averaged directly.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .types import BinclustError, BinLayout, Partition, Trace

LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


class EmptyTrace(BinclustError, ValueError):
    pass


class PartitionNeverVisited(BinclustError, ValueError):
    pass


def partition_counts(trace: Trace) -> Counter:
    return Counter(p.sizes for p in trace.partitions)


def modal_partition(trace: Trace) -> Partition:
    """Most frequent partition; ties go to fewer groups, then smaller sizes lexicographically."""
    if not len(trace):
        raise EmptyTrace("no draws in trace")
    counts = partition_counts(trace)
    best = min(counts, key=lambda s: (-counts[s], len(s), s))
    return Partition(best)


def _matching(trace: Trace, pi_hat: Partition) -> list[int]:
    sizes = pi_hat.sizes if isinstance(pi_hat, Partition) else tuple(pi_hat)
    idx = [t for t, p in enumerate(trace.partitions) if p.sizes == sizes]
    if not idx:
        raise PartitionNeverVisited(f"partition {sizes} does not occur in the trace")
    return idx


def visits(trace: Trace, pi_hat: Partition) -> int:
    sizes = pi_hat.sizes if isinstance(pi_hat, Partition) else tuple(pi_hat)
    return sum(1 for p in trace.partitions if p.sizes == sizes)


def conditional_param_estimates(trace: Trace, pi_hat: Partition) -> list[tuple[float, float]]:
    """Per-group ``(mean, sd)`` averaged over draws whose partition equals `pi_hat`.

    The sd is the average of ``lam ** -0.5`` over those draws.
    """
    idx = _matching(trace, pi_hat)
    mu = np.array([trace.mu_draws[t] for t in idx])
    sd = np.array([trace.lam_draws[t] for t in idx]) ** -0.5
    return list(zip(mu.mean(axis=0).tolist(), sd.mean(axis=0).tolist()))


def mixing_weights(pi_hat: Partition, n: int) -> list[float]:
    return [s / n for s in pi_hat.sizes]


def normal_pdf(x: np.ndarray, mu, lam) -> np.ndarray:
    return np.exp(0.5 * np.log(lam) - LOG_SQRT_2PI - 0.5 * lam * (x - mu) ** 2)


def conditional_density(trace: Trace, pi_hat: Partition, grid: Sequence[float]) -> np.ndarray:
    """Average over matching draws of ``sum_j (n_j / n) N(x | mu_j, 1 / lam_j)``."""
    idx = _matching(trace, pi_hat)
    x = np.asarray(grid, dtype=float)
    if x.size == 0:
        raise ValueError("density grid is empty")
    sizes = np.asarray(trace.partitions[idx[0]].sizes, dtype=float)
    weights = sizes / sizes.sum()
    total = np.zeros_like(x)
    for t in idx:
        mu, lam = trace.mu_draws[t], trace.lam_draws[t]
        total += normal_pdf(x[:, None], mu[None, :], lam[None, :]) @ weights
    return total / len(idx)


def default_grid(layout: BinLayout, points: int = 512) -> np.ndarray:
    """Equally spaced points over the binned range widened by 5% on each side."""
    pad = 0.05 * (layout.upper - layout.lower)
    return np.linspace(layout.lower - pad, layout.upper + pad, points)


def mean_order_violations(estimates: Sequence[tuple[float, float]]) -> list[int]:
    """1-based indices j where the estimated mean of group j+1 does not exceed group j's."""
    means = [m for m, _ in estimates]
    return [j + 1 for j in range(len(means) - 1) if not means[j + 1] > means[j]]


@dataclass
class GroupEstimate:
    size: int
    weight: float
    mean: float
    sd: float


@dataclass
class FitSummary:
    modal_partition: Partition
    visits: int
    draws: int
    groups: list[GroupEstimate]
    order_violations: list[int]

    @property
    def k(self) -> int:
        return self.modal_partition.k


def summarize_trace(trace: Trace, n: Optional[int] = None) -> FitSummary:
    pi_hat = modal_partition(trace)
    n = n if n is not None else pi_hat.n
    est = conditional_param_estimates(trace, pi_hat)
    groups = [
        GroupEstimate(size, w, m, s)
        for size, w, (m, s) in zip(pi_hat.sizes, mixing_weights(pi_hat, n), est)
    ]
    return FitSummary(pi_hat, visits(trace, pi_hat), len(trace), groups, mean_order_violations(est))
