"""Dirichlet-process partition probabilities and their gap-free restriction.

Everything is in log space; probabilities are exponentiated only by callers.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lgamma, log
from typing import Iterable, Iterator

from .types import BinclustError, InvalidAlpha, Partition

MAX_ENUMERATION = 20


class TooLarge(BinclustError, ValueError):
    pass


@dataclass(frozen=True)
class PriorEval:
    log_prob: float
    alpha: float


def _sizes(sizes) -> tuple[int, ...]:
    if isinstance(sizes, Partition):
        return sizes.sizes
    return Partition(tuple(sizes)).sizes


def _check_alpha(alpha: float) -> None:
    if not alpha > 0:
        raise InvalidAlpha(f"alpha must be positive, got {alpha}")


def log_pochhammer(x: float, n: int) -> float:
    return lgamma(x + n) - lgamma(x)


def log_eppf(sizes: Partition | Iterable[int], alpha: float) -> float:
    """log of ``alpha^k / (alpha)_n * prod Gamma(n_j)``."""
    _check_alpha(alpha)
    s = _sizes(sizes)
    n, k = sum(s), len(s)
    return k * log(alpha) - log_pochhammer(alpha, n) + sum(lgamma(nj) for nj in s)


def log_restricted_prior(sizes: Partition | Iterable[int], alpha: float) -> float:
    """log of ``n!/k! * alpha^k / (alpha)_n * prod 1/n_j`` over compositions of n."""
    _check_alpha(alpha)
    s = _sizes(sizes)
    n, k = sum(s), len(s)
    return (
        lgamma(n + 1)
        - lgamma(k + 1)
        + k * log(alpha)
        - log_pochhammer(alpha, n)
        - sum(log(nj) for nj in s)
    )


def evaluate_restricted_prior(sizes, alpha: float) -> PriorEval:
    return PriorEval(log_restricted_prior(sizes, alpha), float(alpha))


def iter_compositions(n: int) -> Iterator[tuple[int, ...]]:
    # bit i of the mask set <=> a group boundary after position i+1
    for mask in range(2 ** (n - 1)):
        sizes, run = [], 1
        for i in range(n - 1):
            if mask >> (n - 2 - i) & 1:
                sizes.append(run)
                run = 1
            else:
                run += 1
        sizes.append(run)
        yield tuple(sizes)


def enumerate_compositions(n: int) -> list[Partition]:
    """All ``2**(n-1)`` compositions of `n`; for oracle use only."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if n > MAX_ENUMERATION:
        raise TooLarge(f"refusing to enumerate 2^{n - 1} compositions (n > {MAX_ENUMERATION})")
    return [Partition(s) for s in iter_compositions(n)]
