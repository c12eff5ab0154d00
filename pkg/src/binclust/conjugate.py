"""Normal-gamma conjugate updates for a normal kernel with unknown mean and precision.

Parameterization: ``lam ~ Ga(a, b)`` (shape, rate) and
``mu | lam ~ N(omega, c / lam)``; `c` scales the variance of the mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .distributions import sample_gamma
from .types import BinclustError, GroupParams, ValidationError

LOG_2PI = math.log(2.0 * math.pi)


class EmptyGroup(BinclustError, ValueError):
    pass


@dataclass(frozen=True)
class NormalGammaParams:
    omega: float
    c: float
    a: float
    b: float

    def __post_init__(self):
        if not (self.c > 0 and self.a > 0 and self.b > 0):
            raise ValidationError(f"c, a, b must be positive: {self}")


def summarize(values: Sequence[float]) -> tuple[int, float, float]:
    """``(n, mean, sum of squared deviations)``, invariant to the order of `values`."""
    v = [float(x) for x in values]
    n = len(v)
    if n == 0:
        return 0, 0.0, 0.0
    mean = math.fsum(v) / n
    ss = math.fsum((x - mean) ** 2 for x in v)
    return n, mean, ss


def posterior_from_stats(prior: NormalGammaParams, n: int, mean: float, ss: float) -> NormalGammaParams:
    if n < 1:
        raise EmptyGroup("posterior update needs at least one value")
    omega, c, a, b = prior.omega, prior.c, prior.a, prior.b
    cn1 = c * n + 1.0
    return NormalGammaParams(
        omega=(c * n * mean + omega) / cn1,
        c=c / cn1,
        a=a + 0.5 * n,
        b=b + 0.5 * ss + n * (mean - omega) ** 2 / (2.0 * cn1),
    )


PosteriorFn = Callable[[NormalGammaParams, int, float, float], NormalGammaParams]


def posterior_params(prior: NormalGammaParams, group_values: Sequence[float]) -> NormalGammaParams:
    n, mean, ss = summarize(group_values)
    if n == 0:
        raise EmptyGroup("posterior update needs at least one value")
    return posterior_from_stats(prior, n, mean, ss)


def log_marginal_from_stats(
    prior: NormalGammaParams,
    n: int,
    mean: float,
    ss: float,
    posterior: PosteriorFn = posterior_from_stats,
) -> float:
    """Log marginal density of a group with ``(mu, lam)`` integrated out."""
    if n == 0:
        return 0.0
    post = posterior(prior, n, mean, ss)
    return (
        -0.5 * n * LOG_2PI
        + 0.5 * math.log(post.c / prior.c)
        + math.lgamma(post.a)
        - math.lgamma(prior.a)
        + prior.a * math.log(prior.b)
        - post.a * math.log(post.b)
    )


def log_marginal_likelihood(prior: NormalGammaParams, group_values: Sequence[float]) -> float:
    n, mean, ss = summarize(group_values)
    return log_marginal_from_stats(prior, n, mean, ss)


def log_predictive(prior: NormalGammaParams, history: Sequence[float], value: float) -> float:
    """Log posterior-predictive density of `value` after observing `history`."""
    current = posterior_params(prior, history) if len(history) else prior
    return log_marginal_likelihood(current, [value])


def sample_group_params(posterior: NormalGammaParams, rng: np.random.Generator) -> GroupParams:
    mu, lam = draw_mu_lambda(posterior, rng)
    return GroupParams(mu, lam)


def draw_mu_lambda(posterior: NormalGammaParams, rng: np.random.Generator) -> tuple[float, float]:
    lam = sample_gamma(posterior.a, posterior.b, rng)
    mu = float(rng.normal(posterior.omega, math.sqrt(posterior.c / lam)))
    return mu, lam
