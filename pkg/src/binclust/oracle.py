"""Synthetic data and independent reference computations for testing the sampler."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .binning import bin_index
from .conjugate import NormalGammaParams, PosteriorFn, log_marginal_likelihood, posterior_from_stats
from .distributions import sample_gamma
from .prior import MAX_ENUMERATION, TooLarge, iter_compositions, log_restricted_prior
from .sampler import kernel_prior, transition
from .types import BinclustError, BinLayout, BinnedDataset, ChainState, Hyperparams, Partition

# 0.3 N(8, 1) + 0.2 N(16, 6) + 0.2 N(24, 1) + 0.3 N(30, 4), second argument a variance
MIXTURE_WEIGHTS = (0.3, 0.2, 0.2, 0.3)
MIXTURE_MEANS = (8.0, 16.0, 24.0, 30.0)
MIXTURE_VARIANCES = (1.0, 6.0, 1.0, 4.0)


class ValueOutOfRange(BinclustError, ValueError):
    pass


class NonConvergence(BinclustError, RuntimeError):
    pass


def sample_paper_mixture(n: int, rng: np.random.Generator, return_labels: bool = False):
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    labels = rng.choice(4, size=n, p=MIXTURE_WEIGHTS)
    y = rng.normal(np.take(MIXTURE_MEANS, labels), np.sqrt(np.take(MIXTURE_VARIANCES, labels)))
    return (y, labels) if return_labels else y


def bin_data(values: Sequence[float], layout: BinLayout) -> BinnedDataset:
    """Count values per half-open bin ``(t_{l-1}, t_l]``."""
    idx = bin_index(values, layout.edges)
    bad = (idx < 0) | (idx >= layout.m)
    if np.any(bad):
        v = np.asarray(values, dtype=float)[bad][0]
        raise ValueOutOfRange(f"value {v!r} outside ({layout.lower}, {layout.upper}]")
    return BinnedDataset(layout, tuple(np.bincount(idx, minlength=layout.m)))


def unit_bins(lower: float = 5.0, upper: float = 35.0) -> BinLayout:
    edges = np.arange(lower, upper + 0.5)
    return BinLayout(tuple(edges), tuple(edges[:-1] + 0.5))


def simulate_mixture_dataset(seed: int, n: int = 500) -> BinnedDataset:
    """Mixture sample binned on unit bins over (5, 35].

    Draws falling outside the interval are replaced by fresh draws so that
    exactly `n` observations are binned.
    """
    rng = np.random.default_rng(seed)
    layout = unit_bins()
    kept = np.empty(0)
    while len(kept) < n:
        y = sample_paper_mixture(n - len(kept), rng)
        kept = np.concatenate((kept, y[(y > layout.lower) & (y <= layout.upper)]))
    return bin_data(kept, layout)


# -- marginal likelihood by quadrature -------------------------------------------


def _trapezoid_log(logf: np.ndarray, h: float, axis: int = -1) -> np.ndarray:
    mx = np.max(logf, axis=axis, keepdims=True)
    w = np.exp(logf - mx)
    s = np.sum(w, axis=axis) - 0.5 * (np.take(w, 0, axis=axis) + np.take(w, -1, axis=axis))
    with np.errstate(divide="ignore"):
        return np.log(s * h) + np.squeeze(mx, axis=axis)


def log_quadrature_marginal(
    prior: NormalGammaParams,
    values: Sequence[float],
    rtol: float = 1e-8,
    max_points: int = 2**13,
) -> float:
    """Log of the integral of the normal likelihood against the normal-gamma prior.

    Trapezoid rule on a tensor grid: log-precision on the outer axis and a
    precision-scaled standard coordinate for the mean on the inner axis.
    The grid is doubled until two successive estimates agree to `rtol`.
    """
    y = np.asarray(values, dtype=float)
    n = len(y)
    if n > 4:
        raise TooLarge("quadrature oracle supports at most 4 values")
    if n == 0:
        return 0.0
    omega, c, a, b = prior.omega, prior.c, prior.a, prior.b
    # grid placement only; the integrand below is evaluated from scratch
    prec_mu = n + 1.0 / c
    center_mu = (y.sum() + omega / c) / prec_mu
    spread = b + 0.5 * np.sum((y - center_mu) ** 2) + 0.5 * (center_mu - omega) ** 2 / c
    center_u = math.log((a + 0.5 * n) / spread)
    u_lo, u_hi = center_u - 60.0 / (a + 0.5 * n) - 5.0, center_u + 6.0

    def estimate(points):
        u = np.linspace(u_lo, u_hi, points)
        z = np.linspace(-14.0, 14.0, points)
        lam = np.exp(u)[:, None]
        sd_mu = 1.0 / np.sqrt(lam * prec_mu)
        mu = center_mu + sd_mu * z[None, :]
        log_lik = 0.5 * n * (np.log(lam) - math.log(2 * math.pi)) - 0.5 * lam * np.sum(
            (y[None, None, :] - mu[:, :, None]) ** 2, axis=2
        )
        log_prior_mu = 0.5 * (np.log(lam / c) - math.log(2 * math.pi)) - 0.5 * lam / c * (mu - omega) ** 2
        log_prior_lam = a * math.log(b) - gammaln(a) + (a - 1) * np.log(lam) - b * lam
        # Jacobians: dmu = sd_mu dz, dlam = lam du
        logf = log_lik + log_prior_mu + log_prior_lam + np.log(sd_mu) + np.log(lam)
        inner = _trapezoid_log(logf, z[1] - z[0], axis=1)
        return float(_trapezoid_log(inner, u[1] - u[0]))

    points = 128
    prev = estimate(points)
    while points < max_points:
        points *= 2
        cur = estimate(points)
        if abs(math.expm1(cur - prev)) < rtol:
            return cur
        prev = cur
    raise NonConvergence(f"quadrature did not reach rtol={rtol} with {max_points} points per axis")


def quadrature_marginal(prior: NormalGammaParams, values: Sequence[float]) -> float:
    return math.exp(log_quadrature_marginal(prior, values))


def student_t_log_marginal(prior: NormalGammaParams, value: float) -> float:
    """Closed-form single-observation marginal: Student-t with 2a degrees of freedom."""
    nu = 2.0 * prior.a
    scale2 = prior.b * (1.0 + prior.c) / prior.a
    r = (value - prior.omega) ** 2 / (nu * scale2)
    return (
        math.lgamma((nu + 1) / 2)
        - math.lgamma(nu / 2)
        - 0.5 * math.log(nu * math.pi * scale2)
        - (nu + 1) / 2 * math.log1p(r)
    )


# -- exact partition posterior ------------------------------------------------------


def enumerate_partition_posterior(y: Sequence[float], hyper: Hyperparams, alpha: float) -> dict:
    """Posterior over all compositions for fixed latent values and total mass.

    Returns a mapping from size tuples to probabilities.
    """
    y = [float(v) for v in y]
    n = len(y)
    if n > 10:
        raise TooLarge("exact partition posterior supports n <= 10")
    prior = kernel_prior(hyper)
    logp = {}
    for sizes in iter_compositions(n):
        lp = log_restricted_prior(sizes, alpha)
        start = 0
        for s in sizes:
            lp += log_marginal_likelihood(prior, y[start : start + s])
            start += s
        logp[sizes] = lp
    mx = max(logp.values())
    z = math.fsum(math.exp(v - mx) for v in logp.values())
    return {s: math.exp(v - mx) / z for s, v in logp.items()}


def sample_restricted_prior(n: int, alpha: float, rng: np.random.Generator) -> Partition:
    if n > MAX_ENUMERATION:
        raise TooLarge("prior sampling by enumeration supports n <= 20")
    comps = list(iter_compositions(n))
    logp = np.array([log_restricted_prior(s, alpha) for s in comps])
    p = np.exp(logp - logp.max())
    return Partition(comps[int(rng.choice(len(comps), p=p / p.sum()))])


# -- Geweke joint-distribution test ------------------------------------------------


def drop_mean_term_posterior(prior: NormalGammaParams, n: int, mean: float, ss: float) -> NormalGammaParams:
    """Deliberately wrong update: the rate omits the prior-mean discrepancy term."""
    post = posterior_from_stats(prior, n, mean, ss)
    return replace(post, b=prior.b + 0.5 * ss)


@dataclass(frozen=True)
class GewekeModel:
    """Tiny model for the joint-distribution test.

    The outer bins extend to infinity so that every prior draw of the
    latent values is binnable.
    """

    n: int = 6
    inner_edges: tuple[float, ...] = (-1.0, 1.0)
    hyper: Hyperparams = field(
        default_factory=lambda: Hyperparams(omega=0.0, c=1.0, a=3.0, b=2.0, alpha_shape=2.0, alpha_rate=2.0)
    )

    @property
    def edges(self) -> np.ndarray:
        return np.concatenate(([-np.inf], self.inner_edges, [np.inf]))

    @property
    def m(self) -> int:
        return len(self.inner_edges) + 1


GEWEKE_STATISTICS = ("k", "alpha", "weighted_mean_mu", "mean_y", "mean_y2")


def _statistics(state: ChainState) -> np.ndarray:
    sizes = np.asarray(state.partition.sizes)
    return np.array(
        [
            state.k,
            state.alpha,
            float(np.sum(state.mu * sizes) / state.n),
            float(np.mean(state.y)),
            float(np.mean(state.y**2)),
        ]
    )


def _prior_draw(model: GewekeModel, rng) -> ChainState:
    hyper = model.hyper
    alpha = sample_gamma(hyper.alpha_shape, hyper.alpha_rate, rng)
    partition = sample_restricted_prior(model.n, alpha, rng)
    lam = np.array([sample_gamma(hyper.a, hyper.b, rng) for _ in range(partition.k)])
    mu = rng.normal(hyper.omega, np.sqrt(hyper.c / lam))
    state = ChainState(np.zeros(model.n), np.zeros(model.n, dtype=np.int64), partition, mu, lam, alpha)
    return _regenerate_data(state, model, rng)


def _regenerate_data(state: ChainState, model: GewekeModel, rng) -> ChainState:
    sizes = state.partition.sizes
    y = rng.normal(np.repeat(state.mu, sizes), np.repeat(1.0 / np.sqrt(state.lam), sizes))
    e = bin_index(y, model.edges)
    return replace(state, y=y, e=e)


def _batch_means_var(x: np.ndarray, batches: int = 40) -> np.ndarray:
    """Variance of the sample mean of each column of `x` by batch means."""
    size = len(x) // batches
    means = x[: size * batches].reshape(batches, size, -1).mean(axis=1)
    return means.var(axis=0, ddof=1) / batches


def geweke_test(
    model: Optional[GewekeModel] = None,
    num_samples: int = 2000,
    rng: Optional[np.random.Generator] = None,
    thin: int = 5,
    posterior: PosteriorFn = posterior_from_stats,
) -> dict:
    """Compare prior simulation with alternating kernel/data simulation.

    The marginal-conditional simulator draws ``(alpha, partition, params,
    y)`` from the prior and bins `y`.  The successive-conditional simulator
    alternates one sampler transition given the bins with a fresh draw of
    the latent values from the likelihood followed by re-binning.  Returns
    one z-score per statistic in :data:`GEWEKE_STATISTICS`.
    """
    model = model or GewekeModel()
    rng = rng if rng is not None else np.random.default_rng(0)
    edges = model.edges

    marginal = np.array([_statistics(_prior_draw(model, rng)) for _ in range(num_samples)])

    state = _prior_draw(model, rng)
    successive = np.empty((num_samples, len(GEWEKE_STATISTICS)))
    for t in range(num_samples):
        for _ in range(thin):
            lo, hi = edges[state.e], edges[state.e + 1]
            state = transition(state, lo, hi, model.hyper, rng, posterior=posterior)
            state = _regenerate_data(state, model, rng)
        successive[t] = _statistics(state)

    var_m = marginal.var(axis=0, ddof=1) / num_samples
    var_s = _batch_means_var(successive)
    z = (marginal.mean(axis=0) - successive.mean(axis=0)) / np.sqrt(var_m + var_s)
    return dict(zip(GEWEKE_STATISTICS, z.tolist()))
