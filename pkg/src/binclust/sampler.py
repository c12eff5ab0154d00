"""MCMC over gap-free partitions with latent-data augmentation.

One iteration is: split-or-merge, shuffle, latent update, kernel parameter
update, total-mass update.  Partition moves are Metropolis-Hastings steps
on the partition with the group parameters integrated out over the current
latent values; parameters of the groups a move touched are then redrawn
from their conjugate posterior.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .binning import expand_memberships
from .conjugate import (
    NormalGammaParams,
    PosteriorFn,
    draw_mu_lambda,
    log_marginal_from_stats,
    posterior_from_stats,
)
from .distributions import chain_stream, sample_beta, sample_gamma, truncated_normal_array
from .prior import log_restricted_prior
from .types import (
    BinclustError,
    BinnedDataset,
    ChainState,
    Hyperparams,
    Partition,
    Trace,
    ValidationError,
    validate_dataset,
)

log = logging.getLogger(__name__)


class NoSplittableGroup(BinclustError):
    pass


class SingleGroup(BinclustError):
    pass


@dataclass(frozen=True)
class SamplerConfig:
    """Run length and move settings.

    `move_mix` holds the probabilities of proposing a split or a merge when
    both are possible; when only one is possible it gets all the mass.
    """

    iterations: int = 30000
    burn_in: int = 20000
    thin: int = 1
    seed: int = 0
    move_mix: tuple[float, float] = (0.5, 0.5)

    def __post_init__(self):
        object.__setattr__(self, "move_mix", tuple(float(p) for p in self.move_mix))
        if self.iterations < 1:
            raise ValidationError("iterations must be positive")
        if not 0 <= self.burn_in < self.iterations:
            raise ValidationError("burn_in must lie in [0, iterations)")
        if self.thin < 1:
            raise ValidationError("thin must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        p = self.move_mix
        if len(p) != 2 or min(p) < 0 or abs(sum(p) - 1.0) > 1e-12:
            raise ValidationError(f"move_mix must be two nonnegative probabilities summing to 1, got {p}")

    @property
    def retained(self) -> int:
        return (self.iterations - self.burn_in) // self.thin


@dataclass(frozen=True)
class Proposal:
    """A proposed partition and the groups it rewrites.

    Groups ``old_span`` of the current partition are replaced by groups
    ``new_span`` of `new_partition`; everything else is unchanged.
    """

    new_partition: Partition
    log_proposal_ratio: float
    old_span: tuple[int, int]
    new_span: tuple[int, int]
    kind: str


def kernel_prior(hyper: Hyperparams) -> NormalGammaParams:
    return NormalGammaParams(hyper.omega, hyper.c, hyper.a, hyper.b)


def bin_bounds(edges: Sequence[float], e: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    edges = np.asarray(edges, dtype=float)
    return edges[e], edges[e + 1]


# -- initialization --------------------------------------------------------------


def init_state(
    dataset: BinnedDataset,
    hyper: Hyperparams,
    rng: np.random.Generator,
    posterior: PosteriorFn = posterior_from_stats,
) -> ChainState:
    """Single group, latent values uniform inside their bins, alpha from its prior."""
    validate_dataset(dataset)
    e = expand_memberships(dataset.freqs) - 1
    lo, hi = bin_bounds(dataset.layout.edges, e)
    u = rng.random(len(e))
    # hi - width*u with u in [0, 1) stays inside (lo, hi]
    y = np.maximum(hi - (hi - lo) * u, np.nextafter(lo, np.inf))
    partition = Partition((len(e),))
    state = ChainState(y, e, partition, np.zeros(1), np.ones(1), 1.0)
    mu, lam = _draw_groups(state, 0, 1, kernel_prior(hyper), rng, posterior)
    alpha = sample_gamma(hyper.alpha_shape, hyper.alpha_rate, rng)
    return replace(state, mu=mu, lam=lam, alpha=alpha)


def _draw_groups(state, start, stop, prior, rng, posterior, partition=None):
    """Posterior draws of ``(mu, lam)`` for groups ``start..stop-1``."""
    part = partition or state.partition
    bounds = part.offsets
    mu = np.empty(stop - start)
    lam = np.empty(stop - start)
    for i, j in enumerate(range(start, stop)):
        n, mean, ss = state.block_stats(bounds[j], bounds[j + 1])
        mu[i], lam[i] = draw_mu_lambda(posterior(prior, n, mean, ss), rng)
    return mu, lam


# -- conditional updates ---------------------------------------------------------


def update_latent(state: ChainState, dataset_or_edges, rng: np.random.Generator) -> ChainState:
    """Redraw every latent value from its group's normal truncated to its bin."""
    edges = dataset_or_edges.layout.edges if isinstance(dataset_or_edges, BinnedDataset) else dataset_or_edges
    lo, hi = bin_bounds(edges, state.e)
    return _update_latent(state, lo, hi, rng)


def _update_latent(state, lo, hi, rng):
    sizes = state.partition.sizes
    mu = np.repeat(state.mu, sizes)
    sd = np.repeat(1.0 / np.sqrt(state.lam), sizes)
    y = truncated_normal_array(mu, sd, lo, hi, rng)
    return replace(state, y=y)


def update_params(
    state: ChainState,
    hyper: Hyperparams,
    rng: np.random.Generator,
    posterior: PosteriorFn = posterior_from_stats,
) -> ChainState:
    mu, lam = _draw_groups(state, 0, state.k, kernel_prior(hyper), rng, posterior)
    return state.evolve(mu=mu, lam=lam)


def alpha_mixture_weight(alpha_shape: float, alpha_rate: float, k: int, n: int, eta: float) -> float:
    """Weight of the ``Ga(shape + k, rate - log eta)`` component."""
    odds = (alpha_shape + k - 1) / (n * (alpha_rate - math.log(eta)))
    return odds / (1.0 + odds)


def update_alpha(state: ChainState, hyper: Hyperparams, rng: np.random.Generator) -> ChainState:
    """Escobar-West auxiliary-variable update of the total mass."""
    n, k = state.n, state.k
    eta = sample_beta(state.alpha + 1.0, n, rng)
    rate = hyper.alpha_rate - math.log(eta)
    w = alpha_mixture_weight(hyper.alpha_shape, hyper.alpha_rate, k, n, eta)
    shape = hyper.alpha_shape + k if rng.random() < w else hyper.alpha_shape + k - 1
    return state.evolve(alpha=sample_gamma(shape, rate, rng))


# -- partition moves ---------------------------------------------------------------


def split_merge_probs(sizes: Sequence[int], move_mix=(0.5, 0.5)) -> tuple[float, float]:
    can_split = any(s >= 2 for s in sizes)
    can_merge = len(sizes) >= 2
    if can_split and can_merge:
        return move_mix[0], move_mix[1]
    return float(can_split), float(can_merge)


def _log_split_prob(sizes, j, move_mix):
    """log q of splitting group `j` of `sizes` at one given cut."""
    p_split = split_merge_probs(sizes, move_mix)[0]
    splittable = sum(1 for s in sizes if s >= 2)
    return math.log(p_split) - math.log(splittable) - math.log(sizes[j] - 1)


def _log_merge_prob(sizes, move_mix):
    p_merge = split_merge_probs(sizes, move_mix)[1]
    return math.log(p_merge) - math.log(len(sizes) - 1)


def propose_split(
    state: ChainState,
    rng: np.random.Generator,
    move_mix=(0.5, 0.5),
    group: Optional[int] = None,
    cut: Optional[int] = None,
) -> Proposal:
    """Split a non-singleton group in two at a uniformly chosen cut.

    `group` (0-based) and `cut` (size of the left piece) may be fixed by the
    caller; otherwise both are drawn uniformly.
    """
    sizes = state.partition.sizes
    candidates = [j for j, s in enumerate(sizes) if s >= 2]
    if not candidates:
        raise NoSplittableGroup(f"all groups of {sizes} are singletons")
    if group is None:
        group = candidates[int(rng.integers(len(candidates)))]
    if sizes[group] < 2:
        raise NoSplittableGroup(f"group {group + 1} has size {sizes[group]}")
    if cut is None:
        cut = 1 + int(rng.integers(sizes[group] - 1))
    if not 1 <= cut < sizes[group]:
        raise ValueError(f"cut {cut} outside 1..{sizes[group] - 1}")
    new = sizes[:group] + (cut, sizes[group] - cut) + sizes[group + 1 :]
    log_ratio = _log_merge_prob(new, move_mix) - _log_split_prob(sizes, group, move_mix)
    return Proposal(Partition(new), log_ratio, (group, group + 1), (group, group + 2), "split")


def propose_merge(
    state: ChainState,
    rng: np.random.Generator,
    move_mix=(0.5, 0.5),
    pair: Optional[int] = None,
) -> Proposal:
    """Merge groups `pair` and `pair + 1` (0-based), chosen uniformly by default."""
    sizes = state.partition.sizes
    k = len(sizes)
    if k < 2:
        raise SingleGroup("cannot merge a single group")
    if pair is None:
        pair = int(rng.integers(k - 1))
    new = sizes[:pair] + (sizes[pair] + sizes[pair + 1],) + sizes[pair + 2 :]
    log_ratio = _log_split_prob(new, pair, move_mix) - _log_merge_prob(sizes, move_mix)
    return Proposal(Partition(new), log_ratio, (pair, pair + 2), (pair, pair + 1), "merge")


def propose_shuffle(
    state: ChainState,
    rng: np.random.Generator,
    pair: Optional[int] = None,
    boundary: Optional[int] = None,
) -> Proposal:
    """Redraw the boundary between two adjacent groups, keeping both nonempty.

    `boundary` is the new size of the left group.
    """
    sizes = state.partition.sizes
    k = len(sizes)
    if k < 2:
        raise SingleGroup("shuffle needs two groups")
    if pair is None:
        pair = int(rng.integers(k - 1))
    total = sizes[pair] + sizes[pair + 1]
    if boundary is None:
        boundary = 1 + int(rng.integers(total - 1))
    if not 1 <= boundary < total:
        raise ValueError(f"boundary {boundary} outside 1..{total - 1}")
    new = sizes[:pair] + (boundary, total - boundary) + sizes[pair + 2 :]
    return Proposal(Partition(new), 0.0, (pair, pair + 2), (pair, pair + 2), "shuffle")


def _span_log_marginal(state, partition, span, prior, posterior):
    bounds = partition.offsets
    total = 0.0
    for j in range(*span):
        n, mean, ss = state.block_stats(bounds[j], bounds[j + 1])
        total += log_marginal_from_stats(prior, n, mean, ss, posterior)
    return total


def log_acceptance(
    state: ChainState,
    proposal: Proposal,
    hyper: Hyperparams,
    posterior: PosteriorFn = posterior_from_stats,
) -> float:
    """Log Metropolis-Hastings ratio with group parameters integrated out."""
    prior = kernel_prior(hyper)
    old, new = state.partition, proposal.new_partition
    log_prior = log_restricted_prior(new, state.alpha) - log_restricted_prior(old, state.alpha)
    log_lik = _span_log_marginal(state, new, proposal.new_span, prior, posterior) - _span_log_marginal(
        state, old, proposal.old_span, prior, posterior
    )
    return log_prior + log_lik + proposal.log_proposal_ratio


def accept_partition_move(
    state: ChainState,
    proposal: Proposal,
    hyper: Hyperparams,
    rng: np.random.Generator,
    posterior: PosteriorFn = posterior_from_stats,
) -> ChainState:
    """Accept or reject `proposal`; on acceptance redraw the rewritten groups' parameters."""
    log_a = log_acceptance(state, proposal, hyper, posterior)
    if log_a < 0.0 and math.log(rng.random()) >= log_a:
        return state
    new = proposal.new_partition
    (o0, o1), (n0, n1) = proposal.old_span, proposal.new_span
    mu_new, lam_new = _draw_groups(state, n0, n1, kernel_prior(hyper), rng, posterior, partition=new)
    mu = np.concatenate((state.mu[:o0], mu_new, state.mu[o1:]))
    lam = np.concatenate((state.lam[:o0], lam_new, state.lam[o1:]))
    return state.evolve(partition=new, mu=mu, lam=lam)


def partition_step(
    state: ChainState,
    hyper: Hyperparams,
    rng: np.random.Generator,
    move_mix=(0.5, 0.5),
    posterior: PosteriorFn = posterior_from_stats,
) -> ChainState:
    """One split-or-merge step followed by one shuffle."""
    p_split, p_merge = split_merge_probs(state.partition.sizes, move_mix)
    if p_split + p_merge == 0.0:
        return state
    if rng.random() < p_split:
        proposal = propose_split(state, rng, move_mix)
    else:
        proposal = propose_merge(state, rng, move_mix)
    state = accept_partition_move(state, proposal, hyper, rng, posterior)
    if state.k >= 2:
        state = accept_partition_move(state, propose_shuffle(state, rng), hyper, rng, posterior)
    return state


# -- full kernel -------------------------------------------------------------------


def transition(
    state: ChainState,
    lo: np.ndarray,
    hi: np.ndarray,
    hyper: Hyperparams,
    rng: np.random.Generator,
    move_mix=(0.5, 0.5),
    posterior: PosteriorFn = posterior_from_stats,
) -> ChainState:
    """One full iteration given per-observation bin bounds `lo`, `hi`."""
    state = partition_step(state, hyper, rng, move_mix, posterior)
    state = _update_latent(state, lo, hi, rng)
    state = update_params(state, hyper, rng, posterior)
    return update_alpha(state, hyper, rng)


def run_chain(
    dataset: BinnedDataset,
    hyper: Hyperparams,
    config: SamplerConfig,
    chain: int = 0,
    check: bool = False,
    progress: Optional[Callable[[int, ChainState], None]] = None,
) -> Trace:
    """Run one chain and keep every `thin`-th state after burn-in.

    The random stream is derived from ``config.seed`` and `chain`, so
    chains with different indices are independent and reruns are exact.
    """
    rng = chain_stream(config.seed, chain)
    state = init_state(dataset, hyper, rng)
    lo, hi = bin_bounds(dataset.layout.edges, state.e)
    edges = dataset.layout.edges
    trace = Trace()
    for it in range(1, config.iterations + 1):
        state = transition(state, lo, hi, hyper, rng, config.move_mix)
        if check:
            state.check(edges)
        if it > config.burn_in and (it - config.burn_in) % config.thin == 0:
            trace.append(it, state)
        if progress is not None:
            progress(it, state)
        if it % 5000 == 0:
            log.debug("chain %d iteration %d: k=%d alpha=%.4g", chain, it, state.k, state.alpha)
    return trace
