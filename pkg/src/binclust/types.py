"""Shared domain records for binned-data clustering.

Bins are half-open intervals ``(t_{l-1}, t_l]``.  Bin indices are 1-based
in file formats and messages, 0-based in arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import accumulate
from typing import Optional, Sequence

import numpy as np


class BinclustError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(BinclustError, ValueError):
    pass


class NonIncreasingEdges(ValidationError):
    pass


class NonIncreasingCenters(ValidationError):
    pass


class TooFewCenters(ValidationError):
    pass


class NegativeFrequency(ValidationError):
    pass


class EmptyDataset(ValidationError):
    pass


class CenterOutsideBin(ValidationError):
    pass


class InvalidPartition(ValidationError):
    pass


class InvalidAlpha(ValidationError):
    pass


@dataclass(frozen=True)
class BinLayout:
    """Bin edges ``t_0 < ... < t_m`` and optional representative centers."""

    edges: tuple[float, ...]
    centers: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(float(t) for t in self.edges))
        if self.centers is not None:
            object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))

    @property
    def m(self) -> int:
        return len(self.edges) - 1

    @property
    def lower(self) -> float:
        return self.edges[0]

    @property
    def upper(self) -> float:
        return self.edges[-1]

    def midpoints(self) -> tuple[float, ...]:
        e = self.edges
        return tuple(0.5 * (e[l] + e[l + 1]) for l in range(self.m))

    def reporting_centers(self) -> tuple[float, ...]:
        """Centers if supplied, else bin midpoints."""
        return self.centers if self.centers is not None else self.midpoints()

    def validate(self) -> None:
        e = self.edges
        if len(e) < 2:
            raise NonIncreasingEdges("a layout needs at least two edges (m >= 1)")
        for l in range(1, len(e)):
            if not e[l] > e[l - 1]:
                raise NonIncreasingEdges(
                    f"edges must be strictly increasing: t_{l - 1}={e[l - 1]!r}, t_{l}={e[l]!r}"
                )
        if self.centers is not None:
            if len(self.centers) != self.m:
                raise CenterOutsideBin(f"expected {self.m} centers, got {len(self.centers)}")
            for l, c in enumerate(self.centers, start=1):
                if not (e[l - 1] < c <= e[l]):
                    raise CenterOutsideBin(f"center {c!r} of bin {l} lies outside ({e[l - 1]}, {e[l]}]")


@dataclass(frozen=True)
class BinnedDataset:
    layout: BinLayout
    freqs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "freqs", tuple(int(f) for f in self.freqs))

    @property
    def n(self) -> int:
        return sum(self.freqs)

    @property
    def m(self) -> int:
        return self.layout.m


def validate_dataset(dataset: BinnedDataset) -> None:
    """Raise a :class:`ValidationError` subclass unless `dataset` is well formed."""
    dataset.layout.validate()
    if len(dataset.freqs) != dataset.layout.m:
        raise ValidationError(
            f"{len(dataset.freqs)} frequencies given for {dataset.layout.m} bins"
        )
    for l, f in enumerate(dataset.freqs, start=1):
        if f < 0:
            raise NegativeFrequency(f"bin {l} has negative frequency {f}")
    if dataset.n == 0:
        raise EmptyDataset("all frequencies are zero")


@dataclass(frozen=True)
class Partition:
    """A gap-free partition of indices ``1..n`` stored as its group sizes."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes:
            raise InvalidPartition("a partition needs at least one group")
        if any(s < 1 for s in sizes):
            raise InvalidPartition(f"group sizes must be positive: {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def k(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        """Group boundaries ``(0, n_1, n_1+n_2, ..., n)`` as 0-based offsets."""
        return tuple(accumulate(self.sizes, initial=0))

    def bounds(self) -> np.ndarray:
        return np.asarray(self.offsets)

    def labels(self) -> np.ndarray:
        """0-based group label of each observation."""
        return np.repeat(np.arange(self.k), self.sizes)

    def token(self) -> str:
        return "-".join(str(s) for s in self.sizes)

    @classmethod
    def from_token(cls, token: str) -> "Partition":
        return cls(tuple(int(s) for s in token.split("-")))

    def __iter__(self):
        return iter(self.sizes)

    def __len__(self):
        return len(self.sizes)


@dataclass(frozen=True)
class GroupParams:
    mu: float
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValidationError(f"precision must be positive, got {self.lam}")

    @property
    def sd(self) -> float:
        return self.lam ** -0.5


@dataclass(frozen=True)
class Hyperparams:
    """Normal-gamma base measure ``(omega, c, a, b)`` and the gamma prior on alpha.

    The kernel prior is ``mu | lam ~ N(omega, c / lam)``, ``lam ~ Ga(a, b)``
    (shape, rate).  ``alpha ~ Ga(alpha_shape, alpha_rate)``.
    """

    omega: float = 0.0
    c: float = 1.0
    a: float = 1.1
    b: float = 1.0
    alpha_shape: float = 1.0
    alpha_rate: float = 1.1

    def __post_init__(self):
        for name in ("c", "a", "b", "alpha_shape", "alpha_rate"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True, eq=False)
class ChainState:
    """One MCMC state.

    ``y`` are the latent observations, ``e`` their 0-based bin indices,
    ``mu``/``lam`` hold one entry per group of ``partition``.
    """

    y: np.ndarray
    e: np.ndarray
    partition: Partition
    mu: np.ndarray
    lam: np.ndarray
    alpha: float

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def k(self) -> int:
        return self.partition.k

    @property
    def params(self) -> list[GroupParams]:
        return [GroupParams(float(m), float(l)) for m, l in zip(self.mu, self.lam)]

    def evolve(self, **changes) -> "ChainState":
        """Copy with `changes`; cached prefix sums survive when ``y`` is kept."""
        new = replace(self, **changes)
        if "y" not in changes and "_stats" in self.__dict__:
            new.__dict__["_stats"] = self.__dict__["_stats"]
        return new

    @cached_property
    def _stats(self):
        # shifted prefix sums; the shift keeps sum-of-squares cancellation small
        shift = float(np.mean(self.y))
        d = self.y - shift
        s1 = np.concatenate(([0.0], np.cumsum(d))).tolist()
        s2 = np.concatenate(([0.0], np.cumsum(d * d))).tolist()
        return shift, s1, s2

    def block_stats(self, start: int, stop: int) -> tuple[int, float, float]:
        """``(n, mean, sum of squared deviations)`` of ``y[start:stop]``."""
        shift, s1, s2 = self._stats
        n = stop - start
        t1 = s1[stop] - s1[start]
        t2 = s2[stop] - s2[start]
        dm = t1 / n
        ss = t2 - n * dm * dm
        return n, shift + dm, max(ss, 0.0)

    def check(self, edges: Sequence[float]) -> None:
        """Assert the structural invariants against bin `edges`."""
        edges = np.asarray(edges, dtype=float)
        if self.partition.n != self.n:
            raise InvalidPartition(f"partition covers {self.partition.n} of {self.n} observations")
        if len(self.mu) != self.k or len(self.lam) != self.k:
            raise ValidationError("one (mu, lambda) pair per group is required")
        if np.any(self.lam <= 0):
            raise ValidationError("precisions must be positive")
        if not self.alpha > 0:
            raise InvalidAlpha(f"alpha must be positive, got {self.alpha}")
        lo = edges[self.e]
        hi = edges[self.e + 1]
        bad = ~((self.y > lo) & (self.y <= hi))
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise ValidationError(
                f"latent y[{i + 1}]={self.y[i]!r} outside bin {self.e[i] + 1} ({lo[i]}, {hi[i]}]"
            )


@dataclass
class Trace:
    """Retained draws of a chain, one entry per kept iteration."""

    iterations: list[int] = field(default_factory=list)
    partitions: list[Partition] = field(default_factory=list)
    mu_draws: list[np.ndarray] = field(default_factory=list)
    lam_draws: list[np.ndarray] = field(default_factory=list)
    alpha_draws: list[float] = field(default_factory=list)

    def append(self, iteration: int, state: ChainState) -> None:
        self.iterations.append(iteration)
        self.partitions.append(state.partition)
        self.mu_draws.append(np.array(state.mu, dtype=float))
        self.lam_draws.append(np.array(state.lam, dtype=float))
        self.alpha_draws.append(float(state.alpha))

    def __len__(self) -> int:
        return len(self.partitions)

    @property
    def params_draws(self) -> list[list[GroupParams]]:
        return [
            [GroupParams(float(m), float(l)) for m, l in zip(mu, lam)]
            for mu, lam in zip(self.mu_draws, self.lam_draws)
        ]
