"""Bin construction from representative centers and membership expansion."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .types import BinLayout, EmptyDataset, NegativeFrequency, NonIncreasingCenters, TooFewCenters


def edges_from_midpoints(centers: Sequence[float]) -> BinLayout:
    """Build bin edges halfway between consecutive centers.

    The outer edges extend the first and last bins by half of the
    neighbouring gap, so every center lies inside its own bin.

    >>> edges_from_midpoints([1, 2, 4]).edges
    (0.5, 1.5, 3.0, 5.0)
    """
    tau = [float(c) for c in centers]
    m = len(tau)
    if m < 2:
        raise TooFewCenters(f"need at least two centers to derive edges, got {m}")
    for l in range(1, m):
        if not tau[l] > tau[l - 1]:
            raise NonIncreasingCenters(
                f"centers must be strictly increasing: center {l}={tau[l - 1]!r}, center {l + 1}={tau[l]!r}"
            )
    edges = [tau[0] - (tau[1] - tau[0]) / 2]
    edges += [tau[l] + (tau[l + 1] - tau[l]) / 2 for l in range(m - 1)]
    edges.append(tau[-1] + (tau[-1] - tau[-2]) / 2)
    layout = BinLayout(tuple(edges), tuple(tau))
    layout.validate()
    return layout


def expand_memberships(freqs: Sequence[int]) -> np.ndarray:
    """Repeat each 1-based bin index by its frequency.

    The result is nondecreasing and its histogram recovers `freqs`.
    """
    f = np.asarray(freqs, dtype=np.int64)
    if np.any(f < 0):
        raise NegativeFrequency("frequencies must be nonnegative")
    if f.sum() < 1:
        raise EmptyDataset("at least one observation is required")
    return np.repeat(np.arange(1, len(f) + 1), f)


def bin_index(values: Sequence[float], edges: Sequence[float]) -> np.ndarray:
    """0-based index of the half-open bin ``(t_{l-1}, t_l]`` holding each value.

    Values outside ``(t_0, t_m]`` map to -1 or m.
    """
    return np.searchsorted(np.asarray(edges, dtype=float), np.asarray(values, dtype=float), side="left") - 1
