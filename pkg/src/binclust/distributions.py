"""Random variate generators used by the sampler.

All generators take an explicit :class:`numpy.random.Generator`; there is
no module-level random state.  Streams for independent chains come from
:func:`chain_stream`, which spawns children of one 64-bit seed.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr, ndtri

from .types import BinclustError, ValidationError

# intervals with less standard-normal mass than this go to rejection sampling
INVERSE_CDF_MIN_MASS = 1e-12
UNDERFLOW_MASS = 1e-300


class EmptyInterval(BinclustError, ValueError):
    pass


class NumericalUnderflow(BinclustError, ArithmeticError):
    pass


class InvalidParams(ValidationError):
    pass


def chain_stream(seed: int, chain: int = 0) -> np.random.Generator:
    """Independent generator for chain number `chain` under a 64-bit `seed`."""
    if not 0 <= int(seed) < 2**64:
        raise InvalidParams(f"seed must be an unsigned 64-bit integer, got {seed}")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(chain),))
    return np.random.Generator(np.random.PCG64(ss))


# -- truncated normal ---------------------------------------------------------


def _standardize(mu, sd, lo, hi):
    if not sd > 0:
        raise InvalidParams(f"sd must be positive, got {sd}")
    if not lo < hi:
        raise EmptyInterval(f"empty interval ({lo}, {hi}]")
    return (lo - mu) / sd, (hi - mu) / sd


def inverse_cdf_truncated_normal(mu: float, sd: float, lo: float, hi: float, u: float) -> float:
    """Quantile `u` of ``N(mu, sd^2)`` restricted to ``(lo, hi]``.

    Raises :class:`NumericalUnderflow` when the interval mass is too small
    to invert reliably; use :func:`sample_truncated_normal` there.
    """
    a, b = _standardize(mu, sd, lo, hi)
    flip = a > 0
    if flip:
        a, b = -b, -a
        u = 1.0 - u
    pa, pb = float(ndtr(a)), float(ndtr(b))
    if pb - pa < UNDERFLOW_MASS:
        raise NumericalUnderflow(f"interval mass {pb - pa:.3g} below {UNDERFLOW_MASS:g}")
    z = float(ndtri(pa + u * (pb - pa)))
    z = min(max(z, a), b)
    return _clamp(mu + sd * (-z if flip else z), lo, hi)


def _clamp(x: float, lo: float, hi: float) -> float:
    if x <= lo:
        return float(np.nextafter(lo, np.inf))
    if x > hi:
        return float(hi)
    return float(x)


def _tail_standard(a: float, b: float, rng: np.random.Generator) -> float:
    """Standard normal restricted to ``[a, b]`` by rejection.

    Robert (1995): a uniform proposal for short intervals, a translated
    exponential proposal for long ones in the tail.
    """
    flip = b <= 0
    if flip:
        a, b = -b, -a
    if a < 0:
        # straddles zero; only reached for very short intervals
        while True:
            z = a + (b - a) * rng.random()
            if math.log(rng.random()) <= -0.5 * z * z:
                return z
    if a * (b - a) < 1.0:
        while True:
            z = a + (b - a) * rng.random()
            if math.log(rng.random()) <= 0.5 * (a * a - z * z):
                return -z if flip else z
    rate = 0.5 * (a + math.sqrt(a * a + 4.0))
    while True:
        z = a + rng.exponential(1.0 / rate)
        if z > b:
            continue
        if math.log(rng.random()) <= -0.5 * (z - rate) ** 2:
            return -z if flip else z


def sample_truncated_normal(mu: float, sd: float, lo: float, hi: float, rng: np.random.Generator) -> float:
    """One draw of ``N(mu, sd^2)`` restricted to ``(lo, hi]``; `lo`/`hi` may be infinite."""
    a, b = _standardize(mu, sd, lo, hi)
    fa, fb = (-b, -a) if a > 0 else (a, b)
    mass = float(ndtr(fb) - ndtr(fa))
    if mass >= INVERSE_CDF_MIN_MASS:
        return inverse_cdf_truncated_normal(mu, sd, lo, hi, rng.random())
    return _clamp(mu + sd * _tail_standard(a, b, rng), lo, hi)


def truncated_normal_array(mu, sd, lo, hi, rng: np.random.Generator) -> np.ndarray:
    """Elementwise :func:`sample_truncated_normal` over broadcast arrays.

    Same algorithm; the inverse-CDF branch is vectorized and the rare
    tail intervals are handled one at a time.
    """
    mu, sd, lo, hi = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (mu, sd, lo, hi)))
    if np.any(sd <= 0):
        raise InvalidParams("sd must be positive")
    if np.any(~(lo < hi)):
        raise EmptyInterval("empty interval in truncated normal batch")
    a = (lo - mu) / sd
    b = (hi - mu) / sd
    flip = a > 0
    fa = np.where(flip, -b, a)
    fb = np.where(flip, -a, b)
    pa = ndtr(fa)
    pb = ndtr(fb)
    mass = pb - pa
    u = rng.random(mu.shape)
    with np.errstate(invalid="ignore"):
        z = ndtri(pa + u * mass)
    z = np.clip(z, fa, fb)
    z = np.where(flip, -z, z)
    tail = np.flatnonzero(~(mass >= INVERSE_CDF_MIN_MASS))
    for i in tail:
        z.flat[i] = _tail_standard(a.flat[i], b.flat[i], rng)
    x = mu + sd * z
    low = x <= lo
    if np.any(low):
        x[low] = np.nextafter(lo[low], np.inf)
    return np.minimum(x, hi)


# -- gamma / beta ---------------------------------------------------------------


def sample_gamma(shape: float, rate: float, rng: np.random.Generator) -> float:
    """Gamma draw in shape-rate parameterization, strictly positive."""
    if not (shape > 0 and rate > 0):
        raise InvalidParams(f"gamma needs positive shape and rate, got ({shape}, {rate})")
    while True:
        x = float(rng.gamma(shape, 1.0 / rate))
        if x > 0.0:
            return x


def sample_beta(a: float, b: float, rng: np.random.Generator) -> float:
    if not (a > 0 and b > 0):
        raise InvalidParams(f"beta needs positive parameters, got ({a}, {b})")
    while True:
        x = float(rng.beta(a, b))
        if 0.0 < x < 1.0:
            return x
