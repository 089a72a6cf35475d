"""Samplers for the mixture identity, the random-coefficient linear forms
and random sums with a Chebyshev-distributed number of terms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cheb_index import index_pmf, index_sample
from .sech_core import InvalidParameterError, SampleBatch

__all__ = [
    "PairedBatch",
    "Sampler",
    "bernoulli_eps",
    "sample_mixture",
    "sample_forms",
    "sample_random_sum",
    "BASES",
    "NORMALIZATIONS",
    "point_mass",
]

# (rng, n) -> array of n draws
Sampler = Callable[[np.random.Generator, int], np.ndarray]

NORMALIZATIONS = ("inv_n", "inv_sqrt_n")
BASES = ("coin", "uniform", "normal")

# bound on the number of base draws generated at once by the generic path
_CHUNK = 1 << 22


@dataclass
class PairedBatch:
    l1: np.ndarray
    l2: np.ndarray
    label: str = ""
    seed: int | None = None
    stream: tuple = ()

    def __post_init__(self):
        self.l1 = np.asarray(self.l1, dtype=float)
        self.l2 = np.asarray(self.l2, dtype=float)
        if self.l1.shape != self.l2.shape:
            raise InvalidParameterError("l1 and l2 must have equal length")
        if not (np.all(np.isfinite(self.l1)) and np.all(np.isfinite(self.l2))):
            raise InvalidParameterError("paired batch contains non-finite values")

    def __len__(self):
        return self.l1.size


def _draw(sampler, rng, n):
    return np.asarray(sampler(rng, n), dtype=float)


def bernoulli_eps(rng: np.random.Generator, n: int) -> np.ndarray:
    """Fair 0/1 coin."""
    return rng.integers(0, 2, size=n).astype(float)


def point_mass(value: float = 0.0) -> Sampler:
    return lambda rng, n: np.full(n, float(value))


def sample_mixture(rng: np.random.Generator, sampler: Sampler, n: int) -> SampleBatch:
    """Draws of ``(X1 + X2) / 2 + eps * X3`` with fresh ``X``'s and ``eps``."""
    if n < 1:
        raise InvalidParameterError("n must be at least 1")
    x1 = _draw(sampler, rng, n)
    x2 = _draw(sampler, rng, n)
    x3 = _draw(sampler, rng, n)
    eps = bernoulli_eps(rng, n)
    return SampleBatch(0.5 * (x1 + x2) + eps * x3, label="mixture")


def sample_forms(rng: np.random.Generator, sampler: Sampler, n: int) -> PairedBatch:
    """Pairs ``L1 = (X1+X2)/2 + eps X3``, ``L2 = (X1-X2)/2 + (1-eps) X3``
    sharing ``X1, X2, X3, eps`` within each pair."""
    if n < 1:
        raise InvalidParameterError("n must be at least 1")
    x1 = _draw(sampler, rng, n)
    x2 = _draw(sampler, rng, n)
    x3 = _draw(sampler, rng, n)
    eps = bernoulli_eps(rng, n)
    return PairedBatch(0.5 * (x1 + x2) + eps * x3, 0.5 * (x1 - x2) + (1.0 - eps) * x3, label="forms")


def base_sampler(name: str) -> Sampler:
    """Zero-mean, unit-variance base laws for random sums."""
    if name == "coin":
        return lambda rng, n: 2.0 * rng.integers(0, 2, size=n) - 1.0
    if name == "uniform":
        r3 = math.sqrt(3.0)
        return lambda rng, n: r3 * (2.0 * rng.random(n) - 1.0)
    if name == "normal":
        return lambda rng, n: rng.standard_normal(n)
    raise InvalidParameterError(f"unknown base {name!r}; expected one of {BASES}")


def _sum_exact(rng, base: str, counts: np.ndarray) -> np.ndarray:
    # sums of nu i.i.d. terms generated directly from their exact law
    if base == "coin":
        return 2.0 * rng.binomial(counts, 0.5) - counts
    return np.sqrt(counts) * rng.standard_normal(counts.size)


def _sum_generic(rng, sampler, counts: np.ndarray) -> np.ndarray:
    out = np.empty(counts.size)
    start = 0
    while start < counts.size:
        stop = start
        total = 0
        while stop < counts.size and (stop == start or total + counts[stop] <= _CHUNK):
            total += int(counts[stop])
            stop += 1
        draws = _draw(sampler, rng, total)
        offsets = np.concatenate([[0], np.cumsum(counts[start:stop])[:-1]])
        out[start:stop] = np.add.reduceat(draws, offsets)
        start = stop
    return out


def sample_random_sum(rng: np.random.Generator, n_param: int, base="coin", normalization: str = "inv_n",
                      m: int = 1, tail_eps: float = 1e-12) -> SampleBatch:
    """Normalized sums of ``nu`` base draws, ``nu`` with PGF ``1/T_n(1/z)``.

    ``base`` is a name from :data:`BASES` or a sampler callable.  Named
    ``coin`` and ``normal`` bases are summed through the exact law of the
    sum (binomial / Gaussian); other bases draw every term.
    """
    if normalization not in NORMALIZATIONS:
        raise InvalidParameterError(f"unknown normalization {normalization!r}; expected one of {NORMALIZATIONS}")
    if m < 1:
        raise InvalidParameterError("m must be at least 1")
    dist = index_pmf(n_param, tail_eps)
    counts = index_sample(rng, dist, size=m)
    if isinstance(base, str) and base in ("coin", "normal"):
        sums = _sum_exact(rng, base, counts)
    else:
        sampler = base_sampler(base) if isinstance(base, str) else base
        sums = _sum_generic(rng, sampler, counts)
    factor = 1.0 / n_param if normalization == "inv_n" else 1.0 / math.sqrt(n_param)
    batch = SampleBatch(sums * factor, label=f"random_sum(n={n_param}, {normalization})")
    return batch
