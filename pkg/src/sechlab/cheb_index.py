"""Chebyshev polynomials and the random index with PGF ``1 / T_n(1/z)``.

Coefficient extraction
----------------------
``z**n * T_n(1/z)`` only contains even powers of ``z``, so it is a
polynomial ``R(w)`` in ``w = z**2`` with integer coefficients and
``R(0) = 2**(n-1)``.  The probabilities are ``P(nu = n + 2k) = beta_k``
where ``sum_k beta_k w**k = 1 / R(w)``.

The inversion recurrence ``beta_k = -sum_i r_i beta_{k-i} / r_0`` is badly
non-normal: a unit perturbation grows to about ``r_0 * max(beta)`` before
it decays, so plain doubles lose up to ``n`` bits.  Instead every
``beta_k`` is held as an integer multiple of ``2**-P`` and ``r_0`` is a
power of two, so the recurrence runs in exact integer arithmetic up to a
single floor per step.  The accumulated floor error is bounded by
``2**(n - 1 - P)`` for every coefficient and every partial sum, which is
recorded on the result as ``rounding_bound``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .sech_core import InvalidParameterError

__all__ = [
    "TruncationError",
    "IndexDistribution",
    "cheb_T",
    "cheb_coefficients",
    "pgf_eval",
    "index_pmf",
    "index_mean",
    "index_mean_exact",
    "index_sample",
    "HARD_CAP",
]

HARD_CAP = 10_000_000


class TruncationError(RuntimeError):
    """The requested tail mass cannot be reached within :data:`HARD_CAP` terms."""

    def __init__(self, message, *, n, terms, mass, tail_eps):
        super().__init__(message)
        self.n = n
        self.terms = terms
        self.mass = mass
        self.tail_eps = tail_eps


def cheb_T(n: int, x):
    """Degree-``n`` Chebyshev polynomial of the first kind at ``x``."""
    if n < 0:
        raise InvalidParameterError("n must be non-negative")
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), x.copy()
    if n == 0:
        return prev[()] if prev.ndim == 0 else prev
    for _ in range(n - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return cur[()] if cur.ndim == 0 else cur


@lru_cache(maxsize=None)
def cheb_coefficients(n: int) -> tuple[int, ...]:
    """Integer power-basis coefficients of ``T_n``, lowest degree first."""
    if n < 0:
        raise InvalidParameterError("n must be non-negative")
    prev, cur = [1], [0, 1]
    if n == 0:
        return tuple(prev)
    for _ in range(n - 1):
        nxt = [0] * (len(cur) + 1)
        for i, c in enumerate(cur):
            nxt[i + 1] += 2 * c
        for i, c in enumerate(prev):
            nxt[i] -= c
        prev, cur = cur, nxt
    return tuple(cur)


def pgf_eval(n: int, z):
    if n < 1:
        raise InvalidParameterError("n must be a positive integer")
    z = np.asarray(z, dtype=float)
    if np.any(~((z > 0) & (z <= 1))):
        raise InvalidParameterError("z must lie in (0, 1]")
    return 1.0 / cheb_T(n, 1.0 / z)


def _reduced_poly(n: int) -> list[int]:
    """Coefficients of R(w) with z**n T_n(1/z) = R(z**2)."""
    c = cheb_coefficients(n)
    # c_j multiplies z**(n - j); n - j is even whenever c_j != 0
    return [c[n - 2 * i] for i in range(n // 2 + 1)]


def _terms_needed(n: int, tail_eps: float) -> float:
    """Rough support length from the dominant pole z = 1/cos(pi/(2n))."""
    if n <= 1:
        return 1.0
    rho = math.cos(math.pi / (2 * n)) ** 2
    return math.log(tail_eps) / math.log(rho) + n


@dataclass
class _State:
    support: np.ndarray
    probs: np.ndarray
    cumulative: np.ndarray
    history: list  # last len(r) - 1 scaled coefficients, newest last
    total: int  # exact scaled partial sum
    count: int


@dataclass
class IndexDistribution:
    """Truncated law of the random index ``nu_n``.

    ``support``/``probs``/``cumulative`` are snapshots; the object may grow
    on demand (see :meth:`extend`), which swaps in new arrays under a lock.
    """

    n: int
    tail_eps: float
    precision_bits: int
    _r: list = field(repr=False)
    _state: _State = field(repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @property
    def support(self) -> np.ndarray:
        return self._state.support

    @property
    def probs(self) -> np.ndarray:
        return self._state.probs

    @property
    def cumulative(self) -> np.ndarray:
        return self._state.cumulative

    @property
    def tail_bound(self) -> float:
        st = self._state
        return ((1 << self.precision_bits) - st.total) / (1 << self.precision_bits)

    @property
    def rounding_bound(self) -> float:
        return math.ldexp(1.0, self.n - 1 - self.precision_bits)

    def snapshot(self):
        st = self._state
        return st.support, st.probs, st.cumulative

    def extend(self, target_mass: float) -> None:
        """Grow the stored support until its mass reaches ``target_mass``."""
        with self._lock:
            self._state = _advance(self.n, self._r, self.precision_bits, self._state, target_mass, self.tail_eps)

    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))


def _advance(n, r, bits, st: _State, target_mass, tail_eps):
    one = 1 << bits
    target = math.ceil(min(target_mass, 1.0) * one)
    if st.total >= target:
        return st
    shift = n - 1  # r[0] == 2**(n-1)
    hist = list(st.history)
    total, count = st.total, st.count
    new_scaled = []
    order = len(r) - 1
    while total < target:
        if count >= HARD_CAP:
            raise TruncationError(
                f"index pmf for n={n} did not reach mass {target_mass!r} within {HARD_CAP} terms "
                f"(reached {total / one!r})",
                n=n, terms=count, mass=total / one, tail_eps=tail_eps,
            )
        acc = 0
        for i in range(1, min(order, len(hist)) + 1):
            acc += r[i] * hist[-i]
        b = (-acc) >> shift
        if b < 0:
            b = 0
        new_scaled.append(b)
        hist.append(b)
        if len(hist) > order:
            del hist[0]
        total += b
        count += 1
    start = st.count
    ks = n + 2 * np.arange(start, count, dtype=np.int64)
    probs = np.array([b / one for b in new_scaled])
    running = total - sum(new_scaled)
    cums = []
    for b in new_scaled:
        running += b
        cums.append(running / one)
    return _State(
        support=np.concatenate([st.support, ks]),
        probs=np.concatenate([st.probs, probs]),
        cumulative=np.concatenate([st.cumulative, np.array(cums)]),
        history=hist,
        total=total,
        count=count,
    )


def _bits_for(n: int, tail_eps: float) -> int:
    return n + 64 + max(0, math.ceil(-math.log2(tail_eps)))


def index_pmf(n: int, tail_eps: float = 1e-12) -> IndexDistribution:
    """Extract the law of ``nu_n`` from the power series of ``1 / T_n(1/z)``.

    The support is extended until the stored mass reaches ``1 - tail_eps``.
    Results are cached per ``(n, tail_eps)``; the cached object is shared.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidParameterError("n must be a positive integer")
    if not 0 < tail_eps < 1:
        raise InvalidParameterError("tail_eps must lie in (0, 1)")
    return _index_pmf_cached(int(n), float(tail_eps))


@lru_cache(maxsize=64)
def _index_pmf_cached(n: int, tail_eps: float) -> IndexDistribution:
    estimate = _terms_needed(n, tail_eps)
    if estimate > HARD_CAP:
        raise TruncationError(
            f"n={n} with tail_eps={tail_eps!r} needs about {estimate:.3g} terms (cap {HARD_CAP})",
            n=n, terms=0, mass=0.0, tail_eps=tail_eps,
        )
    bits = _bits_for(n, tail_eps)
    r = _reduced_poly(n)
    one = 1 << bits
    b0 = one >> (n - 1)
    st = _State(
        support=np.array([n], dtype=np.int64),
        probs=np.array([b0 / one]),
        cumulative=np.array([b0 / one]),
        history=[b0],
        total=b0,
        count=1,
    )
    dist = IndexDistribution(n=n, tail_eps=tail_eps, precision_bits=bits, _r=r, _state=st)
    dist.extend(1.0 - tail_eps)
    return dist


def index_mean_exact(n: int) -> Fraction:
    """``P_n'(1) = T_n'(1) / T_n(1)**2`` in exact rational arithmetic."""
    if n < 1:
        raise InvalidParameterError("n must be a positive integer")
    t_prev, t_cur = 1, 1  # T_0(1), T_1(1)
    d_prev, d_cur = 0, 1  # T_0'(1), T_1'(1)
    for _ in range(n - 1):
        t_prev, t_cur = t_cur, 2 * t_cur - t_prev
        d_prev, d_cur = d_cur, 2 * t_prev + 2 * d_cur - d_prev
    return Fraction(d_cur, t_cur * t_cur)


def index_mean(n: int) -> float:
    return float(index_mean_exact(n))


def index_sample(rng: np.random.Generator, dist: IndexDistribution, size=None):
    """Inverse-CDF draws of ``nu_n``.

    Uniforms falling beyond the stored mass extend ``dist`` rather than being
    folded back onto the support.
    """
    shape = () if size is None else size
    u = rng.random(shape)
    support, _, cum = dist.snapshot()
    if np.any(u >= cum[-1]):
        dist.extend(min(float(np.max(u)) + 2.0**-52, 1.0 - 2.0**-56))
        support, _, cum = dist.snapshot()
    idx = np.searchsorted(cum, u, side="right")
    # cumulative rounds to within an ulp of u only in the last few terms
    idx = np.minimum(idx, support.size - 1)
    out = support[idx]
    return int(out) if size is None else out
