"""Functional equations for symmetric characteristic functions.

Everything here works with real, even characteristic functions ``f``:
the mixture identity ``f(t) = f(t/2)**2 * (f(t) + 1) / 2``, the joint and
marginal characteristic functions of the random-coefficient linear forms,
and the operator ``A f(t) = f(t/2)**2 * (f(t) + 1) / 2`` on dyadic grids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sech_core import InvalidParameterError

__all__ = [
    "DivergenceError",
    "DyadicGridFn",
    "ZeroFreeReport",
    "residual_polya",
    "apply_A",
    "iterate_A",
    "solve_doubling",
    "doubling_eval",
    "grid_points",
    "joint_cf",
    "marginal_cf",
    "factorization_residual",
    "diag_residual",
    "zero_free_check",
    "DIVERGENCE_MARGIN",
]

DIVERGENCE_MARGIN = 1e-9


class DivergenceError(ArithmeticError):
    """The doubling recursion hit the pole of ``g / (2 - g)``."""

    def __init__(self, message, t):
        super().__init__(message)
        self.t = t


@dataclass(frozen=True)
class DyadicGridFn:
    """Values on ``t_k = k * t_max / 2**depth`` for ``k = 0 .. 2**depth``."""

    t_max: float
    depth: int
    values: np.ndarray

    def __post_init__(self):
        if self.t_max <= 0:
            raise InvalidParameterError("t_max must be positive")
        if self.depth < 1:
            raise InvalidParameterError("depth must be at least 1")
        values = np.array(self.values, dtype=float)
        if values.shape != (2**self.depth + 1,):
            raise InvalidParameterError(f"expected {2**self.depth + 1} values, got {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def t(self) -> np.ndarray:
        return grid_points(self.t_max, self.depth)

    @property
    def step(self) -> float:
        return self.t_max / 2**self.depth

    @classmethod
    def from_function(cls, f, t_max, depth):
        return cls(t_max, depth, f(grid_points(t_max, depth)))

    def at_half(self) -> np.ndarray:
        """``f(t_k / 2)`` for every grid index ``k``.

        Even ``k`` is exact.  Odd ``k`` lands midway between ``j = (k-1)/2``
        and ``j + 1`` and uses the four-point cubic ``(-1, 9, 9, -1) / 16``;
        the point left of the origin is supplied by evenness.
        """
        v = self.values
        out = np.empty_like(v)
        out[0::2] = v[: v.size // 2 + 1]
        j = np.arange((v.size - 1) // 2)
        left = v[np.abs(j - 1)]
        out[1::2] = (-left + 9.0 * v[j] + 9.0 * v[j + 1] - v[j + 2]) / 16.0
        return out


def grid_points(t_max, depth):
    return np.arange(2**depth + 1) * (t_max / 2**depth)


@dataclass(frozen=True)
class ZeroFreeReport:
    zero_free: bool
    first_violation: float | None = None
    reason: str | None = None


def residual_polya(f, t):
    """``f(t) - f(t/2)**2 * (f(t) + 1) / 2``."""
    t = np.asarray(t, dtype=float)
    ft = f(t)
    return ft - f(0.5 * t) ** 2 * (ft + 1.0) / 2.0


def apply_A(f: DyadicGridFn) -> DyadicGridFn:
    half = f.at_half()
    return DyadicGridFn(f.t_max, f.depth, half**2 * (f.values + 1.0) / 2.0)


def iterate_A(f: DyadicGridFn, iterations: int, reference=None):
    """Apply ``A`` repeatedly; returns the final grid and the sup-distance
    history to ``reference`` (a grid function or callable) when given.

    Exploration only: nothing is claimed about convergence.
    """
    ref = None
    if reference is not None:
        ref = reference.values if isinstance(reference, DyadicGridFn) else reference(f.t)
    history = []
    g = f
    for _ in range(iterations):
        g = apply_A(g)
        if ref is not None:
            history.append(float(np.max(np.abs(g.values - ref))))
    return g, history


def doubling_eval(sigma: float, t, depth: int) -> np.ndarray:
    """Doubling-recursion value at arbitrary ``t`` (see :func:`solve_doubling`)."""
    if sigma <= 0:
        raise InvalidParameterError("sigma must be positive")
    if depth < 10:
        raise InvalidParameterError("depth must be at least 10")
    t = np.asarray(t, dtype=float)
    t0 = t / 2.0**depth
    e = 0.5 * sigma**2 * t0**2
    for _ in range(depth):
        f = 1.0 - e
        g = f * f
        bad = g >= 2.0 - DIVERGENCE_MARGIN
        if np.any(bad):
            k = np.unravel_index(int(np.argmax(bad)), bad.shape)
            tk = float(t[k])
            raise DivergenceError(f"doubling recursion diverged at t={tk!r} (g={float(g[k])!r})", t=tk)
        u = e * (2.0 - e)
        e = 2.0 * u / (1.0 + u)
    return 1.0 - e


def solve_doubling(sigma: float, t_max: float, depth: int, grid_depth: int | None = None) -> DyadicGridFn:
    """Construct the solution of the mixture identity with curvature ``sigma``.

    For every output grid point ``t`` the recursion starts at
    ``t0 = t / 2**depth`` from ``f(t0) = 1 - sigma**2 * t0**2 / 2`` and applies
    ``f(2s) = g / (2 - g)``, ``g = f(s)**2``, ``depth`` times.

    The iteration is carried on the deficit ``e = 1 - f``, for which the
    update is ``e' = 2 e (2 - e) / (1 + e (2 - e))``; at depth 30 the seed
    deficit is far below double-precision epsilon, so iterating ``f`` itself
    would start from exactly 1.

    ``grid_depth`` sets the output resolution (default ``min(depth, 10)``).
    """
    if grid_depth is None:
        grid_depth = min(depth, 10)
    return DyadicGridFn(t_max, grid_depth, doubling_eval(sigma, grid_points(t_max, grid_depth), depth))


def joint_cf(f, s, t):
    """Joint characteristic function of ``(L1, L2)`` at ``(s, t)``."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    return f(0.5 * (s + t)) * f(0.5 * (s - t)) * (f(s) + f(t)) / 2.0


def marginal_cf(f, s):
    s = np.asarray(s, dtype=float)
    return f(0.5 * s) ** 2 * (f(s) + 1.0) / 2.0


def factorization_residual(f, s, t):
    return joint_cf(f, s, t) - marginal_cf(f, s) * marginal_cf(f, t)


def diag_residual(f, s):
    return f(s) ** 2 - marginal_cf(f, s) ** 2


def zero_free_check(f: DyadicGridFn, eps: float = 1e-15) -> ZeroFreeReport:
    """Flag grid values below ``eps`` in magnitude or sign changes between
    neighbours; ``first_violation`` is the smallest offending ``t``."""
    v = f.values
    small = np.abs(v) < eps
    flips = np.zeros_like(small)
    flips[1:] = np.signbit(v[1:]) != np.signbit(v[:-1])
    bad = small | flips
    if not np.any(bad):
        return ZeroFreeReport(True)
    k = int(np.argmax(bad))
    reason = "small" if small[k] else "sign change"
    return ZeroFreeReport(False, float(f.t[k]), reason)
