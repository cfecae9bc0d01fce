"""Fractional integrals and derivatives of uniformly sampled signals.

All operators use product integration: the signal is replaced by its
piecewise-linear interpolant and the memory kernel is integrated exactly
against each hat function. For the power law K(s) = s**(alpha-1)/Gamma(alpha)
this gives the second-order product-trapezoid rule for J^alpha.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from ._backend import kernels
from .errors import InvalidOrder, InvalidParams

# lags at or beyond this use the 1/m expansion of the power-law moments
_SERIES_LAG = 8
_SERIES_TERMS = 40


@dataclass(frozen=True)
class TimeGrid:
    dt: float
    n_steps: int
    t0: float = 0.0

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise InvalidParams(f"dt must be positive, got {self.dt}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise InvalidParams(f"n_steps must be a positive integer, got {self.n_steps}")
        if self.t0 != 0.0:
            raise InvalidParams("memory integrals start at t = 0; t0 must be 0")

    @classmethod
    def spanning(cls, t_max, n_steps):
        return cls(t_max / n_steps, int(n_steps))

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(self.n_steps + 1)

    @property
    def t_max(self):
        return self.t0 + self.dt * self.n_steps


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Samples on a TimeGrid along axis 0; extra axes are independent columns."""

    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 0 or v.shape[0] != self.grid.n_steps + 1:
            raise InvalidParams(
                f"expected {self.grid.n_steps + 1} samples along axis 0, got shape {v.shape}"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid, fn):
        return cls(grid, np.asarray(fn(grid.times), dtype=float))

    @property
    def times(self):
        return self.grid.times

    def __len__(self):
        return self.values.shape[0]


def _binom_series(coef, m):
    """sum_k coef[k] * m**-k for k >= 2, evaluated per lag (Horner in 1/m)."""
    u = 1.0 / m
    acc = np.zeros_like(u)
    for c in coef[:1:-1]:
        acc = (acc + c) * u
    return acc * u


def power_law_moments(alpha, dt, n):
    """Product-trapezoid moments (A, B) of t**(alpha-1)/Gamma(alpha) for lags 0..n-1.

    A[m] weights the later node and B[m] the earlier node of the subinterval
    whose lag (distance from the evaluation time, in steps) is m.
    """
    alpha = float(alpha)
    m = np.arange(n, dtype=float)
    scale = dt ** alpha / special.gamma(alpha + 2.0)
    a = np.empty(n)
    b = np.empty(n)
    near = m < _SERIES_LAG
    mn = m[near]
    a[near] = (mn + 1.0) ** (alpha + 1.0) - mn ** alpha * (mn + alpha + 1.0)
    b[near] = (mn + 1.0) ** alpha * (alpha - mn) + mn ** (alpha + 1.0)
    if (~near).any():
        # closed forms cancel to ~m**(alpha-1) out of ~m**(alpha+1); expand instead
        k = np.arange(_SERIES_TERMS + 1)
        c1 = special.binom(alpha + 1.0, k)
        c0 = special.binom(alpha, k)
        cb = np.zeros_like(c0)
        cb[1:] = alpha * c0[:-1]
        cb -= c0
        mf = m[~near]
        lead = mf ** (alpha + 1.0)
        a[~near] = lead * _binom_series(c1, mf)
        b[~near] = lead * _binom_series(cb, mf)
    return scale * a, scale * b


def assemble_weights(a, b):
    """Fold per-lag moments into (conv, first) for ``history_convolve``.

    out[n] = sum_{i=1..n} conv[n-i] f_i + first[n-1] f_0
    """
    conv = np.array(a, dtype=float)
    conv[1:] += b[:-1]
    first = np.array(b, dtype=float)
    return conv, first


def product_weights(alpha, dt, n):
    return assemble_weights(*power_law_moments(alpha, dt, n))


class MemoryKernel:
    """Memory kernel K(t - tau) of a causal convolution.

    Build with ``MemoryKernel.power_law(alpha)`` or ``MemoryKernel.custom(fn)``.
    """

    def __init__(self, kind, alpha=None, fn=None, name=None):
        if kind == "power_law":
            if alpha is None or not (0.0 < alpha < 1.0):
                raise InvalidOrder(f"power-law kernel needs alpha in (0, 1), got {alpha}")
        elif kind == "custom":
            if not callable(fn):
                raise InvalidParams("custom kernel needs a callable K(s)")
        else:
            raise InvalidParams(f"unknown kernel kind {kind!r}")
        self.kind = kind
        self.alpha = None if alpha is None else float(alpha)
        self.fn = fn
        self.name = name or kind

    @classmethod
    def power_law(cls, alpha):
        return cls("power_law", alpha=alpha)

    @classmethod
    def custom(cls, fn, name=None):
        return cls("custom", fn=fn, name=name)

    def __repr__(self):
        if self.kind == "power_law":
            return f"MemoryKernel.power_law({self.alpha})"
        return f"MemoryKernel.custom({self.name})"

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "power_law":
            return s ** (self.alpha - 1.0) / special.gamma(self.alpha)
        return np.asarray(self.fn(s), dtype=float)

    def moments(self, dt, n):
        """(A, B): integrals of K against the two hat halves on each lag interval."""
        if self.kind == "power_law":
            return power_law_moments(self.alpha, dt, n)
        a = np.empty(n)
        b = np.empty(n)
        fn = self.fn
        for m in range(n):
            lo, hi = m * dt, (m + 1) * dt
            a[m] = integrate.quad(lambda s: fn(s) * (hi - s), lo, hi, limit=200)[0] / dt
            b[m] = integrate.quad(lambda s: fn(s) * (s - lo), lo, hi, limit=200)[0] / dt
        return a, b

    def weights(self, dt, n):
        return assemble_weights(*self.moments(dt, n))


def _convolve(signal, conv, first):
    out = kernels.history_convolve(signal.values.reshape(len(signal), -1), conv, first)
    return SampledSignal(signal.grid, out.reshape(signal.values.shape))


def kernel_convolve(signal, kernel):
    """out[n] ~ int_0^{t_n} K(t_n - tau) signal(tau) dtau, out[0] = 0."""
    conv, first = kernel.weights(signal.grid.dt, signal.grid.n_steps)
    return _convolve(signal, conv, first)


def _check_order(alpha, allow_one):
    alpha = float(alpha)
    ok = 0.0 < alpha < 1.0 or (allow_one and alpha == 1.0)
    if not ok:
        span = "(0, 1]" if allow_one else "(0, 1)"
        raise InvalidOrder(f"order must lie in {span}, got {alpha}")
    return alpha


def rl_integral(signal, alpha):
    """Riemann-Liouville integral J^alpha, alpha in (0, 1].

    alpha = 1 is the cumulative trapezoid rule.
    """
    alpha = _check_order(alpha, True)
    conv, first = product_weights(alpha, signal.grid.dt, signal.grid.n_steps)
    return _convolve(signal, conv, first)


def l1_weights(alpha, dt, n):
    """L1 coefficients c * ((j+1)**(1-alpha) - j**(1-alpha)), j = 0..n-1."""
    j = np.arange(n, dtype=float)
    p = 1.0 - alpha
    return dt ** -alpha / special.gamma(2.0 - alpha) * ((j + 1.0) ** p - j ** p)


def caputo_derivative(signal, alpha, *, at_zero="zero"):
    """Caputo derivative J^{1-alpha} d/dt via the L1 scheme.

    The derivative is taken as constant on each step and the kernel
    (t - tau)**(-alpha) / Gamma(1 - alpha) is integrated exactly against it.

    ``at_zero`` sets output[0]: ``"zero"`` is the limit for signals smoother
    than t**alpha at the origin. ``"hold"`` copies output[1] back to t = 0,
    for results such as d^alpha t**alpha that tend to a nonzero constant; feed
    such a result to another Caputo derivative with a zero start and the
    artificial jump at t = 0 turns the pair into a Riemann-Liouville derivative.
    """
    alpha = _check_order(alpha, False)
    if at_zero not in ("zero", "hold"):
        raise InvalidParams(f"at_zero must be 'zero' or 'hold', got {at_zero!r}")
    g = signal.grid
    v = signal.values.reshape(len(signal), -1)
    d = np.zeros_like(v)
    d[1:] = np.diff(v, axis=0)
    w = l1_weights(alpha, g.dt, g.n_steps)
    out = kernels.history_convolve(d, w, np.zeros(g.n_steps))
    if at_zero == "hold":
        out[0] = out[1]
    return SampledSignal(g, out.reshape(signal.values.shape))


def time_derivative(signal, order=2):
    """Backward-difference d/dt of first or second order, output[0] = 0.

    The second-order (BDF2) stencil falls back to first order at step 1.
    """
    g = signal.grid
    v = signal.values.reshape(len(signal), -1)
    out = np.zeros_like(v)
    out[1:] = (v[1:] - v[:-1]) / g.dt
    if order == 2 and len(v) > 2:
        out[2:] = (3.0 * v[2:] - 4.0 * v[1:-1] + v[:-2]) / (2.0 * g.dt)
    elif order not in (1, 2):
        raise InvalidParams(f"order must be 1 or 2, got {order}")
    return SampledSignal(g, out.reshape(signal.values.shape))
