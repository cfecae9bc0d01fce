"""Closed-form solutions of the fractional flow equation.

    du/dt = mu0 d/dy (J^alpha du/dy)

Unbounded line: u = f * G with the similarity kernel

    G(y, t) = M_lam(|y| / c) / (2 c),   lam = (alpha + 1) / 2,  c = sqrt(mu0) t**lam

where M_lam(x) = W_{-lam, 1-lam}(-x) is the M-Wright function.

Strip 0 < y < h with u = 0 at both walls: each sine mode decays as
E_{alpha+1}(-mu0 (n pi / h)**2 t**(alpha+1)).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import profiles
from .errors import InvalidOrder, InvalidParams, ModeBudgetExceeded, QuadratureFailure
from .specfun import MLParams, WrightParams, m_wright, mittag_leffler, ml_values, wright

DEFAULT_TOL = 1e-10
DEFAULT_MODES = 501


@dataclass(frozen=True)
class FractionalOrder:
    """Memory exponent alpha; alpha = 1 is the wave limit."""

    alpha: float

    def __post_init__(self):
        a = self.alpha
        if not (isinstance(a, (int, float)) and math.isfinite(a) and 0.0 < a <= 1.0):
            raise InvalidOrder(f"alpha must lie in (0, 1], got {a!r}")
        object.__setattr__(self, "alpha", float(a))

    @classmethod
    def of(cls, value):
        return value if isinstance(value, cls) else cls(value)

    @property
    def gamma(self):
        """Mittag-Leffler index alpha + 1."""
        return self.alpha + 1.0

    @property
    def lam(self):
        """M-Wright index (alpha + 1) / 2."""
        return 0.5 * (self.alpha + 1.0)

    @property
    def is_wave_limit(self):
        return self.alpha == 1.0


def _positive(name, value):
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise InvalidParams(f"{name} must be positive, got {value}")
    return value


@dataclass(frozen=True)
class UnboundedProblem:
    alpha: FractionalOrder
    mu0: float
    profile: profiles.Profile

    def __post_init__(self):
        object.__setattr__(self, "alpha", FractionalOrder.of(self.alpha))
        object.__setattr__(self, "mu0", _positive("mu0", self.mu0))
        if self.alpha.is_wave_limit:
            raise InvalidOrder("the unbounded kernel needs alpha < 1")


@dataclass(frozen=True)
class BoundedProblem:
    alpha: FractionalOrder
    mu0: float
    h: float
    profile: profiles.Profile
    n_modes: int = DEFAULT_MODES

    def __post_init__(self):
        object.__setattr__(self, "alpha", FractionalOrder.of(self.alpha))
        object.__setattr__(self, "mu0", _positive("mu0", self.mu0))
        object.__setattr__(self, "h", _positive("h", self.h))
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise InvalidParams(f"n_modes must be a positive integer, got {self.n_modes}")
        object.__setattr__(self, "n_modes", int(self.n_modes))

    @property
    def a(self):
        return math.pi / self.h


@dataclass(frozen=True)
class GreenKernelSpec:
    alpha: FractionalOrder
    mu0: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", FractionalOrder.of(self.alpha))
        object.__setattr__(self, "mu0", _positive("mu0", self.mu0))
        if self.alpha.is_wave_limit:
            raise InvalidOrder("the Wright kernel needs alpha < 1")

    def spread(self, t):
        """c(t) = sqrt(mu0) t**lam, the length scale of the kernel."""
        return math.sqrt(self.mu0) * t ** self.alpha.lam

    def similarity(self, y, t):
        return abs(y) / self.spread(t)


def green_kernel(spec, y, t, tol=1e-12):
    """G(y, t) = W_{-lam,1-lam}(-|y|/c) / (2c); symmetric in y."""
    if not t > 0:
        raise InvalidParams("the kernel is distributional at t = 0; pass t > 0")
    lam = spec.alpha.lam
    c = spec.spread(t)
    w = wright(WrightParams(-lam, 1.0 - lam), -abs(float(y)) / c, tol)
    return w.value / (2.0 * c)


def fourier_mode_factor(alpha, mu0, omega, t, tol=1e-12):
    """E_{alpha+1}(-mu0 omega**2 t**(alpha+1)); 1 at t = 0."""
    g = FractionalOrder.of(alpha).gamma
    if t < 0:
        raise InvalidParams("t must be >= 0")
    if t == 0:
        return 1.0
    return mittag_leffler(MLParams(g, 1.0), -mu0 * omega * omega * t ** g, tol).value


def fourier_mode_factors(alpha, mu0, omega, t, tol=DEFAULT_TOL):
    """Vectorised ``fourier_mode_factor`` over broadcast omega and t."""
    g = FractionalOrder.of(alpha).gamma
    omega, t = np.broadcast_arrays(np.asarray(omega, float), np.asarray(t, float))
    if np.any(t < 0):
        raise InvalidParams("t must be >= 0")
    vals, _ = ml_values(g, 1.0, -mu0 * omega * omega * t ** g, tol)
    return vals


# ---- unbounded line -------------------------------------------------------

class _MWrightRule:
    """Composite Gauss-Legendre rule in x on [0, x_max] with M_lam at the nodes."""

    def __init__(self, lam, n_panels, tol):
        self.lam = lam
        self.x_max = _m_wright_extent(lam, tol)
        xg, wg = np.polynomial.legendre.leggauss(16)
        edges = np.linspace(0.0, self.x_max, n_panels + 1)
        half = 0.5 * np.diff(edges)[:, None]
        self.x = (edges[:-1, None] + half * (1.0 + xg)).ravel()
        self.w = (half * wg).ravel() * m_wright(lam, self.x, 1e-13)
        self.n_panels = n_panels

    def mass(self):
        return float(self.w.sum())

    def apply(self, fn, y, c):
        """0.5 * int_0^inf (f(y - c x) + f(y + c x)) M(x) dx for each y."""
        y = np.asarray(y, dtype=float)
        out = np.empty(y.shape)
        flat = out.reshape(-1)
        for i, yi in enumerate(y.reshape(-1)):
            cx = c * self.x
            flat[i] = 0.5 * np.dot(fn(yi - cx) + fn(yi + cx), self.w)
        return out


def _m_wright_extent(lam, tol):
    """x beyond which M_lam(x) * x stays below ~tol * 1e-4 (the tail is superexponential)."""
    x = 4.0
    target = 1e-4 * min(tol, 1e-8)
    while True:
        if m_wright(lam, [x], 1e-14)[0] * x < target:
            return x
        x *= 1.25
        if x > 1e4:
            raise QuadratureFailure(f"M-Wright tail for lam={lam} does not decay")


@dataclass
class FieldSamples:
    """u[i, j] = u(t_points[i], y_points[j]) plus what was achieved."""

    t: np.ndarray
    y: np.ndarray
    u: np.ndarray
    est_abs_error: float = 0.0
    info: dict = field(default_factory=dict)


def solve_unbounded(problem, y_points, t_points, tol=1e-8, *, max_panels=4096):
    """u = f * G by a folded quadrature over the kernel variable x = |y - xi| / c.

    The fold puts the kernel cusp at x = 0, the end of the range, so a plain
    composite Gauss-Legendre rule converges rapidly. Panels are doubled until
    two successive rules agree to ``tol``.
    """
    y = np.atleast_1d(np.asarray(y_points, dtype=float))
    t = np.atleast_1d(np.asarray(t_points, dtype=float))
    if np.any(t < 0):
        raise InvalidParams("t_points must be >= 0")
    spec = GreenKernelSpec(problem.alpha, problem.mu0)
    lam = problem.alpha.lam
    f = problem.profile
    u = np.empty((t.size, y.size))
    scale = f.length_scale()
    worst = 0.0
    n_panels = 32
    rules = {}

    def rule(n):
        if n not in rules:
            rules[n] = _MWrightRule(lam, n, tol)
        return rules[n]

    for i, ti in enumerate(t):
        if ti == 0:
            u[i] = f(y)
            continue
        c = spec.spread(ti)
        if scale is not None:
            # keep at least ~4 panels per profile length scale in xi = c x
            need = int(2 ** math.ceil(math.log2(max(32, 4 * c * rule(32).x_max / scale))))
            n_panels = max(n_panels, need)
        while True:
            if n_panels > max_panels:
                raise QuadratureFailure(
                    f"kernel convolution at t={ti} needs more than {max_panels} panels"
                )
            coarse = rule(n_panels).apply(f, y, c)
            fine = rule(2 * n_panels).apply(f, y, c)
            err = float(np.max(np.abs(fine - coarse))) if y.size else 0.0
            if err <= tol:
                break
            n_panels *= 2
        u[i] = fine
        worst = max(worst, err)
    return FieldSamples(t, y, u, worst, {"panels": 2 * n_panels, "method": "folded-gauss"})


def kernel_mass(alpha, tol=1e-10, n_panels=256):
    """int G dy = int_0^inf M_lam(x) dx computed with the convolution rule."""
    return _MWrightRule(FractionalOrder.of(alpha).lam, n_panels, tol).mass()


# ---- bounded strip ---------------------------------------------------------

@dataclass
class SeriesSolution:
    """Truncated sine series u = sum_n b_n E_gamma(-rate_n t**gamma) sin(k_n y)."""

    mode_coefficients: np.ndarray
    wavenumbers: np.ndarray
    ml_order: float
    rates: np.ndarray
    h: float
    tol: float = DEFAULT_TOL

    @property
    def n_modes(self):
        return self.mode_coefficients.size

    def decay_args(self, t):
        """-rate_n t**gamma, shape (len(t), n_modes)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return -np.outer(t ** self.ml_order, self.rates)

    def mode_factors(self, t):
        """E_gamma(-rate_n t**gamma), shape (len(t), n_modes); exactly 1 at t = 0."""
        z = self.decay_args(t)
        vals, _ = ml_values(self.ml_order, 1.0, z, self.tol)
        return vals

    def mode_velocities(self, t):
        """d/dt of each mode factor: -rate t**(gamma-1) E_{gamma,gamma}(-rate t**gamma)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        z = self.decay_args(t)
        e2, _ = ml_values(self.ml_order, self.ml_order, z, self.tol)
        return -np.outer(t ** (self.ml_order - 1.0), self.rates) * e2

    def evaluate(self, y, t):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        amp = self.mode_factors(t) * self.mode_coefficients
        u = amp @ np.sin(np.outer(self.wavenumbers, y))
        # walls are structural zeros; sin(n pi) is only ~1e-16 in floating point
        u[:, (y == 0.0) | (y == self.h)] = 0.0
        return u

    def energy(self, t):
        """sum_n b_n**2 (E_n**2 + E_n'**2 / rate_n): constant in t for the wave limit."""
        e = self.mode_factors(t)
        v = self.mode_velocities(t)
        b2 = self.mode_coefficients ** 2
        return (e * e) @ b2 + (v * v) @ (b2 / self.rates)

    def tail_estimate(self, t, extra_coefficients, extra_rates):
        """sum over the next block of modes of |b_n E_n(t)|, per t."""
        z = -np.outer(np.atleast_1d(t) ** self.ml_order, extra_rates)
        vals, _ = ml_values(self.ml_order, 1.0, z, self.tol)
        return np.abs(vals) @ np.abs(extra_coefficients)


def _rates(problem, k, paper_literal_sqrt_mu0):
    scale = math.sqrt(problem.mu0) if paper_literal_sqrt_mu0 else problem.mu0
    return scale * k * k


def series_solution(problem, tol=DEFAULT_TOL, *, paper_literal_sqrt_mu0=False):
    n = np.arange(1, problem.n_modes + 1)
    k = problem.a * n
    b = problem.profile.sine_coefficients(problem.h, problem.n_modes)
    return SeriesSolution(b, k, problem.alpha.gamma, _rates(problem, k, paper_literal_sqrt_mu0),
                          problem.h, tol)


def solve_bounded(problem, y_points, t_points, tol=DEFAULT_TOL, *, mode_tol=None,
                  paper_literal_sqrt_mu0=False):
    """Sine-series solution on the strip; returns (FieldSamples, SeriesSolution).

    The neglected modes are estimated by evaluating the next n_modes of them;
    ModeBudgetExceeded is raised when that estimate tops ``mode_tol``
    (default ``tol``) at any t > 0. At t = 0 the result is the truncated sine
    expansion of f, Gibbs oscillation included, and is not checked.
    Pass ``mode_tol=math.inf`` to skip the check.
    """
    y = np.atleast_1d(np.asarray(y_points, dtype=float))
    t = np.atleast_1d(np.asarray(t_points, dtype=float))
    if np.any((y < 0) | (y > problem.h)):
        raise InvalidParams("y_points must lie in [0, h]")
    if np.any(t < 0):
        raise InvalidParams("t_points must be >= 0")
    mode_tol = tol if mode_tol is None else mode_tol
    sol = series_solution(problem, tol, paper_literal_sqrt_mu0=paper_literal_sqrt_mu0)
    u = sol.evaluate(y, t)
    tail = 0.0
    if math.isfinite(mode_tol) and np.any(t > 0):
        n_extra = problem.n_modes
        big = BoundedProblem(problem.alpha, problem.mu0, problem.h, problem.profile,
                             2 * problem.n_modes)
        b_all = problem.profile.sine_coefficients(problem.h, big.n_modes)
        k_extra = problem.a * np.arange(problem.n_modes + 1, problem.n_modes + n_extra + 1)
        est = sol.tail_estimate(t[t > 0], b_all[problem.n_modes:],
                                _rates(big, k_extra, paper_literal_sqrt_mu0))
        tail = float(np.max(est))
        if tail > mode_tol:
            worst_t = float(t[t > 0][np.argmax(est)])
            raise ModeBudgetExceeded(
                f"{problem.n_modes} modes leave a tail of ~{tail:.3g} at t={worst_t:g}"
                f" (mode_tol={mode_tol:g}); raise n_modes or mode_tol"
            )
    info = {"n_modes": problem.n_modes, "tail_estimate": tail,
            "paper_literal_sqrt_mu0": bool(paper_literal_sqrt_mu0)}
    return FieldSamples(t, y, u, tail + tol * float(np.sum(np.abs(sol.mode_coefficients))),
                        info), sol


def plug_flow_problem(alpha, mu0, h, U0=1.0, n_modes=DEFAULT_MODES):
    return BoundedProblem(alpha, mu0, h, profiles.Constant(U0), n_modes)


def plug_flow(problem, y_points, t_points, tol=DEFAULT_TOL, **kw):
    """Constant initial velocity U0 between no-slip walls (odd modes only)."""
    if not isinstance(problem.profile, profiles.Constant):
        raise InvalidParams("plug flow needs a constant initial profile")
    return solve_bounded(problem, y_points, t_points, tol, **kw)


def centerline_zero_crossing(problem, t_max=50.0, tol=DEFAULT_TOL, *, n_scan=2000,
                             paper_literal_sqrt_mu0=False):
    """First t > 0 where u(h/2, t) changes sign, or None if it stays one-signed."""
    sol = series_solution(problem, tol, paper_literal_sqrt_mu0=paper_literal_sqrt_mu0)
    mid = np.sin(sol.wavenumbers * 0.5 * problem.h) * sol.mode_coefficients

    def u_mid(t):
        return float(sol.mode_factors([t])[0] @ mid)

    ts = np.linspace(0.0, t_max, n_scan + 1)[1:]
    vals = sol.mode_factors(ts) @ mid
    sign_change = np.flatnonzero(np.sign(vals[1:]) != np.sign(vals[:-1]))
    if vals[0] == 0.0:
        return float(ts[0])
    if sign_change.size == 0:
        return None
    j = sign_change[0]
    return optimize.brentq(u_mid, ts[j], ts[j + 1], xtol=1e-13, rtol=4 * np.finfo(float).eps)


def first_zero_crossing(t, values):
    """Linearly interpolated first sign change of a sampled series, or None."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    for j in range(1, v.size):
        if v[j - 1] == 0.0 and j - 1 > 0:
            return float(t[j - 1])
        if v[j - 1] * v[j] < 0:
            return float(t[j - 1] - v[j - 1] * (t[j] - t[j - 1]) / (v[j] - v[j - 1]))
    return None


def local_extrema(t, values):
    """(times, values) of interior local extrema of a sampled curve."""
    v = np.asarray(values, dtype=float)
    d = np.diff(v)
    idx = np.flatnonzero(np.sign(d[1:]) * np.sign(d[:-1]) < 0) + 1
    return np.asarray(t)[idx], v[idx]
