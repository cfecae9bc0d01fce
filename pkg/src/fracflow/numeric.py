"""Explicit time marching for du/dt = mu0 d2/dy2 J^alpha u on 0 < y < h.

    u[n+1] = u[n] + dt mu0 D2[Q[n]],   Q[n] = product-trapezoid J^alpha u at t_n

with u = 0 at both walls and Q[0] = 0. Every time step convolves the whole
stored history, so a run of N steps costs O(N^2) per grid node.

Stability. A discrete eigenmode with eigenvalue lam of -mu0 D2 evolves by a
scalar recursion whose behaviour depends only on kappa = lam dt**(alpha+1).
The largest kappa that keeps |v| <= 1.05 for 4000 steps was found by bisection
(tools/calibrate_stability.py) and is tabulated below; with lam <= 4 mu0/dy**2
this gives dt = dt_safety * (kappa dy**2 / (4 mu0))**(1/(alpha+1)).
At alpha = 1 the recursion is weakly unstable for every kappa (the amplification
factor is sqrt(1 + kappa/2)), so there dt instead caps the growth of the
fastest mode over the whole run at 1e8.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import analytic, fracops
from ._backend import BACKEND, kernels
from .errors import InvalidOrder, InvalidParams, StabilityViolation

_KAPPA_TABLE = (
    (0.0, 2.00001),
    (0.025, 2.02166),
    (0.05, 1.99568),
    (0.075, 1.97193),
    (0.1, 1.95027),
    (0.125, 1.93057),
    (0.15, 1.91273),
    (0.175, 1.89665),
    (0.2, 1.88225),
    (0.225, 1.86943),
    (0.25, 1.85813),
    (0.275, 1.84827),
    (0.3, 1.83981),
    (0.325, 1.83269),
    (0.35, 1.82686),
    (0.375, 1.82227),
    (0.4, 1.81889),
    (0.425, 1.81668),
    (0.45, 1.81561),
    (0.475, 1.30608),
    (0.5, 1.20488),
    (0.525, 1.13869),
    (0.55, 1.0885),
    (0.575, 1.04795),
    (0.6, 1.01398),
    (0.625, 0.818294),
    (0.65, 0.718508),
    (0.675, 0.666127),
    (0.7, 0.627995),
    (0.725, 0.493257),
    (0.75, 0.440077),
    (0.775, 0.407589),
    (0.8, 0.307816),
    (0.825, 0.239198),
    (0.85, 0.185205),
    (0.875, 0.139955),
    (0.9, 0.0964241),
    (0.925, 0.0620486),
    (0.95, 0.0271453),
    (0.975, 0.00665035),
    (0.98, 0.00425312),
    (0.99, 0.00111104),
    (0.995, 0.000340257),
    (0.999, 7.65293e-05),
)
_TABLE_ALPHA = np.array([a for a, _ in _KAPPA_TABLE])
_TABLE_KAPPA = np.array([k for _, k in _KAPPA_TABLE])
# growth allowed for the fastest mode over a whole run in the weakly unstable regime
_HORIZON_GROWTH = 1e8


def critical_kappa(alpha):
    """Calibrated stability limit for kappa = lam dt**(alpha+1), alpha <= 0.999.

    Between table rows the smaller neighbour is used.
    """
    if not 0.0 < alpha <= _TABLE_ALPHA[-1]:
        raise InvalidOrder(f"no calibrated stability limit for alpha={alpha}")
    i = int(np.searchsorted(_TABLE_ALPHA, alpha, side="right")) - 1
    if _TABLE_ALPHA[i] == alpha:
        return float(_TABLE_KAPPA[i])
    j = min(i + 1, _TABLE_ALPHA.size - 1)
    return float(min(_TABLE_KAPPA[i], _TABLE_KAPPA[j]))


def stable_dt(alpha, mu0, dy, t_max, dt_safety=0.5):
    """Largest time step the calibration allows, times ``dt_safety``."""
    if alpha <= _TABLE_ALPHA[-1]:
        kappa = critical_kappa(alpha)
        return dt_safety * (kappa * dy * dy / (4.0 * mu0)) ** (1.0 / (alpha + 1.0))
    # |z|**N = exp(lam dt t_max / 4) with lam = 4 mu0 / dy**2
    return dt_safety * math.log(_HORIZON_GROWTH) * dy * dy / (mu0 * t_max)


@dataclass(frozen=True)
class SpatialGrid:
    h: float
    n_cells: int

    def __post_init__(self):
        if not (math.isfinite(self.h) and self.h > 0):
            raise InvalidParams(f"h must be positive, got {self.h}")
        if int(self.n_cells) != self.n_cells or self.n_cells < 4:
            raise InvalidParams(f"n_cells must be an integer >= 4, got {self.n_cells}")
        object.__setattr__(self, "n_cells", int(self.n_cells))

    @property
    def dy(self):
        return self.h / self.n_cells

    @property
    def nodes(self):
        y = self.dy * np.arange(self.n_cells + 1)
        y[-1] = self.h
        return y


@dataclass(frozen=True)
class SolverOptions:
    """``n_steps`` overrides ``dt``, which overrides the calibrated step."""

    t_max: float = 1.0
    n_cells: int = 128
    dt: float = None
    n_steps: int = None
    dt_safety: float = 0.5
    max_steps: int = 200_000
    record_stride: int = 1
    growth_bound: float = 10.0
    quadrature: str = "product-trapezoid"

    def __post_init__(self):
        if not (math.isfinite(self.t_max) and self.t_max > 0):
            raise InvalidParams(f"t_max must be positive, got {self.t_max}")
        if not 0.0 < self.dt_safety < 1.0:
            raise InvalidParams(f"dt_safety must lie in (0, 1), got {self.dt_safety}")
        if self.dt is not None and not self.dt > 0:
            raise InvalidParams(f"dt must be positive, got {self.dt}")
        if self.n_steps is not None and (int(self.n_steps) != self.n_steps or self.n_steps < 2):
            raise InvalidParams(f"n_steps must be an integer >= 2, got {self.n_steps}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise InvalidParams("record_stride must be a positive integer")
        if not self.growth_bound > 1.0:
            raise InvalidParams("growth_bound must exceed 1")
        if self.quadrature != "product-trapezoid":
            raise InvalidParams(f"unsupported quadrature {self.quadrature!r}")


@dataclass
class FieldHistory:
    """values[n, j] = u(t_n, y_j) on the recorded time grid."""

    spatial: SpatialGrid
    temporal: fracops.TimeGrid
    values: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def times(self):
        return self.temporal.times

    @property
    def y(self):
        return self.spatial.nodes

    @classmethod
    def from_samples(cls, h, dt, values):
        """Wrap externally sampled u[n, j] (e.g. an analytic solution)."""
        values = np.array(values, dtype=float)
        return cls(SpatialGrid(h, values.shape[1] - 1),
                   fracops.TimeGrid(dt, values.shape[0] - 1), values)


def _steps(problem, grid, options):
    a = problem.alpha.alpha
    if options.n_steps is not None:
        n = int(options.n_steps)
    else:
        dt = options.dt or stable_dt(a, problem.mu0, grid.dy, options.t_max, options.dt_safety)
        n = max(2, math.ceil(options.t_max / dt * (1.0 - 1e-12)))
    if n > options.max_steps:
        raise InvalidParams(f"run needs {n} steps, above max_steps={options.max_steps}")
    if n % options.record_stride:
        # round up so the final time is recorded
        n += options.record_stride - n % options.record_stride
    return n, options.t_max / n


def initial_slice(problem, grid):
    u0 = np.asarray(problem.profile(grid.nodes), dtype=float).copy()
    u0[0] = 0.0
    u0[-1] = 0.0
    return u0


def solve(problem, options=SolverOptions(), grid=None):
    """March ``problem`` (an analytic.BoundedProblem) to options.t_max."""
    if not isinstance(problem, analytic.BoundedProblem):
        raise InvalidParams("solve expects a BoundedProblem")
    grid = grid or SpatialGrid(problem.h, options.n_cells)
    if abs(grid.h - problem.h) > 1e-12 * problem.h:
        raise InvalidParams("grid width differs from the problem's h")
    alpha = problem.alpha.alpha
    n_steps, dt = _steps(problem, grid, options)
    conv, first = fracops.product_weights(alpha, dt, n_steps)
    coef = dt * problem.mu0 / (grid.dy * grid.dy)
    u0 = initial_slice(problem, grid)
    hist, failed = kernels.march(u0, conv, first, coef, n_steps, options.growth_bound)
    norms = np.max(np.abs(hist), axis=1)
    if failed >= 0:
        raise StabilityViolation(
            f"max|u| grew past {options.growth_bound:g} x max|u0| at step {failed}"
            f" (dt={dt:.4g}, dy={grid.dy:.4g}, alpha={alpha:g})",
            step=failed,
        )
    stride = options.record_stride
    rec = hist[::stride].copy()
    kappa = 4.0 * problem.mu0 / grid.dy ** 2 * dt ** (alpha + 1.0)
    diag = {"steps": n_steps, "dt": dt, "dy": grid.dy, "kappa": kappa,
            "max_norm": norms, "backend": BACKEND}
    return FieldHistory(grid, fracops.TimeGrid(dt * stride, n_steps // stride), rec, diag)


def second_difference(u, dy):
    """D2 along the last axis; wall entries are left at zero."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    out[..., 1:-1] = (u[..., :-2] - 2.0 * u[..., 1:-1] + u[..., 2:]) / (dy * dy)
    return out


def step_explicit(history, alpha, mu0, dt, dy, growth_bound=10.0):
    """One step from the slices history[0..n]; returns u at t_{n+1}.

    Reference implementation of a single step of ``solve`` (which runs the
    compiled march instead).
    """
    hist = np.atleast_2d(np.asarray(history, dtype=float))
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise InvalidOrder(f"alpha must lie in (0, 1], got {alpha}")
    n = hist.shape[0] - 1
    if n == 0:
        q = np.zeros(hist.shape[1])
    else:
        conv, first = fracops.product_weights(alpha, dt, n)
        q = conv[::-1] @ hist[1:] + first[n - 1] * hist[0]
    nxt = hist[n] + dt * mu0 * second_difference(q, dy)
    nxt[0] = 0.0
    nxt[-1] = 0.0
    norm0 = np.max(np.abs(hist[0]))
    m = np.max(np.abs(nxt))
    if not np.isfinite(m) or (norm0 > 0 and m > growth_bound * norm0):
        raise StabilityViolation(f"max|u| grew past {growth_bound:g} x max|u0| at step {n + 1}",
                                 step=n + 1)
    return nxt


@dataclass
class ResidualReport:
    times: np.ndarray
    max_norm: np.ndarray
    l2_norm: np.ndarray

    def window(self, t_min=0.0, t_max=math.inf):
        m = (self.times >= t_min) & (self.times <= t_max)
        return self.max_norm[m]


def residual_check(history, alpha, mu0):
    """Per-slice norms of d^alpha (du/dt) - mu0 D2 u over the interior nodes.

    du/dt is the BDF2 backward difference (zero at t = 0, where the master
    equation forces it to vanish); d^alpha is the L1 Caputo derivative.
    """
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise InvalidOrder(f"alpha must lie in (0, 1], got {alpha}")
    u = np.asarray(history.values, dtype=float)
    g = history.temporal
    v = fracops.time_derivative(fracops.SampledSignal(g, u), order=2)
    if alpha == 1.0:
        lhs = fracops.time_derivative(v, order=2).values
    else:
        lhs = fracops.caputo_derivative(v, alpha).values
    r = (lhs - mu0 * second_difference(u, history.spatial.dy))[:, 1:-1]
    dy = history.spatial.dy
    return ResidualReport(g.times, np.max(np.abs(r), axis=1),
                          np.sqrt(dy * np.sum(r * r, axis=1)))


@dataclass
class ConvergenceReport:
    n_cells: list
    dy: list
    space_errors: list
    space_orders: list
    dt: list
    time_differences: list
    time_order: float
    info: dict = field(default_factory=dict)

    def rows(self):
        out = []
        for k, (n, dy, e) in enumerate(zip(self.n_cells, self.dy, self.space_errors)):
            order = self.space_orders[k - 1] if k else math.nan
            out.append((n, dy, e, order))
        return out


def _max_error(hist, oracle, t_min):
    m = hist.times >= t_min
    return float(np.max(np.abs(hist.values[m] - oracle[m])))


def convergence_study(problem, ladder=(8, 16, 32), options=SolverOptions(), *,
                      t_min=0.0, tol=analytic.DEFAULT_TOL, paper_literal_sqrt_mu0=False):
    """Observed orders in dy (against the analytic series) and in dt.

    Space: every rung uses the time step of the finest rung, and the O(dt)
    error is removed by Richardson extrapolation 2 u(dt/2) - u(dt), so the
    remaining error against the analytic series is the spatial one.
    Time: on the finest grid, successive differences of runs with dt, dt/2,
    dt/4 give the order without an oracle.
    Errors are max norms over recorded slices with t >= t_min.
    """
    ladder = [int(n) for n in ladder]
    if len(ladder) < 3:
        raise InvalidParams("a convergence ladder needs at least 3 rungs")
    if sorted(ladder) != ladder or len(set(ladder)) != len(ladder):
        raise InvalidParams("ladder must list increasing n_cells")
    fine = SpatialGrid(problem.h, ladder[-1])
    a = problem.alpha.alpha
    if options.n_steps is not None:
        n_base = int(options.n_steps)
    else:
        dt = options.dt or stable_dt(a, problem.mu0, fine.dy, options.t_max, options.dt_safety)
        n_base = max(2, math.ceil(options.t_max / dt * (1.0 - 1e-12)))

    def run(n_cells, n_steps):
        opts = SolverOptions(t_max=options.t_max, n_cells=n_cells, n_steps=n_steps,
                             dt_safety=options.dt_safety, max_steps=options.max_steps,
                             growth_bound=options.growth_bound)
        return solve(problem, opts)

    space_err, dys = [], []
    for n_cells in ladder:
        coarse = run(n_cells, n_base)
        half = run(n_cells, 2 * n_base)
        extrap = 2.0 * half.values[::2] - coarse.values
        oracle, _ = analytic.solve_bounded(problem, coarse.y, coarse.times, tol,
                                           mode_tol=math.inf,
                                           paper_literal_sqrt_mu0=paper_literal_sqrt_mu0)
        m = coarse.times >= t_min
        space_err.append(float(np.max(np.abs(extrap[m] - oracle.u[m]))))
        dys.append(coarse.spatial.dy)
    space_orders = [math.log2(e0 / e1) if e1 > 0 else math.inf
                    for e0, e1 in zip(space_err[:-1], space_err[1:])]

    runs = [run(ladder[-1], n_base * 2 ** k) for k in range(3)]
    on_base = [r.values[:: 2 ** k] for k, r in enumerate(runs)]
    m = runs[0].times >= t_min
    d1 = float(np.max(np.abs(on_base[0][m] - on_base[1][m])))
    d2 = float(np.max(np.abs(on_base[1][m] - on_base[2][m])))
    time_order = math.log2(d1 / d2) if d2 > 0 else math.inf
    return ConvergenceReport(ladder, dys, space_err, space_orders,
                             [r.diagnostics["dt"] for r in runs], [d1, d2], time_order,
                             {"n_steps_base": n_base, "t_min": t_min})


def compare_with_analytic(problem, options=SolverOptions(), *, t_min=0.0,
                          tol=analytic.DEFAULT_TOL, paper_literal_sqrt_mu0=False):
    """Numeric history, analytic samples on the same nodes, and per-slice errors."""
    hist = solve(problem, options)
    ana, _ = analytic.solve_bounded(problem, hist.y, hist.times, tol, mode_tol=math.inf,
                                    paper_literal_sqrt_mu0=paper_literal_sqrt_mu0)
    diff = hist.values - ana.u
    max_err = np.max(np.abs(diff), axis=1)
    l2_err = np.sqrt(hist.spatial.dy * np.sum(diff * diff, axis=1))
    m = hist.times >= t_min
    return hist, ana, max_err, l2_err, float(np.max(max_err[m]))
