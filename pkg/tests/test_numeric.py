import math

import numpy as np
import pytest

from fracflow import analytic as an
from fracflow import numeric as nm
from fracflow.errors import InvalidOrder, InvalidParams, StabilityViolation
from fracflow.profiles import Constant, FunctionProfile, Gaussian, Sine


def single_mode(alpha, mu0=1.0, h=1.0):
    return an.BoundedProblem(alpha, mu0, h, Sine(1, h), 4)


def opts(**kw):
    base = dict(t_max=0.5, n_cells=32)
    base.update(kw)
    return nm.SolverOptions(**base)


class TestValidation:
    @pytest.mark.parametrize("kw", [dict(t_max=0.0), dict(dt_safety=1.0), dict(dt_safety=0.0),
                                    dict(dt=-1.0), dict(n_steps=1), dict(record_stride=0),
                                    dict(growth_bound=1.0), dict(quadrature="simpson")])
    def test_options(self, kw):
        with pytest.raises(InvalidParams):
            nm.SolverOptions(**kw)

    @pytest.mark.parametrize("n", [3, 0, 4.5])
    def test_grid(self, n):
        with pytest.raises(InvalidParams):
            nm.SpatialGrid(1.0, n)

    def test_grid_nodes(self):
        g = nm.SpatialGrid(3.0, 6)
        assert g.dy == 0.5
        assert g.nodes[0] == 0.0 and g.nodes[-1] == 3.0

    def test_needs_bounded(self):
        with pytest.raises(InvalidParams):
            nm.solve(an.UnboundedProblem(0.5, 1.0, Gaussian(0, 1)))

    def test_grid_width(self):
        with pytest.raises(InvalidParams):
            nm.solve(single_mode(0.5), opts(), grid=nm.SpatialGrid(2.0, 8))

    def test_max_steps(self):
        with pytest.raises(InvalidParams):
            nm.solve(single_mode(0.5), opts(max_steps=10))

    def test_step_order(self):
        with pytest.raises(InvalidOrder):
            nm.step_explicit(np.zeros((1, 5)), 1.5, 1.0, 0.1, 0.25)


class TestStability:
    def test_kappa_table(self):
        assert nm.critical_kappa(0.25) == pytest.approx(1.85813)
        # between rows the smaller neighbour
        assert nm.critical_kappa(0.26) == nm.critical_kappa(0.275) == pytest.approx(1.84827)
        with pytest.raises(InvalidOrder):
            nm.critical_kappa(1.0)

    def test_stable_dt_scaling(self):
        a = nm.stable_dt(0.5, 1.0, 0.02, 1.0)
        b = nm.stable_dt(0.5, 1.0, 0.01, 1.0)
        assert a / b == pytest.approx(4 ** (1 / 1.5))

    def test_violation(self):
        with pytest.raises(StabilityViolation) as exc:
            nm.solve(single_mode(0.5), nm.SolverOptions(t_max=1.0, n_cells=64, n_steps=40))
        assert exc.value.step >= 1

    def test_study_aborts(self):
        with pytest.raises(StabilityViolation):
            nm.convergence_study(single_mode(0.5), (16, 32, 64),
                                 nm.SolverOptions(t_max=1.0, n_steps=10))

    def test_diagnostics(self):
        h = nm.solve(single_mode(0.5), opts())
        d = h.diagnostics
        assert d["kappa"] <= nm.critical_kappa(0.5)
        assert d["steps"] == h.values.shape[0] - 1
        assert d["max_norm"].shape == (d["steps"] + 1,)


class TestInvariants:
    def test_zero(self):
        p = an.BoundedProblem(0.5, 1.0, 1.0, Constant(0.0), 4)
        assert np.all(nm.solve(p, opts()).values == 0.0)

    def test_zero_step(self):
        assert np.all(nm.step_explicit(np.zeros((1, 9)), 0.5, 1.0, 0.01, 0.125) == 0.0)

    def test_initial_and_walls(self):
        f = Gaussian(0.3, 0.1)
        h = nm.solve(an.BoundedProblem(0.4, 1.0, 1.0, f, 4), opts())
        assert np.all(h.values[:, 0] == 0.0) and np.all(h.values[:, -1] == 0.0)
        assert np.array_equal(h.values[0, 1:-1], f(h.y[1:-1]))

    def test_linearity(self):
        f = Gaussian(0.3, 0.1)
        p1 = an.BoundedProblem(0.6, 1.0, 1.0, f, 4)
        p3 = an.BoundedProblem(0.6, 1.0, 1.0, FunctionProfile(lambda y: 3.0 * f(y)), 4)
        a = nm.solve(p1, opts()).values
        b = nm.solve(p3, opts()).values
        assert np.max(np.abs(b - 3 * a)) <= 1e-13 * np.max(np.abs(b))

    def test_symmetry(self):
        p = an.BoundedProblem(0.5, 1.0, 1.0, Gaussian(0.5, 0.15), 4)
        v = nm.solve(p, opts()).values
        assert np.max(np.abs(v - v[:, ::-1])) <= 1e-13

    def test_causality(self):
        p = an.BoundedProblem(0.5, 1.0, 1.0, Constant(1.0), 4)
        full = nm.solve(p, opts(t_max=1.0, n_steps=800)).values
        part = nm.solve(p, opts(t_max=0.5, n_steps=400)).values
        assert np.array_equal(full[:401], part)

    def test_step_matches_solve(self):
        p = single_mode(0.5)
        o = opts(n_steps=300, t_max=0.6)
        h = nm.solve(p, o)
        dt = h.diagnostics["dt"]
        nxt = nm.step_explicit(h.values[:11], 0.5, 1.0, dt, h.spatial.dy)
        assert np.max(np.abs(nxt - h.values[11])) <= 1e-14

    def test_record_stride(self):
        p = single_mode(0.5)
        full = nm.solve(p, opts(n_steps=300))
        every3 = nm.solve(p, opts(n_steps=300, record_stride=3))
        assert np.array_equal(every3.values, full.values[::3])
        assert every3.temporal.dt == pytest.approx(3 * full.temporal.dt)

    def test_deterministic(self):
        p = an.plug_flow_problem(0.5, 1.0, 1.0)
        assert np.array_equal(nm.solve(p, opts()).values, nm.solve(p, opts()).values)


class TestAccuracy:
    @pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
    def test_single_mode(self, alpha):
        errs = []
        for n in (16, 32, 64):
            _, _, _, _, worst = nm.compare_with_analytic(single_mode(alpha), opts(n_cells=n))
            errs.append(worst)
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] <= 1e-2

    def test_heat_limit(self):
        errs = []
        for n_steps in (1000, 2000, 4000):
            h = nm.solve(single_mode(1e-6), opts(t_max=0.2, n_cells=32, n_steps=n_steps))
            errs.append(np.max(np.abs(h.values[:, 16] - np.exp(-math.pi ** 2 * h.times))))
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] <= 1e-3

    def test_wave_limit(self):
        p = single_mode(1.0, h=math.pi)
        errs = []
        for n in (16, 32, 64):
            h = nm.solve(p, opts(t_max=2 * math.pi, n_cells=n))
            errs.append(np.max(np.abs(h.values[:, n // 2] - np.cos(h.times))))
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] <= 1e-2

    def test_plug_crossing(self):
        p = an.plug_flow_problem(0.5, 1.0, 1.0)
        exact = an.centerline_zero_crossing(p)
        h = nm.solve(p, opts(n_cells=64))
        t0 = an.first_zero_crossing(h.times, h.values[:, 32])
        assert abs(t0 - exact) <= 0.02 * exact


class TestConvergence:
    def test_half(self):
        r = nm.convergence_study(single_mode(0.5), (8, 16, 32), opts(t_max=1.0))
        ratios = [2 ** o for o in r.space_orders]
        assert all(3.4 <= q <= 4.6 for q in ratios), ratios
        assert r.time_order >= 0.9
        rows = r.rows()
        assert len(rows) == 3 and math.isnan(rows[0][3])

    def test_wave(self):
        r = nm.convergence_study(single_mode(1.0), (8, 16, 32), opts(t_max=1.0))
        assert all(1.7 <= o <= 2.3 for o in r.space_orders), r.space_orders

    @pytest.mark.parametrize("ladder", [(8, 16), (16, 8, 32), (8, 8, 16)])
    def test_ladder(self, ladder):
        with pytest.raises(InvalidParams):
            nm.convergence_study(single_mode(0.5), ladder)


def sampled_single_mode(alpha, n_steps, n_cells, t_max=1.0):
    p = single_mode(alpha)
    y = np.linspace(0.0, 1.0, n_cells + 1)
    t = np.linspace(0.0, t_max, n_steps + 1)
    r, _ = an.solve_bounded(p, y, t, tol=1e-13)
    return nm.FieldHistory.from_samples(1.0, t_max / n_steps, r.u)


class TestResidual:
    def test_zero(self):
        h = nm.FieldHistory.from_samples(1.0, 0.01, np.zeros((11, 9)))
        r = nm.residual_check(h, 0.5, 1.0)
        assert np.all(r.max_norm == 0.0) and np.all(r.l2_norm == 0.0)

    def test_corruption(self):
        h = sampled_single_mode(0.5, 100, 32)
        clean = nm.residual_check(h, 0.5, 1.0).max_norm
        bad = h.values.copy()
        bad[60, 10] += 1e-3
        dirty = nm.residual_check(nm.FieldHistory(h.spatial, h.temporal, bad), 0.5, 1.0).max_norm
        assert np.array_equal(dirty[:60], clean[:60])
        assert dirty[60] > 100 * clean[60]
        assert np.all(dirty[61:63] > clean[61:63])

    def test_refinement(self):
        r = [nm.residual_check(sampled_single_mode(0.5, n, c), 0.5, 1.0)
             for n, c in ((100, 32), (200, 64))]
        a, b = (x.window(0.25).max() for x in r)
        assert a / b >= 2

    def test_order(self):
        h = nm.FieldHistory.from_samples(1.0, 0.01, np.zeros((11, 9)))
        with pytest.raises(InvalidOrder):
            nm.residual_check(h, 0.0, 1.0)
