import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import load_lattice
from fracflow.errors import InvalidParams, NonConvergence, PoleError
from fracflow.specfun import (
    MLParams,
    WrightParams,
    gamma_fn,
    m_wright,
    mittag_leffler,
    mittag_leffler_one_param,
    ml_values,
    rgamma,
    wright,
)

ML_LATTICE = load_lattice("ml_lattice.csv")
WRIGHT_LATTICE = load_lattice("wright_lattice.csv")

# mpmath, 40 digits, plain power series
E15_M1 = 0.39662936531808808449
E12_M1 = 0.36351260195051899301
GAMMA_17 = 0.90863873285329044156


def ml(nu, mu, z, tol=1e-12, **kw):
    return mittag_leffler(MLParams(nu, mu), z, tol, **kw)


class TestExamples:
    def test_exp(self):
        r = ml(1.0, 1.0, 1.0)
        assert abs(r.value - math.e) <= max(1e-12, r.est_abs_error)

    def test_cos_zero(self):
        assert abs(ml(2.0, 1.0, -(math.pi / 2) ** 2).value) <= 1e-12

    @pytest.mark.parametrize("nu", [0.1, 0.5, 1.0, 1.7, 3.0])
    def test_at_zero(self, nu):
        r = ml(nu, 1.0, 0.0)
        assert r.value == 1.0
        assert r.terms_used >= 1

    def test_e15_minus_one(self):
        assert ml(1.5, 1.0, -1.0).value == pytest.approx(E15_M1, abs=1e-12)

    def test_one_param(self):
        assert mittag_leffler_one_param(2.0, -1.0).value == pytest.approx(math.cos(1.0), abs=1e-12)
        assert mittag_leffler_one_param(1.5, 0.0).value == 1.0
        assert mittag_leffler_one_param(1.2, -1.0).value == pytest.approx(E12_M1, abs=1e-12)

    def test_wright_exp(self):
        assert wright(WrightParams(0.0, 1.0), 1.0).value == pytest.approx(math.e, abs=1e-12)

    def test_wright_gaussian(self):
        r = wright(WrightParams(-0.5, 0.5), -1.0)
        assert r.value == pytest.approx(math.exp(-0.25) / math.sqrt(math.pi), abs=1e-12)

    @pytest.mark.parametrize("nu", [-0.5, 0.0, 0.7, 2.0])
    def test_wright_at_zero(self, nu):
        assert wright(WrightParams(nu, 1.0), 0.0).value == 1.0

    def test_gamma(self):
        assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
        assert gamma_fn(1) == 1.0
        assert gamma_fn(5) == 24.0
        assert gamma_fn(1.7) == pytest.approx(GAMMA_17, rel=1e-14)


class TestErrors:
    @pytest.mark.parametrize("nu", [0.0, -1.0, math.nan])
    def test_ml_nu(self, nu):
        with pytest.raises(InvalidParams):
            MLParams(nu, 1.0)

    @pytest.mark.parametrize("nu", [-1.0, -2.5])
    def test_wright_nu(self, nu):
        with pytest.raises(InvalidParams):
            WrightParams(nu, 1.0)

    def test_wright_positive_z_negative_nu(self):
        with pytest.raises(InvalidParams):
            wright(WrightParams(-0.5, 0.5), 1.0)

    @pytest.mark.parametrize("tol", [0.0, -1e-8, math.inf])
    def test_tol(self, tol):
        with pytest.raises(InvalidParams):
            ml(1.5, 1.0, -1.0, tol)

    @pytest.mark.parametrize("x", [0, -1, -7, -170])
    def test_gamma_poles(self, x):
        with pytest.raises(PoleError):
            gamma_fn(x)
        assert rgamma(x) == 0.0

    def test_term_budget(self):
        with pytest.raises(NonConvergence):
            ml(0.5, 1.0, 3.0, method="series", max_terms=5)

    def test_unknown_method(self):
        with pytest.raises(InvalidParams):
            ml(1.5, 1.0, -1.0, method="pade")


@settings(max_examples=200, deadline=None)
@given(st.floats(-169.9, 170.0).filter(
    lambda x: abs(x) > 1e-300 and not (x <= 0 and x == math.floor(x))))
def test_gamma_relative_error(x):
    with mp.workdps(30):
        ref = mp.gamma(x)
    assert abs(gamma_fn(x) - float(ref)) <= 1e-13 * abs(float(ref))


@pytest.mark.parametrize("nu,mu,z,ref", ML_LATTICE)
def test_ml_lattice(nu, mu, z, ref):
    r = ml(nu, mu, z, 1e-12)
    err = abs(r.value - ref)
    assert err <= max(1e-12, r.est_abs_error)
    assert err <= 1e-10 * max(1.0, abs(ref))


@pytest.mark.parametrize("nu,mu,z,ref", WRIGHT_LATTICE)
def test_wright_lattice(nu, mu, z, ref):
    r = wright(WrightParams(nu, mu), z, 1e-12)
    err = abs(r.value - ref)
    assert err <= max(1e-12, r.est_abs_error)
    assert err <= 1e-10 * max(1.0, abs(ref))


class TestIdentities:
    z = np.linspace(-20.0, 2.0, 100)

    def test_exp(self):
        v, _ = ml_values(1.0, 1.0, self.z, 1e-10)
        assert np.max(np.abs(v - np.exp(self.z))) <= 1e-10

    def test_cos(self):
        x = np.sqrt(np.abs(self.z))
        v, _ = ml_values(2.0, 1.0, -x * x, 1e-10)
        assert np.max(np.abs(v - np.cos(x))) <= 1e-10

    def test_wright_exp(self):
        v = [wright(WrightParams(0.0, 1.0), z, 1e-10).value for z in self.z]
        assert np.max(np.abs(np.array(v) - np.exp(self.z))) <= 1e-10

    def test_wright_exp_series(self):
        # the plain series, where its largest term (about 3e3 at z=-10) leaves headroom
        z = self.z[self.z >= -10.0]
        v = [wright(WrightParams(0.0, 1.0), x, 1e-12, method="series").value for x in z]
        assert np.max(np.abs(np.array(v) - np.exp(z))) <= 1e-10

    @pytest.mark.parametrize("mu", [0.5, 1.0, 2.5])
    def test_value_at_zero(self, mu):
        assert ml(1.3, mu, 0.0).value == pytest.approx(1.0 / math.gamma(mu), rel=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.floats(1.05, 1.95))
def test_fractional_oscillation(g):
    t = np.linspace(0.0, 50.0, 2001)
    v, _ = ml_values(g, 1.0, -(t ** g), 1e-10)
    assert v[0] == 1.0
    early = v[t < 10.0]
    assert np.any(np.sign(early[1:]) != np.sign(early[:-1]))
    assert np.max(np.abs(v)) <= 1.05


@settings(max_examples=100, deadline=None)
@given(st.floats(0.2, 2.5), st.sampled_from([1.0, 0.5, 1.5]), st.floats(0.01, 25.0))
def test_alternating_tail_bound(nu, mu, s):
    z = -s ** nu
    r = ml(nu, mu, z, 1e-12, method="series")
    n = r.terms_used
    first_omitted = math.exp(n * math.log(-z) - math.lgamma(nu * n + mu))
    assert r.tail_bound <= first_omitted * (1 + 1e-12)
    assert r.est_abs_error >= r.tail_bound


class TestBranches:
    @pytest.mark.parametrize("nu", [0.5, 0.8, 1.2, 1.5, 1.8])
    @pytest.mark.parametrize("s", [14.0, 16.0, 18.0, 20.0])
    def test_series_asymptotic_overlap(self, nu, s):
        z = -s ** nu
        a = ml(nu, 1.0, z, 1e-14, method="series")
        b = ml(nu, 1.0, z, 1e-14, method="asymptotic")
        assert abs(a.value - b.value) <= a.est_abs_error + b.est_abs_error
        # both are within their own estimates of the quadrature branch
        c = ml(nu, 1.0, z, 1e-13, method="integral")
        assert abs(a.value - c.value) <= a.est_abs_error + c.est_abs_error + 1e-13
        assert abs(b.value - c.value) <= b.est_abs_error + c.est_abs_error + 1e-13

    @pytest.mark.parametrize("nu", [0.3, 0.9, 1.1, 1.6, 1.99])
    def test_vector_matches_scalar(self, nu):
        z = -np.geomspace(1e-3, 1e4, 60)
        v, e = ml_values(nu, 1.0, z, 1e-10)
        for zi, vi, ei in zip(z, v, e):
            r = ml(nu, 1.0, zi, 1e-10)
            assert abs(vi - r.value) <= 1e-10 + ei + r.est_abs_error
            assert ei <= 1e-10

    def test_vector_shape(self):
        z = -np.ones((3, 4))
        v, e = ml_values(1.5, 1.0, z)
        assert v.shape == e.shape == (3, 4)

    @pytest.mark.parametrize("method", ["series", "asymptotic", "integral", "auto"])
    def test_deterministic(self, method):
        a = ml(1.4, 1.0, -30.0, 1e-10, method=method)
        b = ml(1.4, 1.0, -30.0, 1e-10, method=method)
        assert a == b


class TestMWright:
    x = np.linspace(0.0, 10.0, 100)

    def test_gaussian(self):
        v = m_wright(0.5, self.x, 1e-12)
        assert np.max(np.abs(v - np.exp(-self.x ** 2 / 4) / math.sqrt(math.pi))) <= 1e-10

    def test_even(self):
        assert np.array_equal(m_wright(0.7, -self.x), m_wright(0.7, self.x))

    @pytest.mark.parametrize("lam", [0.0, 1.0, 1.5])
    def test_index_range(self, lam):
        with pytest.raises(InvalidParams):
            m_wright(lam, 1.0)

    @pytest.mark.parametrize("lam", [0.6, 0.8, 0.9])
    def test_integral_matches_series(self, lam):
        for x in (0.3, 1.0, 1.2):
            a = wright(WrightParams(-lam, 1 - lam), -x, 1e-12, method="series")
            b = wright(WrightParams(-lam, 1 - lam), -x, 1e-12, method="integral")
            assert abs(a.value - b.value) <= 1e-11
