"""Tests for the shared numerical kernels.

Oracles: frozen 18-digit mpmath values for the hand-authored special
functions, scipy.special as an independent second route, and exactness /
orthonormality identities for the quadrature rules and recurrence families.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import eval_genlaguerre, ive

from groenewold_lab.errors import ValidationFailed
from groenewold_lab.mathkit import (
    QuadratureRule,
    bessel_i_scaled,
    composite_gauss_legendre_rule,
    expm,
    gauss_genlaguerre_rule,
    gauss_legendre_rule,
    hermitian_eig,
    laguerre_assoc,
    laguerre_orthonormal_bare,
    laguerre_scaled_all,
    quadrature,
    radial_profiles,
)

# mpmath (dps=40) values of e^-x I_m(x)
BESSEL_SCALED_ORACLE = [
    (0, 1.0, 0.465759607593640437),
    (0, 0.5, 0.645035270449150068),
    (1, 2.5, 0.206584649531266554),
    (3, 10.0, 0.0798303610298405173),
    (7, 0.125, 6.52611656853769844e-13),
    (40, 300.0, 0.0016002898291930657),
    (128, 60.0, 2.40773387394865893e-50),
    (2, 650.0, 0.015602696138838347),
]

# mpmath values of e^(-x/2) L_n^(k)(x)
LAGUERRE_SCALED_ORACLE = [
    (128, 127, 800.0, 3.58865463178082428e-44),
    (128, 0, 500.0, 0.0846043939690811854),
    (100, 50, 1.0, 1.61891451025778946e39),
    (5, 2, 3.5, 0.38298148005758258),
    (64, 130, 222.0, -3.27947720816631183e-19),
]

# mpmath values of phi_n^(nu)(x) = (-1)^n sqrt(n!/(n+nu)!) x^(nu/2) e^(-x/2) L_n^(nu)(x)
RADIAL_PROFILE_ORACLE = [
    (128, 127, 500.0, 0.02718088883079132),
    (0, 0, 0.0, 1.0),
    (3, 2, 4.0, 0.0806983714856676625),
    (64, 64, 256.0, 0.00880774321766892819),
    (128, 0, 33.0, -0.0514957147734966427),
]


class TestBesselIScaled:
    @pytest.mark.parametrize("m,x,expected", BESSEL_SCALED_ORACLE)
    def test_frozen_oracle(self, m, x, expected):
        value = bessel_i_scaled(m, x)[0]
        assert np.allclose(value, expected, rtol=1e-13, atol=0.0)

    def test_against_scipy_grid(self):
        xs = np.linspace(0.0, 600.0, 241)
        for m in [0, 1, 2, 5, 17, 64, 128]:
            ours = bessel_i_scaled(m, xs)
            ref = ive(m, xs)
            assert np.allclose(ours, ref, rtol=1e-12, atol=1e-300)

    def test_zero_argument(self):
        assert bessel_i_scaled(0, 0.0)[0] == 1.0
        assert bessel_i_scaled(3, 0.0)[0] == 0.0

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            bessel_i_scaled(-1, 1.0)
        with pytest.raises(ValueError):
            bessel_i_scaled(0, -0.5)
        with pytest.raises(ValueError):
            bessel_i_scaled(0, 1e9)

    @given(
        m=st.integers(min_value=1, max_value=60),
        x=st.floats(min_value=0.01, max_value=400.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_recurrence_property(self, m, x):
        # I_{m-1}(x) - I_{m+1}(x) = (2m/x) I_m(x), unchanged by e^-x scaling
        lo = bessel_i_scaled(m - 1, x)[0]
        hi = bessel_i_scaled(m + 1, x)[0]
        mid = bessel_i_scaled(m, x)[0]
        scale = max(abs(lo), abs(hi), abs(2 * m / x * mid), 1e-300)
        assert abs(lo - hi - 2 * m / x * mid) <= 1e-12 * scale


class TestLaguerre:
    def test_plain_against_scipy(self):
        xs = np.linspace(0.0, 60.0, 37)
        for n in [0, 1, 2, 3, 7, 20]:
            for k in [0, 1, 2, 5, 13]:
                ours = laguerre_assoc(n, k, xs)
                ref = eval_genlaguerre(n, k, xs)
                scale = np.maximum(np.abs(ref), 1.0)
                assert np.all(np.abs(ours - ref) <= 1e-11 * scale)

    @pytest.mark.parametrize("n,k,x,expected", LAGUERRE_SCALED_ORACLE)
    def test_scaled_frozen_oracle(self, n, k, x, expected):
        rows = laguerre_scaled_all(n, k, np.array([x]))
        assert np.allclose(rows[n, 0], expected, rtol=1e-10, atol=0.0)

    def test_scaled_matches_plain_times_exponential(self):
        xs = np.linspace(0.0, 40.0, 23)
        rows = laguerre_scaled_all(12, 3, xs)
        for n in range(13):
            ref = np.exp(-xs / 2) * laguerre_assoc(n, 3, xs)
            assert np.allclose(rows[n], ref, rtol=1e-12, atol=1e-14)

    @given(
        n=st.integers(min_value=2, max_value=25),
        k=st.integers(min_value=0, max_value=12),
        x=st.floats(min_value=0.0, max_value=80.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_three_term_recurrence_property(self, n, k, x):
        xs = np.array([x])
        ln = laguerre_assoc(n, k, xs)[0]
        lm = laguerre_assoc(n - 1, k, xs)[0]
        lp = laguerre_assoc(n + 1, k, xs)[0]
        lhs = (n + 1) * lp
        rhs = (2 * n + 1 + k - x) * ln - (n + k) * lm
        scale = max(abs(lhs), abs(rhs), 1.0)
        assert abs(lhs - rhs) <= 1e-11 * scale


class TestRadialProfiles:
    @pytest.mark.parametrize("n,nu,x,expected", RADIAL_PROFILE_ORACLE)
    def test_frozen_oracle(self, n, nu, x, expected):
        rows = radial_profiles(n, nu, np.array([x]))
        assert np.allclose(rows[n, 0], expected, rtol=1e-9, atol=1e-15)

    def test_small_n_direct_formula(self):
        xs = np.linspace(0.1, 30.0, 19)
        for nu in [0, 1, 2, 5]:
            rows = radial_profiles(6, nu, xs)
            for n in range(7):
                norm = math.sqrt(
                    math.factorial(n) / math.factorial(n + nu)
                )
                ref = (
                    (-1.0) ** n
                    * norm
                    * xs ** (nu / 2)
                    * np.exp(-xs / 2)
                    * eval_genlaguerre(n, nu, xs)
                )
                assert np.allclose(rows[n], ref, rtol=1e-11, atol=1e-14)

    @pytest.mark.parametrize("nu", [0, 1, 4, 13])
    def test_orthonormality(self, nu):
        # small nmax so a uniform composite rule resolves the zero clustering
        nmax = 12
        rule = composite_gauss_legendre_rule(0.0, 4 * nmax + 2 * nu + 90.0, 300, 12)
        rows = radial_profiles(nmax, nu, rule.nodes)
        gram = (rows * rule.weights) @ rows.T
        assert np.allclose(gram, np.eye(nmax + 1), atol=1e-10)

    @pytest.mark.parametrize("nu", [0, 3, 60, 127])
    def test_weighted_matches_bare_route(self, nu):
        # radial_profiles == x^(nu/2) e^(-x/2) * bare rows, large n and nu
        nmax = 128
        x = np.linspace(0.5, 700.0, 173)
        weighted = radial_profiles(nmax, nu, x)
        factor = np.exp(0.5 * nu * np.log(x) - 0.5 * x)
        bare = laguerre_orthonormal_bare(nmax, nu, x) * factor
        assert np.allclose(weighted, bare, rtol=0.0, atol=1e-12)

    def test_bare_discrete_orthonormality(self):
        # bare rows + genLaguerre weights: V V^T = I up to machine precision
        nmax, nu = 64, 9
        rule = gauss_genlaguerre_rule(nmax + 12, float(nu))
        rows = laguerre_orthonormal_bare(nmax, nu, rule.nodes)
        v = rows * np.sqrt(rule.weights)
        assert np.allclose(v @ v.T, np.eye(nmax + 1), atol=1e-12)

    def test_bare_large_nu_stable(self):
        nmax, nu = 128, 127
        rule = gauss_genlaguerre_rule(nmax + 16, float(nu))
        rows = laguerre_orthonormal_bare(nmax, nu, rule.nodes)
        assert np.all(np.isfinite(rows))
        v = rows * np.sqrt(rule.weights)
        assert np.allclose(v @ v.T, np.eye(nmax + 1), atol=1e-10)


class TestLinearAlgebra:
    def test_hermitian_eig_matches_numpy(self):
        rng = np.random.default_rng(7)
        a = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
        h = a + a.conj().T
        w, v = hermitian_eig(h)
        assert np.allclose(v @ np.diag(w) @ v.conj().T, h, atol=1e-12)
        assert np.all(np.diff(w) >= 0)

    def test_hermitian_eig_rejects_nonhermitian(self):
        a = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(ValidationFailed):
            hermitian_eig(a)

    def test_expm_diagonal(self):
        a = np.diag([0.0, 1.0, -2.0])
        assert np.allclose(expm(a), np.diag(np.exp([0.0, 1.0, -2.0])), atol=1e-14)

    def test_expm_rotation(self):
        # exp of a generator of rotations gives cos/sin blocks
        t = 0.731
        g = np.array([[0.0, -t], [t, 0.0]])
        expected = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
        assert np.allclose(expm(g), expected, atol=1e-14)


class TestQuadrature:
    def test_legendre_polynomial_exactness(self):
        rule = gauss_legendre_rule(6, a=-1.0, b=2.0)
        # exact for degree <= 11
        for p in range(12):
            exact = (2.0 ** (p + 1) - (-1.0) ** (p + 1)) / (p + 1)
            assert np.allclose(rule.integrate(rule.nodes**p), exact, rtol=1e-13)

    def test_composite_smooth_integral(self):
        rule = composite_gauss_legendre_rule(0.0, np.pi, 16, 10)
        assert np.allclose(rule.integrate(np.sin(rule.nodes)), 2.0, rtol=1e-13)

    def test_genlaguerre_moments(self):
        alpha = 3.5
        rule = gauss_genlaguerre_rule(12, alpha)
        for k in range(10):
            exact = math.exp(math.lgamma(alpha + k + 1))
            assert np.allclose(rule.integrate(rule.nodes**k), exact, rtol=1e-12)

    def test_integrate_accepts_callable_and_stacked(self):
        rule = gauss_legendre_rule(8, a=0.0, b=1.0)
        assert np.allclose(rule.integrate(lambda x: 3 * x**2), 1.0, rtol=1e-13)
        stacked = np.vstack([rule.nodes, rule.nodes**2])
        vals = rule.integrate(stacked)
        assert np.allclose(vals, [0.5, 1.0 / 3.0], rtol=1e-13)

    def test_factory_dispatch(self):
        r1 = quadrature("legendre", 5, a=0.0, b=1.0)
        r2 = quadrature("composite", 4, a=0.0, b=1.0, panels=3)
        r3 = quadrature("genlaguerre", 5, alpha=0.0)
        assert isinstance(r1, QuadratureRule) and r1.kind == "legendre"
        assert r2.nodes.size == 12
        assert np.allclose(r3.integrate(np.ones_like(r3.nodes)), 1.0, rtol=1e-13)
        with pytest.raises(ValueError):
            quadrature("simpson", 4)
