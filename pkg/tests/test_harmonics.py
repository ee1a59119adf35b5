"""Legendre tables, quadrature, zonal calculus, and the regularity probe."""

import math

import numpy as np
import pytest
from scipy.integrate import quad as scipy_quad
from scipy.special import eval_gegenbauer

from minkval.constants import omega
from minkval.harmonics import (
    InsufficientQuadratureError,
    LegendreTable,
    ZonalPolynomial,
    ZonalProfile,
    boundary_flux,
    harmonic_dimension,
    jacobi_quadrature,
    legendre_eval,
    regularity_probe,
    zonal_ck_norm,
    zonal_coefficient,
    zonal_laplacian,
)


def gegenbauer_oracle(n, k, t):
    """Independent evaluation of P_k^n through scipy's Gegenbauer polynomials
    (lambda = (n-2)/2), normalized to 1 at t = 1."""
    lam = (n - 2) / 2.0
    return eval_gegenbauer(k, lam, t) / eval_gegenbauer(k, lam, 1.0)


def test_harmonic_dimension_values():
    assert harmonic_dimension(3, 1) == 3
    assert harmonic_dimension(3, 0) == 1
    assert harmonic_dimension(4, 2) == 9
    # n = 3 closed form 2k+1
    for k in range(10):
        assert harmonic_dimension(3, k) == 2 * k + 1


def test_harmonic_dimension_growth():
    # O(k^(n-2)): the ratio N(n,k)/k^(n-2) stabilizes
    for n in (3, 4, 5):
        r1 = harmonic_dimension(n, 200) / 200 ** (n - 2)
        r2 = harmonic_dimension(n, 400) / 400 ** (n - 2)
        assert abs(r1 / r2 - 1.0) < 0.02


def test_harmonic_dimension_rejects_negative():
    with pytest.raises(ValueError):
        harmonic_dimension(3, -1)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_legendre_matches_gegenbauer(n):
    tab = LegendreTable(n, 20)
    t = np.linspace(-1, 1, 41)
    for k in (0, 1, 2, 5, 11, 20):
        assert np.max(np.abs(tab.eval(k, t) - gegenbauer_oracle(n, k, t))) < 1e-10


def test_legendre_point_values():
    tab = LegendreTable(3, 8)
    assert tab.eval(2, 0.0) == pytest.approx(-0.5, abs=1e-14)
    for k in range(9):
        assert tab.eval(k, 1.0) == 1.0
    assert tab.eval(1, 0.3, deriv=1) == 1.0


def test_legendre_recurrence_residual():
    # values plugged back into the three-term recurrence
    n, kmax = 4, 16
    tab = LegendreTable(n, kmax)
    t = np.linspace(-1, 1, 101)
    P = tab.values(t)
    for k in range(1, kmax):
        lhs = (k + n - 2) * P[k + 1]
        rhs = (2 * k + n - 2) * t * P[k] - k * P[k - 1]
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_legendre_bounded_on_interval():
    for n in (3, 5):
        tab = LegendreTable(n, 32)
        t = np.linspace(-1, 1, 501)
        assert np.max(np.abs(tab.values(t))) <= 1.0 + 1e-12


def test_legendre_degree_out_of_range():
    tab = LegendreTable(3, 4)
    with pytest.raises(ValueError):
        legendre_eval(tab, 5, 0.1)


@pytest.mark.parametrize("n,k", [(3, 3), (4, 7), (5, 12)])
def test_legendre_derivatives_match_finite_differences(n, k):
    tab = LegendreTable(n, k)
    h = 1e-5
    t = np.linspace(-0.9, 0.9, 25)
    d1 = tab.eval(k, t, deriv=1)
    fd1 = (tab.eval(k, t + h) - tab.eval(k, t - h)) / (2 * h)
    assert np.max(np.abs(d1 - fd1)) < 1e-4 * max(1.0, np.max(np.abs(d1)))
    d2 = tab.eval(k, t, deriv=2)
    fd2 = (tab.eval(k, t + h) - 2 * tab.eval(k, t) + tab.eval(k, t - h)) / h ** 2
    assert np.max(np.abs(d2 - fd2)) < 1e-3 * max(1.0, np.max(np.abs(d2)))


@pytest.mark.parametrize("n", [3, 4, 5])
def test_quadrature_total_weight(n):
    quad = jacobi_quadrature(n, 48)
    target = scipy_quad(lambda t: (1 - t * t) ** ((n - 3) / 2), -1, 1)[0]
    assert quad.weights.sum() == pytest.approx(target, rel=1e-12)
    assert quad.weights.sum() == pytest.approx(omega(n) / omega(n - 1), rel=1e-12)
    assert np.all(quad.weights > 0)
    assert np.all(np.abs(quad.nodes) < 1.0)


def test_zonal_coefficient_of_constant_is_sphere_area():
    quad = jacobi_quadrature(3, 48)
    one = ZonalPolynomial(3, [1.0])
    assert zonal_coefficient(one, 0, quad) == pytest.approx(4 * math.pi, rel=1e-12)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_zonal_coefficient_orthogonality(n):
    quad = jacobi_quadrature(n, 64)
    for k in (0, 1, 2, 4, 7):
        pk = ZonalPolynomial(n, [0.0] * k + [1.0])
        for j in range(9):
            val = zonal_coefficient(pk, j, quad)
            if j == k:
                assert val == pytest.approx(omega(n) / harmonic_dimension(n, k), rel=1e-11)
            else:
                assert abs(val) < 1e-10


def test_zonal_coefficient_against_scipy_quad():
    # non-polynomial profile: independent adaptive quadrature oracle
    quad = jacobi_quadrature(3, 96)
    prof = ZonalProfile(lambda t: np.exp(0.7 * t))
    tab = LegendreTable(3, 4)
    for k in (0, 1, 3):
        oracle = 2 * math.pi * scipy_quad(
            lambda t: math.exp(0.7 * t) * tab.eval(k, t), -1, 1)[0]
        assert zonal_coefficient(prof, k, quad) == pytest.approx(oracle, rel=1e-9)


def test_zonal_coefficient_insufficient_order_reported():
    quad = jacobi_quadrature(3, 4)
    p = ZonalPolynomial(3, [0.0] * 8 + [1.0])
    with pytest.raises(InsufficientQuadratureError):
        zonal_coefficient(p, 8, quad)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_laplacian_eigenvalues(n):
    t = np.linspace(-0.999, 0.999, 201)
    for k in range(21):
        pk = ZonalPolynomial(n, [0.0] * k + [1.0])
        res = zonal_laplacian(pk, t, n) + k * (k + n - 2) * pk(t)
        assert np.max(np.abs(res)) < 1e-9


def test_laplacian_point_examples():
    p2 = ZonalPolynomial(3, [0, 0, 1.0])
    assert zonal_laplacian(p2, np.array([0.5]), 3)[0] == pytest.approx(0.75, abs=1e-12)
    const = ZonalPolynomial(4, [2.5])
    assert np.all(zonal_laplacian(const, np.linspace(-1, 1, 11), 4) == 0)
    lin = ZonalPolynomial(3, [0.0, 1.0])
    t = np.linspace(-1, 1, 11)
    assert np.max(np.abs(zonal_laplacian(lin, t, 3) + 2 * t)) < 1e-14


def test_green_symmetry():
    # int (f Lap g - g Lap f) dS = 0 for smooth zonal pairs
    quad = jacobi_quadrature(3, 64)
    rng = np.random.default_rng(3)
    for _ in range(5):
        f = ZonalPolynomial(3, rng.normal(size=7))
        g = ZonalPolynomial(3, rng.normal(size=9))
        vals = (f(quad.nodes) * zonal_laplacian(g, quad.nodes, 3)
                - g(quad.nodes) * zonal_laplacian(f, quad.nodes, 3))
        assert abs(quad.integrate(vals)) < 1e-10


def test_ck_norms_of_legendre_degree_two():
    p2 = ZonalPolynomial(3, [0, 0, 1.0])
    assert zonal_ck_norm(p2, 0, 3) == pytest.approx(1.0, abs=1e-9)
    assert zonal_ck_norm(p2, 1, 3) == pytest.approx(2.5, abs=1e-6)
    assert zonal_ck_norm(p2, 2, 3) == pytest.approx(2.5 + 3 * math.sqrt(2), abs=1e-6)


def test_ck_norm_rejects_coarse_grid():
    p2 = ZonalPolynomial(3, [0, 0, 1.0])
    with pytest.raises(ValueError):
        zonal_ck_norm(p2, 0, 3, resolution=100)


def test_regularity_probe_legendre_ratio():
    p2 = ZonalPolynomial(3, [0, 0, 1.0])
    rep = regularity_probe([p2], 3, q=2)
    # box multiplier at degree 2 is -2, so the C0 norm of box f is 2
    assert rep["operator"] == "box"
    assert rep["ratios"][0] == pytest.approx((2.5 + 3 * math.sqrt(2)) / 2.0, abs=1e-5)
    assert abs(rep["flux_residuals"][0]) < 1e-12


def test_regularity_probe_flux_identity_random():
    rng = np.random.default_rng(11)
    profiles = []
    for _ in range(10):
        c = rng.normal(size=6)
        c[1] = 0.0
        profiles.append(ZonalPolynomial(3, c))
    rep = regularity_probe(profiles, 3)
    assert rep["max_flux_residual"] < 1e-10
    assert all(np.isfinite(rep["ratios"]))
    assert rep["rejected"] == []


def test_regularity_probe_rejects_uncentered():
    bad = ZonalPolynomial(3, [0.0, 1.0, 0.5])
    rep = regularity_probe([bad], 3)
    assert len(rep["rejected"]) == 1
    assert rep["ratios"] == []


def test_regularity_probe_general_q():
    p3 = ZonalPolynomial(3, [0, 0, 0, 1.0])
    rep = regularity_probe([p3], 3, q=-1.0)
    # D_{-1} on degree 3: eigenvalue -(12 + 1) = -13, so ratio = C2 / 13
    c2 = zonal_ck_norm(p3, 2, 3)
    assert rep["operator"] == "D_q"
    assert rep["ratios"][0] == pytest.approx(c2 / 13.0, rel=1e-9)


def test_boundary_flux_vanishes_for_higher_dim():
    quad = jacobi_quadrature(5, 64)
    f = ZonalPolynomial(5, [0.3, 0.0, 1.0, -0.4])
    assert abs(boundary_flux(f, 5, quad)) < 1e-12
