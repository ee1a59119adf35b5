"""Valuation specs: evaluation paths, derivation operator, multipliers,
mean sections, pairing, additivity."""

import math

import numpy as np
import pytest

from minkval.constants import omega
from minkval.convex import Polytope, cube, random_hull
from minkval.valuation import (
    MinkowskiValuationSpec,
    builtin_spec,
    degree1_multipliers,
    evaluate,
    lambda_derivative,
    mean_section_spec,
    poincare_pair,
    valuation_identity_check,
)
from minkval.zonal import ZonalObject, box_multiplier, builtin_zonal


def random_directions(rng, m):
    d = rng.standard_normal((m, 3))
    return d / np.linalg.norm(d, axis=1)[:, None]


def random_rotation(rng):
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def centered_density(rng, band=6, kmax=16, n=3):
    c = rng.normal(size=band + 1)
    c[1] = 0.0
    return ZonalObject.from_coeffs(n, c, kmax=kmax)


def random_spec(rng, kmax=16):
    return MinkowskiValuationSpec(
        n=3, c0=float(rng.uniform(0, 1)),
        mu={1: centered_density(rng, kmax=kmax)},
        f_top=centered_density(rng, kmax=kmax),
        cn=float(rng.uniform(0, 1)))


# -- evaluation ----------------------------------------------------------------

def test_projection_body_of_cube():
    spec = builtin_spec("projection_body")
    res = evaluate(spec, cube(), np.array([[1.0, 0, 0]]))
    assert res.values[0] == pytest.approx(1.0, abs=1e-12)
    # shadow area in a generic direction: sum of |u . n_F| area_F / 2
    u = np.array([0.2, -0.4, 0.89])
    u /= np.linalg.norm(u)
    expect = float(np.sum(np.abs(u)))
    res2 = evaluate(spec, cube(), u[None, :])
    assert res2.values[0] == pytest.approx(expect, abs=1e-12)


def test_constant_degree_one_datum():
    c = 0.61
    spec = MinkowskiValuationSpec(n=3, mu={1: ZonalObject.constant(3, c)})
    res = evaluate(spec, cube(), np.array([[0.0, 0, 1.0], [0.6, 0.8, 0.0]]))
    assert np.allclose(res.values, 3 * math.pi * c, atol=1e-10)


def test_volume_only_spec():
    spec = MinkowskiValuationSpec(n=3, cn=0.7)
    res = evaluate(spec, cube(), np.array([[1.0, 0, 0]]))
    assert res.values[0] == pytest.approx(0.7)


def test_empty_body_contributes_zero():
    spec = builtin_spec("projection_body")
    res = evaluate(spec, Polytope.empty(), np.array([[1.0, 0, 0]]))
    assert res.values[0] == 0.0


def test_two_paths_agree_band_limited():
    rng = np.random.default_rng(1)
    spec = random_spec(rng)
    P = random_hull(6)
    dirs = random_directions(rng, 7)
    a = evaluate(spec, P, dirs, path="pointwise")
    b = evaluate(spec, P, dirs, path="spectral", band=16)
    assert np.max(np.abs(a.values - b.values)) < 1e-9
    assert a.path == "pointwise" and b.path == "spectral"
    # per-degree transfer sums to the sampled values minus the constants
    from minkval.convex import intrinsic_volumes
    assert b.per_degree is not None and b.per_degree.shape == (17, 7)
    recon = spec.c0 + spec.cn * intrinsic_volumes(P).v3 + b.per_degree.sum(axis=0)
    assert np.max(np.abs(recon - b.values)) < 1e-10


def test_spectral_path_handles_atoms():
    mu = ZonalObject(3, atoms=[(1.0, 1.0), (-1.0, 1.0)], kmax=16).centered()
    spec = MinkowskiValuationSpec(n=3, mu={1: mu})
    dirs = np.array([[0.0, 0.0, 1.0]])
    res = evaluate(spec, cube(), dirs, band=16)
    assert res.path == "spectral"
    with pytest.raises(ValueError):
        evaluate(spec, cube(), dirs, path="pointwise")


def test_spectral_truncation_reported():
    spec = builtin_spec("projection_body", kmax=32)
    res = evaluate(spec, cube(), np.array([[1.0, 0, 0]]), band=8, path="spectral")
    assert res.band == 8
    assert res.truncation_tail > 0


def test_spectral_band_overflow_rejected():
    spec = builtin_spec("projection_body", kmax=8)
    with pytest.raises(ValueError, match="overflow"):
        evaluate(spec, cube(), np.array([[1.0, 0, 0]]), band=16, path="spectral")


def test_spectral_truncation_tail_is_a_bound():
    # for data fully resolved by kmax, |pointwise - spectral| <= reported tail
    rng = np.random.default_rng(20)
    c = np.zeros(25)
    c[[0, 2, 5, 12, 24]] = rng.normal(size=5)
    spec = MinkowskiValuationSpec(n=3, f_top=ZonalObject.from_coeffs(3, c, kmax=32))
    P = random_hull(44)
    dirs = random_directions(rng, 6)
    exact = evaluate(spec, P, dirs, path="pointwise").values
    for L in (4, 8, 16):
        res = evaluate(spec, P, dirs, path="spectral", band=L)
        dev = float(np.max(np.abs(res.values - exact)))
        assert dev <= res.truncation_tail + 1e-12
    full = evaluate(spec, P, dirs, path="spectral", band=24)
    assert np.max(np.abs(full.values - exact)) < 1e-9


def test_degree_homogeneity():
    rng = np.random.default_rng(2)
    P = random_hull(9)
    dirs = random_directions(rng, 5)
    for i, spec in ((1, MinkowskiValuationSpec(n=3, mu={1: centered_density(rng)})),
                    (2, MinkowskiValuationSpec(n=3, f_top=centered_density(rng)))):
        base = evaluate(spec, P, dirs).values
        for lam in (0.5, 2.0):
            scaled = evaluate(spec, P.scaled(lam), dirs).values
            assert np.max(np.abs(scaled - lam ** i * base)) < 1e-8


def test_rotation_equivariance():
    rng = np.random.default_rng(3)
    spec = random_spec(rng)
    P = random_hull(10)
    dirs = random_directions(rng, 6)
    for _ in range(3):
        R = random_rotation(rng)
        a = evaluate(spec, P.rotated(R), dirs @ R.T).values
        b = evaluate(spec, P, dirs).values
        assert np.max(np.abs(a - b)) < 1e-8


def test_subadditivity_of_generated_support_functions():
    # specs with non-negative generating data produce support functions
    rng = np.random.default_rng(4)
    P = random_hull(11)
    for name in ("projection_body", "mean_width_ball", "difference_body"):
        spec = builtin_spec(name)
        for _ in range(10):
            u, v = rng.standard_normal(3), rng.standard_normal(3)
            w = u + v
            hu = np.linalg.norm(u) * evaluate(spec, P, u[None] / np.linalg.norm(u)).values[0]
            hv = np.linalg.norm(v) * evaluate(spec, P, v[None] / np.linalg.norm(v)).values[0]
            hw = np.linalg.norm(w) * evaluate(spec, P, w[None] / np.linalg.norm(w)).values[0]
            assert hw <= hu + hv + 1e-8


# -- derivation operator ---------------------------------------------------------

def test_lambda_annihilates_constants():
    spec = MinkowskiValuationSpec(n=3, c0=2.0)
    d = lambda_derivative(spec)
    assert d.c0 == 0.0 and not d.mu and d.f_top is None and d.cn == 0.0


def test_lambda_degree_shift_factor():
    rng = np.random.default_rng(5)
    f2 = centered_density(rng)
    spec = MinkowskiValuationSpec(n=3, f_top=f2)
    d = lambda_derivative(spec)
    assert set(d.mu) == {1}
    assert np.allclose(d.mu[1].multipliers, 2.0 * f2.multipliers)
    # again: degree 1 -> constant with the total mass
    dd = lambda_derivative(d)
    assert dd.c0 == pytest.approx(2.0 * f2.total_mass)
    assert not dd.mu and dd.f_top is None


def test_lambda_degree_two_general_dimension():
    rng = np.random.default_rng(6)
    mu2 = centered_density(rng, n=5)
    spec = MinkowskiValuationSpec(n=5, mu={2: mu2})
    d = lambda_derivative(spec)
    assert set(d.mu) == {1}
    assert np.allclose(d.mu[1].multipliers, 2.0 * mu2.multipliers)


def test_lambda_chain_factorial():
    rng = np.random.default_rng(7)
    mu3 = centered_density(rng, n=6)
    spec = MinkowskiValuationSpec(n=6, mu={3: mu3})
    d = spec
    for _ in range(2):
        d = lambda_derivative(d)
    assert set(d.mu) == {1}
    assert np.allclose(d.mu[1].multipliers, 6.0 * mu3.multipliers)  # 3!


def test_lambda_matches_finite_difference():
    rng = np.random.default_rng(8)
    dirs = random_directions(rng, 5)
    for seed in range(3):
        spec = random_spec(rng)
        P = random_hull(seed + 60)
        d = lambda_derivative(spec)
        h = 1e-4
        f0 = evaluate(spec, P, dirs, path="pointwise", parallel_t=0.0).values
        f1 = evaluate(spec, P, dirs, path="pointwise", parallel_t=h).values
        f2 = evaluate(spec, P, dirs, path="pointwise", parallel_t=2 * h).values
        fd = (-3 * f0 + 4 * f1 - f2) / (2 * h)
        dv = evaluate(d, P, dirs, path="pointwise").values
        assert np.max(np.abs(fd - dv)) < 1e-6


def test_lambda_volume_term_flows_to_top_degree():
    spec = MinkowskiValuationSpec(n=3, cn=1.5)
    d = lambda_derivative(spec)
    assert d.f_top is not None
    # constant density c_n: the derived valuation is c_n * total S_2 mass
    res = evaluate(d, cube(), np.array([[1.0, 0, 0]]))
    assert res.values[0] == pytest.approx(1.5 * 6.0, abs=1e-10)


# -- degree-1 multipliers ----------------------------------------------------------

def test_degree1_multipliers_atoms():
    mu = ZonalObject.from_atoms(3, [(1.0, 1.0), (-1.0, 1.0)], kmax=10)
    seq = degree1_multipliers(mu)
    for k in range(11):
        expect = 0.0 if k == 1 else box_multiplier(3, k) * (1 + (-1) ** k)
        assert seq[k] == pytest.approx(expect, abs=1e-12)


def test_degree1_multipliers_constant():
    mu = ZonalObject.constant(3, 0.8, kmax=10)
    seq = degree1_multipliers(mu)
    assert seq[0] == pytest.approx(0.8 * omega(3))
    assert np.max(np.abs(seq.values[1:])) < 1e-12


def test_degree1_multipliers_from_spec():
    rng = np.random.default_rng(9)
    mu = centered_density(rng)
    spec = MinkowskiValuationSpec(n=3, mu={1: mu})
    seq = degree1_multipliers(spec)
    for k in (0, 2, 5):
        assert seq[k] == pytest.approx(box_multiplier(3, k) * mu.multipliers[k])
    bad = MinkowskiValuationSpec(n=3, cn=1.0)
    with pytest.raises(ValueError):
        degree1_multipliers(bad)


def test_schneider_bound_for_nonnegative_measures():
    # |a_k| <= a_0 for the valuation generated by a non-negative zonal
    # measure acting on support functions
    rng = np.random.default_rng(10)
    for _ in range(25):
        atoms = [(float(t), float(m)) for t, m in
                 zip(rng.uniform(-1, 1, 4), rng.uniform(0.1, 2.0, 4))]
        mu = ZonalObject.from_atoms(3, atoms, kmax=32)
        assert np.all(np.abs(mu.multipliers) <= mu.multipliers[0] * (1 + 1e-12))


# -- mean sections -------------------------------------------------------------------

def test_mean_section_constants():
    ms2 = mean_section_spec(3, 2)
    assert ms2.f_top is not None and not ms2.mu
    # q_{3,2} = 1/2 under kappa(-1) = 1/pi: leading multiplier is pi^2/8 * ...
    assert ms2.f_top.multipliers[0] == pytest.approx(0.5 * math.pi ** 2 / 4, abs=1e-7)
    assert ms2.f_top.multipliers[1] == 0.0
    ms3 = mean_section_spec(3, 3)
    assert set(ms3.mu) == {1}  # degree n+1-j = 1
    assert ms3.mu[1].multipliers[1] == 0.0
    with pytest.raises(ValueError):
        mean_section_spec(3, 1)


def test_mean_section_degree_homogeneity():
    rng = np.random.default_rng(11)
    P = random_hull(13)
    dirs = random_directions(rng, 4)
    ms2 = mean_section_spec(3, 2)  # degree 2
    base = evaluate(ms2, P, dirs).values
    scaled = evaluate(ms2, P.scaled(2.0), dirs).values
    assert np.max(np.abs(scaled - 4.0 * base)) < 1e-8


# -- pairing --------------------------------------------------------------------------

def test_poincare_pair_legendre():
    p2 = ZonalObject.from_coeffs(3, [0, 0, 1.0], kmax=8)
    assert poincare_pair(p2, p2, 1) == pytest.approx(-8 * math.pi / 5, rel=1e-12)
    p3 = ZonalObject.from_coeffs(3, [0, 0, 0, 1.0], kmax=8)
    assert abs(poincare_pair(p2, p3, 1)) < 1e-12


def test_poincare_pair_symmetry():
    rng = np.random.default_rng(12)
    h = centered_density(rng)
    f = centered_density(rng)
    assert poincare_pair(h, f, 1) == pytest.approx(poincare_pair(f, h, 2), rel=1e-10)


def test_poincare_pair_parity():
    # odd degrees flip sign under the antipodal reflection inside the pairing
    p3 = ZonalObject.from_coeffs(3, [0, 0, 0, 1.0], kmax=8)
    val = poincare_pair(p3, p3, 1)
    direct = -box_multiplier(3, 3) * omega(3) / 7
    assert val == pytest.approx(direct, rel=1e-10)


# -- additivity -----------------------------------------------------------------------

def test_identity_plane_missing_body():
    rng = np.random.default_rng(13)
    spec = random_spec(rng)
    rep = valuation_identity_check(spec, cube(), [0, 0, 5.0], [0, 0, 1.0],
                                   random_directions(rng, 10))
    assert rep.residual == 0.0


def test_identity_projection_body_cube():
    rng = np.random.default_rng(14)
    spec = builtin_spec("projection_body")
    rep = valuation_identity_check(spec, cube(), [0.5, 0.5, 0.5], [0, 0, 1.0],
                                   random_directions(rng, 50))
    assert rep.residual is not None and rep.residual <= 1e-7


def test_identity_random_specs_and_bodies():
    rng = np.random.default_rng(15)
    for seed in range(5):
        spec = random_spec(rng)
        P = random_hull(seed + 80)
        a = rng.standard_normal(3)
        point = P.vertices.mean(axis=0)
        rep = valuation_identity_check(spec, P, point, a, random_directions(rng, 20))
        assert rep.skipped or rep.residual <= 1e-6


def test_identity_degenerate_split_reported():
    spec = builtin_spec("projection_body")
    rng = np.random.default_rng(16)
    # tangent plane at a face: one side is the face itself
    rep = valuation_identity_check(spec, cube(), [0.5, 0.5, 1.0], [0, 0, 1.0],
                                   random_directions(rng, 5))
    assert rep.skipped
    assert "degenerate" in rep.reason


# -- spec validation and serialization ---------------------------------------------

def test_spec_rejects_uncentered_data():
    bad = ZonalObject.from_coeffs(3, [0.0, 1.0], kmax=8)
    with pytest.raises(ValueError):
        MinkowskiValuationSpec(n=3, mu={1: bad})
    with pytest.raises(ValueError):
        MinkowskiValuationSpec(n=3, mu={5: ZonalObject.constant(3, 1.0)})
    with pytest.raises(ValueError):
        MinkowskiValuationSpec(n=3, f_top=ZonalObject.from_coeffs(4, [1.0]))


def test_spec_json_round_trip():
    rng = np.random.default_rng(17)
    spec = random_spec(rng)
    spec2 = MinkowskiValuationSpec.from_json(spec.to_json(), kmax=16)
    assert spec2.c0 == spec.c0 and spec2.cn == spec.cn
    assert np.max(np.abs(spec2.mu[1].multipliers - spec.mu[1].multipliers)) < 1e-12
    assert np.max(np.abs(spec2.f_top.multipliers - spec.f_top.multipliers)) < 1e-12
    assert spec.to_json() == spec2.to_json()


def test_builtin_difference_body_multipliers():
    db = builtin_spec("difference_body")
    seq = degree1_multipliers(db)
    for k in range(10):
        expect = 0.0 if k == 1 else 1.0 + (-1.0) ** k
        assert seq[k] == pytest.approx(expect, abs=1e-10)


def test_builtin_mean_width_ball():
    mw = builtin_spec("mean_width_ball")
    res = evaluate(mw, cube(), np.array([[0.0, 1.0, 0.0]]))
    # mean width of the unit cube = V_1 / 2 = 3/2
    assert res.values[0] == pytest.approx(1.5, abs=1e-10)
