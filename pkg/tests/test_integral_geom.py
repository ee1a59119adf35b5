"""Monte-Carlo Crofton/kinematic machinery at unit-test scale (the full
acceptance gates run in test_acceptance.py)."""

import math

import numpy as np
import pytest

from minkval.constants import crofton_c, crofton_q, flag, kappa, mean_section_q, omega
from minkval.convex import ball_polytope, cube, intrinsic_volumes, random_hull
from minkval.integral_geom import (
    EstimateReport,
    PlaneSampler,
    crofton_intrinsic,
    crofton_minkowski,
    crofton_minkowski_rhs,
    crofton_target,
    geometric_constants_entries,
    hadwiger_check,
    kinematic_check,
    kinematic_minkowski_check,
    kinematic_target,
)
from minkval.valuation import builtin_spec
from minkval.zonal import ZonalObject, box_multiplier, builtin_zonal


# -- constants ------------------------------------------------------------------

def test_kappa_table():
    assert kappa(0) == 1.0
    assert kappa(1) == pytest.approx(2.0, rel=1e-14)
    assert kappa(2) == pytest.approx(math.pi, rel=1e-14)
    assert kappa(3) == pytest.approx(4 * math.pi / 3, rel=1e-14)
    assert kappa(-1) == pytest.approx(1 / math.pi, rel=1e-14)


def test_flag_coefficients():
    assert flag(2, 1) == pytest.approx(math.pi / 2, rel=1e-14)
    assert flag(2, 0) == 1.0
    # normalization identity [n; i] kappa_(n-i) = C(n, i) kappa_n / kappa_i
    for n in (3, 4, 5):
        for i in range(n + 1):
            lhs = flag(n, i) * kappa(n - i)
            rhs = math.comb(n, i) * kappa(n) / kappa(i)
            assert lhs == pytest.approx(rhs, rel=1e-12)


def test_crofton_constants():
    assert crofton_c(3, 1) == pytest.approx(1.0, rel=1e-12)
    assert crofton_q(3, 1, 1) == pytest.approx(1.0, rel=1e-12)
    assert mean_section_q(3, 2) == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(ValueError):
        crofton_c(3, 2)
    with pytest.raises(ValueError):
        crofton_q(3, 2, 1)


def test_geometric_constants_entries():
    d = geometric_constants_entries(3, i=1, j=1)
    assert d["q_3,1,1"] == pytest.approx(1.0)
    d2 = geometric_constants_entries(3, j=2)
    assert d2["q_3,2"] == pytest.approx(0.5)
    assert d2["omega"][3] == pytest.approx(4 * math.pi)


def test_plane_sampler_weight_is_hitting_measure():
    # planes meeting B_R: C(3,2) kappa_3/kappa_2 R = 4R; lines: 2 pi R^2
    assert PlaneSampler(3, 1, 2.0, 0, 10).weight == pytest.approx(8.0, rel=1e-12)
    assert PlaneSampler(3, 2, 1.0, 0, 10).weight == pytest.approx(2 * math.pi, rel=1e-12)
    assert PlaneSampler(3, 3, 1.0, 0, 10).weight == pytest.approx(kappa(3), rel=1e-12)


# -- sampler calibration -----------------------------------------------------------

def test_sampler_calibration_on_ball_proxy():
    # hitting measures reproduce [i; 0] V_i = V_i on a near-ball body
    B = ball_polytope(2)
    for i in (1, 2):
        rep = crofton_intrinsic(B, i, 0, 40000, seed=101 + i)
        assert rep.target == pytest.approx(intrinsic_volumes(B)[i], rel=1e-12)
        assert rep.within(3.0)


@pytest.mark.parametrize("i,j,target", [
    (1, 1, math.pi / 2 * 3), (2, 0, 3.0), (1, 0, 3.0), (3, 0, 1.0),
    (2, 1, 2.0), (1, 2, 2.0),
])
def test_crofton_cube_all_pairs(i, j, target):
    rep = crofton_intrinsic(cube(), i, j, 20000, seed=300 + 10 * i + j)
    assert rep.target == pytest.approx(target, rel=1e-12)
    assert rep.within(3.5), f"(i={i}, j={j}): z = {rep.z:.2f}"


def test_crofton_rejects_bad_indices():
    with pytest.raises(ValueError):
        crofton_intrinsic(cube(), 0, 1, 100, seed=1)
    with pytest.raises(ValueError):
        crofton_intrinsic(cube(), 2, 2, 100, seed=1)


def test_crofton_random_hull():
    P = random_hull(77)
    rep = crofton_intrinsic(P, 1, 1, 30000, seed=7)
    assert rep.within(3.5)


def test_stderr_scales_like_inverse_sqrt():
    # 200 shards keep the noise of the stderr estimate itself around 5%,
    # so the N^(-1/2) law is resolvable at the 20% level
    ses = []
    for N in (1000, 10000, 100000):
        rep = crofton_intrinsic(cube(), 1, 0, N, seed=13, shards=200)
        ses.append(rep.stderr)
    for a, b in zip(ses, ses[1:]):
        assert a / b == pytest.approx(math.sqrt(10.0), rel=0.20)


def test_determinism_bit_identical():
    a = crofton_intrinsic(cube(), 1, 1, 5000, seed=99)
    b = crofton_intrinsic(cube(), 1, 1, 5000, seed=99)
    assert a.estimate == b.estimate and a.stderr == b.stderr
    c = kinematic_check(cube(), cube(), 0, 5000, seed=99)
    d = kinematic_check(cube(), cube(), 0, 5000, seed=99)
    assert c.estimate == d.estimate and c.stderr == d.stderr


def test_estimate_report_fields():
    rep = crofton_intrinsic(cube(), 2, 0, 2000, seed=5)
    out = rep.to_json()
    for key in ("estimate", "stderr", "target", "z", "N", "seed"):
        assert key in out
    assert out["N"] == 2000
    assert rep.z == pytest.approx((rep.estimate - rep.target) / rep.stderr)


# -- kinematic ---------------------------------------------------------------------

def test_kinematic_target_values():
    # two unit cubes, j = 0: 1 + 4.5 + 4.5 + 1 = 11
    assert kinematic_target(cube(), cube(), 0) == pytest.approx(11.0, rel=1e-12)
    # top degree is the product of the volumes
    assert kinematic_target(cube(), cube(), 3) == pytest.approx(1.0, rel=1e-12)
    P = random_hull(21)
    L = random_hull(22)
    vp, vl = intrinsic_volumes(P), intrinsic_volumes(L)
    assert kinematic_target(P, L, 3) == pytest.approx(vp.v3 * vl.v3, rel=1e-12)


def test_kinematic_mc_j0():
    rep = kinematic_check(cube(), cube(), 0, 30000, seed=31)
    assert rep.within(3.5)


def test_kinematic_mc_volume_degree():
    rep = kinematic_check(cube(), cube(), 3, 1500, seed=33)
    assert rep.target == pytest.approx(1.0)
    assert rep.within(3.5)


def test_kinematic_mc_random_bodies():
    P = random_hull(51)
    L = random_hull(52)
    rep = kinematic_check(P, L, 0, 30000, seed=53)
    assert rep.within(3.5)


def test_kinematic_window_too_small_detected():
    with pytest.raises(ValueError, match="boundary hits"):
        kinematic_check(cube(), cube(), 0, 4000, seed=3, window=1.5)
    # the default window is provably safe: no error, hits recorded
    rep = kinematic_check(cube(), cube(), 0, 4000, seed=3)
    assert "boundary_hits" in rep.extra


def test_hadwiger_consistency():
    h = hadwiger_check(cube(), cube(), 0, 20000, seed=41)
    assert h["consistent_3sigma"]
    assert h["rhs"] == pytest.approx(h["target"], abs=4 * h["rhs_stderr"] + 0.05)
    assert len(h["terms"]) == 4


def test_kinematic_minkowski_valuation():
    # motion average of the projection-body support value at a fixed
    # direction against its Crofton decomposition, both by Monte Carlo
    spec = builtin_spec("projection_body")
    res = kinematic_minkowski_check(spec, cube(), cube(), [0.0, 0.0, 1.0],
                                    2500, seed=17)
    assert res["consistent_3sigma"]
    # degree-2 valuation with c0 = 0: only the i = 0, 1 terms contribute,
    # and the i = 0 term is the exact shadow area of the cube itself
    assert res["rhs"] > 1.0
    assert res["lhs_stderr"] > 0 and res["rhs_stderr"] > 0


# -- Crofton formula for Minkowski valuations ----------------------------------------

def test_crofton_mv_rhs_formal_identity_case():
    mu = ZonalObject.from_atoms(3, [(0.4, 1.0)], kmax=8)
    out = crofton_minkowski_rhs(3, 0, 1, mu)
    expect = mu.multipliers.copy()
    expect[1] = 0.0
    assert np.allclose(out.multipliers, expect)


def test_crofton_mv_rhs_multiplier_structure():
    mu = ZonalObject.dirac_pole(3, kmax=8)
    out = crofton_minkowski_rhs(3, 1, 1, mu)
    g2 = builtin_zonal("berg:2", n=3, kmax=8)
    for k in (0, 2, 4):
        expect = box_multiplier(3, k) * g2.multipliers[k]  # q = 1
        assert out.multipliers[k] == pytest.approx(expect, rel=1e-10)
    assert out.multipliers[1] == 0.0
    assert out.mult_error is not None


def test_crofton_mv_degree_zero_analytic():
    # degree-0 moment: lhs = pi * int V_1(K n E) = pi [2;1] V_2(K); the
    # identity forces a_0[box berg_2] = pi^2/4
    mu = ZonalObject.dirac_pole(3, kmax=8)
    rhs0 = crofton_minkowski_rhs(3, 1, 1, mu).multipliers[0]
    lhs0_analytic = math.pi * flag(2, 1) * 3.0 / 6.0  # per unit S_2 mass
    assert rhs0 == pytest.approx(math.pi ** 2 / 4, abs=1e-6)
    assert rhs0 * 6.0 == pytest.approx(math.pi * flag(2, 1) * 3.0, abs=1e-5)
    assert lhs0_analytic == pytest.approx(rhs0, abs=1e-5)


def test_crofton_mv_mc_small():
    res = crofton_minkowski(cube(), ZonalObject.dirac_pole(3, kmax=16),
                            1, 1, 20000, seed=5)
    assert res["all_pass"]
    ks = [r["k"] for r in res["rows"]]
    assert ks == [0, 2, 3, 4]
    k0 = res["rows"][0]
    assert k0["rhs"] == pytest.approx(1.5 * math.pi ** 2, abs=1e-5)
    assert abs(k0["lhs"] - k0["rhs"]) <= 3 * k0["stderr"] + k0["berg_bar"]


def test_crofton_mv_guards():
    mu = ZonalObject.dirac_pole(3, kmax=8)
    with pytest.raises(ValueError):
        crofton_minkowski(cube(), mu, 2, 1, 100, seed=1)


def test_crofton_mv_determinism():
    mu = ZonalObject.dirac_pole(3, kmax=8)
    a = crofton_minkowski(cube(), mu, 1, 1, 4000, seed=8)
    b = crofton_minkowski(cube(), mu, 1, 1, 4000, seed=8)
    assert [r["lhs"] for r in a["rows"]] == [r["lhs"] for r in b["rows"]]
