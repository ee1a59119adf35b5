"""Monte-Carlo integral geometry: Crofton and kinematic formulas for
intrinsic volumes and the Crofton formula for Minkowski valuations.

Affine planes of codimension i are sampled as a rotation-invariant direction
plus an offset uniform in the i-ball of radius R in the orthogonal
complement; the estimator weight C(n, n-i) kappa_n / kappa_(n-i) * R^i is
the invariant measure of the sampling window, normalized so that the planes
meeting the unit ball have measure C(n, d) kappa_n / kappa_d (d the plane
dimension).  Rigid motions combine a uniform rotation (probability law) with
a translation uniform in a cube that covers all contact positions.  All
estimators are deterministic in (seed, shard): samples are drawn per shard
from spawned seed sequences and reduced in fixed order, and the standard
error comes from the per-shard spread.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .constants import crofton_c, crofton_q, flag, kappa, omega
from .convex import (
    Polytope,
    area_measure,
    intersect,
    intrinsic_volumes,
    section_line,
    section_plane,
)
from .harmonics import harmonic_dimension, legendre_recurrence
from .zonal import DEFAULT_KMAX, ZonalObject, box_j_apply, box_n_apply, builtin_zonal

__all__ = [
    "EstimateReport",
    "PlaneSampler",
    "MotionSampler",
    "crofton_intrinsic",
    "crofton_target",
    "kinematic_check",
    "kinematic_target",
    "kinematic_minkowski_check",
    "hadwiger_check",
    "crofton_minkowski",
    "crofton_minkowski_rhs",
    "geometric_constants_entries",
]

DEFAULT_SHARDS = 20


@dataclass
class EstimateReport:
    """One Monte-Carlo estimate with its per-shard standard error and the
    analytic target it is checked against."""

    estimate: float
    stderr: float
    target: float
    n_samples: int
    seed: int
    wall_time_s: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def z(self) -> float:
        if self.stderr == 0.0:
            return 0.0 if self.estimate == self.target else math.inf
        return (self.estimate - self.target) / self.stderr

    def within(self, sigmas: float = 3.0, slack: float = 0.0) -> bool:
        return bool(abs(self.estimate - self.target) <= sigmas * self.stderr + slack)

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "target": self.target,
            "z": self.z,
            "N": self.n_samples,
            "seed": self.seed,
            "wall_time_s": self.wall_time_s,
            **self.extra,
        }


@dataclass(frozen=True)
class PlaneSampler:
    """Plane sampling law: codimension, enclosing radius, seed, count."""

    n: int
    codim: int
    radius: float
    seed: int
    n_samples: int
    shards: int = DEFAULT_SHARDS

    @property
    def weight(self) -> float:
        """Invariant measure of the sampled window of planes."""
        return (math.comb(self.n, self.codim)
                * kappa(self.n) / kappa(self.n - self.codim)
                * self.radius ** self.codim)


@dataclass(frozen=True)
class MotionSampler:
    """Rigid-motion law: uniform rotations (probability) and translations
    uniform in the centered cube of side `window`; weight = window^n."""

    n: int
    window: float
    seed: int
    n_samples: int
    shards: int = DEFAULT_SHARDS

    @property
    def weight(self) -> float:
        return self.window ** self.n


def _shard_rngs(seed: int, shards: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(shards)]


def _shard_sizes(n_samples: int, shards: int) -> list[int]:
    base = n_samples // shards
    sizes = [base] * shards
    for k in range(n_samples - base * shards):
        sizes[k] += 1
    return sizes


def _reduce_shards(shard_means: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    est = shard_means.mean(axis=0)
    se = shard_means.std(axis=0, ddof=1) / math.sqrt(shard_means.shape[0])
    return est, se


def _unit_rows(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def _rotations_from_quaternions(q: np.ndarray) -> np.ndarray:
    """Rotation matrices from unit quaternions (m, 4) -> (m, 3, 3)."""
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    R = np.empty((q.shape[0], 3, 3))
    R[:, 0, 0] = 1 - 2 * (y * y + z * z)
    R[:, 0, 1] = 2 * (x * y - z * w)
    R[:, 0, 2] = 2 * (x * z + y * w)
    R[:, 1, 0] = 2 * (x * y + z * w)
    R[:, 1, 1] = 1 - 2 * (x * x + z * z)
    R[:, 1, 2] = 2 * (y * z - x * w)
    R[:, 2, 0] = 2 * (x * z - y * w)
    R[:, 2, 1] = 2 * (y * z + x * w)
    R[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return R


# -- plane sections of a fixed body -----------------------------------------

def _section_polygon_2d(P: Polytope, a: np.ndarray, s: float,
                        b1: np.ndarray, b2: np.ndarray,
                        tol: float = 1e-12):
    """Ordered 2-d coordinates (in the plane frame) of P cut by the plane
    {x . a = s}, or None when the section is empty/degenerate."""
    d = P.vertices @ a - s
    pts = []
    for i, j in P.edge_index_pairs():
        di, dj = d[i], d[j]
        if (di > tol) != (dj > tol) and abs(di - dj) > tol:
            lam = di / (di - dj)
            if 0.0 <= lam <= 1.0:
                pts.append(P.vertices[i] + lam * (P.vertices[j] - P.vertices[i]))
    on_plane = np.abs(d) <= tol
    for k in np.flatnonzero(on_plane):
        pts.append(P.vertices[k])
    if len(pts) < 3:
        return None
    pts = np.array(pts)
    xy = np.column_stack((pts @ b1, pts @ b2))
    ctr = xy.mean(axis=0)
    ang = np.arctan2(xy[:, 1] - ctr[1], xy[:, 0] - ctr[0])
    order = np.argsort(ang)
    xy = xy[order]
    keep = [0]
    for k in range(1, len(xy)):
        if np.linalg.norm(xy[k] - xy[keep[-1]]) > 1e-10:
            keep.append(k)
    if len(keep) >= 2 and np.linalg.norm(xy[keep[-1]] - xy[keep[0]]) <= 1e-10:
        keep.pop()
    xy = xy[keep]
    return xy if xy.shape[0] >= 3 else None


def _polygon_perimeter_area(xy: np.ndarray) -> tuple[float, float]:
    nxt = np.roll(xy, -1, axis=0)
    per = float(np.sum(np.linalg.norm(nxt - xy, axis=1)))
    area = 0.5 * abs(float(np.sum(xy[:, 0] * nxt[:, 1] - nxt[:, 0] * xy[:, 1])))
    return per, area


def crofton_target(P: Polytope, i: int, j: int) -> float:
    """Analytic value [i+j; j] V_(i+j)(P) of the Crofton integral."""
    return flag(i + j, j) * intrinsic_volumes(P)[i + j]


def crofton_intrinsic(P: Polytope, i: int, j: int, n_samples: int, seed: int,
                      radius: float | None = None,
                      shards: int = DEFAULT_SHARDS) -> EstimateReport:
    """Monte-Carlo estimate of the integral of V_j over the codimension-i
    planes meeting P, against the target [i+j; j] V_(i+j)(P)."""
    n = 3
    if not (0 <= j and 1 <= i and i + j <= n):
        raise ValueError(f"need i >= 1, j >= 0, i + j <= {n}; got i={i}, j={j}")
    if P.dim != 3:
        raise ValueError("crofton sampling expects a full-dimensional body")
    R = P.enclosing_radius * (1.0 + 1e-12) if radius is None else radius
    sampler = PlaneSampler(n=n, codim=i, radius=R, seed=seed,
                           n_samples=n_samples, shards=shards)
    t0 = time.perf_counter()
    rngs = _shard_rngs(seed, shards)
    sizes = _shard_sizes(n_samples, shards)
    means = np.empty(shards)
    A, b = P.inequalities()
    for sh in range(shards):
        rng, m = rngs[sh], sizes[sh]
        if i == 1:
            dirs = _unit_rows(rng.standard_normal((m, 3)))
            offs = rng.uniform(-R, R, m)
            if j == 0:
                proj = P.vertices @ dirs.T
                vals = ((proj.min(axis=0) <= offs) & (offs <= proj.max(axis=0))).astype(float)
            else:
                vals = np.zeros(m)
                for t in range(m):
                    a3 = dirs[t]
                    aux = np.array([1.0, 0, 0]) if abs(a3[0]) < 0.9 else np.array([0, 1.0, 0])
                    b1 = np.cross(a3, aux)
                    b1 /= np.linalg.norm(b1)
                    b2 = np.cross(a3, b1)
                    xy = _section_polygon_2d(P, a3, offs[t], b1, b2)
                    if xy is None:
                        continue
                    per, area = _polygon_perimeter_area(xy)
                    vals[t] = per / 2.0 if j == 1 else area
        elif i == 2:
            dirs = _unit_rows(rng.standard_normal((m, 3)))
            # uniform offsets in the disc of radius R orthogonal to the line
            aux = np.where(np.abs(dirs[:, :1]) < 0.9,
                           np.tile([1.0, 0, 0], (m, 1)), np.tile([0, 1.0, 0], (m, 1)))
            e1 = _unit_rows(np.cross(dirs, aux))
            e2 = np.cross(dirs, e1)
            rad = R * np.sqrt(rng.uniform(0.0, 1.0, m))
            ang = rng.uniform(0.0, 2.0 * math.pi, m)
            p = rad[:, None] * (np.cos(ang)[:, None] * e1 + np.sin(ang)[:, None] * e2)
            den = dirs @ A.T                       # (m, F)
            num = b[None, :] - p @ A.T
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = num / den
            hi = np.where(den > 1e-12, ratio, math.inf).min(axis=1)
            lo = np.where(den < -1e-12, ratio, -math.inf).max(axis=1)
            feasible = ~np.any((np.abs(den) <= 1e-12) & (num < -1e-12), axis=1)
            length = np.clip(hi - lo, 0.0, None)
            hit = feasible & (hi >= lo)
            vals = hit.astype(float) if j == 0 else np.where(hit, length, 0.0)
        else:  # i == 3: points
            u = _unit_rows(rng.standard_normal((m, 3)))
            r3 = R * rng.uniform(0.0, 1.0, m) ** (1.0 / 3.0)
            x = u * r3[:, None]
            vals = np.all(x @ A.T <= b[None, :] + 1e-12, axis=1).astype(float)
        means[sh] = sampler.weight * vals.mean()
    est, se = _reduce_shards(means)
    return EstimateReport(
        estimate=float(est), stderr=float(se), target=crofton_target(P, i, j),
        n_samples=n_samples, seed=seed, wall_time_s=time.perf_counter() - t0,
        extra={"i": i, "j": j, "radius": R, "weight": sampler.weight,
               "shards": shards})


# -- kinematic formula --------------------------------------------------------

def kinematic_target(P: Polytope, L: Polytope, j: int) -> float:
    """Right side of the principal kinematic formula:
    sum_i [i+j; j] [n; i]^(-1) V_(i+j)(P) V_(n-i)(L)."""
    n = 3
    vp, vl = intrinsic_volumes(P), intrinsic_volumes(L)
    return float(sum(flag(i + j, j) / flag(n, i) * vp[i + j] * vl[n - i]
                     for i in range(0, n - j + 1)))


def _sat_batch(vp: np.ndarray, axesP: np.ndarray, dirsP: np.ndarray,
               vl: np.ndarray, axesL: np.ndarray, dirsL: np.ndarray,
               R: np.ndarray, x: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Vectorized separating-axis test: does P intersect R@L + x, per sample."""
    m = R.shape[0]
    vlw = np.einsum("mij,vj->mvi", R, vl) + x[:, None, :]     # (m, VL, 3)
    hit = np.ones(m, dtype=bool)
    # fixed axes of P
    pp = vp @ axesP.T                                          # (VP, A)
    plo, phi = pp.min(axis=0), pp.max(axis=0)
    ql = np.einsum("ai,mvi->mav", axesP, vlw)                  # (m, A, VL)
    hit &= ~np.any((ql.min(axis=2) > phi[None, :] + tol)
                   | (ql.max(axis=2) < plo[None, :] - tol), axis=1)
    # axes carried by L (rotated facet normals)
    axL = np.einsum("mij,aj->mai", R, axesL)                   # (m, AL, 3)
    # axes from edge-direction cross products
    crs = np.cross(dirsP[None, :, None, :],
                   np.einsum("mij,ej->mei", R, dirsL)[:, None, :, :])
    crs = crs.reshape(m, -1, 3)
    axall = np.concatenate([axL, crs], axis=1)                 # (m, AA, 3)
    pp2 = np.einsum("mai,vi->mav", axall, vp)                  # (m, AA, VP)
    qq2 = np.einsum("mai,mvi->mav", axall, vlw)                # (m, AA, VL)
    nrm = np.linalg.norm(axall, axis=2)
    valid = nrm > 1e-12
    sep = ((qq2.min(axis=2) > pp2.max(axis=2) + tol * nrm)
           | (qq2.max(axis=2) < pp2.min(axis=2) - tol * nrm)) & valid
    hit &= ~np.any(sep, axis=1)
    return hit


def _dedupe_axes(v: np.ndarray) -> np.ndarray:
    out = []
    for a in v:
        if not any(abs(abs(np.dot(a, b)) - 1.0) < 1e-9 for b in out):
            out.append(a)
    return np.array(out)


def kinematic_check(P: Polytope, L: Polytope, j: int, n_samples: int, seed: int,
                    shards: int = DEFAULT_SHARDS,
                    window: float | None = None) -> EstimateReport:
    """Monte-Carlo check of the principal kinematic formula: average of
    V_j(P n gL) over rigid motions g against the bilinear target.

    j = 0 runs a vectorized exact separating-axis test; j >= 1 clips the
    moving body and evaluates intrinsic volumes per sample (slower)."""
    n = 3
    if not 0 <= j <= n:
        raise ValueError(f"need 0 <= j <= {n}")
    if P.dim != 3 or L.dim != 3:
        raise ValueError("kinematic sampling expects full-dimensional bodies")
    safe = 2.0 * (P.enclosing_radius + L.enclosing_radius)
    W = window if window is not None else safe
    sampler = MotionSampler(n=n, window=W, seed=seed, n_samples=n_samples, shards=shards)
    t0 = time.perf_counter()
    rngs = _shard_rngs(seed, shards)
    sizes = _shard_sizes(n_samples, shards)
    means = np.empty(shards)
    axesP = _dedupe_axes(P.facet_normals)
    axesL = _dedupe_axes(L.facet_normals)
    dirsP, dirsL = P.edge_directions(), L.edge_directions()
    boundary_hits = 0
    for sh in range(shards):
        rng, m = rngs[sh], sizes[sh]
        q = _unit_rows(rng.standard_normal((m, 4)))
        R = _rotations_from_quaternions(q)
        x = rng.uniform(-W / 2.0, W / 2.0, (m, 3))
        if j == 0:
            hits = _sat_batch(P.vertices, axesP, dirsP,
                              L.vertices, axesL, dirsL, R, x)
            vals = hits.astype(float)
        else:
            vals = np.zeros(m)
            hits = np.zeros(m, dtype=bool)
            for t in range(m):
                moved = Polytope.from_vertices(L.vertices @ R[t].T + x[t])
                body = intersect(moved, P)
                if not body.is_empty:
                    hits[t] = True
                    vals[t] = intrinsic_volumes(body)[j]
        shell = np.max(np.abs(x), axis=1) >= 0.98 * (W / 2.0)
        boundary_hits += int(np.count_nonzero(hits & shell))
        means[sh] = sampler.weight * vals.mean()
    if W < safe * (1.0 - 1e-12) and boundary_hits > 0:
        raise ValueError(
            f"translation window {W:.4g} too small for the contact set "
            f"(needs {safe:.4g}): {boundary_hits} boundary hits")
    est, se = _reduce_shards(means)
    return EstimateReport(
        estimate=float(est), stderr=float(se), target=kinematic_target(P, L, j),
        n_samples=n_samples, seed=seed, wall_time_s=time.perf_counter() - t0,
        extra={"j": j, "window": W, "weight": sampler.weight, "shards": shards,
               "boundary_hits": boundary_hits})


def hadwiger_check(P: Polytope, L: Polytope, j: int, n_samples: int, seed: int,
                   shards: int = DEFAULT_SHARDS) -> dict:
    """Consistency of the kinematic integral with its Hadwiger decomposition
    into Crofton integrals:

        int V_j(P n gL) dg = sum_i V_(n-i)(L) [n; i]^(-1)
                             int V_j(P n E) dsigma_(n-i)(E).

    Both sides are estimated by Monte Carlo (the i = 0 term is exact); the
    report carries the combined standard error."""
    n = 3
    lhs = kinematic_check(P, L, j, n_samples, seed, shards=shards)
    vl = intrinsic_volumes(L)
    rhs = vl[n] * intrinsic_volumes(P)[j]  # i = 0: the whole space
    rhs_var = 0.0
    terms = [{"i": 0, "estimate": intrinsic_volumes(P)[j], "stderr": 0.0,
              "coef": vl[n]}]
    for i in range(1, n - j + 1):
        rep = crofton_intrinsic(P, i, j, n_samples, seed + i, shards=shards)
        coef = vl[n - i] / flag(n, i)
        rhs += coef * rep.estimate
        rhs_var += (coef * rep.stderr) ** 2
        terms.append({"i": i, "estimate": rep.estimate, "stderr": rep.stderr,
                      "coef": coef})
    combined = math.sqrt(lhs.stderr ** 2 + rhs_var)
    return {
        "lhs": lhs,
        "rhs": rhs,
        "rhs_stderr": math.sqrt(rhs_var),
        "combined_stderr": combined,
        "difference": lhs.estimate - rhs,
        "consistent_3sigma": abs(lhs.estimate - rhs) <= 3.0 * combined,
        "terms": terms,
        "target": kinematic_target(P, L, j),
    }


def kinematic_minkowski_check(spec, P: Polytope, L: Polytope, direction,
                              n_samples: int, seed: int,
                              shards: int = DEFAULT_SHARDS) -> dict:
    """Kinematic formula for a Minkowski valuation at a fixed direction u:
    the motion average of h(Phi(P n gL))(u) against its Hadwiger
    decomposition into Crofton integrals,

        int h(P n gL) dg = sum_i V_(n-i)(L) [n; i]^(-1)
                           int h(P n E) dsigma_(n-i)(E),

    with the i = 0 (whole space) and i = n (points, only the constant piece
    of the valuation survives) terms exact and the plane/line terms
    estimated by Monte Carlo.  Both sides carry standard errors; the report
    states their 3-sigma consistency."""
    from .valuation import evaluate  # deferred: valuation builds on this module's siblings

    n = 3
    if P.dim != 3 or L.dim != 3:
        raise ValueError("kinematic sampling expects full-dimensional bodies")
    u = np.asarray(direction, dtype=float)
    u = (u / np.linalg.norm(u))[None, :]

    def phi(body) -> float:
        if body.is_empty:
            return 0.0
        return float(evaluate(spec, body, u).values[0])

    t0 = time.perf_counter()
    W = 2.0 * (P.enclosing_radius + L.enclosing_radius)
    rngs = _shard_rngs(seed, shards)
    sizes = _shard_sizes(n_samples, shards)
    lhs_means = np.empty(shards)
    for sh in range(shards):
        rng, m = rngs[sh], sizes[sh]
        q = _unit_rows(rng.standard_normal((m, 4)))
        R = _rotations_from_quaternions(q)
        x = rng.uniform(-W / 2.0, W / 2.0, (m, 3))
        acc = 0.0
        for t in range(m):
            moved = Polytope.from_vertices(L.vertices @ R[t].T + x[t])
            acc += phi(intersect(moved, P))
        lhs_means[sh] = W ** 3 * acc / m
    lhs, lhs_se = _reduce_shards(lhs_means)

    vl = intrinsic_volumes(L)
    rhs = vl[n] * phi(P)                       # i = 0
    rhs += vl[0] * spec.c0 * intrinsic_volumes(P)[n]  # i = n: points keep c0
    rhs_var = 0.0
    R_enc = P.enclosing_radius * (1.0 + 1e-12)
    for i in (1, 2):
        sampler = PlaneSampler(n=n, codim=i, radius=R_enc, seed=seed + i,
                               n_samples=n_samples, shards=shards)
        rngs_i = _shard_rngs(seed + i, shards)
        means = np.empty(shards)
        for sh in range(shards):
            rng, m = rngs_i[sh], sizes[sh]
            dirs = _unit_rows(rng.standard_normal((m, 3)))
            acc = 0.0
            if i == 1:
                offs = rng.uniform(-R_enc, R_enc, m)
                for t in range(m):
                    acc += phi(section_plane(P, offs[t] * dirs[t], normal=dirs[t]))
            else:
                aux = np.where(np.abs(dirs[:, :1]) < 0.9,
                               np.tile([1.0, 0, 0], (m, 1)),
                               np.tile([0, 1.0, 0], (m, 1)))
                e1 = _unit_rows(np.cross(dirs, aux))
                e2 = np.cross(dirs, e1)
                rad = R_enc * np.sqrt(rng.uniform(0.0, 1.0, m))
                ang = rng.uniform(0.0, 2.0 * math.pi, m)
                p = rad[:, None] * (np.cos(ang)[:, None] * e1
                                    + np.sin(ang)[:, None] * e2)
                for t in range(m):
                    acc += phi(section_line(P, p[t], dirs[t]))
            means[sh] = sampler.weight * acc / m
        est_i, se_i = _reduce_shards(means)
        coef = vl[n - i] / flag(n, i)
        rhs += coef * float(est_i)
        rhs_var += (coef * float(se_i)) ** 2
    combined = math.sqrt(lhs_se ** 2 + rhs_var)
    return {
        "direction": list(map(float, u[0])),
        "lhs": float(lhs),
        "lhs_stderr": float(lhs_se),
        "rhs": float(rhs),
        "rhs_stderr": math.sqrt(rhs_var),
        "combined_stderr": combined,
        "difference": float(lhs) - rhs,
        "consistent_3sigma": bool(abs(float(lhs) - rhs) <= 3.0 * combined),
        "N": n_samples,
        "seed": seed,
        "window": W,
        "wall_time_s": time.perf_counter() - t0,
    }


# -- Crofton formula for Minkowski valuations ---------------------------------

def crofton_minkowski_rhs(n: int, i: int, j: int, mu: ZonalObject,
                          kmax: int = DEFAULT_KMAX) -> ZonalObject:
    """Multiplier-level right side of the Crofton formula for a degree-j
    datum mu and codimension i: q_(n,i,j) * (mu * box_(n-j+1) berg_(n-i-j+1)),
    returned as a zonal object with propagated Berg truncation bars."""
    if i == 0:
        # formal case: the box/Berg pair collapses to the centered identity
        return mu.centered()
    kmax = min(kmax, mu.kmax)
    jj = n - i - j + 1
    bb = n - j + 1
    g = builtin_zonal(f"berg:{jj}", n=n, kmax=kmax)
    boxed = box_n_apply(g) if bb == n else box_j_apply(g, bb)
    q = crofton_q(n, i, j)
    mult = q * mu.multipliers[:kmax + 1] * boxed.multipliers[:kmax + 1]
    err = None
    if boxed.mult_error is not None:
        err = q * np.abs(mu.multipliers[:kmax + 1]) * boxed.mult_error[:kmax + 1]
    return ZonalObject(n, kmax=kmax, multipliers=mult, mult_error=err)


def crofton_minkowski(P: Polytope, mu: ZonalObject, i: int, j: int,
                      n_samples: int, seed: int, degrees=(0, 2, 3, 4),
                      probe=(0.36, -0.48, 0.8), radius: float | None = None,
                      shards: int = DEFAULT_SHARDS, arc_nodes: int = 20,
                      kmax: int = DEFAULT_KMAX) -> dict:
    """Per-harmonic-degree Monte-Carlo check of the Crofton formula for the
    degree-j valuation generated by the zonal measure mu, at codimension i
    (geometric path: n = 3, i = j = 1).

    Both sides are compared through their zonal transfer coefficients
    M_k(w) = int P_k(u . w) d(.)(u) at the probe direction w: the left side
    averages the moments of S_(j+i wedge ...)(P n E) * mu over planes E, the
    right side is q_(n,i,j) a_k[mu] a_k[box berg] M_k[S_(i+j)(P)](w).  Rows
    report lhs, stderr, rhs, and the Berg truncation bar."""
    n = 3
    if (i, j) != (1, 1):
        raise ValueError("the geometric Monte-Carlo path is implemented for "
                         "i = j = 1 (use crofton_minkowski_rhs for the "
                         "multiplier-level right side)")
    if P.dim != 3:
        raise ValueError("need a full-dimensional body")
    degrees = list(degrees)
    kk = max(degrees)
    w = np.asarray(probe, dtype=float)
    w = w / np.linalg.norm(w)
    R = P.enclosing_radius * (1.0 + 1e-12) if radius is None else radius
    sampler = PlaneSampler(n=n, codim=i, radius=R, seed=seed,
                           n_samples=n_samples, shards=shards)
    t0 = time.perf_counter()
    # Gauss nodes on the half circle nu -> m_e -> -nu
    gl_x, gl_w = np.polynomial.legendre.leggauss(arc_nodes)
    theta = 0.5 * math.pi * (gl_x + 1.0)
    th_w = 0.5 * math.pi * gl_w
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    rngs = _shard_rngs(seed, shards)
    sizes = _shard_sizes(n_samples, shards)
    shard_means = np.zeros((shards, kk + 1))
    for sh in range(shards):
        rng, m = rngs[sh], sizes[sh]
        dirs = _unit_rows(rng.standard_normal((m, 3)))
        offs = rng.uniform(-R, R, m)
        acc = np.zeros(kk + 1)
        for t in range(m):
            a3 = dirs[t]
            aux = np.array([1.0, 0, 0]) if abs(a3[0]) < 0.9 else np.array([0, 1.0, 0])
            b1 = np.cross(a3, aux)
            b1 /= np.linalg.norm(b1)
            b2 = np.cross(a3, b1)
            xy = _section_polygon_2d(P, a3, offs[t], b1, b2)
            if xy is None:
                continue
            edges = np.roll(xy, -1, axis=0) - xy
            lens = np.linalg.norm(edges, axis=1)
            good = lens > 1e-12
            if not np.any(good):
                continue
            ed = edges[good] / lens[good][:, None]
            me2 = np.column_stack((ed[:, 1], -ed[:, 0]))   # outward for CCW
            # ensure counterclockwise orientation: positive signed area
            signed = 0.5 * np.sum(xy[:, 0] * np.roll(xy[:, 1], -1)
                                  - np.roll(xy[:, 0], -1) * xy[:, 1])
            if signed < 0:
                me2 = -me2
            me3 = me2[:, 0:1] * b1[None, :] + me2[:, 1:2] * b2[None, :]
            # arc points u(theta) = cos(theta) nu + sin(theta) m_e
            dots = cos_t[None, :] * float(a3 @ w) + sin_t[None, :] * (me3 @ w)[:, None]
            Pk, _, _ = legendre_recurrence(n, kk, np.clip(dots, -1, 1).ravel())
            Pk = Pk.reshape(kk + 1, *dots.shape)
            arc_int = np.tensordot(Pk, th_w, axes=(2, 0))   # (kk+1, E)
            acc += arc_int @ (0.5 * lens[good])
        shard_means[sh] = sampler.weight * acc / m
    est, se = _reduce_shards(shard_means)
    # moments of S_1(Q) * mu pick up the Funk-Hecke factor of mu per degree
    a_mu = mu.multipliers[:kk + 1]
    est = est * a_mu
    se = se * np.abs(a_mu)
    # right side: multipliers against the moments of S_(i+j)(P)
    rhs_obj = crofton_minkowski_rhs(n, i, j, mu, kmax=kmax)
    target_meas = area_measure(P, i + j)
    Mk = target_meas.zonal_moments(w[None, :], kk)[:, 0]
    rows = []
    for k in degrees:
        rhs = rhs_obj.multipliers[k] * Mk[k]
        bar = (rhs_obj.mult_error[k] * abs(Mk[k])
               if rhs_obj.mult_error is not None else 0.0)
        rows.append({
            "k": k,
            "lhs": float(est[k]),
            "stderr": float(se[k]),
            "rhs": float(rhs),
            "berg_bar": float(bar),
            "pass": bool(abs(est[k] - rhs) <= 3.0 * se[k] + bar),
        })
    return {
        "rows": rows,
        "probe": list(map(float, w)),
        "N": n_samples,
        "seed": seed,
        "weight": sampler.weight,
        "wall_time_s": time.perf_counter() - t0,
        "all_pass": all(r["pass"] for r in rows),
    }


def geometric_constants_entries(n: int, i: int | None = None,
                                j: int | None = None,
                                k: int | None = None) -> dict:
    """Exact evaluation of the constants entering the integral-geometric
    formulas (kappa, omega, flag coefficients, c_(n,k), q_(n,i,j))."""
    from .constants import geometric_constants
    return geometric_constants(n, i=i, j=j, k=k)
