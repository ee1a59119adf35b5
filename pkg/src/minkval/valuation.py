"""Translation-invariant, rotation-equivariant Minkowski valuations in
convolution form.

A valuation is specified by the tuple (c0, mu_1..mu_{n-2}, f_{n-1}, c_n):
the support function of the image body is

    h(K) = c0 + sum_i S_i(K,.) * mu_i + S_{n-1}(K,.) * f_{n-1} + c_n V_n(K)

with centered zonal data.  Evaluation runs either pointwise (zonal densities
integrated against the exact piecewise area measures) or spectrally
(band-limited transfer of Funk-Hecke multipliers against the body's
area-measure moments); the two agree wherever both apply.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import kappa, mean_section_q, omega
from .convex import (
    AreaMeasure,
    Polytope,
    area_measure,
    clip_halfspace,
    intrinsic_volumes,
    section_plane,
    steiner_area_measure,
)
from .harmonics import ZonalPolynomial, harmonic_dimension, jacobi_quadrature
from .zonal import (
    DEFAULT_KMAX,
    MultiplierSequence,
    ZonalObject,
    box_multiplier,
    builtin_zonal,
)

__all__ = [
    "MinkowskiValuationSpec",
    "SupportFunctionResult",
    "ValuationIdentityReport",
    "evaluate",
    "lambda_derivative",
    "degree1_multipliers",
    "mean_section_spec",
    "poincare_pair",
    "valuation_identity_check",
    "builtin_spec",
]

DEFAULT_BAND = 16
CENTER_TOL = 1e-9


def _require_centered(z: ZonalObject, label: str):
    scale = max(1.0, float(np.max(np.abs(z.multipliers))))
    if abs(z.multipliers[1]) > CENTER_TOL * scale:
        raise ValueError(f"{label} must be centered (a_1 = 0), got a_1 = {z.multipliers[1]}")


@dataclass
class MinkowskiValuationSpec:
    """Generating data (c0, mu_i, f_top, cn) of a Minkowski valuation.

    mu maps the degree i in 1..n-2 to a centered zonal measure; f_top is the
    centered zonal function at degree n-1.  Missing degrees contribute
    nothing.  For a genuine Minkowski valuation both constants are
    non-negative; the container does not enforce that, so that derived
    objects (images under the derivation operator, differences) stay
    representable.
    """

    n: int = 3
    c0: float = 0.0
    mu: dict[int, ZonalObject] = field(default_factory=dict)
    f_top: ZonalObject | None = None
    cn: float = 0.0

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("ambient dimension must be >= 3")
        for i, z in self.mu.items():
            if not 1 <= i <= self.n - 2:
                raise ValueError(f"mu degree {i} outside 1..{self.n - 2}")
            if z.n != self.n:
                raise ValueError("zonal datum dimension mismatch")
            _require_centered(z, f"mu_{i}")
        if self.f_top is not None:
            if self.f_top.n != self.n:
                raise ValueError("zonal datum dimension mismatch")
            _require_centered(self.f_top, "f_top")

    def degrees(self) -> list[tuple[int, ZonalObject]]:
        """All generating zonal data as (degree, datum) pairs."""
        out = [(i, z) for i, z in sorted(self.mu.items())]
        if self.f_top is not None:
            out.append((self.n - 1, self.f_top))
        return out

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "c0": self.c0,
            "mu": [self.mu[i].to_json() if i in self.mu else None
                   for i in range(1, self.n - 1)],
            "f_top": None if self.f_top is None else self.f_top.to_json(),
            "cn": self.cn,
        }

    @classmethod
    def from_json(cls, data, kmax: int = DEFAULT_KMAX) -> "MinkowskiValuationSpec":
        if isinstance(data, str):
            data = json.loads(data)
        n = int(data["n"])
        mu = {}
        for off, entry in enumerate(data.get("mu") or []):
            if entry is not None:
                mu[off + 1] = ZonalObject.from_json(entry, kmax=kmax)
        f_top = data.get("f_top")
        return cls(n=n, c0=float(data.get("c0", 0.0)), mu=mu,
                   f_top=None if f_top is None else ZonalObject.from_json(f_top, kmax=kmax),
                   cn=float(data.get("cn", 0.0)))


@dataclass
class SupportFunctionResult:
    """Support-function samples of the image body, with provenance.

    Spectral results also carry the per-degree zonal transfer against the
    body's area-measure moments: per_degree[k] is the degree-k contribution
    at each direction (values = constant terms + per_degree.sum(axis=0))."""

    directions: np.ndarray
    values: np.ndarray
    path: str                 # "pointwise", "spectral", or "empty"
    band: int | None = None
    truncation_tail: float = 0.0
    per_degree: np.ndarray | None = None

    def value(self, k: int = 0) -> float:
        return float(self.values[k])


def _steiner_volume(P: Polytope, t: float) -> float:
    iv = intrinsic_volumes(P)
    return sum(t ** (3 - i) * kappa(3 - i) * iv[i] for i in range(4))


def _measures_for(P: Polytope, degrees: list[int], parallel_t: float) -> dict[int, AreaMeasure]:
    if parallel_t == 0.0:
        return {i: area_measure(P, i) for i in degrees}
    return {i: steiner_area_measure(P, i, parallel_t) for i in degrees}


def evaluate(spec: MinkowskiValuationSpec, P: Polytope, directions,
             band: int | None = None, path: str = "auto",
             parallel_t: float = 0.0) -> SupportFunctionResult:
    """Support function of the valuation applied to P (or to the outer
    parallel body P + tB when parallel_t > 0), sampled at the given unit
    directions.

    The pointwise path needs every zonal datum to have a continuous density
    and integrates it against the piecewise area measures.  The spectral
    path accepts atoms and assembles the band-limited transfer
    sum_k a_k[mu_i] N(n,k)/omega_n int P_k(u.v) dS_i(v); its truncated
    multiplier tail is reported.
    """
    if spec.n != 3:
        raise ValueError("geometric evaluation is implemented for n = 3")
    if P.is_empty:
        dirs = np.atleast_2d(np.asarray(directions, dtype=float))
        return SupportFunctionResult(dirs, np.zeros(dirs.shape[0]), path="empty")
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    dirs = dirs / np.linalg.norm(dirs, axis=1)[:, None]
    data = spec.degrees()
    if path == "auto":
        path = "pointwise" if all(z.has_density and not z.atoms for _, z in data) else "spectral"
    base = spec.c0 + spec.cn * (_steiner_volume(P, parallel_t) if parallel_t > 0.0
                                else intrinsic_volumes(P).v3)
    values = np.full(dirs.shape[0], base)
    meas = _measures_for(P, [i for i, _ in data], parallel_t)
    tail = 0.0
    if path == "pointwise":
        for i, z in data:
            if not z.has_density or z.atoms:
                raise ValueError(f"degree-{i} datum has atoms; use the spectral path")
            values += meas[i].integrate_zonal(lambda t, zz=z: zz.density(t), dirs)
        return SupportFunctionResult(dirs, values, "pointwise")
    L = DEFAULT_BAND if band is None else int(band)
    w = omega(spec.n)
    per_degree = np.zeros((L + 1, dirs.shape[0]))
    for i, z in data:
        if band is not None and band > z.kmax:
            raise ValueError(
                f"band {band} overflows the degree-{i} datum (kmax = {z.kmax})")
        kk = min(L, z.kmax)
        moments = meas[i].zonal_moments(dirs, kk)
        coef = np.array([z.multipliers[k] * harmonic_dimension(spec.n, k) / w
                         for k in range(kk + 1)])
        per_degree[:kk + 1] += coef[:, None] * moments
        if z.kmax > kk:
            # rigorous bound on the dropped terms: |M_k(u)| <= total mass
            mass = meas[i].total_mass
            tail += float(sum(abs(z.multipliers[k]) * harmonic_dimension(spec.n, k)
                              for k in range(kk + 1, z.kmax + 1))) / w * mass
    values += per_degree.sum(axis=0)
    return SupportFunctionResult(dirs, values, "spectral", band=L,
                                 truncation_tail=tail, per_degree=per_degree)


def lambda_derivative(spec: MinkowskiValuationSpec) -> MinkowskiValuationSpec:
    """Derivation operator: d/dt at t=0 of K -> Phi(K + tB).

    Degree-i data move to degree i-1 with factor i, the degree-1 datum feeds
    its total mass into the constant, and the volume coefficient becomes a
    constant top-degree density.
    """
    n = spec.n
    new_c0 = 0.0
    new_f_top: ZonalObject | None = None
    # the shifted measure degrees 1..n-3 and the landing slot n-2 of the top
    # datum never collide, so plain assignment suffices
    new_mu: dict[int, ZonalObject] = {}
    for i, z in spec.mu.items():
        if i == 1:
            new_c0 += z.total_mass
        else:
            new_mu[i - 1] = z.scaled(float(i))
    if spec.f_top is not None:
        new_mu[n - 2] = spec.f_top.scaled(float(n - 1))
    if spec.cn != 0.0:
        new_f_top = ZonalObject.constant(n, spec.cn,
                                         kmax=spec.f_top.kmax if spec.f_top else DEFAULT_KMAX)
    return MinkowskiValuationSpec(n=n, c0=new_c0, mu=new_mu, f_top=new_f_top, cn=0.0)


def degree1_multipliers(spec_or_mu, kmax: int | None = None) -> MultiplierSequence:
    """Funk-Hecke multipliers of the degree-1 valuation in normal form
    h(K) = S_1(K,.) * mu_1 = h_K * box(mu_1): entry k is the box multiplier
    times a_k[mu_1], with the degree-1 entry forced to zero."""
    if isinstance(spec_or_mu, MinkowskiValuationSpec):
        if set(spec_or_mu.mu) != {1} or spec_or_mu.f_top is not None:
            raise ValueError("expected a spec with only a degree-1 datum")
        mu = spec_or_mu.mu[1]
    else:
        mu = spec_or_mu
    kk = mu.kmax if kmax is None else min(kmax, mu.kmax)
    vals = np.array([box_multiplier(mu.n, k) * mu.multipliers[k] for k in range(kk + 1)])
    vals[1] = 0.0
    return MultiplierSequence(mu.n, vals)


def mean_section_spec(n: int, j: int, kmax: int = DEFAULT_KMAX) -> MinkowskiValuationSpec:
    """The mean section operator M_j as a valuation spec: a single datum
    q(n,j) * (Berg kernel of dimension j) at degree n+1-j."""
    if not 2 <= j <= n:
        raise ValueError(f"mean section needs 2 <= j <= n, got j={j}")
    q = mean_section_q(n, j)
    datum = builtin_zonal(f"berg:{j}", n=n, kmax=kmax).scaled(q)
    deg = n + 1 - j
    if deg == n - 1:
        return MinkowskiValuationSpec(n=n, f_top=datum)
    return MinkowskiValuationSpec(n=n, mu={deg: datum})


def poincare_pair(h: ZonalObject, f: ZonalObject, i: int, quad_order: int = 96) -> float:
    """Pairing of the spherical valuations generated by zonal densities h at
    degree i and f at degree n-i:

        (n-i)! i! / (n-1)! * int h(u) (box f)(-u) du,

    computed by weighted 1-d quadrature using P_k(-t) = (-1)^k P_k(t)."""
    n = h.n
    if f.n != n:
        raise ValueError("dimension mismatch")
    if not 1 <= i <= n - 1:
        raise ValueError(f"degree must satisfy 1 <= i <= n-1, got {i}")
    for z, lab in ((h, "h"), (f, "f")):
        _require_centered(z, lab)
        if not z.has_density or z.atoms:
            raise ValueError(f"{lab} must be a zonal density")
    quad = jacobi_quadrature(n, quad_order)
    # box f reflected: coefficients pick up the box multiplier and parity
    kf = f.kmax
    coeffs = np.zeros(kf + 1)
    src = f.coeffs if f.coeffs is not None else None
    if src is None:
        w = omega(n)
        src = np.array([f.multipliers[k] * harmonic_dimension(n, k) / w
                        for k in range(kf + 1)])
    m = min(src.size, kf + 1)
    for k in range(m):
        coeffs[k] = src[k] * box_multiplier(n, k) * (-1.0) ** k
    boxf_neg = ZonalPolynomial(n, coeffs)
    hv = np.asarray(h.density(quad.nodes), dtype=float)
    integral = omega(n - 1) * quad.integrate(hv * boxf_neg(quad.nodes))
    scale = math.factorial(n - i) * math.factorial(i) / math.factorial(n - 1)
    return scale * integral


@dataclass
class ValuationIdentityReport:
    residual: float | None
    skipped: bool = False
    reason: str = ""
    n_directions: int = 0


def valuation_identity_check(spec: MinkowskiValuationSpec, P: Polytope,
                             plane_point, plane_normal, directions,
                             band: int | None = None) -> ValuationIdentityReport:
    """Finite additivity of the valuation under a hyperplane split:
    sup over the sampled directions of

        |h(K) + h(L) - h(P) - h(K n L)|

    with K, L the two closed halves.  A plane missing the body gives residual
    0 exactly (the empty body contributes nothing); a split producing a
    lower-dimensional half is reported as degenerate and skipped."""
    a = np.asarray(plane_normal, dtype=float)
    a = a / np.linalg.norm(a)
    c = float(np.dot(a, np.asarray(plane_point, dtype=float)))
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    K = clip_halfspace(P, a, c)
    L = clip_halfspace(P, -a, -c)
    if K.is_empty or L.is_empty:
        return ValuationIdentityReport(residual=0.0, skipped=False,
                                       reason="plane misses the body",
                                       n_directions=dirs.shape[0])
    if K.dim < 3 or L.dim < 3:
        return ValuationIdentityReport(residual=None, skipped=True,
                                       reason="degenerate split (tangent plane)",
                                       n_directions=dirs.shape[0])
    M = section_plane(P, plane_point, normal=a)
    vals = []
    for body in (K, L, P, M):
        vals.append(evaluate(spec, body, dirs, band=band).values)
    res = np.abs(vals[0] + vals[1] - vals[2] - vals[3])
    return ValuationIdentityReport(residual=float(np.max(res)),
                                   n_directions=dirs.shape[0])


def builtin_spec(name: str, n: int = 3, kmax: int = DEFAULT_KMAX) -> MinkowskiValuationSpec:
    """Named valuations: "projection_body", "difference_body",
    "mean_width_ball", "mean_section:j"."""
    if name == "projection_body":
        return MinkowskiValuationSpec(n=n, f_top=ZonalObject.abs_half(n, kmax))
    if name == "difference_body":
        # degree-1 normal form of K -> K + (-K): mu_1 is twice the even part
        # of the Berg kernel, so box(mu_1) has multipliers 1 + (-1)^k
        g = builtin_zonal(f"berg:{n}", n=n, kmax=kmax)
        mult = np.array([(1.0 + (-1.0) ** k) * g.multipliers[k] for k in range(kmax + 1)])
        w = omega(n)
        coeffs = np.array([mult[k] * harmonic_dimension(n, k) / w for k in range(kmax + 1)])
        mu1 = ZonalObject(n, coeffs=coeffs, kmax=kmax, multipliers=mult)
        return MinkowskiValuationSpec(n=n, mu={1: mu1})
    if name == "mean_width_ball":
        # K -> (mean width of K) B; constant density 2/omega_n at degree 1
        return MinkowskiValuationSpec(n=n, mu={1: ZonalObject.constant(n, 2.0 / omega(n), kmax)})
    if name.startswith("mean_section:"):
        j = int(name.split(":", 1)[1])
        return mean_section_spec(n, j, kmax)
    raise KeyError(f"unknown valuation builtin {name!r}")
