"""Zonal harmonic analysis on the sphere S^(n-1).

Legendre polynomials of dimension n (normalized so P_k(1) = 1), Gauss-Jacobi
quadrature for the zonal weight (1-t^2)^((n-3)/2), the Laplace-Beltrami
operator and C^k norms of rotation-invariant functions in cylindrical
coordinates, and an empirical probe of the elliptic estimate
||f||_C2 <= C ||box f||_C0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_jacobi

from .constants import omega

__all__ = [
    "harmonic_dimension",
    "LegendreTable",
    "legendre_eval",
    "JacobiQuadrature",
    "jacobi_quadrature",
    "ZonalPolynomial",
    "ZonalProfile",
    "zonal_coefficient",
    "zonal_laplacian",
    "zonal_ck_norm",
    "regularity_probe",
    "InsufficientQuadratureError",
]

MIN_AMBIENT_DIM = 3


class InsufficientQuadratureError(ValueError):
    """Raised when a quadrature rule cannot integrate the requested degree."""


def check_ambient_dim(n: int) -> int:
    if n < MIN_AMBIENT_DIM:
        raise ValueError(f"ambient dimension must be >= {MIN_AMBIENT_DIM}, got {n}")
    return n


def harmonic_dimension(n: int, k: int) -> int:
    """Dimension N(n,k) of the space of spherical harmonics of degree k on
    S^(n-1).  N(n,0) = 1 and N(n,k) grows like k^(n-2)."""
    if k < 0:
        raise ValueError(f"degree must be >= 0, got {k}")
    if n < 2:
        raise ValueError(f"harmonic_dimension needs n >= 2, got {n}")
    if k == 0:
        return 1
    return (n + 2 * k - 2) * math.comb(n + k - 2, n - 2) // (n + k - 2)


def legendre_recurrence(n: int, kmax: int, t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Values and first two t-derivatives of P_k^n at the points t, for all
    0 <= k <= kmax, via the three-term recurrence

        (k + n - 2) P_{k+1} = (2k + n - 2) t P_k - k P_{k-1}.

    Returns three arrays of shape (kmax+1, len(t)).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    m = t.shape[0]
    P = np.zeros((kmax + 1, m))
    dP = np.zeros((kmax + 1, m))
    d2P = np.zeros((kmax + 1, m))
    P[0] = 1.0
    if kmax >= 1:
        P[1] = t
        dP[1] = 1.0
    for k in range(1, kmax):
        a = 2 * k + n - 2
        c = k + n - 2
        # divide last so that P_k(+-1) = (+-1)^k holds exactly
        P[k + 1] = (a * t * P[k] - k * P[k - 1]) / c
        dP[k + 1] = (a * (P[k] + t * dP[k]) - k * dP[k - 1]) / c
        d2P[k + 1] = (a * (2.0 * dP[k] + t * d2P[k]) - k * d2P[k - 1]) / c
    return P, dP, d2P


@dataclass(frozen=True)
class LegendreTable:
    """Evaluator for the Legendre polynomials of dimension n up to kmax."""

    n: int
    kmax: int

    def __post_init__(self):
        # n = 2 is admitted so Berg kernels of low dimension can be expanded
        if self.n < 2:
            raise ValueError(f"LegendreTable needs n >= 2, got {self.n}")
        if self.kmax < 0:
            raise ValueError("kmax must be >= 0")

    def values(self, t, deriv: int = 0) -> np.ndarray:
        """All degrees at once: array of shape (kmax+1,) + shape(t)."""
        t = np.asarray(t, dtype=float)
        tables = legendre_recurrence(self.n, self.kmax, t.ravel())
        if deriv not in (0, 1, 2):
            raise ValueError("deriv must be 0, 1 or 2")
        return tables[deriv].reshape((self.kmax + 1,) + t.shape)

    def eval(self, k: int, t, deriv: int = 0):
        if not 0 <= k <= self.kmax:
            raise ValueError(f"degree {k} out of range [0, {self.kmax}]")
        out = self.values(t, deriv)[k]
        return float(out) if np.ndim(out) == 0 else out


def legendre_eval(table: LegendreTable, k: int, t, deriv: int = 0):
    """P_k^n(t) or its first/second t-derivative."""
    return table.eval(k, t, deriv)


@dataclass(frozen=True)
class JacobiQuadrature:
    """Gauss rule for integrals against the zonal weight (1-t^2)^((n-3)/2)
    on [-1, 1]; exact for polynomial integrands of degree <= 2*order - 1."""

    n: int
    order: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def exact_degree(self) -> int:
        return 2 * self.order - 1

    def integrate(self, values: np.ndarray) -> float:
        """Integral of a function sampled at the nodes, weight included."""
        return float(np.dot(self.weights, values))


@lru_cache(maxsize=64)
def jacobi_quadrature(n: int, order: int) -> JacobiQuadrature:
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    alpha = (n - 3) / 2.0
    x, w = roots_jacobi(order, alpha, alpha)
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    x.flags.writeable = False
    w.flags.writeable = False
    return JacobiQuadrature(n=n, order=order, nodes=x, weights=w)


class ZonalPolynomial:
    """Zonal profile given by a finite Legendre expansion
    f(t) = sum_k coeffs[k] * P_k^n(t)."""

    def __init__(self, n: int, coeffs: Sequence[float]):
        self.n = n
        self.coeffs = np.asarray(coeffs, dtype=float)
        if self.coeffs.ndim != 1 or self.coeffs.size == 0:
            raise ValueError("coeffs must be a non-empty 1-d sequence")
        self.degree = self.coeffs.size - 1
        self._table = LegendreTable(n, self.degree)

    def __call__(self, t, deriv: int = 0):
        vals = self._table.values(t, deriv)
        return np.tensordot(self.coeffs, vals, axes=(0, 0))


class ZonalProfile:
    """Zonal profile backed by callables for f, f' and f''.  Derivatives
    default to central finite differences when not supplied."""

    def __init__(self, f: Callable, df: Callable | None = None,
                 d2f: Callable | None = None, h: float = 1e-6):
        self._f = f
        self._df = df
        self._d2f = d2f
        self._h = h
        self.degree = None

    def __call__(self, t, deriv: int = 0):
        t = np.asarray(t, dtype=float)
        if deriv == 0:
            return self._f(t)
        h = self._h
        if deriv == 1:
            if self._df is not None:
                return self._df(t)
            return (self._f(t + h) - self._f(t - h)) / (2.0 * h)
        if deriv == 2:
            if self._d2f is not None:
                return self._d2f(t)
            return (self._f(t + h) - 2.0 * self._f(t) + self._f(t - h)) / h ** 2
        raise ValueError("deriv must be 0, 1 or 2")


def _profile_degree(f) -> int | None:
    return getattr(f, "degree", None)


def zonal_coefficient(f, k: int, quad: JacobiQuadrature, n: int | None = None) -> float:
    """Multiplier a_k^n[f] = omega_(n-1) * int f(t) P_k^n(t) w_n(t) dt of a
    zonal profile f.

    Zonal measures (anything carrying precomputed `multipliers`, e.g. objects
    with atoms under the pushforward convention, for which the Dirac at the
    pole has a_k = 1) are read off directly.  Raises
    InsufficientQuadratureError when f carries a known polynomial degree
    that the rule cannot integrate exactly against P_k.
    """
    if hasattr(f, "multipliers"):
        return float(f.multipliers[k])
    n = quad.n if n is None else n
    deg = _profile_degree(f)
    if deg is not None and k + deg > quad.exact_degree:
        raise InsufficientQuadratureError(
            f"order-{quad.order} rule is exact to degree {quad.exact_degree}, "
            f"integrand has degree {k + deg}"
        )
    table = LegendreTable(n, k)
    pk = table.eval(k, quad.nodes)
    vals = np.asarray(f(quad.nodes), dtype=float)
    return omega(n - 1) * quad.integrate(vals * pk)


def zonal_laplacian(f, t, n: int):
    """Laplace-Beltrami operator on a zonal profile:
    (1-t^2) f''(t) - (n-1) t f'(t)."""
    t = np.asarray(t, dtype=float)
    return (1.0 - t * t) * f(t, 2) - (n - 1) * t * f(t, 1)


def _ck_grid(resolution: int) -> np.ndarray:
    # cosine-spaced interior points; endpoints handled by their limits
    theta = np.linspace(0.0, math.pi, resolution)[1:-1]
    return np.cos(theta)


def zonal_ck_norm(f, k: int, n: int, resolution: int = 4096) -> float:
    """C^k norm (k = 0, 1, 2) of the zonal function with profile f, using the
    closed-form covariant-derivative norms

        |grad f|^2   = (1-t^2) f'^2
        |grad^2 f|^2 = (n-2) (t f')^2 + ((1-t^2) f'' - t f')^2

    maximized over a cosine-spaced grid, with the t = +-1 values obtained
    from the analytic limits (the tensor norms stay finite there even though
    the raw t-derivatives may not).
    """
    if k not in (0, 1, 2):
        raise ValueError("k must be 0, 1 or 2")
    if resolution < 1000:
        raise ValueError("grid resolution must be >= 1000")
    t = _ck_grid(resolution)
    ends = np.array([-1.0, 1.0])
    f0 = np.asarray(f(t, 0), dtype=float)
    norm = max(np.max(np.abs(f0)), np.max(np.abs(np.asarray(f(ends, 0), dtype=float))))
    if k == 0:
        return float(norm)
    f1 = np.asarray(f(t, 1), dtype=float)
    grad1 = np.sqrt(1.0 - t * t) * np.abs(f1)
    norm += np.max(grad1)  # endpoint limit of |grad f| is 0
    if k == 1:
        return float(norm)
    f2 = np.asarray(f(t, 2), dtype=float)
    hess_sq = (n - 2) * (t * f1) ** 2 + ((1.0 - t * t) * f2 - t * f1) ** 2
    end_d1 = np.abs(np.asarray(f(ends, 1), dtype=float))
    hess_end = math.sqrt(n - 1) * np.max(end_d1)
    norm += max(float(np.sqrt(np.max(hess_sq))), hess_end)
    return float(norm)


def boundary_flux(f, n: int, quad: JacobiQuadrature | None = None) -> float:
    """The integral of the zonal Laplacian of f against the weight
    (1-s^2)^((n-3)/2); vanishes for every C^2 zonal function (it is the
    total integral of Lap f over the sphere, up to a constant)."""
    quad = quad if quad is not None else jacobi_quadrature(n, 96)
    vals = zonal_laplacian(f, quad.nodes, n)
    return quad.integrate(np.asarray(vals, dtype=float))


def regularity_probe(profiles: Sequence, n: int, q: float | None = None,
                     resolution: int = 4096,
                     quad: JacobiQuadrature | None = None) -> dict:
    """Empirical study of the a-priori estimate bounding the C^2 norm of a
    centered zonal function by the sup norm of its box-operator image.

    For q = n - 1 (the default) the ratio reported is
    ||f||_C2 / ||box f||_C0 with box f = f + Lap f / (n-1); members whose
    degree-1 component does not vanish are rejected in that case.  For other
    q the denominator is ||Lap f + q f||_C0.  Each sample also gets the
    boundary-flux residual, which must vanish identically.

    The constant in the estimate is not pinned anywhere; the probe only
    reports the empirical supremum of the ratios.
    """
    quad = quad if quad is not None else jacobi_quadrature(n, 96)
    box_case = q is None or q == n - 1
    # sup norms include the poles (the cylindrical expression of the
    # Laplacian extends continuously to t = +-1 for smooth profiles)
    t = np.concatenate(([-1.0], _ck_grid(resolution), [1.0]))
    ratios, fluxes, rejected = [], [], []
    for idx, f in enumerate(profiles):
        if box_case:
            a1 = zonal_coefficient(f, 1, quad, n)
            if abs(a1) > 1e-8 * omega(n):
                rejected.append({"index": idx, "a1": a1})
                continue
            denom_vals = np.asarray(f(t, 0), dtype=float) \
                + zonal_laplacian(f, t, n) / (n - 1)
        else:
            denom_vals = zonal_laplacian(f, t, n) + q * np.asarray(f(t, 0), dtype=float)
        denom = float(np.max(np.abs(denom_vals)))
        c2 = zonal_ck_norm(f, 2, n, resolution)
        ratios.append(c2 / denom if denom > 0 else math.inf)
        fluxes.append(boundary_flux(f, n, quad))
    return {
        "n": n,
        "q": (n - 1 if q is None else q),
        "operator": ("box" if box_case else "D_q"),
        "ratios": ratios,
        "sup_ratio": (max(ratios) if ratios else None),
        "flux_residuals": fluxes,
        "max_flux_residual": (max(abs(x) for x in fluxes) if fluxes else None),
        "rejected": rejected,
    }
