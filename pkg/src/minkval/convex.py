"""Convex polytopes in R^3 with full face lattices, area measures, intrinsic
volumes, and slicing.

Lower-dimensional bodies (polygons, segments, points from plane sections)
are first class: their lattice is built in the ambient space, so the normal
cones fatten to arcs, lunes and hemispheres and the area measures remain
exact.  Area measure pieces are point atoms (facet normals), great-circle
arcs (edge normal cones) and triangulated spherical regions (vertex normal
cones).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from .harmonics import legendre_recurrence

__all__ = [
    "Polytope",
    "AreaMeasure",
    "SphericalArc",
    "SphericalPatch",
    "IntrinsicVolumes",
    "support_function",
    "area_measure",
    "steiner_area_measure",
    "intrinsic_volumes",
    "clip_halfspace",
    "section_plane",
    "section_line",
    "intersect",
    "polytopes_intersect",
    "cube",
    "simplex",
    "octahedron",
    "ball_polytope",
    "random_hull",
    "QuadratureBudgetError",
]

MERGE_TOL = 1e-10
POINT_TOL = 1e-9


class QuadratureBudgetError(RuntimeError):
    """Adaptive spherical quadrature exceeded its refinement budget."""


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _dedupe_points(pts: np.ndarray, tol: float = POINT_TOL) -> np.ndarray:
    out: list[np.ndarray] = []
    for p in pts:
        if not any(np.linalg.norm(p - q) <= tol for q in out):
            out.append(p)
    return np.array(out) if out else np.zeros((0, 3))


def _plane_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.array([1.0, 0.0, 0.0]) if abs(normal[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    b1 = _unit(np.cross(normal, a))
    return b1, np.cross(normal, b1)


def _prune_collinear(cycle: list[int], pts: np.ndarray, tol: float = MERGE_TOL) -> list[int]:
    changed = True
    while changed and len(cycle) > 2:
        changed = False
        for idx in range(len(cycle)):
            a = pts[cycle[idx - 1]]
            b = pts[cycle[idx]]
            c = pts[cycle[(idx + 1) % len(cycle)]]
            if np.linalg.norm(np.cross(b - a, c - a)) <= tol * max(1.0, np.linalg.norm(c - a) ** 2):
                cycle.pop(idx)
                changed = True
                break
    return cycle


class Polytope:
    """Convex polytope in R^3, possibly of lower dimension or empty.

    Full-dimensional bodies carry merged facets (outward unit normal,
    ordered vertex cycle, area) and the edge graph; planar bodies carry the
    polygon cycle, plane normal, and in-plane outward edge normals.
    """

    def __init__(self):
        self.n = 3
        self.dim = -1
        self.vertices = np.zeros((0, 3))
        # dim 3 lattice
        self.facet_normals = np.zeros((0, 3))
        self.facet_offsets = np.zeros(0)
        self.facet_cycles: list[list[int]] = []
        self.facet_areas = np.zeros(0)
        self.edges: list[tuple[int, int, int, int]] = []  # (i, j, facet1, facet2)
        # dim 2 lattice
        self.plane_normal: np.ndarray | None = None
        self.polygon_cycle: list[int] = []
        self.edge_normals_inplane = np.zeros((0, 3))

    # -- construction -----------------------------------------------------

    @classmethod
    def empty(cls) -> "Polytope":
        return cls()

    @classmethod
    def from_vertices(cls, points) -> "Polytope":
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        pts = _dedupe_points(pts)
        P = cls()
        if pts.shape[0] == 0:
            return P
        center = pts.mean(axis=0)
        centered = pts - center
        scale = max(1.0, float(np.abs(centered).max()))
        sv = np.linalg.svd(centered, compute_uv=False) if pts.shape[0] > 1 else np.zeros(3)
        dim = int(np.sum(sv > 1e-9 * scale * math.sqrt(pts.shape[0])))
        if dim >= 3:
            P._build_3d(pts)
        elif dim == 2:
            P._build_2d(pts)
        elif dim == 1:
            P._build_1d(pts)
        else:
            P.dim = 0
            P.vertices = pts[:1]
        return P

    def _build_3d(self, pts: np.ndarray):
        hull = ConvexHull(pts)
        eqs = hull.equations  # rows (normal, offset): normal.x + offset <= 0 inside
        groups: list[list[int]] = []
        reps: list[np.ndarray] = []
        for s, eq in enumerate(eqs):
            for gi, rep in enumerate(reps):
                if np.max(np.abs(eq - rep)) <= 1e-8:
                    groups[gi].append(s)
                    break
            else:
                groups.append([s])
                reps.append(eq)
        normals, offsets, cycles, areas = [], [], [], []
        for gi, group in enumerate(groups):
            nrm = _unit(reps[gi][:3])  # qhull normals point outward
            vidx = sorted({int(i) for s in group for i in hull.simplices[s]})
            centroid = pts[vidx].mean(axis=0)
            b1, b2 = _plane_basis(nrm)
            ang = np.arctan2((pts[vidx] - centroid) @ b2, (pts[vidx] - centroid) @ b1)
            cyc = [vidx[i] for i in np.argsort(ang)]
            cyc = _prune_collinear(cyc, pts)
            normals.append(nrm)
            offsets.append(float(np.dot(nrm, pts[cyc[0]])))
            cycles.append(cyc)
            areas.append(_polygon_area3d(pts[cyc]))
        # orient cycles counterclockwise as seen from outside
        for f, cyc in enumerate(cycles):
            if len(cyc) >= 3:
                v0, v1, v2 = pts[cyc[0]], pts[cyc[1]], pts[cyc[2]]
                if np.dot(np.cross(v1 - v0, v2 - v0), normals[f]) < 0:
                    cycles[f] = cyc[::-1]
        # re-index to extreme vertices only
        used = sorted({i for cyc in cycles for i in cyc})
        remap = {old: new for new, old in enumerate(used)}
        self.vertices = pts[used]
        self.facet_normals = np.array(normals)
        self.facet_offsets = np.array(offsets)
        self.facet_cycles = [[remap[i] for i in cyc] for cyc in cycles]
        self.facet_areas = np.array(areas)
        edge_map: dict[tuple[int, int], list[int]] = {}
        for f, cyc in enumerate(self.facet_cycles):
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                edge_map.setdefault((min(a, b), max(a, b)), []).append(f)
        edges = []
        for (a, b), fs in edge_map.items():
            if len(fs) != 2:
                raise ValueError("inconsistent facet merge: edge not shared by two facets")
            edges.append((a, b, fs[0], fs[1]))
        self.edges = edges
        self.dim = 3
        ne, nf = len(self.edges), len(self.facet_cycles)
        if len(self.vertices) - ne + nf != 2:
            raise ValueError(
                f"Euler relation violated: V={len(self.vertices)} E={ne} F={nf}")

    def _build_2d(self, pts: np.ndarray):
        center = pts.mean(axis=0)
        _, _, vt = np.linalg.svd(pts - center)
        normal = _unit(vt[2])
        b1, b2 = _plane_basis(normal)
        xy = np.column_stack(((pts - center) @ b1, (pts - center) @ b2))
        hull = ConvexHull(xy)
        cyc = [int(i) for i in hull.vertices]  # counterclockwise in (b1, b2)
        cyc = _prune_collinear(cyc, pts)
        used = cyc
        remap = {old: new for new, old in enumerate(used)}
        self.vertices = pts[used]
        self.polygon_cycle = [remap[i] for i in cyc]
        self.plane_normal = np.cross(b1, b2)
        m = len(self.polygon_cycle)
        normals = []
        for k in range(m):
            a = self.vertices[self.polygon_cycle[k]]
            b = self.vertices[self.polygon_cycle[(k + 1) % m]]
            d = b - a
            d2 = np.array([np.dot(d, b1), np.dot(d, b2)])
            out2 = np.array([d2[1], -d2[0]])  # outward for a CCW cycle
            out2 /= np.linalg.norm(out2)
            normals.append(out2[0] * b1 + out2[1] * b2)
        self.edge_normals_inplane = np.array(normals)
        self.dim = 2

    def _build_1d(self, pts: np.ndarray):
        d = _unit(pts[np.argmax(np.linalg.norm(pts - pts.mean(axis=0), axis=1))] - pts.mean(axis=0))
        proj = pts @ d
        lo, hi = int(np.argmin(proj)), int(np.argmax(proj))
        self.vertices = pts[[lo, hi]]
        self.dim = 1

    # -- queries -----------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return self.dim < 0

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def enclosing_radius(self) -> float:
        if self.is_empty:
            return 0.0
        return float(np.max(np.linalg.norm(self.vertices, axis=1)))

    def support(self, u) -> float:
        if self.is_empty:
            raise ValueError("support function of the empty body is undefined")
        u = np.asarray(u, dtype=float)
        return float(np.max(self.vertices @ u))

    def edge_index_pairs(self) -> list[tuple[int, int]]:
        if self.dim == 3:
            return [(a, b) for a, b, _, _ in self.edges]
        if self.dim == 2:
            cyc = self.polygon_cycle
            return [(cyc[k], cyc[(k + 1) % len(cyc)]) for k in range(len(cyc))]
        if self.dim == 1:
            return [(0, 1)]
        return []

    def inequalities(self) -> tuple[np.ndarray, np.ndarray]:
        """Facet inequalities A x <= b of a full-dimensional body."""
        if self.dim != 3:
            raise ValueError("facet inequalities require a full-dimensional body")
        return self.facet_normals, self.facet_offsets

    def edge_directions(self) -> np.ndarray:
        """Distinct unit edge directions (up to sign)."""
        dirs = []
        for a, b in self.edge_index_pairs():
            d = _unit(self.vertices[b] - self.vertices[a])
            if not any(abs(abs(np.dot(d, e)) - 1.0) < 1e-9 for e in dirs):
                dirs.append(d)
        return np.array(dirs) if dirs else np.zeros((0, 3))

    # -- transforms ---------------------------------------------------------

    def scaled(self, lam: float) -> "Polytope":
        if self.is_empty:
            return Polytope.empty()
        return Polytope.from_vertices(lam * self.vertices)

    def translated(self, x) -> "Polytope":
        if self.is_empty:
            return Polytope.empty()
        return Polytope.from_vertices(self.vertices + np.asarray(x, dtype=float))

    def rotated(self, R) -> "Polytope":
        if self.is_empty:
            return Polytope.empty()
        return Polytope.from_vertices(self.vertices @ np.asarray(R, dtype=float).T)

    def to_json(self) -> dict:
        return {"dimension": 3, "vertices": [list(map(float, v)) for v in self.vertices]}

    @classmethod
    def from_json(cls, data) -> "Polytope":
        import json as _json
        if isinstance(data, str):
            data = _json.loads(data)
        if int(data.get("dimension", 3)) != 3:
            raise ValueError("only ambient dimension 3 bodies are supported")
        return cls.from_vertices(data["vertices"])

    def __repr__(self):
        return f"Polytope(dim={self.dim}, vertices={self.num_vertices})"


def support_function(P: Polytope, u) -> float:
    return P.support(u)


def _polygon_area3d(pts: np.ndarray) -> float:
    if pts.shape[0] < 3:
        return 0.0
    s = np.zeros(3)
    for k in range(1, pts.shape[0] - 1):
        s += np.cross(pts[k] - pts[0], pts[k + 1] - pts[0])
    return 0.5 * float(np.linalg.norm(s))


# -- area measure pieces ---------------------------------------------------

@dataclass(frozen=True)
class SphericalArc:
    """Great-circle arc from a to b (angle < pi) carrying a linear density."""

    a: np.ndarray
    b: np.ndarray
    density: float

    @property
    def angle(self) -> float:
        return float(np.arctan2(np.linalg.norm(np.cross(self.a, self.b)),
                                np.dot(self.a, self.b)))

    @property
    def mass(self) -> float:
        return self.density * self.angle

    def points(self, s: np.ndarray) -> np.ndarray:
        """Arc points at parameters s in [0, 1] (slerp)."""
        th = self.angle
        if th < 1e-14:
            return np.tile(self.a, (len(s), 1))
        return (np.sin((1.0 - s)[:, None] * th) * self.a
                + np.sin(s[:, None] * th) * self.b) / math.sin(th)


@dataclass(frozen=True)
class SphericalPatch:
    """Union of spherical triangles with a scalar density per unit area."""

    triangles: np.ndarray  # (m, 3, 3) rows of unit vectors
    weight: float

    @property
    def area(self) -> float:
        return sum(_spherical_triangle_area(t) for t in self.triangles)

    @property
    def mass(self) -> float:
        return self.weight * self.area


def _spherical_triangle_area(tri: np.ndarray) -> float:
    """Spherical excess by l'Huilier's formula."""
    def side(u, v):
        return math.atan2(np.linalg.norm(np.cross(u, v)), float(np.dot(u, v)))
    a, b, c = side(tri[1], tri[2]), side(tri[0], tri[2]), side(tri[0], tri[1])
    s = 0.5 * (a + b + c)
    arg = (math.tan(0.5 * s) * math.tan(0.5 * (s - a))
           * math.tan(0.5 * (s - b)) * math.tan(0.5 * (s - c)))
    return 4.0 * math.atan(math.sqrt(max(arg, 0.0)))


def _fan_triangles(cycle_pts: np.ndarray) -> np.ndarray:
    """Triangulate a geodesically convex spherical polygon by fanning from
    the normalized vertex mean."""
    c = _unit(cycle_pts.sum(axis=0))
    tris = []
    m = cycle_pts.shape[0]
    for k in range(m):
        a, b = cycle_pts[k], cycle_pts[(k + 1) % m]
        if np.linalg.norm(np.cross(a - c, b - c)) > 1e-14:
            tris.append((c, a, b))
    return np.array(tris) if tris else np.zeros((0, 3, 3))


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss01(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[order]


def _triangle_nodes(tri: np.ndarray, order: int = 10) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes (unit vectors) and weights for the spherical triangle
    spanned by tri, via radial projection of the planar triangle; the
    spherical area element is |det(A, u, v)| / |x|^3 dalpha dbeta."""
    A, B, C = tri
    u, v = B - A, C - A
    triple = abs(float(np.dot(A, np.cross(u, v))))
    if triple < 1e-16:
        return np.zeros((0, 3)), np.zeros(0)
    xi, wx = _gauss01(order)
    alpha = np.repeat(xi, order)
    eta = np.tile(xi, order)
    w2 = np.repeat(wx, order) * np.tile(wx, order) * (1.0 - alpha)
    beta = eta * (1.0 - alpha)
    x = A + np.outer(alpha, u) + np.outer(beta, v)
    r = np.linalg.norm(x, axis=1)
    return x / r[:, None], w2 * triple / r ** 3


def _split_triangle(tri: np.ndarray) -> list[np.ndarray]:
    A, B, C = tri
    ab, bc, ca = _unit(A + B), _unit(B + C), _unit(C + A)
    return [np.array(t) for t in ((A, ab, ca), (ab, B, bc), (ca, bc, C), (ab, bc, ca))]


def _integrate_triangle_adaptive(tri, fn, tol, order, depth, budget) -> float:
    pts, w = _triangle_nodes(tri, order)
    coarse = float(np.dot(w, fn(pts))) if pts.size else 0.0
    children = _split_triangle(tri)
    fine = 0.0
    for ch in children:
        p2, w2 = _triangle_nodes(ch, order)
        fine += float(np.dot(w2, fn(p2))) if p2.size else 0.0
    if abs(fine - coarse) <= tol or depth >= budget:
        if abs(fine - coarse) > tol:
            raise QuadratureBudgetError(
                f"patch quadrature stalled at depth {depth}, residual {abs(fine - coarse):.3e}")
        return fine
    return sum(_integrate_triangle_adaptive(ch, fn, tol / 4.0, order, depth + 1, budget)
               for ch in children)


@dataclass
class AreaMeasure:
    """Area measure S_i(P, .) on the unit sphere, split into atoms, arcs and
    triangulated regions; all masses and densities are non-negative."""

    n: int
    degree: int
    atoms: list[tuple[np.ndarray, float]] = field(default_factory=list)
    arcs: list[SphericalArc] = field(default_factory=list)
    patches: list[SphericalPatch] = field(default_factory=list)

    @property
    def total_mass(self) -> float:
        return (sum(m for _, m in self.atoms)
                + sum(arc.mass for arc in self.arcs)
                + sum(p.mass for p in self.patches))

    def node_cloud(self, arc_order: int = 24, tri_order: int = 10,
                   tri_refine: int = 1) -> tuple[np.ndarray, np.ndarray]:
        """Flattened quadrature nodes and weights (atoms exact, arcs by
        Gauss-Legendre, patches by fixed-order triangle rules after
        tri_refine uniform subdivisions)."""
        pts, wts = [], []
        for u, m in self.atoms:
            pts.append(np.asarray(u, dtype=float)[None, :])
            wts.append(np.array([m]))
        if self.arcs:
            s, w = _gauss01(arc_order)
            for arc in self.arcs:
                th = arc.angle
                if th < 1e-14:
                    continue
                pts.append(arc.points(s))
                wts.append(arc.density * th * w)
        for patch in self.patches:
            tris = list(patch.triangles)
            for _ in range(tri_refine):
                tris = [t for tri in tris for t in _split_triangle(np.asarray(tri))]
            for tri in tris:
                p, w = _triangle_nodes(np.asarray(tri), tri_order)
                if p.size:
                    pts.append(p)
                    wts.append(patch.weight * w)
        if not pts:
            return np.zeros((0, 3)), np.zeros(0)
        return np.vstack(pts), np.concatenate(wts)

    def integrate(self, fn, tol: float = 1e-9, with_error: bool = False,
                  arc_order: int = 32, tri_order: int = 10, budget: int = 10):
        """Integral of fn (vectorized on (m, 3) arrays of unit vectors)
        against the measure; spherical regions are integrated adaptively to
        the requested tolerance.  Raises QuadratureBudgetError when the
        refinement budget is exhausted."""
        total = sum(m * float(fn(np.asarray(u)[None, :])[0]) for u, m in self.atoms)
        err = 0.0
        if self.arcs:
            s1, w1 = _gauss01(arc_order)
            s2, w2 = _gauss01(arc_order // 2)
            for arc in self.arcs:
                th = arc.angle
                if th < 1e-14:
                    continue
                v1 = arc.density * th * float(np.dot(w1, fn(arc.points(s1))))
                v2 = arc.density * th * float(np.dot(w2, fn(arc.points(s2))))
                total += v1
                err += abs(v1 - v2)
        for patch in self.patches:
            for tri in patch.triangles:
                val = _integrate_triangle_adaptive(np.asarray(tri), fn, tol, tri_order, 0, budget)
                total += patch.weight * val
                err += tol
        return (total, err) if with_error else total

    def zonal_moments(self, dirs: np.ndarray, kmax: int,
                      arc_order: int = 24, tri_order: int = 10,
                      tri_refine: int = 1) -> np.ndarray:
        """Moments M_k(w) = int P_k^n(u . w) dS(u) for every direction w in
        dirs; returns an array of shape (kmax+1, len(dirs))."""
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        pts, wts = self.node_cloud(arc_order, tri_order, tri_refine)
        if pts.shape[0] == 0:
            return np.zeros((kmax + 1, dirs.shape[0]))
        dots = np.clip(pts @ dirs.T, -1.0, 1.0)
        P, _, _ = legendre_recurrence(self.n, kmax, dots.ravel())
        P = P.reshape(kmax + 1, *dots.shape)
        return np.tensordot(P, wts, axes=(1, 0))

    def integrate_zonal(self, profile, dirs: np.ndarray,
                        arc_order: int = 24, tri_order: int = 10,
                        tri_refine: int = 1) -> np.ndarray:
        """Values of w -> int profile(u . w) dS(u) for each direction."""
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        pts, wts = self.node_cloud(arc_order, tri_order, tri_refine)
        if pts.shape[0] == 0:
            return np.zeros(dirs.shape[0])
        dots = np.clip(pts @ dirs.T, -1.0, 1.0)
        vals = np.asarray(profile(dots), dtype=float)
        return wts @ vals

    def scaled_mass(self, c: float) -> "AreaMeasure":
        return AreaMeasure(
            self.n, self.degree,
            atoms=[(u, c * m) for u, m in self.atoms],
            arcs=[SphericalArc(a.a, a.b, c * a.density) for a in self.arcs],
            patches=[SphericalPatch(p.triangles, c * p.weight) for p in self.patches])

    def merged(self, other: "AreaMeasure") -> "AreaMeasure":
        return AreaMeasure(self.n, self.degree,
                           atoms=self.atoms + other.atoms,
                           arcs=self.arcs + other.arcs,
                           patches=self.patches + other.patches)


# -- area measures of polytopes ---------------------------------------------

def _vertex_cone_cycle(P: Polytope, v: int) -> np.ndarray:
    """Facet normals around vertex v in cyclic order."""
    incident = [(a, b, f1, f2) for (a, b, f1, f2) in P.edges if v in (a, b)]
    if not incident:
        raise ValueError("vertex has no incident edges")
    # walk the facet cycle: consecutive facets share an edge at v
    edge_of: dict[int, list[int]] = {}
    for idx, (_, _, f1, f2) in enumerate(incident):
        edge_of.setdefault(f1, []).append(idx)
        edge_of.setdefault(f2, []).append(idx)
    start = incident[0][2]
    cycle = [start]
    prev_edge = incident[0]
    prev_idx = 0
    used = {0}
    while len(cycle) < len(edge_of):
        f = cycle[-1]
        nxt = None
        for idx in edge_of[f]:
            if idx not in used:
                nxt = idx
                break
        if nxt is None:
            break
        used.add(nxt)
        _, _, f1, f2 = incident[nxt]
        cycle.append(f2 if f1 == f else f1)
    return P.facet_normals[cycle]


def area_measure(P: Polytope, i: int) -> AreaMeasure:
    """Area measure S_i(P, .) for 0 <= i <= 2 in ambient dimension 3.

    S_i = C(2, i)^(-1) * sum over i-faces F of vol_i(F) times the spherical
    Hausdorff measure on the normal cone of F; the binomial normalization
    makes the total mass equal to n V(P[i]; B[n-i]).
    """
    if not 0 <= i <= 2:
        raise ValueError(f"degree must satisfy 0 <= i <= n-1 = 2, got {i}")
    meas = AreaMeasure(3, i)
    if P.is_empty:
        return meas
    binom = math.comb(2, i)
    if P.dim == 3:
        if i == 2:
            meas.atoms = [(P.facet_normals[f], float(P.facet_areas[f]))
                          for f in range(len(P.facet_cycles))]
        elif i == 1:
            for a, b, f1, f2 in P.edges:
                length = float(np.linalg.norm(P.vertices[b] - P.vertices[a]))
                meas.arcs.append(SphericalArc(P.facet_normals[f1],
                                              P.facet_normals[f2],
                                              length / binom))
        else:
            for v in range(P.num_vertices):
                cyc = _vertex_cone_cycle(P, v)
                tris = _fan_triangles(cyc)
                if tris.size:
                    meas.patches.append(SphericalPatch(tris, 1.0))
    elif P.dim == 2:
        w = P.plane_normal
        area = _polygon_area3d(P.vertices[P.polygon_cycle])
        cyc = P.polygon_cycle
        m = len(cyc)
        if i == 2:
            meas.atoms = [(w.copy(), area), (-w, area)]
        elif i == 1:
            for k in range(m):
                a, b = P.vertices[cyc[k]], P.vertices[cyc[(k + 1) % m]]
                length = float(np.linalg.norm(b - a))
                me = P.edge_normals_inplane[k]
                meas.arcs.append(SphericalArc(w.copy(), me, length / binom))
                meas.arcs.append(SphericalArc(me, -w, length / binom))
        else:
            for k in range(m):
                m_prev = P.edge_normals_inplane[(k - 1) % m]
                m_next = P.edge_normals_inplane[k]
                c = m_prev + m_next
                if np.linalg.norm(c) < 1e-12:
                    continue
                c = _unit(c)
                tris = np.array([(c, w, m_prev), (c, m_prev, -w),
                                 (c, -w, m_next), (c, m_next, w)])
                meas.patches.append(SphericalPatch(tris, 1.0))
    elif P.dim == 1:
        d = _unit(P.vertices[1] - P.vertices[0])
        length = float(np.linalg.norm(P.vertices[1] - P.vertices[0]))
        p, q = _plane_basis(d)
        ring = [p, q, -p, -q]
        if i == 1:
            for k in range(4):
                meas.arcs.append(SphericalArc(ring[k], ring[(k + 1) % 4], length / binom))
        elif i == 0:
            for pole in (d, -d):
                tris = np.array([(pole, ring[k], ring[(k + 1) % 4]) for k in range(4)])
                meas.patches.append(SphericalPatch(tris, 1.0))
    elif P.dim == 0:
        if i == 0:
            e = np.eye(3)
            tris = []
            for sx in (1, -1):
                for sy in (1, -1):
                    for sz in (1, -1):
                        tri = np.array([sx * e[0], sy * e[1], sz * e[2]])
                        if np.dot(np.cross(tri[1] - tri[0], tri[2] - tri[0]), tri.sum(axis=0)) < 0:
                            tri = tri[::-1]
                        tris.append(tri)
            meas.patches.append(SphericalPatch(np.array(tris), 1.0))
    return meas


def steiner_area_measure(P: Polytope, i: int, t: float) -> AreaMeasure:
    """S_i(P + tB, .) = sum_j t^(i-j) C(i, j) S_j(P, .), t >= 0."""
    if t < 0:
        raise ValueError("outer parallel radius t must be >= 0")
    out = AreaMeasure(3, i)
    for j in range(i + 1):
        coef = t ** (i - j) * math.comb(i, j)
        if coef == 0.0:
            continue
        out = out.merged(area_measure(P, j).scaled_mass(coef))
    return out


# -- intrinsic volumes --------------------------------------------------------

@dataclass(frozen=True)
class IntrinsicVolumes:
    v0: float
    v1: float
    v2: float
    v3: float

    def __getitem__(self, i: int) -> float:
        return (self.v0, self.v1, self.v2, self.v3)[i]

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.v0, self.v1, self.v2, self.v3)


def intrinsic_volumes(P: Polytope) -> IntrinsicVolumes:
    """Intrinsic volumes (V0, V1, V2, V3) from the face lattice: volume by
    the divergence theorem, V2 = surface/2, V1 from edge lengths and
    exterior dihedral angles; lower-dimensional bodies use their own closed
    forms (V1 of a planar body is half its perimeter)."""
    if P.is_empty:
        return IntrinsicVolumes(0.0, 0.0, 0.0, 0.0)
    if P.dim == 3:
        vol = 0.0
        for f, cyc in enumerate(P.facet_cycles):
            centroid = P.vertices[cyc].mean(axis=0)
            vol += P.facet_areas[f] * float(np.dot(P.facet_normals[f], centroid)) / 3.0
        surf = float(np.sum(P.facet_areas))
        v1 = 0.0
        for a, b, f1, f2 in P.edges:
            length = float(np.linalg.norm(P.vertices[b] - P.vertices[a]))
            n1, n2 = P.facet_normals[f1], P.facet_normals[f2]
            ang = math.atan2(float(np.linalg.norm(np.cross(n1, n2))), float(np.dot(n1, n2)))
            v1 += length * ang
        return IntrinsicVolumes(1.0, v1 / (2.0 * math.pi), surf / 2.0, float(vol))
    if P.dim == 2:
        cyc = P.polygon_cycle
        area = _polygon_area3d(P.vertices[cyc])
        per = sum(float(np.linalg.norm(P.vertices[cyc[(k + 1) % len(cyc)]] - P.vertices[cyc[k]]))
                  for k in range(len(cyc)))
        return IntrinsicVolumes(1.0, per / 2.0, area, 0.0)
    if P.dim == 1:
        return IntrinsicVolumes(1.0, float(np.linalg.norm(P.vertices[1] - P.vertices[0])), 0.0, 0.0)
    return IntrinsicVolumes(1.0, 0.0, 0.0, 0.0)


# -- slicing ------------------------------------------------------------------

def clip_halfspace(P: Polytope, normal, offset: float, tol: float = POINT_TOL) -> Polytope:
    """Intersection of P with the halfspace {x : normal . x <= offset}."""
    if P.is_empty:
        return Polytope.empty()
    a = np.asarray(normal, dtype=float)
    d = P.vertices @ a - offset
    if P.dim == 0:
        return P if d[0] <= tol else Polytope.empty()
    pts = [P.vertices[k] for k in range(P.num_vertices) if d[k] <= tol]
    for i, j in P.edge_index_pairs():
        di, dj = d[i], d[j]
        if (di > tol and dj < -tol) or (di < -tol and dj > tol):
            lam = di / (di - dj)
            pts.append(P.vertices[i] + lam * (P.vertices[j] - P.vertices[i]))
    if not pts:
        return Polytope.empty()
    return Polytope.from_vertices(np.array(pts))


def section_plane(P: Polytope, point, normal=None, frame=None,
                  tol: float = POINT_TOL) -> Polytope:
    """Intersection of P with an affine 2-plane, given either by a point and
    unit normal or by a point and an orthonormal frame (b1, b2)."""
    if normal is None:
        if frame is None:
            raise ValueError("need a normal or an orthonormal frame")
        b1, b2 = np.asarray(frame[0], float), np.asarray(frame[1], float)
        normal = np.cross(b1, b2)
    a = _unit(np.asarray(normal, dtype=float))
    c = float(np.dot(a, np.asarray(point, dtype=float)))
    if P.is_empty:
        return Polytope.empty()
    d = P.vertices @ a - c
    pts = [P.vertices[k] for k in range(P.num_vertices) if abs(d[k]) <= tol]
    for i, j in P.edge_index_pairs():
        di, dj = d[i], d[j]
        if (di > tol and dj < -tol) or (di < -tol and dj > tol):
            lam = di / (di - dj)
            pts.append(P.vertices[i] + lam * (P.vertices[j] - P.vertices[i]))
    if not pts:
        return Polytope.empty()
    return Polytope.from_vertices(np.array(pts))


def section_line(P: Polytope, point, direction, tol: float = 1e-12) -> Polytope:
    """Intersection of a full-dimensional P with the line point + t*direction."""
    if P.is_empty:
        return Polytope.empty()
    if P.dim != 3:
        raise ValueError("line sections are implemented for full-dimensional bodies")
    p = np.asarray(point, dtype=float)
    d = _unit(np.asarray(direction, dtype=float))
    A, b = P.inequalities()
    den = A @ d
    num = b - A @ p
    lo, hi = -math.inf, math.inf
    for dn, nm in zip(den, num):
        if dn > tol:
            hi = min(hi, nm / dn)
        elif dn < -tol:
            lo = max(lo, nm / dn)
        elif nm < -tol:
            return Polytope.empty()
    if lo > hi + tol:
        return Polytope.empty()
    return Polytope.from_vertices(np.array([p + lo * d, p + hi * d]))


def intersect(P: Polytope, Q: Polytope) -> Polytope:
    """Intersection of P with a full-dimensional Q by successive clipping."""
    if P.is_empty or Q.is_empty:
        return Polytope.empty()
    if Q.dim != 3:
        raise ValueError("intersect requires the second body to be full-dimensional")
    out = P
    A, b = Q.inequalities()
    for k in range(A.shape[0]):
        out = clip_halfspace(out, A[k], float(b[k]))
        if out.is_empty:
            return out
    return out


def polytopes_intersect(P: Polytope, Q: Polytope, tol: float = 1e-12) -> bool:
    """Exact separating-axis test for two full-dimensional convex polytopes
    (facet normals of both plus cross products of edge directions)."""
    if P.is_empty or Q.is_empty:
        return False
    axes = [P.facet_normals, Q.facet_normals]
    ep, eq = P.edge_directions(), Q.edge_directions()
    if ep.size and eq.size:
        cr = np.cross(ep[:, None, :], eq[None, :, :]).reshape(-1, 3)
        nrm = np.linalg.norm(cr, axis=1)
        cr = cr[nrm > 1e-12] / nrm[nrm > 1e-12][:, None]
        axes.append(cr)
    for ax in np.vstack(axes):
        pp = P.vertices @ ax
        qq = Q.vertices @ ax
        if pp.max() < qq.min() - tol or qq.max() < pp.min() - tol:
            return False
    return True


# -- canonical bodies ---------------------------------------------------------

def cube() -> Polytope:
    """The unit cube [0, 1]^3."""
    pts = np.array([[x, y, z] for x in (0.0, 1.0) for y in (0.0, 1.0) for z in (0.0, 1.0)])
    return Polytope.from_vertices(pts)


def simplex() -> Polytope:
    return Polytope.from_vertices(np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0],
                                            [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))


def octahedron() -> Polytope:
    return Polytope.from_vertices(np.vstack([np.eye(3), -np.eye(3)]))


def ball_polytope(subdiv: int = 3) -> Polytope:
    """Inscribed polytopal approximation of the unit ball, by repeated
    midpoint subdivision of the octahedron projected to the sphere."""
    e = np.eye(3)
    tris = [np.array([sx * e[0], sy * e[1], sz * e[2]])
            for sx in (1, -1) for sy in (1, -1) for sz in (1, -1)]
    for _ in range(subdiv):
        tris = [t for tri in tris for t in _split_triangle(tri)]
    pts = np.vstack(tris)
    pts = pts / np.linalg.norm(pts, axis=1)[:, None]
    return Polytope.from_vertices(_dedupe_points(pts, 1e-12))


def random_hull(seed: int, num_points: int = 14, scale: float = 1.0) -> Polytope:
    """Convex hull of points drawn uniformly in the ball of the given radius
    (deterministic in the seed)."""
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((num_points, 3))
    u /= np.linalg.norm(u, axis=1)[:, None]
    r = rng.uniform(0.3, 1.0, num_points) ** (1.0 / 3.0)
    return Polytope.from_vertices(scale * u * r[:, None])
