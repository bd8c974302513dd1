"""Planar parameter-domain geometry.

Polygons (simple, counterclockwise, origin strictly inside), inward
parallel polygons at prescribed side distance, composite domains backed by
shapely booleans (circles as 64-gons), and a conforming quality
triangulation used as the sampling substrate for quadrature and distance
computation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import shapely
import shapely.geometry as sg
from scipy.spatial import Delaunay

__all__ = [
    "Polygon",
    "PlanarDomain",
    "TriMesh",
    "parallel_polygon",
    "triangulate",
    "euclid_dist_to_set",
    "sample_polyline",
    "square",
    "regular_polygon",
    "CIRCLE_SEGMENTS",
]

CIRCLE_SEGMENTS = 64


@dataclass(frozen=True)
class Polygon:
    """Simple closed polygonal curve, counterclockwise, 0 in the interior."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValueError("polygon needs an (n,2) vertex array, n >= 3")
        object.__setattr__(self, "vertices", v)
        sp = sg.Polygon(v)
        if not sp.is_valid:
            raise ValueError("polygon is not simple")
        if self.signed_area() <= 0:
            raise ValueError("polygon must be counterclockwise")
        if not sp.contains(sg.Point(0.0, 0.0)):
            raise ValueError("origin must lie strictly inside the polygon")

    def signed_area(self) -> float:
        v = self.vertices
        x, y = v[:, 0], v[:, 1]
        return 0.5 * float(
            np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
        )

    def perimeter(self) -> float:
        v = self.vertices
        return float(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1).sum())

    def edges(self) -> np.ndarray:
        """(n,2,2) array of directed edges."""
        v = self.vertices
        return np.stack([v, np.roll(v, -1, axis=0)], axis=1)

    def shapely(self) -> sg.Polygon:
        return sg.Polygon(self.vertices)

    def contains_points(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return shapely.contains_xy(self.shapely(), pts[:, 0], pts[:, 1])

    def inradius(self) -> float:
        """Largest inward offset for which the polygon stays nonempty."""
        sp = self.shapely()
        tol = 1e-9 * max(sp.bounds[2] - sp.bounds[0], sp.bounds[3] - sp.bounds[1])
        return float(shapely.maximum_inscribed_circle(sp, tolerance=tol).length)


def square(side: float = 2.0, center=(0.0, 0.0)) -> Polygon:
    h = side / 2.0
    cx, cy = center
    return Polygon(
        np.array(
            [[cx - h, cy - h], [cx + h, cy - h], [cx + h, cy + h], [cx - h, cy + h]]
        )
    )


def regular_polygon(n_sides: int, circumradius: float, center=(0.0, 0.0)) -> Polygon:
    ang = 2 * np.pi * np.arange(n_sides) / n_sides
    v = np.stack(
        [center[0] + circumradius * np.cos(ang), center[1] + circumradius * np.sin(ang)],
        axis=1,
    )
    return Polygon(v)


def parallel_polygon(P: Polygon, xi: float) -> Polygon:
    """Inward parallel polygon at side distance xi.

    Every surviving side is at distance exactly xi from its parent side
    (edge-offset plus line intersection); edges that vanish under the
    offset are dropped.  Raises if the offset collapses or stops being
    simple.
    """
    if xi < 0:
        raise ValueError("xi must be >= 0")
    if xi == 0:
        return P
    v = P.vertices
    n = len(v)
    d = np.roll(v, -1, axis=0) - v
    lengths = np.linalg.norm(d, axis=1)
    d = d / lengths[:, None]
    normals = np.stack([-d[:, 1], d[:, 0]], axis=1)  # inward for CCW
    pts = v + xi * normals
    alive = list(range(n))
    for _ in range(n):
        m = len(alive)
        if m < 3:
            raise ValueError("P^xi undefined (offset collapses)")
        new_v = []
        ok = True
        for j in range(m):
            i_prev = alive[j - 1]
            i_cur = alive[j]
            # intersect offset line of edge i_prev with offset line of i_cur
            p1, d1 = pts[i_prev], d[i_prev]
            p2, d2 = pts[i_cur], d[i_cur]
            cross = d1[0] * d2[1] - d1[1] * d2[0]
            if abs(cross) < 1e-14:
                mid = 0.5 * (p1 + p2)
                new_v.append(mid)
                continue
            t = ((p2[0] - p1[0]) * d2[1] - (p2[1] - p1[1]) * d2[0]) / cross
            new_v.append(p1 + t * d1)
        new_v = np.asarray(new_v)
        # detect edges whose direction flipped (vanished under the offset)
        dirs = np.roll(new_v, -1, axis=0) - new_v
        flipped = [
            alive[j]
            for j in range(m)
            if np.dot(dirs[j], d[alive[j]]) <= 1e-13
        ]
        if not flipped:
            result = new_v
            break
        alive = [i for i in alive if i not in set(flipped)]
        ok = False
    else:
        raise ValueError("P^xi undefined (offset repair did not converge)")
    del ok
    sp = sg.Polygon(result)
    if not sp.is_valid or sp.area <= 0:
        raise ValueError("P^xi undefined (offset not simple)")
    if not sp.contains(sg.Point(0.0, 0.0)):
        raise ValueError("P^xi undefined (origin left the interior)")
    return Polygon(result)


@dataclass(frozen=True)
class PlanarDomain:
    """Region bounded by polylines: an outer chain minus excluded regions."""

    geom: sg.Polygon

    def __post_init__(self):
        g = self.geom
        if g.is_empty or not g.is_valid:
            raise ValueError("invalid domain geometry")
        if g.geom_type == "MultiPolygon":
            raise ValueError("domain must be connected")

    @staticmethod
    def from_polygon(P: Polygon) -> "PlanarDomain":
        return PlanarDomain(P.shapely())

    @staticmethod
    def from_shapely(geom) -> "PlanarDomain":
        return PlanarDomain(geom)

    def minus_disk(self, center, radius) -> "PlanarDomain":
        disk = sg.Point(*center).buffer(radius, quad_segs=CIRCLE_SEGMENTS // 4)
        return PlanarDomain(self.geom.difference(disk))

    @property
    def simply_connected(self) -> bool:
        return len(self.geom.interiors) == 0

    def area(self) -> float:
        return float(self.geom.area)

    def boundary_polylines(self) -> list[np.ndarray]:
        out = [np.asarray(self.geom.exterior.coords)]
        for ring in self.geom.interiors:
            out.append(np.asarray(ring.coords))
        return out

    def contains_points(self, pts) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return shapely.contains_xy(self.geom, pts[:, 0], pts[:, 1])

    def feature_width(self) -> float:
        """Conservative width of the narrowest feature (2x inradius bound)."""
        b = self.geom.bounds
        tol = 1e-6 * max(b[2] - b[0], b[3] - b[1])
        mic = shapely.maximum_inscribed_circle(self.geom, tolerance=tol)
        return 2.0 * float(mic.length)


@dataclass
class TriMesh:
    """Conforming triangulation of a planar domain."""

    vertices: np.ndarray
    triangles: np.ndarray
    h: float

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.triangles = np.asarray(self.triangles, dtype=int)
        self._edges = None

    def areas(self) -> np.ndarray:
        v = self.vertices
        t = self.triangles
        a = v[t[:, 1]] - v[t[:, 0]]
        b = v[t[:, 2]] - v[t[:, 0]]
        return 0.5 * (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])

    def edges(self) -> np.ndarray:
        """(m,2) unique undirected edges, sorted index pairs."""
        if self._edges is None:
            t = self.triangles
            e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
            e.sort(axis=1)
            self._edges = np.unique(e, axis=0)
        return self._edges

    def min_angle(self) -> float:
        v = self.vertices
        t = self.triangles
        p0, p1, p2 = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
        angs = []
        for a, b, c in ((p0, p1, p2), (p1, p2, p0), (p2, p0, p1)):
            u = b - a
            w = c - a
            cosang = (u * w).sum(axis=1) / (
                np.linalg.norm(u, axis=1) * np.linalg.norm(w, axis=1)
            )
            angs.append(np.degrees(np.arccos(np.clip(cosang, -1, 1))))
        return float(np.min(angs))

    def vertex_index(self, point, tol=1e-9) -> int:
        d = np.linalg.norm(self.vertices - np.asarray(point), axis=1)
        i = int(np.argmin(d))
        if d[i] > tol:
            raise KeyError("point %r is not a mesh vertex" % (point,))
        return i

    def complex_vertices(self) -> np.ndarray:
        return self.vertices[:, 0] + 1j * self.vertices[:, 1]


def sample_polyline(coords: np.ndarray, spacing: float, closed=False) -> np.ndarray:
    """Resample a polyline at spacing <= `spacing`, keeping original vertices."""
    coords = np.asarray(coords, dtype=float)
    pts = []
    n = len(coords)
    last = n - 1 if not closed else n
    for i in range(last):
        a = coords[i]
        b = coords[(i + 1) % n]
        seg = np.linalg.norm(b - a)
        k = max(1, int(np.ceil(seg / spacing)))
        for j in range(k):
            pts.append(a + (b - a) * (j / k))
    if not closed:
        pts.append(coords[-1])
    return np.asarray(pts)


def triangulate(domain: PlanarDomain, h: float, fixed_points=()) -> TriMesh:
    """Conforming quality triangulation with target edge length h.

    Boundary polylines are resampled at spacing <= h and appear exactly as
    mesh edges; the interior is filled with a hexagonal lattice, relaxed by
    Laplacian smoothing.  Raises "refine h" when the domain has features
    thinner than about 3h.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if domain.feature_width() < 3.0 * h:
        raise ValueError("refine h (feature thinner than 3h)")
    boundary_pts = []
    boundary_chains = []
    for ring in domain.boundary_polylines():
        ring = ring[:-1] if np.allclose(ring[0], ring[-1]) else ring
        samp = sample_polyline(np.vstack([ring, ring[:1]]), h, closed=True)
        boundary_chains.append(samp)
        boundary_pts.append(samp)
    bpts = np.vstack(boundary_pts)

    minx, miny, maxx, maxy = domain.geom.bounds
    dx = h
    dy = h * np.sqrt(3) / 2
    rows = int(np.ceil((maxy - miny) / dy)) + 1
    cols = int(np.ceil((maxx - minx) / dx)) + 2
    ys = miny + dy * np.arange(rows)
    lattice = []
    for r, y in enumerate(ys):
        offs = 0.5 * dx if r % 2 else 0.0
        xs = minx - dx + offs + dx * np.arange(cols + 1)
        lattice.append(np.stack([xs, np.full_like(xs, y)], axis=1))
    lattice = np.vstack(lattice)
    inside = domain.contains_points(lattice)
    lattice = lattice[inside]
    if len(lattice):
        d_ب = _dist_to_chains(lattice, boundary_chains)
        lattice = lattice[d_ب > 0.6 * h]
    fixed = np.asarray(list(fixed_points), dtype=float).reshape(-1, 2)
    if len(fixed):
        keep = np.ones(len(lattice), dtype=bool)
        for fp in fixed:
            keep &= np.linalg.norm(lattice - fp, axis=1) > 0.5 * h
        lattice = lattice[keep]

    interior = np.vstack([fixed, lattice]) if len(fixed) else lattice
    n_fixed_head = len(bpts) + len(fixed)

    for attempt in range(4):
        pts = np.vstack([bpts, interior]) if len(interior) else bpts
        pts = _dedupe(pts, 1e-12)
        tri, kept = _filtered_delaunay(pts, domain)
        missing = _missing_boundary_edges(pts, kept, boundary_chains)
        if not missing:
            mesh = TriMesh(pts, kept, h)
            if attempt < 2:
                moved = _smooth(mesh, domain, n_protect=n_fixed_head, bpts=len(bpts))
                if moved is not None:
                    interior = moved
                    continue
            area = float(np.sum(mesh.areas()))
            if abs(area - domain.area()) > 1e-9 * max(domain.area(), 1.0):
                raise ValueError("refine h (triangulation does not cover domain)")
            return mesh
        extra = np.asarray([0.5 * (a + b) for a, b in missing])
        bpts = np.vstack([bpts, extra])
    raise ValueError("refine h (could not conform to boundary)")


def _dedupe(pts, tol):
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    keep_sorted = np.ones(len(pts), dtype=bool)
    sp = pts[order]
    same = np.all(np.abs(np.diff(sp, axis=0)) < tol, axis=1)
    keep_sorted[1:][same] = False
    keep = np.zeros(len(pts), dtype=bool)
    keep[order] = keep_sorted
    # never drop earlier (boundary/fixed) points in favor of later ones
    return pts[keep]


def _filtered_delaunay(pts, domain):
    tri = Delaunay(pts)
    t = tri.simplices
    cent = pts[t].mean(axis=1)
    keep = domain.contains_points(cent)
    kept = t[keep]
    # enforce CCW orientation
    v = pts
    a = v[kept[:, 1]] - v[kept[:, 0]]
    b = v[kept[:, 2]] - v[kept[:, 0]]
    flip = (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]) < 0
    kept[flip] = kept[flip][:, [0, 2, 1]]
    return tri, kept


def _missing_boundary_edges(pts, triangles, chains):
    edge_set = set()
    for tr in triangles:
        for i, j in ((0, 1), (1, 2), (2, 0)):
            a, b = int(tr[i]), int(tr[j])
            edge_set.add((min(a, b), max(a, b)))
    # map coordinates to indices
    lookup = {}
    for idx, p in enumerate(pts):
        lookup[(round(p[0], 9), round(p[1], 9))] = idx
    missing = []
    for chain in chains:
        m = len(chain)
        for i in range(m):
            a = chain[i]
            b = chain[(i + 1) % m]
            ia = lookup.get((round(a[0], 9), round(a[1], 9)))
            ib = lookup.get((round(b[0], 9), round(b[1], 9)))
            if ia is None or ib is None or ia == ib:
                continue
            if (min(ia, ib), max(ia, ib)) not in edge_set:
                missing.append((a, b))
    return missing


def _smooth(mesh, domain, n_protect, bpts):
    pts = mesh.vertices.copy()
    n = len(pts)
    if n_protect >= n:
        return None
    neigh = [[] for _ in range(n)]
    for tr in mesh.triangles:
        for i in range(3):
            a, b = tr[i], tr[(i + 1) % 3]
            neigh[a].append(b)
            neigh[b].append(a)
    moved = pts[n_protect:].copy()
    for idx in range(n_protect, n):
        nb = neigh[idx]
        if not nb:
            continue
        target = pts[nb].mean(axis=0)
        if domain.contains_points(target[None, :])[0]:
            moved[idx - n_protect] = target
    interior_start = n_protect - bpts if n_protect > bpts else 0
    del interior_start
    return np.vstack([pts[bpts:n_protect], moved]) if n_protect > bpts else moved


def _dist_to_chains(pts, chains):
    best = np.full(len(pts), np.inf)
    for chain in chains:
        segs = np.stack([chain, np.roll(chain, -1, axis=0)], axis=1)
        best = np.minimum(best, euclid_dist_to_set(pts, segs))
    return best


def euclid_dist_to_set(pts, segments) -> np.ndarray | float:
    """Exact distance from point(s) to a set of segments.

    `segments` is an (m,2,2) array; `pts` is (n,2) or a single point.
    """
    pts = np.asarray(pts, dtype=float)
    single = pts.ndim == 1
    P = np.atleast_2d(pts)
    S = np.asarray(segments, dtype=float).reshape(-1, 2, 2)
    if len(S) == 0:
        raise ValueError("segment set is empty")
    A = S[:, 0]
    B = S[:, 1]
    AB = B - A
    denom = (AB**2).sum(axis=1)
    denom = np.where(denom < 1e-300, 1.0, denom)
    best = np.full(len(P), np.inf)
    # chunk over segments to bound memory
    chunk = max(1, int(2e6 // max(len(P), 1)))
    for s0 in range(0, len(S), chunk):
        a = A[s0 : s0 + chunk]
        ab = AB[s0 : s0 + chunk]
        dn = denom[s0 : s0 + chunk]
        diff = P[:, None, :] - a[None, :, :]
        t = np.clip((diff * ab[None, :, :]).sum(axis=2) / dn[None, :], 0.0, 1.0)
        proj = a[None, :, :] + t[:, :, None] * ab[None, :, :]
        d = np.linalg.norm(P[:, None, :] - proj, axis=2)
        best = np.minimum(best, d.min(axis=1))
    return float(best[0]) if single else best
