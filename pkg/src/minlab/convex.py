"""Bounded regular convex bodies of 3-space.

A body is one of three kinds:

* ``ball``      -- center + radius (analytic boundary, exact formulas);
* ``ellipsoid`` -- center + axis-aligned semi-axes, optionally offset by a
  parallel-body amount ``t`` (the offset surface of an ellipsoid is not an
  ellipsoid, so the offset is kept symbolic);
* ``support_fn``-- center + real spherical-harmonic coefficients of the
  support function, plus an offset.

All queries go through the support function ``h(u) = sup{<x,u> : x in E}``;
for convex bodies the sup-norm of a support-function difference equals the
Hausdorff distance, boundary points are gradients of the 1-homogeneous
extension of ``h``, and inner/outer parallel bodies within the regularity
margin are realized by adding a constant to ``h``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linprog

from .spherical import (
    gl_product_grid,
    heat_multipliers,
    icosphere,
    real_sh_basis,
    sh_synthesis,
)

__all__ = [
    "ConvexBody",
    "ball",
    "ellipsoid",
    "support_body",
    "support_body_from_function",
    "cube",
    "signed_boundary_distance",
    "parallel_body",
    "normal_project",
    "max_principal_curvature",
    "minkowski_sequence",
    "hausdorff_distance",
    "inradius",
    "diameter",
    "max_depth_inside",
    "boundary_gap",
    "body_to_text",
    "body_from_text",
]

CURVATURE_SAFETY = 1.05
A_MAX_FACTOR = 0.9


@dataclass(frozen=True)
class ConvexBody:
    kind: str
    center: np.ndarray
    radius: float = 0.0
    axes: np.ndarray | None = None
    coeffs: np.ndarray | None = None
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.axes is not None:
            object.__setattr__(self, "axes", np.asarray(self.axes, dtype=float))
        if self.coeffs is not None:
            object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        self._validate()

    def _validate(self):
        if self.kind == "ball":
            if self.radius + self.offset <= 0:
                raise ValueError("ball radius must be positive")
        elif self.kind == "ellipsoid":
            if np.any(self.axes <= 0):
                raise ValueError("ellipsoid semi-axes must be positive")
            if self.offset < 0 and -self.offset >= np.min(self.axes) ** 2 / np.max(self.axes):
                raise ValueError("inner parallel body not regular")
        elif self.kind == "support_fn":
            pass  # validated against sampled convexity in support_body()
        else:
            raise ValueError("unknown body kind %r" % self.kind)

    # -- support function --------------------------------------------------
    def support(self, dirs: np.ndarray) -> np.ndarray:
        """h(u) for an (n,3) array of unit directions."""
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        base = dirs @ self.center
        if self.kind == "ball":
            return base + self.radius + self.offset
        if self.kind == "ellipsoid":
            return base + np.sqrt(((dirs * self.axes) ** 2).sum(axis=1)) + self.offset
        return base + sh_synthesis(self.coeffs, dirs) + self.offset

    def a_max(self) -> float:
        """Regularity margin: inner parallel bodies exist for t <= a_max."""
        return A_MAX_FACTOR / max_principal_curvature(self)

    def scale(self) -> float:
        g = icosphere(2)
        return float(np.mean(self.support(g) - g @ self.center))


def ball(radius: float, center=(0.0, 0.0, 0.0)) -> ConvexBody:
    return ConvexBody("ball", np.asarray(center, dtype=float), radius=float(radius))


def ellipsoid(axes, center=(0.0, 0.0, 0.0)) -> ConvexBody:
    return ConvexBody(
        "ellipsoid", np.asarray(center, dtype=float), axes=np.asarray(axes, dtype=float)
    )


def support_body(coeffs, center=(0.0, 0.0, 0.0), offset=0.0, check=True) -> ConvexBody:
    body = ConvexBody(
        "support_fn",
        np.asarray(center, dtype=float),
        coeffs=np.asarray(coeffs, dtype=float),
        offset=float(offset),
    )
    if check:
        rmin, _ = _radii_extremes(body, icosphere(3))
        if rmin <= 0:
            raise ValueError(
                "support function is not strictly convex (min curvature radius %.3g)"
                % rmin
            )
    return body


def support_body_from_function(
    fn, lmax: int = 16, width: float = 0.08, center=(0.0, 0.0, 0.0)
) -> ConvexBody:
    """Fit a smooth support_fn body to an arbitrary support function.

    The target is heat-mollified before truncation, then an offset is added
    so the result both contains the target body and is strictly convex.
    """
    dirs, w = gl_product_grid(2 * lmax + 2)
    vals = np.asarray(fn(dirs), dtype=float)
    basis = real_sh_basis(lmax, dirs)
    coeffs = (basis @ (vals * w)) * heat_multipliers(lmax, width)
    body = ConvexBody("support_fn", np.asarray(center, float), coeffs=coeffs)
    probe = icosphere(4)
    deficiency = float(np.max(fn(probe) - (body.support(probe) - probe @ body.center)))
    rmin, _ = _radii_extremes(body, icosphere(3))
    offset = max(deficiency, 0.0) + max(0.0, -rmin) + 1e-9
    return support_body(body.coeffs, center, offset)


def cube(side: float, center=(0.0, 0.0, 0.0), lmax: int = 16) -> ConvexBody:
    """Smooth support_fn outer approximation of an axis-aligned cube."""
    half = side / 2.0

    def h(dirs):
        return half * np.abs(dirs).sum(axis=1)

    return support_body_from_function(h, lmax=lmax, center=center)


# -- support gradient / boundary parametrization ---------------------------

def _support_hom(body: ConvexBody, x: np.ndarray) -> np.ndarray:
    """1-homogeneous extension H(x) = |x| h(x/|x|)."""
    x = np.atleast_2d(x)
    r = np.linalg.norm(x, axis=1)
    return r * body.support(x / r[:, None])


def _support_grad(body: ConvexBody, dirs: np.ndarray) -> np.ndarray:
    """Boundary point with outward normal u: x(u) = grad H(u).

    Closed forms for ball/ellipsoid; central differences for support_fn
    (step chosen for ~1e-10 relative accuracy on smooth bodies).
    """
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    if body.kind == "ball":
        return body.center[None, :] + (body.radius + body.offset) * dirs
    if body.kind == "ellipsoid":
        a2u = dirs * body.axes**2
        denom = np.sqrt((dirs**2 * body.axes**2).sum(axis=1))
        return body.center[None, :] + a2u / denom[:, None] + body.offset * dirs
    step = 2e-6
    grad = np.empty_like(dirs)
    for k in range(3):
        e = np.zeros(3)
        e[k] = step
        grad[:, k] = (_support_hom(body, dirs + e) - _support_hom(body, dirs - e)) / (
            2 * step
        )
    return grad


# -- core operations --------------------------------------------------------

def signed_boundary_distance(body: ConvexBody, p) -> float | np.ndarray:
    """Distance to the boundary, positive inside, negative outside."""
    p = np.asarray(p, dtype=float)
    single = p.ndim == 1
    pts = np.atleast_2d(p)
    if body.kind == "ball":
        d = (body.radius + body.offset) - np.linalg.norm(pts - body.center, axis=1)
    elif body.kind == "ellipsoid":
        _, _, s = _ellipsoid_project(body, pts)
        d = -s
    else:
        d = _sampled_signed_distance(body, pts)
    return float(d[0]) if single else d


def _ellipsoid_project(body: ConvexBody, pts: np.ndarray):
    """Nearest boundary point on an (offset) ellipsoid.

    Returns (foot, outward normal, signed outward distance to the offset
    surface).  Solves sum a_i^2 q_i^2 /(a_i^2+t)^2 = 1 for the Lagrange
    multiplier t by vectorized bisection; valid for query points outside
    the focal set, which the regularity margin guarantees.
    """
    a2 = body.axes**2
    q = pts - body.center
    rad = np.linalg.norm(q, axis=1)
    safe = rad > 0
    qs = np.where(safe[:, None], q, np.array([1.0, 0.0, 0.0]))

    def f(t):
        return ((a2 * qs**2) / (a2 + t[:, None]) ** 2).sum(axis=1) - 1.0

    lo = np.full(len(qs), -np.min(a2) * (1 - 1e-14))
    hi = np.full(len(qs), np.max(body.axes) * (rad + np.max(body.axes)))
    flo = f(lo)
    inside0 = f(np.zeros(len(qs))) <= 0
    lo = np.where(inside0, lo, 0.0)
    hi = np.where(inside0, np.zeros(len(qs)), hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        take_lo = fm > 0
        lo = np.where(take_lo, mid, lo)
        hi = np.where(take_lo, hi, mid)
    t = 0.5 * (lo + hi)
    foot0 = body.center + a2 * qs / (a2 + t[:, None])
    n = (foot0 - body.center) / a2
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    s = ((pts - foot0) * n).sum(axis=1) - body.offset
    foot = foot0 + body.offset * n
    del flo, safe
    return foot, n, s


def _sampled_signed_distance(body: ConvexBody, pts: np.ndarray, level=4, polish=True):
    grid = icosphere(level)
    h = body.support(grid)
    vals = h[None, :] - pts @ grid.T
    best = np.argmin(vals, axis=1)
    d = vals[np.arange(len(pts)), best]
    if not polish:
        return d
    u = grid[best]
    d2, _ = _polish_min_direction(body, pts, u)
    return np.minimum(d, d2)


def _polish_min_direction(body: ConvexBody, pts, u, iters=30):
    """Local minimization of h(u)-<p,u> over the sphere, per point."""
    u = u.copy()
    step = np.full(len(pts), 0.1)
    val = body.support(u) - (pts * u).sum(axis=1)
    t1, t2 = _tangent_basis(u)
    for _ in range(iters):
        improved = np.zeros(len(pts), dtype=bool)
        for dv in (t1, -t1, t2, -t2):
            cand = u + step[:, None] * dv
            cand /= np.linalg.norm(cand, axis=1, keepdims=True)
            cval = body.support(cand) - (pts * cand).sum(axis=1)
            better = cval < val
            u[better] = cand[better]
            val[better] = cval[better]
            improved |= better
        t1, t2 = _tangent_basis(u)
        step = np.where(improved, step, step * 0.5)
        if np.all(step < 1e-9):
            break
    return val, u


def _tangent_basis(u):
    ref = np.where(
        (np.abs(u[:, 2]) < 0.9)[:, None],
        np.array([0.0, 0.0, 1.0]),
        np.array([1.0, 0.0, 0.0]),
    )
    t1 = np.cross(u, ref)
    t1 /= np.linalg.norm(t1, axis=1, keepdims=True)
    t2 = np.cross(u, t1)
    return t1, t2


def parallel_body(body: ConvexBody, t: float) -> ConvexBody:
    """The body bounded by points p + t*N(p), p on the boundary."""
    t = float(t)
    if t < -body.a_max() - 1e-15:
        raise ValueError(
            "inner parallel body not regular (t=%.6g < -a_max=%.6g)"
            % (t, -body.a_max())
        )
    if body.kind == "ball":
        return replace(body, radius=body.radius + t)
    return replace(body, offset=body.offset + t)


def normal_project(body: ConvexBody, p):
    """Normal projection onto the boundary and the extended Gauss map.

    Returns (foot, outward unit normal) with p = foot + t*normal for
    some t >= -a_max.
    """
    p = np.asarray(p, dtype=float)
    single = p.ndim == 1
    pts = np.atleast_2d(p)
    if body.kind == "ball":
        q = pts - body.center
        r = np.linalg.norm(q, axis=1)
        if np.any(r < 1e-14):
            raise ValueError("outside projection domain (center point)")
        n = q / r[:, None]
        foot = body.center + (body.radius + body.offset) * n
    elif body.kind == "ellipsoid":
        foot, n, s = _ellipsoid_project(body, pts)
        del s
    else:
        d0 = _sampled_signed_distance(body, pts, polish=False)
        grid = icosphere(4)
        vals = body.support(grid)[None, :] - pts @ grid.T
        u = grid[np.argmin(vals, axis=1)]
        _, u = _polish_min_direction(body, pts, u)
        n = u
        foot = _support_grad(body, n)
        del d0
    depth = signed_boundary_distance(body, pts)
    if np.any(depth > body.a_max() + 1e-9):
        raise ValueError("outside projection domain (point too deep inside)")
    if single:
        return foot[0], n[0]
    return foot, n


def max_principal_curvature(body: ConvexBody) -> float:
    """Largest principal curvature over the boundary (inward convention)."""
    if body.kind == "ball":
        return 1.0 / (body.radius + body.offset)
    if body.kind == "ellipsoid":
        a = np.sort(body.axes)[::-1]
        k0 = a[0] / a[2] ** 2
        return k0 / (1.0 + body.offset * k0)
    rmin, _ = _radii_extremes(body, icosphere(5))
    if rmin <= 0:
        raise ValueError("support function is not strictly convex")
    return CURVATURE_SAFETY / rmin


def _radii_extremes(body: ConvexBody, grid: np.ndarray):
    """Extremes of the principal curvature radii on a direction grid.

    Radii are eigenvalues of the spherical Hessian of h plus h*Id on the
    tangent plane; computed by finite differences of the 1-homogeneous
    extension restricted to tangent directions.  The body offset enters
    additively.
    """
    step = 1e-4
    t1, t2 = _tangent_basis(grid)
    base = body.support(grid) - grid @ body.center

    def h_at(v):
        vv = v / np.linalg.norm(v, axis=1, keepdims=True)
        return body.support(vv) - vv @ body.center

    r11 = (h_at(grid + step * t1) - 2 * base + h_at(grid - step * t1)) / step**2 + base
    r22 = (h_at(grid + step * t2) - 2 * base + h_at(grid - step * t2)) / step**2 + base
    r12 = (
        h_at(grid + step * (t1 + t2) / np.sqrt(2))
        - h_at(grid + step * (t1 - t2) / np.sqrt(2))
        - h_at(grid - step * (t1 - t2) / np.sqrt(2))
        + h_at(grid - step * (t1 + t2) / np.sqrt(2))
    ) / (2 * step**2)
    tr = r11 + r22
    det = r11 * r22 - r12**2
    disc = np.sqrt(np.maximum(tr**2 / 4 - det, 0.0))
    lo = tr / 2 - disc
    hi = tr / 2 + disc
    return float(np.min(lo)), float(np.max(hi))


def hausdorff_distance(a: ConvexBody, b: ConvexBody) -> float:
    """Sup-norm of the support-function difference (exact for convex sets)."""
    if a.kind == "ball" and b.kind == "ball":
        dc = np.linalg.norm(a.center - b.center)
        dr = (a.radius + a.offset) - (b.radius + b.offset)
        return max(abs(dr + dc), abs(dr - dc))
    grid = icosphere(5)
    diff = a.support(grid) - b.support(grid)
    i_hi = int(np.argmax(diff))
    i_lo = int(np.argmin(diff))
    hi = _polish_support_diff(a, b, grid[i_hi], +1)
    lo = _polish_support_diff(a, b, grid[i_lo], -1)
    return max(abs(hi), abs(lo), float(np.max(np.abs(diff))))


def _polish_support_diff(a, b, u0, sign, iters=40):
    u = u0[None, :].copy()
    val = sign * (a.support(u) - b.support(u))
    step = 0.1
    for _ in range(iters):
        t1, t2 = _tangent_basis(u)
        improved = False
        for dv in (t1, -t1, t2, -t2):
            cand = u + step * dv
            cand /= np.linalg.norm(cand, axis=1, keepdims=True)
            cv = sign * (a.support(cand) - b.support(cand))
            if cv[0] > val[0]:
                u, val = cand, cv
                improved = True
        if not improved:
            step *= 0.5
            if step < 1e-10:
                break
    return sign * float(val[0])


def contains(outer: ConvexBody, inner: ConvexBody, margin: float = 0.0) -> bool:
    """Body containment via pointwise support comparison."""
    grid = icosphere(4)
    return bool(np.all(inner.support(grid) <= outer.support(grid) - margin))


def inradius(body: ConvexBody) -> float:
    """Radius of the largest inscribed ball (Chebyshev radius)."""
    if body.kind == "ball":
        return body.radius + body.offset
    if body.kind == "ellipsoid":
        return float(np.min(body.axes)) + body.offset
    grid = icosphere(3)
    h = body.support(grid)
    # maximize t s.t. <p,u_k> + t <= h_k
    res = linprog(
        c=[0.0, 0.0, 0.0, -1.0],
        A_ub=np.hstack([grid, np.ones((len(grid), 1))]),
        b_ub=h,
        bounds=[(None, None)] * 4,
        method="highs",
    )
    if not res.success:
        raise RuntimeError("inradius LP failed: %s" % res.message)
    return float(res.x[3])


def diameter(body: ConvexBody) -> float:
    grid = icosphere(4)
    h = body.support(grid)
    hm = body.support(-grid)
    return float(np.max(h + hm))


def max_depth_inside(outer_ref: ConvexBody, region: ConvexBody) -> float:
    """max{ dist(p, boundary of outer_ref) : p in region }.

    The maximum of a convex function of p is attained on the boundary of
    `region` unless the deepest point of `outer_ref` lies inside; both
    candidates are sampled.  A 2% safety factor keeps the estimate on the
    conservative (large) side for escape-distance thresholds.
    """
    if (
        outer_ref.kind == "ball"
        and region.kind == "ball"
        and np.allclose(outer_ref.center, region.center)
    ):
        r = outer_ref.radius + outer_ref.offset
        rr = region.radius + region.offset
        return max(r, rr - r)
    grid = icosphere(4)
    bdry = _support_grad(region, grid)
    depth = np.abs(signed_boundary_distance(outer_ref, bdry))
    best = float(np.max(depth))
    inr = inradius(outer_ref)
    if signed_boundary_distance(region, _chebyshev_center(outer_ref)) > 0:
        best = max(best, inr)
    return 1.02 * best


def _chebyshev_center(body: ConvexBody) -> np.ndarray:
    if body.kind in ("ball", "ellipsoid"):
        return body.center
    grid = icosphere(3)
    h = body.support(grid)
    res = linprog(
        c=[0.0, 0.0, 0.0, -1.0],
        A_ub=np.hstack([grid, np.ones((len(grid), 1))]),
        b_ub=h,
        bounds=[(None, None)] * 4,
        method="highs",
    )
    return np.asarray(res.x[:3])


def boundary_gap(inner: ConvexBody, outer: ConvexBody) -> float:
    """dist(boundary of inner, boundary of outer) for inner contained in outer.

    Slightly conservative (sampled minimum over the inner boundary).
    """
    if (
        inner.kind == "ball"
        and outer.kind == "ball"
        and np.allclose(inner.center, outer.center)
    ):
        return (outer.radius + outer.offset) - (inner.radius + inner.offset)
    grid = icosphere(4)
    bdry = _support_grad(inner, grid)
    d = signed_boundary_distance(outer, bdry)
    if np.any(d < 0):
        raise ValueError("inner body is not contained in outer body")
    return float(np.min(d))


# -- Minkowski smoothing chain ----------------------------------------------

def minkowski_sequence(body: ConvexBody, k: int) -> ConvexBody:
    """k-th term of a smooth, nested outer approximation chain.

    Realizes the classical smooth-approximation statement at desk scale:
    the support function is mollified with a spherical Gaussian of width
    1/k and truncated at harmonic degree 4k, then an outward offset makes
    the result contain the input; offsets are clamped down the chain so
    C_{k+1} is strictly inside C_k while both contain C.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    chain = minkowski_chain(body, k)
    return chain[-1]


def minkowski_chain(body: ConvexBody, kmax: int) -> list[ConvexBody]:
    probe = icosphere(4)
    target = body.support(probe)
    scale = body.scale()
    prev = None
    out = []
    for k in range(1, kmax + 1):
        lmax = min(4 * k + 4, 60)
        dirs, w = gl_product_grid(2 * lmax + 2)
        vals = body.support(dirs)
        basis = real_sh_basis(lmax, dirs)
        coeffs = (basis @ (vals * w)) * heat_multipliers(lmax, 1.0 / k)
        cand = ConvexBody("support_fn", np.zeros(3), coeffs=coeffs)
        smooth = cand.support(probe)
        deficiency = float(np.max(target - smooth))
        offset = deficiency + 0.05 * scale / k
        if prev is not None:
            headroom = float(np.min(prev.support(probe) - smooth))
            gamma = 1e-4 * scale / k
            if headroom - gamma <= deficiency:
                raise RuntimeError(
                    "cannot nest smoothing chain at k=%d (headroom %.3g)"
                    % (k, headroom)
                )
            offset = min(offset, 0.5 * (deficiency + headroom - gamma))
            offset = max(offset, deficiency + 1e-12 * scale)
        cand = replace(cand, offset=offset)
        rmin, _ = _radii_extremes(cand, icosphere(3))
        if rmin <= 0:
            raise RuntimeError("smoothing chain member not strictly convex at k=%d" % k)
        out.append(cand)
        prev = cand
    return out


# -- serialization -----------------------------------------------------------

def body_to_text(body: ConvexBody) -> str:
    lines = ["kind %s" % body.kind]
    lines.append("center %s" % " ".join("%.17g" % c for c in body.center))
    if body.kind == "ball":
        lines.append("radius %.17g" % body.radius)
    elif body.kind == "ellipsoid":
        lines.append("axes %s" % " ".join("%.17g" % a for a in body.axes))
    else:
        lines.append("coeffs %s" % " ".join("%.17g" % c for c in body.coeffs))
    lines.append("offset %.17g" % body.offset)
    return "\n".join(lines) + "\n"


def body_from_text(text: str) -> ConvexBody:
    fields = {}
    for line in text.strip().splitlines():
        key, _, rest = line.partition(" ")
        fields[key] = rest
    kind = fields["kind"].strip()
    center = np.array([float(x) for x in fields["center"].split()])
    offset = float(fields.get("offset", "0"))
    if kind == "ball":
        return ConvexBody("ball", center, radius=float(fields["radius"]), offset=offset)
    if kind == "ellipsoid":
        axes = np.array([float(x) for x in fields["axes"].split()])
        return ConvexBody("ellipsoid", center, axes=axes, offset=offset)
    coeffs = np.array([float(x) for x in fields["coeffs"].split()])
    return ConvexBody("support_fn", center, coeffs=coeffs, offset=offset)
