"""Sphere sampling grids and real spherical harmonics.

Shared substrate for support-function bodies: deterministic icosphere
grids for sampled extrema, Gauss-Legendre product grids for harmonic
analysis, and a vectorized real spherical-harmonic basis.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import lpmv

__all__ = [
    "icosphere",
    "gl_product_grid",
    "real_sh_basis",
    "sh_analysis",
    "sh_synthesis",
    "heat_multipliers",
]


def _icosahedron():
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    v = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=float,
    )
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    f = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=int,
    )
    return v, f


@lru_cache(maxsize=8)
def icosphere(level: int) -> np.ndarray:
    """Unit vectors of an icosahedron subdivided `level` times.

    Deterministic; level 3 has 642 vertices, level 4 has 2562,
    level 5 has 10242.
    """
    v, f = _icosahedron()
    verts = [tuple(p) for p in v]
    index = {p: i for i, p in enumerate(verts)}
    faces = [tuple(t) for t in f]
    for _ in range(level):
        new_faces = []
        midpoint = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in midpoint:
                p = np.array(verts[i]) + np.array(verts[j])
                p /= np.linalg.norm(p)
                tp = tuple(p)
                index[tp] = len(verts)
                verts.append(tp)
                midpoint[key] = index[tp]
            return midpoint[key]

        for (a, b, c) in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    out = np.array(verts, dtype=float)
    out.setflags(write=False)
    return out


def gl_product_grid(lmax: int):
    """Gauss-Legendre x uniform-phi grid integrating degree <= 2*lmax exactly.

    Returns (dirs (n,3), weights (n,)) with weights summing to 4*pi.
    """
    nth = lmax + 1
    nph = 2 * lmax + 2
    x, wx = np.polynomial.legendre.leggauss(nth)
    phi = 2.0 * np.pi * np.arange(nph) / nph
    ct = x[:, None] * np.ones((1, nph))
    st = np.sqrt(1.0 - x[:, None] ** 2) * np.ones((1, nph))
    dirs = np.stack(
        [st * np.cos(phi)[None, :], st * np.sin(phi)[None, :], ct], axis=-1
    ).reshape(-1, 3)
    w = (wx[:, None] * (2.0 * np.pi / nph) * np.ones((1, nph))).reshape(-1)
    return dirs, w


def real_sh_basis(lmax: int, dirs: np.ndarray) -> np.ndarray:
    """Real orthonormal spherical harmonics Y_lm at unit vectors.

    Returns array of shape (n_funcs, n_points) with functions ordered
    (l, m) for l = 0..lmax, m = -l..l (m<0 are the sin terms).
    Orthonormal w.r.t. the surface measure on S^2.
    """
    dirs = np.asarray(dirs, dtype=float)
    ct = np.clip(dirs[:, 2], -1.0, 1.0)
    phi = np.arctan2(dirs[:, 1], dirs[:, 0])
    rows = []
    for l in range(lmax + 1):
        for m in range(-l, l + 1):
            am = abs(m)
            # normalization for real SH, orthonormal on S^2
            norm = np.sqrt(
                (2 * l + 1)
                / (4.0 * np.pi)
                * np.exp(_lnfac(l - am) - _lnfac(l + am))
            )
            plm = lpmv(am, l, ct)
            if m == 0:
                rows.append(norm * plm)
            elif m > 0:
                rows.append(np.sqrt(2.0) * norm * plm * np.cos(m * phi))
            else:
                rows.append(np.sqrt(2.0) * norm * plm * np.sin(am * phi))
    return np.asarray(rows)


@lru_cache(maxsize=None)
def _lnfac(n: int) -> float:
    from scipy.special import gammaln

    return float(gammaln(n + 1))


def sh_analysis(values: np.ndarray, lmax: int, dirs, weights) -> np.ndarray:
    """Project sampled sphere values onto real SH coefficients."""
    basis = real_sh_basis(lmax, dirs)
    return basis @ (np.asarray(values) * np.asarray(weights))


def sh_synthesis(coeffs: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    lmax = int(round(np.sqrt(len(coeffs)))) - 1
    basis = real_sh_basis(lmax, dirs)
    return np.asarray(coeffs) @ basis


def heat_multipliers(lmax: int, width: float) -> np.ndarray:
    """Per-coefficient damping for spherical Gaussian smoothing.

    `width` is the angular smoothing scale; coefficient of degree l is
    multiplied by exp(-l*(l+1)*width^2/2).
    """
    out = np.empty((lmax + 1) ** 2)
    i = 0
    for l in range(lmax + 1):
        fac = np.exp(-l * (l + 1) * width * width / 2.0)
        for _ in range(-l, l + 1):
            out[i] = fac
            i += 1
    return out
