"""Small-vector geometry used by the optimizer and the lower bound.

The heavy lifting is done by ``numba`` kernels (leading underscore) that
operate on 1-d float arrays; the public functions wrap them with input
checking and friendlier return types.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DegenerateCherry, DimensionMismatch

# D / (|a||b|) at or below this is treated as collinear
DEGENERACY_EPS = 1e-12
SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class EquilateralConstruction:
    a: np.ndarray
    b: np.ndarray
    r: float
    t: float
    D: float
    e: np.ndarray


def as_point(p) -> np.ndarray:
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionMismatch(f"expected a 1-d coordinate sequence, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"non-finite coordinates: {arr}")
    return arr


def _same_dim(*pts: np.ndarray) -> None:
    d = pts[0].shape[0]
    if d < 2:
        raise DimensionMismatch("points need at least 2 coordinates")
    for p in pts[1:]:
        if p.shape[0] != d:
            raise DimensionMismatch(f"mixed dimensions {d} and {p.shape[0]}")


@njit(cache=True)
def _dot(u, v):
    s = 0.0
    for k in range(u.shape[0]):
        s += u[k] * v[k]
    return s


@njit(cache=True)
def _dist(u, v):
    s = 0.0
    for k in range(u.shape[0]):
        w = u[k] - v[k]
        s += w * w
    return math.sqrt(s)


@njit(cache=True)
def _equilateral(x1, x2, x3, out):
    """Write into ``out`` the apex on segment x1x2 lying farthest from x3.

    Returns (r, t, D, ok) with e = x1 + r (x2 - x1) + t (x3 - x1); ``ok`` is
    False when x1, x2, x3 are collinear within DEGENERACY_EPS, in which case
    ``out`` is left untouched.
    """
    d = x1.shape[0]
    aa = 0.0
    bb = 0.0
    ab = 0.0
    for k in range(d):
        ak = x2[k] - x1[k]
        bk = x3[k] - x1[k]
        aa += ak * ak
        bb += bk * bk
        ab += ak * bk
    if aa == 0.0 or bb == 0.0:
        return 0.0, 0.0, 0.0, False
    # w: component of x3 - x1 normal to x1x2, orthogonalized twice so it
    # stays normal when x3 is nearly on the line; |w| |a| = D without the
    # cancellation of |a|^2 |b|^2 - (a.b)^2
    w = np.empty(d)
    c = ab / aa
    for k in range(d):
        w[k] = (x3[k] - x1[k]) - c * (x2[k] - x1[k])
    c2 = 0.0
    for k in range(d):
        c2 += w[k] * (x2[k] - x1[k])
    c2 /= aa
    nn = 0.0
    for k in range(d):
        w[k] -= c2 * (x2[k] - x1[k])
        nn += w[k] * w[k]
    nn = math.sqrt(nn)
    D = math.sqrt(aa) * nn
    if nn <= DEGENERACY_EPS * math.sqrt(bb):
        return 0.0, 0.0, D, False
    # apex = midpoint - (sqrt3/2)|a| w/|w|; in closed form r = 1/2 + sqrt3 (a.b)/(2D),
    # t = -sqrt3 |a|^2/(2D)
    h = 0.5 * SQRT3 * math.sqrt(aa) / nn
    for k in range(d):
        out[k] = 0.5 * (x1[k] + x2[k]) - h * w[k]
    return 0.5 + SQRT3 * ab / (2.0 * D), -SQRT3 * aa / (2.0 * D), D, True


@njit(cache=True)
def _wide_angle(p, q, s):
    """True when the angle at p in triangle (p, q, s) is at least 120 degrees."""
    d = p.shape[0]
    uv = 0.0
    uu = 0.0
    vv = 0.0
    for k in range(d):
        u = q[k] - p[k]
        v = s[k] - p[k]
        uv += u * v
        uu += u * u
        vv += v * v
    return 2.0 * uv + math.sqrt(uu * vv) <= 0.0


@njit(cache=True)
def _fermat(x1, x2, x3, out):
    d = x1.shape[0]
    if _wide_angle(x1, x2, x3):
        for k in range(d):
            out[k] = x1[k]
        return
    if _wide_angle(x2, x1, x3):
        for k in range(d):
            out[k] = x2[k]
        return
    if _wide_angle(x3, x1, x2):
        for k in range(d):
            out[k] = x3[k]
        return
    e = np.empty(d)
    _, _, _, ok = _equilateral(x1, x2, x3, e)
    if not ok:
        # collinear within tolerance (e.g. two points nearly coincide): the
        # middle point, i.e. the one with the smallest distance sum, is optimal
        s1 = _dist(x1, x2) + _dist(x1, x3)
        s2 = _dist(x2, x1) + _dist(x2, x3)
        s3 = _dist(x3, x1) + _dist(x3, x2)
        best = x1
        if s2 < s1 and s2 <= s3:
            best = x2
        elif s3 < s1:
            best = x3
        for k in range(d):
            out[k] = best[k]
        return
    num = 0.0
    den = 0.0
    for k in range(d):
        c = (x1[k] + x2[k] + e[k]) / 3.0
        w = x3[k] - e[k]
        num += (e[k] - c) * w
        den += w * w
    t = -2.0 * num / den
    for k in range(d):
        out[k] = e[k] + t * (x3[k] - e[k])


def equilateral_point(x1, x2, x3) -> EquilateralConstruction:
    """Planar equilateral point of the pair (x1, x2) on the side away from x3.

    Raises DegenerateCherry when the three points are collinear.
    """
    x1, x2, x3 = as_point(x1), as_point(x2), as_point(x3)
    _same_dim(x1, x2, x3)
    e = np.empty_like(x1)
    r, t, D, ok = _equilateral(x1, x2, x3, e)
    if not ok:
        raise DegenerateCherry(f"collinear cherry: D={D:g}")
    return EquilateralConstruction(a=x2 - x1, b=x3 - x1, r=r, t=t, D=D, e=e)


def fermat_point(x1, x2, x3) -> np.ndarray:
    """Point minimizing the summed distance to three points."""
    x1, x2, x3 = as_point(x1), as_point(x2), as_point(x3)
    _same_dim(x1, x2, x3)
    out = np.empty_like(x1)
    _fermat(x1, x2, x3, out)
    return out


def angle_at_least_120(vertex, p, q) -> bool:
    return bool(_wide_angle(as_point(vertex), as_point(p), as_point(q)))


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment(a, b, p) -> bool:
    return (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def segments_intersect_2d(a, b, c, d) -> bool:
    """Closed-segment intersection test in the plane; touching counts."""
    pts = [as_point(p) for p in (a, b, c, d)]
    for p in pts:
        if p.shape[0] != 2:
            raise DimensionMismatch("segment intersection is only defined in 2-d")
    a, b, c, d = pts
    o1 = _orient(a, b, c)
    o2 = _orient(a, b, d)
    o3 = _orient(c, d, a)
    o4 = _orient(c, d, b)
    if ((o1 > 0 > o2) or (o1 < 0 < o2)) and ((o3 > 0 > o4) or (o3 < 0 < o4)):
        return True
    if o1 == 0 and _on_segment(a, b, c):
        return True
    if o2 == 0 and _on_segment(a, b, d):
        return True
    if o3 == 0 and _on_segment(c, d, a):
        return True
    if o4 == 0 and _on_segment(c, d, b):
        return True
    return False


def bbox_diameter(points) -> float:
    pts = np.asarray(points, dtype=np.float64)
    return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
