"""Slow, independent reference computations used only by the tests."""
from __future__ import annotations

import itertools
import math

import cvxpy as cp
import numpy as np


def ternary_fermat_2d(a, b, c, iters=100):
    """Fermat point of a plane triangle by nested ternary search."""
    pts = np.array([a, b, c], dtype=float)

    def cost(x, y):
        return float(np.sum(np.hypot(pts[:, 0] - x, pts[:, 1] - y)))

    lo = pts.min(axis=0)
    hi = pts.max(axis=0)

    def best_y(x):
        y0, y1 = lo[1], hi[1]
        for _ in range(iters):
            m1 = y0 + (y1 - y0) / 3
            m2 = y1 - (y1 - y0) / 3
            if cost(x, m1) <= cost(x, m2):
                y1 = m2
            else:
                y0 = m1
        return (y0 + y1) / 2

    x0, x1 = lo[0], hi[0]
    for _ in range(iters):
        m1 = x0 + (x1 - x0) / 3
        m2 = x1 - (x1 - x0) / 3
        if cost(m1, best_y(m1)) <= cost(m2, best_y(m2)):
            x1 = m2
        else:
            x0 = m1
    x = (x0 + x1) / 2
    return np.array([x, best_y(x)])


def conic_tree_length(points, edges, n_steiner):
    """Minimal length of a tree with fixed connectivity, as a second-order cone program.

    ``edges`` uses global indices: 0..N-1 regular, N.. Steiner.
    """
    points = np.asarray(points, dtype=float)
    n, d = points.shape
    s = cp.Variable((n_steiner, d))

    def node(g):
        return points[g] if g < n else s[g - n]

    cost = sum(cp.norm(node(p) - node(q)) for p, q in edges)
    prob = cp.Problem(cp.Minimize(cost))
    prob.solve(solver=cp.CLARABEL)
    return float(prob.value), np.array(s.value)


def tree_oracle(tree):
    return conic_tree_length(tree.points, list(tree.edges.values()), tree.steiner_count)[0]


def double_factorial_count(n):
    return math.prod(range(1, 2 * n - 4, 2)) if n >= 3 else 0


def mst_length(points):
    """Prim's algorithm; an upper bound on the Steiner minimal tree."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    inside = [0]
    best = np.linalg.norm(pts - pts[0], axis=1)
    total = 0.0
    for _ in range(n - 1):
        best[inside] = np.inf
        j = int(np.argmin(best))
        total += best[j]
        inside.append(j)
        best = np.minimum(best, np.linalg.norm(pts - pts[j], axis=1))
    return total


def all_vectors(n):
    return itertools.product(*[range(1, 2 * i + 2) for i in range(1, n - 2)])
