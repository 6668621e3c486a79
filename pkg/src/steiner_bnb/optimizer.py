"""Fixed-topology length minimization.

Each sweep moves every Steiner point to the Fermat point of its three
neighbours. Sweeps are simultaneous (Jacobi); if a simultaneous sweep would
lengthen the tree the run switches to in-place (Gauss-Seidel) sweeps, which
are monotone by construction.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .geometry import _dist, _fermat
from .topology import TopologyTree

CONVERGED = 0
COLLISION = 1
ITERATION_LIMIT = 2

# a Jacobi sweep may lengthen the tree by at most this much before fallback
MONOTONE_SLACK = 1e-12
# Steiner points closer than this (relative to the diameter) move as one junction
MERGE_EPS = 1e-9
# sweeps between attempts to collapse Steiner groups onto regular points
SNAP_PERIOD = 8


class OutcomeKind(enum.Enum):
    CONVERGED = "converged"
    COLLISION = "collision"
    ITERATION_LIMIT = "iteration_limit"


_KINDS = {CONVERGED: OutcomeKind.CONVERGED, COLLISION: OutcomeKind.COLLISION,
          ITERATION_LIMIT: OutcomeKind.ITERATION_LIMIT}


@dataclass
class OptimizeOptions:
    conv_eps: float = 1e-6
    collision_eps: float = 1e-4
    max_iters: int = 1000
    collision_detection: bool = False

    def __post_init__(self):
        if not self.conv_eps > 0:
            raise ValueError("conv_eps must be positive")
        if not self.collision_eps > 0:
            raise ValueError("collision_eps must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class OptimizeOutcome:
    kind: OutcomeKind
    length: float
    iterations: int
    collided_pair: tuple[int, int] | None = None
    jacobi_fallback: bool = False
    trace: np.ndarray | None = field(default=None, repr=False)


# -- kernels ----------------------------------------------------------------

@njit(cache=True)
def _length(nbr, pos, n, k):
    total = 0.0
    for i in range(k):
        s = n + i
        for j in range(3):
            g = nbr[i, j]
            if g < n or g > s:
                total += _dist(pos[s], pos[g])
    return total


@njit(cache=True)
def _error_figure(nbr, pos, n, k):
    d = pos.shape[1]
    acc = 0.0
    for i in range(k):
        s = n + i
        for a in range(3):
            for b in range(a + 1, 3):
                ga = nbr[i, a]
                gb = nbr[i, b]
                uv = 0.0
                uu = 0.0
                vv = 0.0
                for c in range(d):
                    u = pos[ga, c] - pos[s, c]
                    v = pos[gb, c] - pos[s, c]
                    uv += u * v
                    uu += u * u
                    vv += v * v
                arg = 2.0 * uv + math.sqrt(uu * vv)
                if arg > 0.0:
                    acc += arg
    return math.sqrt(acc)


@njit(cache=True)
def _jacobi(nbr, pos, n, k, out):
    for i in range(k):
        _fermat(pos[nbr[i, 0]], pos[nbr[i, 1]], pos[nbr[i, 2]], out[i])


@njit(cache=True)
def _gauss_seidel(nbr, pos, n, k):
    tmp = np.empty(pos.shape[1])
    for i in range(k):
        _fermat(pos[nbr[i, 0]], pos[nbr[i, 1]], pos[nbr[i, 2]], tmp)
        pos[n + i, :] = tmp


@njit(cache=True)
def _collision(nbr, pos, n, k, eps_abs, suppressed):
    for i in range(1, k):
        s = n + i
        best = -1
        for j in range(3):
            g = nbr[i, j]
            if n <= g < s:
                h = g - n
                if best != -1 and h >= best:
                    continue
                skip = False
                for m in range(suppressed.shape[0]):
                    if suppressed[m, 0] == i and suppressed[m, 1] == h:
                        skip = True
                if skip:
                    continue
                if _dist(pos[s], pos[g]) <= eps_abs:
                    best = h
        if best != -1:
            return i, best
    return -1, -1


@njit(cache=True)
def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@njit(cache=True)
def _pull(nbr, pos, n, side, in_cluster, centre, out):
    """Sum of unit vectors from ``centre`` to the outside neighbours of ``side``."""
    out[:] = 0.0
    for m in side:
        for j in range(3):
            g = nbr[m - n, j]
            if in_cluster[g]:
                continue
            dist = _dist(pos[g], centre)
            if dist > 0.0:
                for c in range(out.shape[0]):
                    out[c] += (pos[g, c] - centre[c]) / dist


@njit(cache=True)
def _side(nbr, n, start, blocked, in_cluster):
    """Cluster nodes reachable from ``start`` without using node ``blocked``.

    Returns an empty list if the side holds a regular point.
    """
    side = [start]
    if start < n:
        return side[:0]
    todo = [start]
    while len(todo) > 0:
        u = todo.pop()
        for j in range(3):
            g = nbr[u - n, j]
            if not in_cluster[g] or g == blocked:
                continue
            seen = False
            for x in side:
                if x == g:
                    seen = True
            if seen:
                continue
            if g < n:
                return side[:0]
            side.append(g)
            todo.append(g)
    return side


@njit(cache=True)
def _cluster_step(nbr, pos, n, k, tiny):
    """Escape moves for groups of nodes glued together by zero-length edges.

    Per-point Fermat updates leave such a group where it is, even when the
    tree would get shorter by moving it as a whole or by pulling part of it
    away. A free group (no regular point in it) takes one joint Weiszfeld
    step towards the median of its outside neighbours; then every internal
    edge is checked and the side whose outside pull exceeds 1 is peeled off
    with a backtracking step. Returns the largest remaining optimality
    violation, 0 when every group is stationary.
    """
    d = pos.shape[1]
    total = n + k
    parent = np.arange(total)
    for i in range(k):
        s = n + i
        for j in range(3):
            g = nbr[i, j]
            if (g < n or g > s) and _dist(pos[s], pos[g]) <= tiny:
                a = _find(parent, s)
                b = _find(parent, g)
                if a != b:
                    parent[b] = a
    worst = 0.0
    acc = np.empty(d)
    force = np.empty(d)
    in_cluster = np.zeros(total, dtype=np.bool_)
    for r in range(total):
        if _find(parent, r) != r:
            continue
        members = [r]
        for v in range(total):
            if v != r and _find(parent, v) == r:
                members.append(v)
        if len(members) < 2:
            continue
        in_cluster[:] = False
        anchor = -1
        for v in members:
            in_cluster[v] = True
            if v < n:
                anchor = v
        landed = False
        if anchor >= 0:
            centre = pos[anchor].copy()
        else:
            centre = pos[members[0]].copy()
            acc[:] = 0.0
            wsum = 0.0
            for m in members:
                for j in range(3):
                    g = nbr[m - n, j]
                    if in_cluster[g]:
                        continue
                    dist = _dist(pos[g], centre)
                    if dist <= tiny:
                        landed = True
                        continue
                    for c in range(d):
                        acc[c] += pos[g, c] / dist
                    wsum += 1.0 / dist
            if landed:
                continue
            _pull(nbr, pos, n, members, in_cluster, centre, force)
            res = math.sqrt(_dot_self(force))
            if res > worst:
                worst = res
            for c in range(d):
                centre[c] = acc[c] / wsum
            # Weiszfeld crawls towards an optimum sitting on a data point,
            # so test each outside neighbour for optimality directly
            for m in members:
                for j in range(3):
                    g = nbr[m - n, j]
                    if in_cluster[g]:
                        continue
                    acc[:] = 0.0
                    for m2 in members:
                        for j2 in range(3):
                            g2 = nbr[m2 - n, j2]
                            if in_cluster[g2] or g2 == g:
                                continue
                            dist = _dist(pos[g2], pos[g])
                            if dist > 0.0:
                                for c in range(d):
                                    acc[c] += (pos[g2, c] - pos[g, c]) / dist
                    if _dot_self(acc) <= 1.0:
                        centre[:] = pos[g]
                        landed = True
            for m in members:
                pos[m, :] = centre
        if landed:
            continue
        # try to peel a side off at some internal edge
        split = False
        for u in members:
            if u < n or split:
                continue
            for j in range(3):
                v = nbr[u - n, j]
                if not in_cluster[v] or (v >= n and v < u) or split:
                    continue
                for which in range(2):
                    a = u if which == 0 else v
                    b = v if which == 0 else u
                    side = _side(nbr, n, a, b, in_cluster)
                    if len(side) == 0:
                        continue
                    _pull(nbr, pos, n, side, in_cluster, centre, force)
                    pull = math.sqrt(_dot_self(force))
                    if pull <= 1.0 + 1e-9:
                        continue
                    if _peel(nbr, pos, n, k, side, in_cluster, centre, force / pull):
                        split = True
                        if pull - 1.0 > worst:
                            worst = pull - 1.0
                        break
    return worst


@njit(cache=True)
def _dot_self(v):
    s = 0.0
    for c in range(v.shape[0]):
        s += v[c] * v[c]
    return s


@njit(cache=True)
def _peel(nbr, pos, n, k, side, in_cluster, centre, direction):
    base = _length(nbr, pos, n, k)
    reach = np.inf
    for m in side:
        for j in range(3):
            g = nbr[m - n, j]
            if not in_cluster[g]:
                dist = _dist(pos[g], centre)
                if dist < reach:
                    reach = dist
    step = 0.5 * reach
    for _ in range(60):
        for m in side:
            pos[m, :] = centre + step * direction
        if _length(nbr, pos, n, k) < base:
            return True
        step *= 0.5
    for m in side:
        pos[m, :] = centre
    return False


@njit(cache=True)
def _nearest_attached(nbr, saved, n, k, p, anchor, taken):
    """Closest untaken Steiner point adjacent to ``p`` or to a taken one."""
    pick = -1
    pick_d = np.inf
    for i in range(k):
        s = n + i
        if taken[s]:
            continue
        for j in range(3):
            g = nbr[i, j]
            if g == p or (g >= n and taken[g]):
                dd = _dist(saved[i], anchor)
                if dd < pick_d:
                    pick_d = dd
                    pick = s
                break
    return pick


@njit(cache=True)
def _snap_trials(nbr, pos, n, k):
    """Try collapsing Steiner groups onto a regular point; keep the best gain.

    Several Steiner points converging together onto a regular point get there
    only sublinearly under Fermat sweeps. For each regular point, grow a
    connected Steiner set nearest-first and test moving each prefix onto the
    point. Only strict length decreases are accepted.
    """
    base = _length(nbr, pos, n, k)
    saved = pos[n:n + k].copy()
    best_gain = MONOTONE_SLACK
    best_p = -1
    best_m = 0
    taken = np.zeros(n + k, dtype=np.bool_)
    for p in range(n):
        taken[:] = False
        for m in range(1, k + 1):
            pick = _nearest_attached(nbr, saved, n, k, p, pos[p], taken)
            if pick < 0:
                break
            taken[pick] = True
            pos[pick, :] = pos[p]
            gain = base - _length(nbr, pos, n, k)
            if gain > best_gain:
                best_gain = gain
                best_p = p
                best_m = m
        pos[n:n + k] = saved
    if best_p < 0:
        return False
    taken[:] = False
    for _ in range(best_m):
        pick = _nearest_attached(nbr, saved, n, k, best_p, pos[best_p], taken)
        taken[pick] = True
        pos[pick, :] = pos[best_p]
    return True


@njit(cache=True)
def _optimize(nbr, pos, n, k, conv_eps, eps_abs, tiny, max_iters, detect, suppressed, trace):
    tmp = np.empty((k, pos.shape[1]))
    length = _length(nbr, pos, n, k)
    trace[0] = length
    sequential = False
    fellback = False
    for it in range(1, max_iters + 1):
        if not sequential:
            _jacobi(nbr, pos, n, k, tmp)
            saved = pos[n:n + k].copy()
            pos[n:n + k] = tmp
            new_length = _length(nbr, pos, n, k)
            if new_length > length + MONOTONE_SLACK:
                pos[n:n + k] = saved
                sequential = True
                fellback = True
        if sequential:
            _gauss_seidel(nbr, pos, n, k)
        residual = _cluster_step(nbr, pos, n, k, tiny)
        if it % SNAP_PERIOD == 0 and _snap_trials(nbr, pos, n, k):
            residual = np.inf
        new_length = _length(nbr, pos, n, k)
        length = new_length
        trace[it] = length
        if detect:
            ci, ch = _collision(nbr, pos, n, k, eps_abs, suppressed)
            if ci >= 0:
                return COLLISION, it, length, ci, ch, fellback
        if residual < conv_eps and _error_figure(nbr, pos, n, k) < conv_eps * length:
            return CONVERGED, it, length, -1, -1, fellback
    return ITERATION_LIMIT, max_iters, length, -1, -1, fellback


# -- public surface -----------------------------------------------------------

def tree_length(tree: TopologyTree) -> float:
    return float(_length(tree.nbr, tree.pos, tree.n, tree.steiner_count))


def error_figure(tree: TopologyTree) -> float:
    """Aggregate deficit of the angles at Steiner points below 120 degrees."""
    return float(_error_figure(tree.nbr, tree.pos, tree.n, tree.steiner_count))


def iterate_once(tree: TopologyTree) -> np.ndarray:
    """One simultaneous sweep; updates ``tree.pos`` and returns the Steiner rows."""
    k = tree.steiner_count
    out = np.empty((k, tree.d))
    _jacobi(tree.nbr, tree.pos, tree.n, k, out)
    tree.pos[tree.n:tree.n + k] = out
    return out


def collision_threshold(tree: TopologyTree, opts: OptimizeOptions) -> float:
    return opts.collision_eps * tree.diameter


def _suppressed_array(pairs) -> np.ndarray:
    arr = np.asarray(sorted(pairs), dtype=np.int64).reshape(-1, 2)
    return arr


def detect_collision(tree: TopologyTree, collision_eps_abs: float,
                     suppressed=()) -> tuple[int, int] | None:
    i, h = _collision(tree.nbr, tree.pos, tree.n, tree.steiner_count,
                      collision_eps_abs, _suppressed_array(suppressed))
    return None if i < 0 else (int(i), int(h))


def collided_pairs(tree: TopologyTree, collision_eps_abs: float) -> list[tuple[int, int]]:
    """Every adjacent Steiner pair (i > h) within the threshold."""
    n = tree.n
    out = []
    for i in range(1, tree.steiner_count):
        for g in tree.nbr[i]:
            if n <= g < n + i and np.linalg.norm(tree.pos[n + i] - tree.pos[g]) <= collision_eps_abs:
                out.append((i, int(g - n)))
    return sorted(out)


def optimize(tree: TopologyTree, opts: OptimizeOptions | None = None,
             suppressed=(), keep_trace: bool = False) -> OptimizeOutcome:
    """Run sweeps until converged, a collision is seen, or the budget runs out.

    ``suppressed`` lists (i, h) pairs whose collisions are ignored. Pairs that
    already sit within the threshold when the run starts (typically inherited
    from a degenerate parent) are ignored too: a collision is a pair *coming*
    together.
    """
    opts = opts or OptimizeOptions()
    if opts.collision_detection:
        suppressed = set(suppressed) | set(collided_pairs(tree, collision_threshold(tree, opts)))
    trace = np.empty(opts.max_iters + 1)
    kind, iters, length, ci, ch, fellback = _optimize(
        tree.nbr, tree.pos, tree.n, tree.steiner_count, opts.conv_eps,
        collision_threshold(tree, opts), MERGE_EPS * tree.diameter, opts.max_iters, opts.collision_detection,
        _suppressed_array(suppressed), trace)
    return OptimizeOutcome(
        kind=_KINDS[kind], length=float(length), iterations=int(iters),
        collided_pair=(int(ci), int(ch)) if kind == COLLISION else None,
        jacobi_fallback=bool(fellback),
        trace=trace[:iters + 1].copy() if keep_trace else None)
