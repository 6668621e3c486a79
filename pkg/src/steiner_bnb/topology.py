"""Full Steiner topologies encoded as split-edge vectors.

A topology vector ``(t_1, ..., t_k)`` says that Steiner point ``S_i`` was
inserted by splitting edge ``t_i`` of the tree built so far and hooking
regular point ``i + 2`` to it. Node numbering is global: regular points are
``0..N-1`` and Steiner point ``S_i`` is ``N + i``.
"""
from __future__ import annotations

from collections import deque
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    NoMoreRegularPoints,
    NoSuchEdge,
    NoTriplet,
    NotAdjacent,
    SteinerError,
    TooFewPoints,
)
from .geometry import bbox_diameter

# relative size of the nudge applied to freshly inserted Steiner points
INIT_PERTURBATION = 1e-6

Vector = tuple


class Triplet(NamedTuple):
    """Insertion-time neighbourhood of a Steiner extremity ``p`` of a split edge.

    ``e1``/``e2`` are the indices of the other two edges at ``p`` and
    ``w1``/``w2`` the nodes at their far ends at that moment.
    """
    p: int
    e1: int
    e2: int
    w1: int
    w2: int


def format_vector(vec: Sequence[int]) -> str:
    return "-".join(str(t) for t in vec)


def parse_vector(text: str) -> Vector:
    text = text.strip()
    if text in ("", "()", "-"):
        return ()
    try:
        return tuple(int(tok) for tok in text.split("-"))
    except ValueError as exc:
        raise SteinerError(f"bad topology text {text!r}") from exc


def validate_vector(vec: Sequence[int], n_points: int | None = None) -> None:
    for i, t in enumerate(vec, start=1):
        if not 1 <= t <= 2 * i + 1:
            raise NoSuchEdge(f"t_{i}={t} outside 1..{2 * i + 1}")
    if n_points is not None and len(vec) > n_points - 3:
        raise NoMoreRegularPoints(f"vector of length {len(vec)} needs {len(vec) + 3} points")


def count_full_topologies(n: int) -> int:
    """(2n-5)!!, the number of full topologies on n labelled terminals."""
    if n < 3:
        raise TooFewPoints("need at least 3 points")
    out = 1
    for k in range(3, 2 * n - 4, 2):
        out *= k
    return out


def child_count(level: int) -> int:
    if level < 1:
        raise ValueError("level starts at 1")
    return 2 * level + 1


class TopologyTree:
    """A concrete labelled tree built from a topology vector.

    Steiner neighbour slots are kept in ``nbr``/``sedge`` (one row per
    Steiner point); regular leaves keep their single neighbour in
    ``rnbr``/``redge``. ``pos`` holds coordinates for every global index.
    """

    def __init__(self, points: np.ndarray, diameter: float | None = None):
        n, d = points.shape
        self.points = points
        self.n = n
        self.d = d
        self.diameter = bbox_diameter(points) if diameter is None else diameter
        self.vector: Vector = ()
        self.edges: dict[int, tuple[int, int]] = {}
        self.nbr = np.full((max(n - 2, 1), 3), -1, dtype=np.int64)
        self.sedge = np.full((max(n - 2, 1), 3), -1, dtype=np.int64)
        self.rnbr = np.full(n, -1, dtype=np.int64)
        self.redge = np.full(n, -1, dtype=np.int64)
        self.pos = np.zeros((2 * n - 2, d))
        self.pos[:n] = points
        self.triplets: list[tuple[Triplet, ...]] = []

    # -- sizes -------------------------------------------------------------
    @property
    def steiner_count(self) -> int:
        return len(self.triplets)

    @property
    def regular_count(self) -> int:
        """Number of regular points currently attached."""
        return self.steiner_count + 2

    @property
    def level(self) -> int:
        return len(self.vector)

    def steiner_positions(self) -> np.ndarray:
        return self.pos[self.n:self.n + self.steiner_count]

    def node_name(self, g: int) -> str:
        return str(g) if g < self.n else f"S_{g - self.n}"

    # -- structure ---------------------------------------------------------
    def copy(self) -> "TopologyTree":
        other = TopologyTree.__new__(TopologyTree)
        other.points = self.points
        other.n = self.n
        other.d = self.d
        other.diameter = self.diameter
        other.vector = self.vector
        other.edges = dict(self.edges)
        other.nbr = self.nbr.copy()
        other.sedge = self.sedge.copy()
        other.rnbr = self.rnbr.copy()
        other.redge = self.redge.copy()
        other.pos = self.pos.copy()
        other.triplets = list(self.triplets)
        return other

    def neighbours(self, g: int) -> list[int]:
        if g < self.n:
            return [int(self.rnbr[g])] if self.rnbr[g] >= 0 else []
        return [int(x) for x in self.nbr[g - self.n]]

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {}
        for p, q in self.edges.values():
            adj.setdefault(p, set()).add(q)
            adj.setdefault(q, set()).add(p)
        return adj

    def edge_pairs(self) -> set[frozenset]:
        return {frozenset(e) for e in self.edges.values()}

    def _perturbation(self, i: int) -> np.ndarray:
        delta = np.zeros(self.d)
        delta[i % self.d] = INIT_PERTURBATION * self.diameter * (1.0 if i % 2 == 0 else -1.0)
        return delta

    def _init_root(self) -> None:
        s = self.n
        for r in range(3):
            self.edges[r + 1] = (r, s)
            self.rnbr[r] = s
            self.redge[r] = r + 1
        self.nbr[0] = (0, 1, 2)
        self.sedge[0] = (1, 2, 3)
        self.pos[s] = self.points[:3].mean(axis=0) + self._perturbation(0)
        self.triplets.append(())

    def _merge_inplace(self, t: int) -> None:
        i = self.steiner_count
        r = i + 2
        if r >= self.n:
            raise NoMoreRegularPoints(f"no regular point {r} for S_{i} (N={self.n})")
        try:
            p, q = self.edges[t]
        except KeyError:
            raise NoSuchEdge(f"edge {t} not in tree with edges 1..{len(self.edges)}") from None
        p1, p2 = (p, q) if p < q else (q, p)
        s = self.n + i
        trip = []
        for pe in (p1, p2):
            if pe >= self.n:
                row = pe - self.n
                others = [k for k in range(3) if self.sedge[row, k] != t]
                k1, k2 = others
                trip.append(Triplet(pe, int(self.sedge[row, k1]), int(self.sedge[row, k2]),
                                    int(self.nbr[row, k1]), int(self.nbr[row, k2])))
        # rewire: p1 keeps index t, p2 gets 2i+3, the new regular point 2i+2
        self._replace_slot(p1, t, s, t)
        self._replace_slot(p2, t, s, 2 * i + 3)
        self.edges[t] = (p1, s)
        self.edges[2 * i + 3] = (p2, s)
        self.edges[2 * i + 2] = (r, s)
        self.rnbr[r] = s
        self.redge[r] = 2 * i + 2
        self.nbr[i] = (p1, p2, r)
        self.sedge[i] = (t, 2 * i + 3, 2 * i + 2)
        self.pos[s] = (self.pos[p1] + self.pos[p2] + self.pos[r]) / 3.0 + self._perturbation(i)
        self.triplets.append(tuple(trip))
        self.vector = self.vector + (t,)

    def _replace_slot(self, g: int, old_edge: int, new_nbr: int, new_edge: int) -> None:
        if g < self.n:
            self.rnbr[g] = new_nbr
            self.redge[g] = new_edge
            return
        row = g - self.n
        for k in range(3):
            if self.sedge[row, k] == old_edge:
                self.nbr[row, k] = new_nbr
                self.sedge[row, k] = new_edge
                return
        raise AssertionError(f"edge {old_edge} not incident to {self.node_name(g)}")

    def child(self, t: int) -> "TopologyTree":
        out = self.copy()
        out._merge_inplace(t)
        return out

    def check(self) -> None:
        """Assert the structural invariants of a full topology."""
        k = self.steiner_count - 1
        assert set(self.edges) == set(range(1, 2 * k + 4)), self.edges
        adj = self.adjacency()
        for g, ns in adj.items():
            assert len(ns) == (1 if g < self.n else 3), (g, ns)
        assert len(adj) == 2 * k + 4
        # attached regular points are exactly 0 .. k+2
        assert {g for g in adj if g < self.n} == set(range(k + 3))


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise DimensionMismatch("points must form an (N, d) array")
    if pts.shape[0] < 3:
        raise TooFewPoints(f"need at least 3 points, got {pts.shape[0]}")
    if pts.shape[1] < 2:
        raise DimensionMismatch("dimension must be at least 2")
    return pts


def root_tree(points) -> TopologyTree:
    tree = TopologyTree(_as_points(points))
    tree._init_root()
    return tree


def merge_edge(tree: TopologyTree, t: int, i: int | None = None) -> TopologyTree:
    """Return a copy of ``tree`` with Steiner point ``S_i`` inserted on edge ``t``."""
    if i is not None and i != tree.steiner_count:
        raise SteinerError(f"next insertion ordinal is {tree.steiner_count}, not {i}")
    return tree.child(t)


def build_tree(points, vec: Sequence[int]) -> TopologyTree:
    tree = root_tree(points)
    validate_vector(vec, tree.n)
    for t in vec:
        tree._merge_inplace(int(t))
    return tree


# -- canonical vectors -------------------------------------------------------

def _side_mask(adj: dict[int, set[int]], start: int, blocked: int, n: int) -> int:
    """Bitmask of regular points reachable from ``start`` without visiting ``blocked``."""
    mask = 0
    seen = {start, blocked}
    todo = [start]
    while todo:
        u = todo.pop()
        if u < n:
            mask |= 1 << u
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return mask


def _edge_masks(tree: TopologyTree) -> dict[int, int]:
    """Edge index -> bitmask of regular points on the side away from point 0."""
    adj = tree.adjacency()
    parent = {0: -1}
    order = [0]
    dq = deque([0])
    while dq:
        u = dq.popleft()
        for v in adj[u]:
            if v not in parent:
                parent[v] = u
                order.append(v)
                dq.append(v)
    below = {}
    for u in reversed(order):
        m = (1 << u) if u < tree.n else 0
        for v in adj[u]:
            if parent.get(v) == u:
                m |= below[v]
        below[u] = m
    out = {}
    for idx, (p, q) in tree.edges.items():
        child = q if parent.get(q) == p else p
        out[idx] = below[child]
    return out


def vector_of(adj: dict[int, set[int]], n: int, points) -> Vector:
    """Topology vector whose tree has the same shape as ``adj``.

    ``adj`` is an adjacency over regular points ``0..m-1`` and any set of
    Steiner labels ``>= n``; Steiner labels need not be canonical.
    Regular points are peeled off from the highest down; each removal
    records the split of the remaining regular points at the edge it sat on,
    and the tree is then rebuilt forward matching those splits.
    """
    work = {u: set(vs) for u, vs in adj.items()}
    m = sum(1 for u in work if u < n)
    splits = []
    for r in range(m - 1, 2, -1):
        (s,) = work.pop(r)
        u, v = work.pop(s) - {r}
        work[u].discard(s)
        work[v].discard(s)
        work[u].add(v)
        work[v].add(u)
        side = _side_mask(work, u, v, n)
        full = (1 << r) - 1
        splits.append((side, full ^ side))
    splits.reverse()
    tree = root_tree(points)
    for side, other in splits:
        masks = _edge_masks(tree)
        hit = [idx for idx, mk in masks.items() if mk == side or mk == other]
        if len(hit) != 1:
            raise AssertionError(f"split matched {len(hit)} edges")
        tree._merge_inplace(hit[0])
    return tree.vector


def same_shape(adj1: dict[int, set[int]], adj2: dict[int, set[int]], n: int) -> bool:
    """Equality of two trees up to relabelling of Steiner points."""

    def splits(adj):
        out = set()
        m = sum(1 for u in adj if u < n)
        full = (1 << m) - 1
        for u, vs in adj.items():
            for v in vs:
                mk = _side_mask(adj, v, u, n)
                out.add(min(mk, full ^ mk))
        return out

    return splits(adj1) == splits(adj2)


# -- reorganizations ---------------------------------------------------------

def _direction(tree: TopologyTree, adj, centre: int, target: int) -> int:
    """Neighbour of ``centre`` on the path towards ``target``."""
    for nb in adj[centre]:
        if nb == target:
            return nb
        seen = {centre, nb}
        todo = [nb]
        while todo:
            u = todo.pop()
            for v in adj[u]:
                if v == target:
                    return nb
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
    raise AssertionError(f"{target} unreachable from {centre}")


def exchange_candidates(tree: TopologyTree, i: int, h: int):
    """The two neighbour exchanges available when S_i and S_h (i > h) collide.

    Yields tuples ``(edge, moved, taken, adjacency)``: ``moved`` is the
    neighbour S_i hands over to S_h, ``taken`` the one it receives, and
    ``edge`` the insertion-time index at S_h that points towards ``taken``.
    """
    if i <= h:
        raise SteinerError(f"need i > h, got ({i}, {h})")
    if i >= tree.steiner_count or h < 0:
        raise NotAdjacent(f"S_{i} or S_{h} not in tree")
    si, sh = tree.n + i, tree.n + h
    adj = tree.adjacency()
    if sh not in adj[si]:
        raise NotAdjacent(f"S_{i} and S_{h} are not adjacent")
    trip = next((tr for tr in tree.triplets[i] if tr.p == sh), None)
    if trip is None:
        raise NoTriplet(f"S_{i} has no triplet for S_{h}")
    r_side = _direction(tree, adj, si, i + 2)
    (z,) = adj[si] - {sh, r_side}
    out = []
    for edge, w in ((trip.e1, trip.w1), (trip.e2, trip.w2)):
        x = _direction(tree, adj, sh, w)
        new = {u: set(vs) for u, vs in adj.items()}
        new[si].discard(z)
        new[si].add(x)
        new[sh].discard(x)
        new[sh].add(z)
        new[z].discard(si)
        new[z].add(sh)
        new[x].discard(sh)
        new[x].add(si)
        out.append((edge, z, x, new))
    return out


def reorganizations(tree: TopologyTree, i: int, h: int) -> tuple[Vector, Vector]:
    """Topology vectors of the two reorganizations of a colliding pair."""
    vecs = []
    for edge, _, _, adj in exchange_candidates(tree, i, h):
        vec = vector_of(adj, tree.n, tree.points)
        # the prefix before S_i is untouched and t_i becomes the triplet edge
        assert vec[:i - 1] == tree.vector[:i - 1] and vec[i - 1] == edge, (vec, tree.vector, edge)
        vecs.append(vec)
    return vecs[0], vecs[1]
