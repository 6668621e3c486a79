"""Branch-and-bound over full topologies.

Two schemes share the same building blocks:

* ``solve_original``: depth-first, optimize all children of a node, descend
  into them shortest first, prune against the incumbent with the
  equilateral-point lower bound once a first full tree is known.
* ``solve_enhanced``: same tree, but when two adjacent Steiner points
  collide while a non-leaf topology is optimized, the two topologies
  obtained by exchanging their neighbours are lower-bounded and, if still
  promising, explored immediately (a "jump"). A registry keyed by topology
  vector guarantees that no topology is optimized twice.
"""
from __future__ import annotations

import enum
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .bounds import lower_bound
from .errors import CapExceeded, TooFewPoints
from .geometry import segments_intersect_2d
from .optimizer import (
    OptimizeOptions,
    OutcomeKind,
    collided_pairs,
    collision_threshold,
    error_figure,
    optimize,
    tree_length,
)
from .topology import (
    TopologyTree,
    Vector,
    build_tree,
    count_full_topologies,
    exchange_candidates,
    format_vector,
    reorganizations,
    root_tree,
    vector_of,
)


class NodeState(enum.Enum):
    UNVISITED = "unvisited"
    OPTIMIZED = "optimized"
    PRUNED = "pruned"
    CUT = "cut"


@dataclass
class BnbNode:
    vector: Vector
    length: float = 0.0  # 0 means not optimized yet
    state: NodeState = NodeState.UNVISITED
    explored: bool = False
    children: dict = field(default_factory=dict)
    reorg_links: list = field(default_factory=list)


@dataclass
class SolveOptions:
    conv_eps: float = 1e-6
    collision_eps: float = 1e-4
    max_iters: int = 1000
    use_lower_bound: bool = True
    twin_prune: bool = False
    # the old pre-optimization test "L - E < L*"; unsound, diagnostics only
    error_figure_prune: bool = False
    enumerate_cap: int = 8

    def optimize_options(self, detect: bool) -> OptimizeOptions:
        return OptimizeOptions(conv_eps=self.conv_eps, collision_eps=self.collision_eps,
                               max_iters=self.max_iters, collision_detection=detect)


@dataclass
class SearchStats:
    topologies_built: int = 0
    optimizations: int = 0
    lower_bounds_computed: int = 0
    reorganizations_taken: int = 0
    reorganizations_considered: int = 0
    nodes_cut: int = 0
    steps_to_first_leaf: int = 0
    jacobi_fallbacks: int = 0
    iteration_limits: int = 0
    leaves_visited: int = 0
    wall_time: float = 0.0


@dataclass
class Solution:
    length: float
    vector: Vector
    steiner_positions: np.ndarray
    degenerate_pairs: list
    tree: TopologyTree = field(repr=False)

    @property
    def topology(self) -> str:
        return format_vector(self.vector)


def _check_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise TooFewPoints("need at least 3 points in a (N, d) array")
    return pts


def degenerate_pairs(tree: TopologyTree, eps_abs: float) -> list[tuple[int, int]]:
    """Adjacent node pairs (global indices) closer than ``eps_abs``."""
    out = []
    for p, q in tree.edges.values():
        if np.linalg.norm(tree.pos[p] - tree.pos[q]) <= eps_abs:
            out.append((min(p, q), max(p, q)))
    return sorted(out)


class _Search:
    def __init__(self, points, opts: SolveOptions, enhanced: bool):
        self.points = _check_points(points)
        self.n = self.points.shape[0]
        self.depth = self.n - 3
        self.opts = opts
        self.enhanced = enhanced
        self.stats = SearchStats()
        self.best_length = math.inf
        self.best_tree: TopologyTree | None = None
        self.registry: dict[Vector, BnbNode] = {}
        self.reached_leaf = False
        self._plain = opts.optimize_options(detect=False)
        self._detect = opts.optimize_options(detect=True)

    # -- bookkeeping ---------------------------------------------------------
    def node(self, vec: Vector) -> BnbNode:
        nd = self.registry.get(vec)
        if nd is None:
            nd = self.registry[vec] = BnbNode(vec)
            parent = self.registry.get(vec[:-1]) if vec else None
            if parent is not None:
                parent.children[vec[-1]] = nd
        return nd

    def cut(self, nd: BnbNode) -> None:
        nd.state = NodeState.CUT
        self.stats.nodes_cut += 1

    def run_optimize(self, tree: TopologyTree, detect: bool, suppressed=()):
        out = optimize(tree, self._detect if detect else self._plain, suppressed)
        self.stats.jacobi_fallbacks += out.jacobi_fallback
        self.stats.iteration_limits += out.kind is OutcomeKind.ITERATION_LIMIT
        return out

    def count_optimization(self, level: int) -> None:
        self.stats.optimizations += 1
        if level == self.depth and not self.reached_leaf:
            self.reached_leaf = True
            self.stats.steps_to_first_leaf = self.stats.optimizations - 1

    def bound_rejects(self, tree: TopologyTree) -> bool:
        """Pre-optimization pruning; only active once an incumbent exists."""
        if math.isinf(self.best_length):
            return False
        if self.opts.use_lower_bound:
            self.stats.lower_bounds_computed += 1
            if lower_bound(tree) > self.best_length:
                return True
        if self.opts.error_figure_prune:
            if tree_length(tree) - error_figure(tree) >= self.best_length:
                return True
        return False

    def offer_leaf(self, tree: TopologyTree, length: float) -> None:
        self.stats.leaves_visited += 1
        if length < self.best_length:
            self.best_length = length
            self.best_tree = tree

    # -- shared driver -------------------------------------------------------
    def solve(self) -> tuple[Solution, SearchStats]:
        t0 = time.perf_counter()
        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(limit, 20000))
        try:
            root = root_tree(self.points)
            self.stats.topologies_built += 1
            self.count_optimization(0)
            out = self.run_optimize(root, detect=False)
            rnode = self.node(())
            rnode.length = out.length
            rnode.state = NodeState.OPTIMIZED
            if self.depth == 0:
                self.stats.steps_to_first_leaf = 0
                self.offer_leaf(root, out.length)
            elif self.enhanced:
                self.explore_enhanced(rnode, root, 1)
            else:
                self.explore_original(root, 1)
        finally:
            sys.setrecursionlimit(limit)
        self.stats.wall_time = time.perf_counter() - t0
        return self.solution(), self.stats

    def solution(self) -> Solution:
        tree = self.best_tree
        eps_abs = self.opts.collision_eps * tree.diameter
        return Solution(length=tree_length(tree), vector=tree.vector,
                        steiner_positions=tree.steiner_positions().copy(),
                        degenerate_pairs=degenerate_pairs(tree, eps_abs), tree=tree)

    # -- classic scheme -------------------------------------------------------
    def explore_original(self, tree: TopologyTree, level: int) -> None:
        last = level == self.depth
        kids = []
        for x in range(1, 2 * level + 2):
            vec = tree.vector + (x,)
            twin = self.registry.get(vec)
            if twin is not None and twin.state is NodeState.CUT:
                continue  # cut as the twin of a pruned topology
            child = tree.child(x)
            self.stats.topologies_built += 1
            if self.bound_rejects(child):
                self.stats.nodes_cut += 1
                continue
            self.count_optimization(level)
            length = self.run_optimize(child, detect=False).length
            if length > self.best_length:
                self.stats.nodes_cut += 1
                if self.opts.twin_prune:
                    self.twin_prune(child)
                continue
            if last:
                self.offer_leaf(child, length)
            else:
                kids.append((length, x, child))
        if last:
            return
        kids.sort(key=lambda item: (item[0], item[1]))
        for pos, (length, _, child) in enumerate(kids):
            if length > self.best_length:
                self.stats.nodes_cut += len(kids) - pos
                break
            self.explore_original(child, level + 1)

    # -- collision-driven scheme ---------------------------------------------
    def explore_enhanced(self, parent: BnbNode, tree: TopologyTree, level: int) -> None:
        last = level == self.depth
        kids = []
        for x in range(2 * level + 1, 0, -1):
            nd = self.node(tree.vector + (x,))
            if nd.state is not NodeState.UNVISITED:
                continue
            child = tree.child(x)
            self.stats.topologies_built += 1
            if self.bound_rejects(child):
                self.cut(nd)
                continue
            length = self.evaluate(nd, child, level)
            if nd.state is not NodeState.OPTIMIZED:
                continue
            if last:
                nd.explored = True
                self.offer_leaf(child, length)
            else:
                kids.append((length, x, nd, child))
        if last:
            return
        kids.sort(key=lambda item: (item[0], item[1]))
        for pos, (length, _, nd, child) in enumerate(kids):
            if nd.explored:
                continue
            if length > self.best_length:
                for _, _, other, _ in kids[pos:]:
                    if not other.explored:
                        other.state = NodeState.PRUNED
                        self.stats.nodes_cut += 1
                break
            self.explore_enhanced(nd, child, level + 1)
            nd.explored = True

    def evaluate(self, nd: BnbNode, tree: TopologyTree, level: int) -> float:
        """Optimize ``tree`` for node ``nd``, jumping on collisions."""
        detect = self.enhanced and level < self.depth
        self.count_optimization(level)
        nd.state = NodeState.OPTIMIZED
        nd.length = math.nan  # in progress, keeps jumps from re-entering
        suppressed: set[tuple[int, int]] = set()
        out = self.run_optimize(tree, detect)
        while out.kind is OutcomeKind.COLLISION:
            pair = out.collided_pair
            self.reorganize(nd, tree, pair, level)
            suppressed.add(pair)
            out = self.run_optimize(tree, detect, suppressed)
        nd.length = out.length
        if out.length > self.best_length:
            self.cut(nd)
            if self.opts.twin_prune:
                self.twin_prune(tree)
        return out.length

    def reorganize(self, nd: BnbNode, tree: TopologyTree, pair, level: int) -> None:
        i, h = pair
        candidates = []
        for vec in reorganizations(tree, i, h):
            self.stats.reorganizations_considered += 1
            target = self.node(vec)
            if target not in nd.reorg_links:
                nd.reorg_links.append(target)
            if target.state is not NodeState.UNVISITED:
                continue
            jt = build_tree(self.points, vec)
            self.stats.topologies_built += 1
            k = tree.steiner_count
            jt.pos[jt.n:jt.n + k] = tree.pos[tree.n:tree.n + k]
            # the interaction criterion is the lower bound, incumbent or not
            if self.opts.use_lower_bound:
                self.stats.lower_bounds_computed += 1
                key = lower_bound(jt)
                if key > self.best_length:
                    self.cut(target)
                    continue
            else:
                key = tree_length(jt)
            candidates.append((key, vec, target, jt))
        candidates.sort(key=lambda item: (item[0], item[1]))
        bounded = self.opts.use_lower_bound
        for key, _, target, jt in candidates:
            if target.state is not NodeState.UNVISITED:
                continue
            if bounded and key > self.best_length:
                # the incumbent improved while an earlier candidate was explored
                self.cut(target)
                continue
            self.stats.reorganizations_taken += 1
            self.evaluate(target, jt, level)
            if target.state is NodeState.OPTIMIZED:
                self.explore_enhanced(target, jt, level + 1)
                target.explored = True

    # -- twin trees (plane only) ---------------------------------------------
    def twin_prune(self, tree: TopologyTree) -> BnbNode | None:
        """Cut the crossing twin of a pruned topology, if there is one."""
        if tree.d != 2:
            return None
        eps_abs = self.opts.collision_eps * tree.diameter
        for i, h in collided_pairs(tree, eps_abs):
            vec = crossing_twin(tree, i, h)
            if vec is None:
                continue
            nd = self.node(vec)
            if nd.state is NodeState.UNVISITED:
                self.cut(nd)
                return nd
        return None


def crossing_twin(tree: TopologyTree, i: int, h: int) -> Vector | None:
    """Vector of the reorganization of (S_i, S_h) whose opposite segments cross.

    Returns None when the current neighbourhood already crosses or when
    neither exchange produces a crossing.
    """
    si, sh = tree.n + i, tree.n + h
    adj = tree.adjacency()
    a, b = sorted(adj[si] - {sh})
    c, d = sorted(adj[sh] - {si})
    pos = tree.pos
    if segments_intersect_2d(pos[a], pos[b], pos[c], pos[d]):
        return None
    for _, _, _, new in exchange_candidates(tree, i, h):
        a, b = sorted(new[si] - {sh})
        c, d = sorted(new[sh] - {si})
        if segments_intersect_2d(pos[a], pos[b], pos[c], pos[d]):
            return vector_of(new, tree.n, tree.points)
    return None


def twin_prune(node: BnbNode, tree: TopologyTree, opts: SolveOptions | None = None,
               registry: dict | None = None) -> BnbNode | None:
    """Stand-alone twin-tree cut for a node that was just pruned.

    ``registry`` (vector -> BnbNode) is updated in place when given.
    """
    opts = opts or SolveOptions()
    if node.state not in (NodeState.PRUNED, NodeState.CUT):
        raise ValueError("twin pruning applies to pruned nodes only")
    search = _Search.__new__(_Search)
    search.opts = opts
    search.stats = SearchStats()
    search.registry = registry if registry is not None else {}
    return search.twin_prune(tree)


def solve_original(points, opts: SolveOptions | None = None) -> tuple[Solution, SearchStats]:
    return _Search(points, opts or SolveOptions(), enhanced=False).solve()


def solve_enhanced(points, opts: SolveOptions | None = None) -> tuple[Solution, SearchStats]:
    return _Search(points, opts or SolveOptions(), enhanced=True).solve()


def enumerate_all(points, opts: SolveOptions | None = None,
                  count_only: bool = False) -> tuple[Solution | None, SearchStats]:
    """Visit every full topology; optimize each leaf unless ``count_only``."""
    opts = opts or SolveOptions()
    pts = _check_points(points)
    n = pts.shape[0]
    if n > opts.enumerate_cap:
        raise CapExceeded(f"N={n} exceeds enumeration cap {opts.enumerate_cap}")
    stats = SearchStats()
    t0 = time.perf_counter()
    plain = opts.optimize_options(detect=False)
    best: list = [math.inf, None]

    def walk(tree: TopologyTree) -> None:
        if tree.regular_count == n:
            stats.leaves_visited += 1
            if not count_only:
                stats.optimizations += 1
                length = optimize(tree, plain).length
                if length < best[0]:
                    best[0], best[1] = length, tree
            return
        for x in range(1, 2 * tree.level + 4):
            child = tree.child(x)
            stats.topologies_built += 1
            walk(child)

    root = root_tree(pts)
    stats.topologies_built += 1
    walk(root)
    stats.wall_time = time.perf_counter() - t0
    if count_only:
        assert stats.leaves_visited == count_full_topologies(n)
        return None, stats
    tree = best[1]
    sol = Solution(length=tree_length(tree), vector=tree.vector,
                   steiner_positions=tree.steiner_positions().copy(),
                   degenerate_pairs=degenerate_pairs(tree, opts.collision_eps * tree.diameter),
                   tree=tree)
    return sol, stats
