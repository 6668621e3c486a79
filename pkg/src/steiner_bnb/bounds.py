"""Lower bound on the length of a tree with a fixed topology.

A cherry (two leaves on one Steiner point) and its Steiner point are
replaced by the equilateral point of the two leaves, which then hangs off
the Steiner point's third neighbour. By Ptolemy's inequality the two cherry
edges are at least as long as the segment from the equilateral point to the
Steiner point, so repeating until two points remain leaves a segment no
longer than the optimal tree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .geometry import _dist, _equilateral
from .topology import TopologyTree


@dataclass
class ContractionState:
    """Working tree of a contraction, for inspection and tests."""
    nbr: np.ndarray
    pos: np.ndarray
    n: int
    leaf: np.ndarray
    alive: np.ndarray
    log: list = field(default_factory=list)

    @classmethod
    def from_tree(cls, tree: TopologyTree) -> "ContractionState":
        k = tree.steiner_count
        leaf = np.zeros(tree.n + k, dtype=bool)
        leaf[:tree.n] = True
        return cls(nbr=tree.nbr[:k].copy(), pos=tree.pos[:tree.n + k].copy(), n=tree.n,
                   leaf=leaf, alive=np.ones(k, dtype=bool))

    @property
    def remaining(self) -> int:
        return int(self.alive.sum())


@njit(cache=True)
def _find_cherry(nbr, leaf, alive, n):
    for i in range(nbr.shape[0]):
        if not alive[i]:
            continue
        cnt = 0
        for j in range(3):
            if leaf[nbr[i, j]]:
                cnt += 1
        if cnt >= 2:
            return i
    return -1


@njit(cache=True)
def _cherry_slots(nbr, leaf, i):
    """Slots of the two cherry leaves and of the third neighbour of S_i."""
    a = -1
    b = -1
    c = -1
    for j in range(3):
        if leaf[nbr[i, j]] and a == -1:
            a = j
        elif leaf[nbr[i, j]] and b == -1:
            b = j
        else:
            c = j
    return a, b, c


@njit(cache=True)
def _lower_bound(nbr, pos, n, k):
    wpos = pos.copy()
    leaf = np.zeros(n + k, dtype=np.bool_)
    leaf[:n] = True
    alive = np.ones(k, dtype=np.bool_)
    e = np.empty(pos.shape[1])
    for _ in range(k):
        i = _find_cherry(nbr, leaf, alive, n)
        if i < 0:
            return -1.0
        a, b, c = _cherry_slots(nbr, leaf, i)
        x1 = nbr[i, a]
        x2 = nbr[i, b]
        w = nbr[i, c]
        _, _, _, ok = _equilateral(wpos[x1], wpos[x2], wpos[w], e)
        if not ok:
            return 0.0
        alive[i] = False
        if leaf[w]:
            # last Steiner point: the two remaining points are e and w
            return _dist(e, wpos[w])
        wpos[n + i, :] = e
        leaf[n + i] = True
    return -1.0


def find_cherry(state: ContractionState) -> int:
    """Smallest-ordinal live Steiner point with at least two leaf neighbours."""
    i = int(_find_cherry(state.nbr, state.leaf, state.alive, state.n))
    if i < 0:
        raise AssertionError("full topology without a cherry")
    return i


def lower_bound(tree: TopologyTree) -> float:
    """Length lower bound for ``tree``'s topology; 0 if a cherry is degenerate."""
    k = tree.steiner_count
    value = float(_lower_bound(tree.nbr[:k], tree.pos[:tree.n + k], tree.n, k))
    if value < 0:
        raise AssertionError("contraction did not terminate on two points")
    return value


def contract(tree: TopologyTree) -> ContractionState:
    """Plain-Python replay of the contraction that records each step.

    Mirrors the compiled kernel step by step; kept separate so the two can
    be checked against each other. ``log`` holds (ordinal, (x1, x2), e).
    """
    from .geometry import equilateral_point
    from .errors import DegenerateCherry

    st = ContractionState.from_tree(tree)
    wpos = st.pos
    while st.remaining:
        i = find_cherry(st)
        slots = [j for j in range(3) if st.leaf[st.nbr[i, j]]][:2]
        third = next(j for j in range(3) if j not in slots)
        x1, x2 = (int(st.nbr[i, j]) for j in slots)
        w = int(st.nbr[i, third])
        try:
            e = equilateral_point(wpos[x1], wpos[x2], wpos[w]).e
        except DegenerateCherry:
            st.log.append((i, (x1, x2), None))
            return st
        st.alive[i] = False
        st.log.append((i, (x1, x2), e))
        if st.leaf[w]:
            st.log.append((-1, (w, -1), wpos[w].copy()))
            return st
        wpos[st.n + i] = e
        st.leaf[st.n + i] = True
    return st


def contraction_bound(state: ContractionState) -> float:
    """Distance between the two points a finished contraction ends on."""
    last = state.log[-1]
    if last[2] is None:
        return 0.0
    if last[0] != -1:
        raise ValueError("contraction not finished")
    e = state.log[-2][2]
    return float(math.dist(e, last[2]))
