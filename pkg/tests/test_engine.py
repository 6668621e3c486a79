import math

import numpy as np
import pytest

from steiner_bnb.engine import (
    BnbNode,
    NodeState,
    SolveOptions,
    crossing_twin,
    enumerate_all,
    solve_enhanced,
    solve_original,
    twin_prune,
)
from steiner_bnb.errors import CapExceeded, TooFewPoints
from steiner_bnb.optimizer import optimize, tree_length
from steiner_bnb.topology import build_tree, count_full_topologies, root_tree

# a flattened cross: the pairing {A,B}{C,D} crosses, {A,C}{B,D} collapses onto it
FLAT_CROSS = np.array([[-1, 0.3], [1, -0.3], [1, 0.3], [-1, -0.3]])


def random_points(seed, n, d):
    return np.random.default_rng(seed).uniform(-1, 1, (n, d))


def test_three_points_is_fermat_star():
    pts = np.array([[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]])
    for solve in (solve_original, solve_enhanced):
        sol, stats = solve(pts)
        assert sol.length == pytest.approx(math.sqrt(3), rel=1e-12)
        assert stats.topologies_built == 1
        assert sol.vector == ()


def test_too_few_points():
    with pytest.raises(TooFewPoints):
        solve_original(np.zeros((2, 2)))


def test_square_all_agree(square):
    expected = 2 * (1 + math.sqrt(3))
    a, _ = solve_original(square)
    b, _ = solve_enhanced(square)
    c, stats = enumerate_all(square)
    assert stats.leaves_visited == 3
    for sol in (a, b, c):
        assert sol.length == pytest.approx(expected, rel=1e-9)
        assert sol.length == pytest.approx(tree_length(sol.tree), abs=1e-12)


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_enumerate_count_only(n):
    _, stats = enumerate_all(random_points(n, n, 2), count_only=True)
    assert stats.leaves_visited == count_full_topologies(n)


def test_enumerate_cap():
    with pytest.raises(CapExceeded):
        enumerate_all(random_points(0, 9, 2), count_only=True)


@pytest.mark.parametrize("n", [6, 7, 8])
def test_original_first_leaf_after_square_steps(n):
    _, stats = solve_original(random_points(100 + n, n, 2))
    assert stats.steps_to_first_leaf == (n - 3) ** 2


@pytest.mark.parametrize("seed", range(8))
def test_schemes_agree_and_match_enumeration(seed):
    n = 5 + seed % 3
    d = 2 + seed % 2
    pts = random_points(seed, n, d)
    a, sa = solve_original(pts)
    b, sb = solve_enhanced(pts)
    c, _ = enumerate_all(pts)
    assert b.length == pytest.approx(a.length, rel=1e-6)
    assert c.length == pytest.approx(a.length, rel=1e-6)
    # pruning never costs more optimizations than exhaustive search
    assert sb.optimizations <= count_full_topologies(n) * n


def test_permutation_invariance():
    pts = random_points(11, 7, 3)
    base, _ = solve_enhanced(pts)
    for seed in range(3):
        perm = np.random.default_rng(seed).permutation(len(pts))
        sol, _ = solve_enhanced(pts[perm])
        assert sol.length == pytest.approx(base.length, rel=1e-9)


def test_child_never_shorter_than_parent():
    pts = random_points(3, 7, 3)
    rng = np.random.default_rng(0)
    for _ in range(20):
        t = root_tree(pts)
        prev = optimize(t).length
        while t.regular_count < len(pts):
            t = t.child(int(rng.integers(1, 2 * t.level + 4)))
            cur = optimize(t).length
            assert cur >= prev - 1e-9
            prev = cur


def test_enhanced_optimizes_each_topology_once(monkeypatch):
    from steiner_bnb import engine

    seen = []
    real = engine._Search.evaluate

    def spy(self, nd, tree, level):
        seen.append(nd.vector)
        return real(self, nd, tree, level)

    monkeypatch.setattr(engine._Search, "evaluate", spy)
    _, stats = solve_enhanced(random_points(5, 8, 2))
    assert stats.reorganizations_taken > 0
    assert len(seen) == len(set(seen)) == stats.optimizations - 1  # root not via evaluate


def test_enhanced_jumps_reach_first_leaf_sooner():
    hits = 0
    for seed in range(6):
        pts = random_points(40 + seed, 8, 2)
        _, se = solve_enhanced(pts)
        if se.reorganizations_taken and se.steps_to_first_leaf < (8 - 3) ** 2:
            hits += 1
            break
    assert hits == 1


def test_error_figure_prune_is_diagnostic_only():
    assert SolveOptions().error_figure_prune is False


# -- twin trees ---------------------------------------------------------------

def test_crossing_pairing_collapses_to_diagonals():
    t = build_tree(FLAT_CROSS, (3,))
    out = optimize(t)
    a, b, c, d = FLAT_CROSS
    assert out.length == pytest.approx(np.linalg.norm(a - b) + np.linalg.norm(c - d), rel=1e-9)
    s0, s1 = t.steiner_positions()
    assert np.linalg.norm(s0 - s1) < 1e-4 * t.diameter


def test_twin_of_collapsed_pairing_is_the_crossing_one():
    t = build_tree(FLAT_CROSS, (2,))
    optimize(t)
    assert crossing_twin(t, 1, 0) == (3,)
    node = BnbNode((2,), length=tree_length(t), state=NodeState.PRUNED)
    registry = {}
    twin = twin_prune(node, t, SolveOptions(), registry)
    assert twin is not None and twin.vector == (3,) and twin.state is NodeState.CUT
    assert registry[(3,)] is twin


def test_no_twin_when_pairing_does_not_collapse(square):
    # square: the non-crossing pairings keep their Steiner points apart
    for vec in ((1,), (3,)):
        t = build_tree(square, vec)
        optimize(t)
        node = BnbNode(vec, state=NodeState.PRUNED)
        assert twin_prune(node, t) is None


def test_no_twin_in_3d():
    pts = np.c_[FLAT_CROSS, np.zeros(4)]
    t = build_tree(pts, (2,))
    optimize(t)
    assert twin_prune(BnbNode((2,), state=NodeState.PRUNED), t) is None


def test_twin_prune_saves_an_optimization_in_search():
    opts = SolveOptions(use_lower_bound=False)
    a, sa = solve_original(FLAT_CROSS, opts)
    opts.twin_prune = True
    b, sb = solve_original(FLAT_CROSS, opts)
    assert a.length == pytest.approx(b.length, rel=1e-12)
    assert sb.optimizations == sa.optimizations - 1
