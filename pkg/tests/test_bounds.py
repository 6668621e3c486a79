import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import tree_oracle
from steiner_bnb.bounds import contract, contraction_bound, lower_bound
from steiner_bnb.optimizer import optimize
from steiner_bnb.topology import build_tree, root_tree
from test_optimizer import random_trees


def test_triangle_bound_is_exact():
    pts = np.array([[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]])
    assert lower_bound(root_tree(pts)) == pytest.approx(math.sqrt(3), rel=1e-12)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_three_points_exact_in_any_dimension(d):
    rng = np.random.default_rng(d)
    for _ in range(20):
        t = root_tree(rng.uniform(-1, 1, (3, d)))
        lb = lower_bound(t)
        length = optimize(t).length
        s = t.pos[3]
        if np.min(np.linalg.norm(t.points - s, axis=1)) > 1e-9:
            # full Steiner star: the bound is the Simpson line, which is exact
            assert lb == pytest.approx(length, rel=1e-9)
        else:
            assert lb <= length + 1e-12


def test_square_bound_below_optimum(square):
    for vec in ((1,), (2,), (3,)):
        t = build_tree(square, vec)
        lb = lower_bound(t)
        assert 0 <= lb <= optimize(t).length + 1e-9


def test_collinear_cherry_gives_zero():
    # cherry {0, 1} on S_0 whose third neighbour S_1 starts on the line y = 0
    pts = np.array([[0.0, 0], [1, 0], [5, 3], [2, -3]])
    t = build_tree(pts, (3,))
    s = t.n + 1
    t.pos[s] = [3.0, 0.0]
    assert lower_bound(t) == 0.0


def test_degenerate_root_gives_zero():
    pts = np.array([[0.0, 0], [1, 0], [2, 0]])
    assert lower_bound(root_tree(pts)) == 0.0


@settings(max_examples=40)
@given(random_trees(max_n=7))
def test_python_replay_agrees(tree):
    st_ = contract(tree)
    assert contraction_bound(st_) == pytest.approx(lower_bound(tree), rel=1e-12, abs=1e-15)


@settings(max_examples=40)
@given(random_trees(max_n=7))
def test_bound_below_conic_optimum(tree):
    assert lower_bound(tree) <= tree_oracle(tree) + 1e-7


# two collided Steiner points make a cherry nearly collinear with its
# reference; found by the acceptance sweep, optimum frozen from the conic oracle
NEAR_COLLINEAR = np.array([[0.50435675, -0.58082985], [0.70838914, 0.41507011],
                           [0.1014487, 0.95681424], [0.78909802, 0.33002171],
                           [0.8852033, -0.32015109]])


def test_bound_sound_with_nearly_collinear_cherry():
    t = build_tree(NEAR_COLLINEAR, (2, 3))
    out = optimize(t)
    assert out.length == pytest.approx(2.569860228, abs=1e-8)
    assert lower_bound(t) <= out.length


# reference Steiner point on the cherry's line to 1e-16: the cancelling
# closed-form D (~6e-8) used to hide the degeneracy
ON_LINE = np.array([[-0.53980164, 0.67909963], [-0.69748753, 0.35494022],
                    [0.88627806, 0.99216177], [0.90816489, 0.4953643],
                    [-0.30976543, -0.55379149], [-0.69699226, -0.77515205],
                    [-0.84984642, 0.54058716]])


def test_bound_sound_with_reference_on_cherry_line():
    t = build_tree(ON_LINE, (1, 3, 3, 1))
    out = optimize(t)
    assert out.length == pytest.approx(5.478457188, abs=1e-8)
    assert lower_bound(t) <= out.length
