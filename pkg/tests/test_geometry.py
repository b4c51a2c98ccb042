import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qrnorms.geometry import (
    alpha,
    ball,
    ball_size,
    check_isometric_lifting,
    cluster_support,
    diameter,
    distances,
)
from qrnorms.quotients import sl2_quotient
from qrnorms.words import Word, ball_words, parse_word

from conftest import cycle_quotient, random_quotient


def brute_alpha(q, max_len):
    """Shortest nontrivial reduced word fixing the basepoint, by enumeration."""
    for w in ball_words(max_len, q.rank):
        if len(w) and q.evaluate(w) == q.basepoint:
            return len(w)
    return None


def test_distances_trivial(ag2):
    assert distances(ag2[0], 0).dist.tolist() == [0]


def test_distances_level_one(ag2):
    assert distances(ag2[1], 0).dist.tolist() == [0, 1, 1, 2]


def test_balls(ag2):
    q = ag2[1]
    assert ball(q, 0, 0).tolist() == [0]
    assert ball(q, 0, 1).size == 3
    assert ball(q, 0, diameter(q)).size == q.size
    with pytest.raises(ValueError):
        ball(q, 0, -1)


@pytest.mark.parametrize("level, value", [(0, 1), (1, 2), (2, 4)])
def test_alpha_ag(ag2, level, value):
    r = alpha(ag2[level])
    assert r.value == value == brute_alpha(ag2[level], value)
    assert r.acts_trivially
    assert len(r.witness) == value and ag2[level].evaluate(r.witness) == 0


def test_alpha_witness_level_one(ag2):
    assert alpha(ag2[1]).witness == parse_word("aa")


@pytest.mark.parametrize("m, value", [(3, 3), (5, 5), (7, 6), (11, 9), (13, 10)])
def test_alpha_sl2(m, value):
    q = sl2_quotient(m)
    assert alpha(q).value == value
    if value <= 6:
        assert brute_alpha(q, value) == value


def test_alpha_cap():
    q = cycle_quotient(50)
    assert alpha(q, cap=10).value == 1  # b fixes everything
    r = alpha(cycle_quotient(3), cap=64)
    assert r.value == 1


def test_ball_size():
    for R in range(6):
        assert ball_size(R) == sum(1 for _ in ball_words(R))


def test_lifting_radius_zero(ag2):
    assert check_isometric_lifting(ag2[1], 0).passed


def test_lifting_fails_at_level_one_radius_one(ag2):
    rep = check_isometric_lifting(ag2[1], 1)
    assert not rep.passed and rep.reason == "not injective"
    assert set(rep.counterexample) == {parse_word("a"), parse_word("A")}


@pytest.mark.parametrize("m", [7, 11, 13])
def test_lifting_below_quarter_alpha(m):
    q = sl2_quotient(m)
    a = alpha(q).value
    for R in range(0, 8):
        if R < a / 4:
            assert check_isometric_lifting(q, R).passed


def test_lifting_uses_word_length_of_v_u_inverse():
    q = sl2_quotient(13)  # alpha = 10, so R = 2 is an isometry
    u, v = parse_word("ab"), parse_word("Ba")
    d = distances(q, q.evaluate(u)).dist[q.evaluate(v)]
    assert d == len(v * u.inverse()) == 4


def test_cluster_examples():
    c8 = cycle_quotient(8)
    assert cluster_support(c8, [0, 1, 4, 5], 2) == [[0, 1], [4, 5]]
    assert cluster_support(c8, [0, 2, 4, 6], 2) == [[0], [2], [4], [6]]
    assert cluster_support(c8, range(8), diameter(c8) + 1) == [list(range(8))]


def test_cluster_errors():
    with pytest.raises(ValueError):
        cluster_support(cycle_quotient(4), [], 2)
    with pytest.raises(ValueError):
        cluster_support(cycle_quotient(4), [0], 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_cluster_parts_are_separated(seed, threshold):
    rng = np.random.default_rng(seed)
    q = random_quotient(rng, 20)
    pts = rng.choice(20, size=7, replace=False)
    parts = cluster_support(q, pts, threshold)
    assert sorted(x for p in parts for x in p) == sorted(pts.tolist())
    for i, p in enumerate(parts):
        for r in parts[i + 1:]:
            for x in p:
                assert distances(q, x).dist[r].min() >= threshold


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_distance_is_a_metric(seed):
    q = random_quotient(np.random.default_rng(seed), 12)
    D = np.array([distances(q, x).dist for x in range(12)])
    assert np.array_equal(D, D.T)
    assert np.all(np.diag(D) == 0)
    assert np.all(D[:, :, None] <= D[:, None, :] + D.T[None, :, :])
