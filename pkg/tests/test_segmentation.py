"""Path segmentation: marching rules, the four properties, fuzzing."""

import math

import numpy as np
import pytest

from andertree.segmentation import (
    MIN_L0,
    PreconditionError,
    SegmentationResult,
    _march,
    random_instance,
    segment_path,
    verify_segmentation,
)
from andertree.tree import TreeParams, build_ball, junction_distance, leftmost_ray, path


@pytest.fixture(scope="module")
def ball():
    # gamma = 2.2 puts junction shells at 0, 2, 6, 16, 39 and the next at 90,
    # so depths 40..80 are one junction-free stretch
    return build_ball(TreeParams(2, 2.2, 80))


def test_march_junction_free_path():
    # every step takes the L0 branch until at most 7*L0 remains
    assert _march(20, [], 2) == [(0, 2), (5, 7), (10, 20)]


def test_march_through_one_junction():
    # second step sees the junction 4 ahead (< 3*L0) and takes 5*L0
    assert _march(30, [9], 2) == [(0, 2), (5, 15), (18, 30)]


def test_march_validation():
    with pytest.raises(ValueError, match="L0 must be >= 1"):
        _march(20, [], 0)
    with pytest.raises(ValueError, match="must exceed 7"):
        _march(14, [], 2)


def test_march_always_terminates_with_bounded_steps():
    for d in (36, 57, 100, 400):
        for joff in ([], [17], [20, 70]):
            pairs = _march(d, joff, 5)
            assert pairs[-1][1] == d
            for (a, _), (a2, _) in zip(pairs, pairs[1:]):
                assert 0 < a2 - a <= 5 * 5 + 3
            # count bounds from both sides
            assert len(pairs) <= d / (5 + 3) + 1
            assert len(pairs) * (5 * 5 + 3) >= d


def test_segment_path_junction_free(ball):
    ray = leftmost_ray(ball, 0, 80)
    x1, v = int(ray[41]), int(ray[78])
    res = segment_path(ball, x1, v, 5)
    assert res.offsets == ((0, 5), (8, 37))
    assert res.pairs[0][0] == x1 and res.pairs[-1][1] == v
    assert res.l == 2
    report = verify_segmentation(ball, res, v)
    assert report.passed
    # property 2 is vacuous here but must still be reported as a pass
    margin = next(c for c in report.checks if c.name == "junction_margin")
    assert margin.passed and margin.witnesses == ()


def test_segment_path_through_junction(ball):
    ray = leftmost_ray(ball, 0, 80)
    x1, v = int(ray[24]), int(ray[60])  # junction at depth 39 = offset 15
    res = segment_path(ball, x1, v, 5)
    assert res.offsets == ((0, 5), (8, 36))
    report = verify_segmentation(ball, res, v)
    assert report.passed, report.lines()
    assert {c.name for c in report.checks} == {
        "start_clearance", "junction_margin", "piece_length", "piece_count",
    }


def test_segment_path_around_lca(ball):
    # endpoints on sibling branches below the junction at depth 39
    ray = leftmost_ray(ball, 0, 80)
    junction = int(ray[39])
    sibling = int(ball.children(junction)[1])
    leg = leftmost_ray(ball, sibling, 15)
    x1, v = int(ray[59]), int(leg[15])
    assert path(ball, x1, v).distance == 36
    res = segment_path(ball, x1, v, 5)
    assert verify_segmentation(ball, res, v).passed


def test_spec_examples_pass_verification(ball):
    """Replay the two small marches on real geometry and verify them.

    verify_segmentation deliberately carries no L0 floor, so the L0 = 2
    marches can be checked on actual ball paths.
    """
    ray = leftmost_ray(ball, 0, 80)

    def result_at(x1_depth, d, L0):
        ids = path(ball, int(ray[x1_depth]), int(ray[x1_depth + d])).ids
        joff = [int(i) for i in np.nonzero(ball.is_junction[ids])[0]]
        offsets = _march(d, joff, L0)
        return SegmentationResult(
            source=int(ids[0]), target=int(ids[-1]), L0=L0,
            pairs=tuple((int(ids[a]), int(ids[b])) for a, b in offsets),
            offsets=tuple(offsets),
        )

    # junction-free: depths 41..61
    res = result_at(41, 20, 2)
    assert res.offsets == ((0, 2), (5, 7), (10, 20))
    assert verify_segmentation(ball, res, res.target).passed
    # junction at offset 9: depths 30..60 cross the junction shell at 39
    res = result_at(30, 30, 2)
    assert res.offsets == ((0, 2), (5, 15), (18, 30))
    assert verify_segmentation(ball, res, res.target).passed


def test_corrupted_pair_fails_property_two(ball):
    ray = leftmost_ray(ball, 0, 80)
    ids = path(ball, int(ray[30]), int(ray[60])).ids
    offsets = ((0, 2), (5, 10), (13, 30))  # v_2 moved to 1 past the junction at 9
    res = SegmentationResult(
        source=int(ids[0]), target=int(ids[-1]), L0=2,
        pairs=tuple((int(ids[a]), int(ids[b])) for a, b in offsets),
        offsets=offsets,
    )
    report = verify_segmentation(ball, res, res.target)
    assert not report.passed
    failed = [c for c in report.checks if not c.passed]
    assert [c.name for c in failed] == ["junction_margin"]
    assert str(res.pairs[1][1]) in failed[0].witnesses[0]
    assert any("FAIL" in line for line in report.lines())


def test_verify_rejects_malformed_results(ball):
    ray = leftmost_ray(ball, 0, 80)
    x1, v = int(ray[41]), int(ray[78])
    res = segment_path(ball, x1, v, 5)
    with pytest.raises(ValueError, match="not at v"):
        verify_segmentation(ball, res, int(ray[77]))
    off_path = SegmentationResult(
        source=x1, target=v, L0=5,
        pairs=((x1, int(ball.children(int(ray[39]))[1])), (res.pairs[-1][0], v)),
        offsets=res.offsets,
    )
    with pytest.raises(ValueError, match="does not lie on the path"):
        verify_segmentation(ball, off_path, v)
    with pytest.raises(ValueError, match="empty"):
        verify_segmentation(ball, SegmentationResult(x1, v, 5, (), ()), v)


def test_precondition_short_path(ball):
    ray = leftmost_ray(ball, 0, 80)
    with pytest.raises(PreconditionError) as exc:
        segment_path(ball, int(ray[41]), int(ray[70]), 5)
    assert exc.value.condition == "path_length"
    assert exc.value.value == 29


def test_precondition_junction_clearance(ball):
    ray = leftmost_ray(ball, 0, 80)
    with pytest.raises(PreconditionError) as exc:
        segment_path(ball, int(ray[38]), int(ray[76]), 5)  # junction 1 step ahead
    assert exc.value.condition == "junction_clearance"
    assert exc.value.value == 1


def test_precondition_junction_gap(ball):
    # depths 10 -> 60 cross the junctions at 16 and 39, only 23 apart
    ray = leftmost_ray(ball, 0, 80)
    with pytest.raises(PreconditionError) as exc:
        segment_path(ball, int(ray[10]), int(ray[60]), 5)
    assert exc.value.condition == "junction_gap"
    assert exc.value.value == 23


def test_minimum_l0_enforced(ball):
    ray = leftmost_ray(ball, 0, 80)
    with pytest.raises(PreconditionError) as exc:
        segment_path(ball, int(ray[41]), int(ray[78]), 2)
    assert exc.value.condition == "L0"
    assert MIN_L0 == 5


def test_random_instances_satisfy_preconditions():
    rng = np.random.default_rng(31)
    for _ in range(25):
        ball, x1, v, L0 = random_instance(rng)
        ids = path(ball, x1, v).ids
        d = len(ids) - 1
        assert d > 7 * L0
        joff = [int(i) for i in np.nonzero(ball.is_junction[ids])[0]]
        # sampled geometries live in the provable regime: first junction at
        # least 3*L0 past x1, every junction at least L0 short of v
        assert junction_distance(ball, x1, v) >= 3 * L0
        for j in joff:
            assert d - j >= L0
        for a, b in zip(joff, joff[1:]):
            assert b - a > 8 * L0


def test_fuzz_all_properties_hold():
    rng = np.random.default_rng(202)
    seen_l = set()
    for _ in range(300):
        ball, x1, v, L0 = random_instance(rng)
        res = segment_path(ball, x1, v, L0)
        report = verify_segmentation(ball, res, v)
        assert report.passed, (x1, v, L0, report.lines())
        d = path(ball, x1, v).distance
        assert res.l <= d / (L0 + 3) + 1  # upper count bound
        seen_l.add(res.l)
    assert max(seen_l) >= 3  # the sampler is not stuck on trivial marches
