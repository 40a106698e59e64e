import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freezetag.freeze3d import (
    L1_BOUND,
    L2_BOUND,
    DyadicRegion,
    Frame,
    MatchingPolicy,
    SimConfig,
    TieBreak,
    assert_bounds,
    check_path_bounds,
    depth_diameter,
    hemisphere_split,
    project,
    simulate,
    split_region,
)
from freezetag.geometry import InputError, Instance, Norm, generate_instance, validate_tree
import reference as ref


def _inst(zs, norm="l2"):
    return Instance(3, norm, [[0.0, 0.0, z] for z in zs])


def test_hemisphere_sign_split():
    up, low, refl = hemisphere_split(_inst([0.5, 0.2, -0.1]))
    assert (up, low, refl) == ([1, 2], [3], False)


def test_hemisphere_plane_robots_go_up():
    up, low, refl = hemisphere_split(_inst([0.0, 0.0, 0.0]))
    assert up == [1, 2, 3] and low == [] and not refl


def test_hemisphere_reflects_majority_below():
    up, low, refl = hemisphere_split(_inst([-0.5, -0.2, 0.1]))
    assert refl and up == [1, 2] and low == [3]


def test_hemisphere_needs_3d():
    with pytest.raises(InputError):
        hemisphere_split(Instance(2, "l2", [[0.1, 0.1]]))


def test_first_split_l1_diameter():
    a, b = split_region(DyadicRegion.root(Frame.ROTATED))
    assert a.diameter() == b.diameter() == 2.0 == 2 ** ((3 - 1) / 2)
    assert a.u_interval == (-1.0, 0.0) and b.u_interval == (0.0, 1.0)


def test_depth_two_l1_diameter():
    a, _ = split_region(DyadicRegion.root(Frame.ROTATED))
    c, _ = split_region(a)
    assert c.depth == 2 and c.diameter() == 1.0 == 2 ** ((2 - 2) / 2)


def test_first_split_l2_rectangle():
    a, _ = split_region(DyadicRegion.root(Frame.AXIS))
    assert (a.u_width, a.v_width) == (1.0, 2.0)
    assert a.diameter() == pytest.approx(math.sqrt(5), abs=1e-15)
    assert a.diameter() <= 2 ** ((3 - 1) / 2) * math.sqrt(2)


def _descend(frame, depth, rng):
    r = DyadicRegion.root(frame)
    for _ in range(depth):
        r = split_region(r)[int(rng.integers(0, 2))]
    return r


@pytest.mark.parametrize("depth", range(1, 14))
def test_region_diameter_schedule(depth):
    rng = np.random.default_rng(depth)
    rot = _descend(Frame.ROTATED, depth, rng)
    exact = 2 ** ((3 - depth) / 2) if depth % 2 else 2 ** ((2 - depth) / 2)
    assert rot.diameter() == exact == depth_diameter(depth, Frame.ROTATED)
    ax = _descend(Frame.AXIS, depth, rng)
    envelope = 2 ** ((3 - depth) / 2) * math.sqrt(2) if depth % 2 else 2 ** ((2 - depth) / 2) * math.sqrt(5)
    assert ax.diameter() == pytest.approx(depth_diameter(depth, Frame.AXIS), abs=1e-15)
    assert ax.diameter() <= envelope + 1e-15


def test_split_alternates_axes():
    r = DyadicRegion.root(Frame.AXIS)
    a = split_region(r)[0]
    b = split_region(a)[0]
    assert a.v_width == 2.0 and a.u_width == 1.0
    assert b.v_width == 1.0 and b.u_width == 1.0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10), st.integers(0, 2**32 - 1), st.sampled_from(list(Frame)))
def test_partition_soundness(depth, seed, frame):
    rng = np.random.default_rng(seed)
    parent = _descend(frame, depth, rng)
    (ul, uh), (vl, vh) = parent.u_interval, parent.v_interval
    pts = np.column_stack([rng.uniform(ul, uh, 200), rng.uniform(vl, vh, 200)])
    # boundary points, including the closed top edges
    pts = np.vstack([pts, [[ul, vl], [uh, vh], [0.5 * (ul + uh), vl], [ul, 0.5 * (vl + vh)]]])
    a, b = split_region(parent)
    assert a.depth == b.depth == parent.depth + 1
    for u, v in pts:
        if parent.contains(u, v):
            assert a.contains(u, v) + b.contains(u, v) == 1
        else:
            assert not a.contains(u, v) and not b.contains(u, v)


def test_rotated_frame_identity():
    rng = np.random.default_rng(9)
    p, q = rng.uniform(-1, 1, (10**5, 2)), rng.uniform(-1, 1, (10**5, 2))
    pu, pv = project(p[:, 0], p[:, 1], Frame.ROTATED)
    qu, qv = project(q[:, 0], q[:, 1], Frame.ROTATED)
    l1 = np.abs(p - q).sum(axis=1)
    assert np.max(np.abs(l1 - np.maximum(np.abs(pu - qu), np.abs(pv - qv)))) <= 1e-12


def test_single_robot_on_pole():
    inst = Instance(3, "l2", [[0, 0, 1]])
    res = simulate(inst)
    assert res.makespan == 1.0
    assert res.ok


def test_simulate_rejects_empty_and_2d():
    with pytest.raises(InputError):
        simulate(Instance(3, "l1", []))
    with pytest.raises(InputError):
        simulate(Instance(2, "l1", [[0.1, 0.1]]))


@pytest.mark.parametrize("norm,bound", [("l1", L1_BOUND), ("l2", L2_BOUND)])
def test_thousand_robot_instances(norm, bound):
    for seed in range(5):
        res = simulate(generate_instance(3, norm, 1000, seed))
        assert res.makespan <= bound
        assert_bounds(res)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 60), st.integers(0, 2**31), st.sampled_from(["l1", "l2"]), st.sampled_from(list(MatchingPolicy)))
def test_random_instances_respect_every_bound(n, seed, norm, policy):
    inst = generate_instance(3, norm, n, seed)
    res = simulate(inst, SimConfig(norm, policy))
    assert res.ok, res.failures()
    assert validate_tree(inst, res.tree) == pytest.approx(res.makespan, abs=1e-9)
    assert res.makespan == max(node.wake_time for node in res.tree.nodes)


def test_tree_covers_every_robot_once():
    inst = generate_instance(3, "l1", 300, 4)
    res = simulate(inst)
    ids = sorted(n.robot_id for n in res.tree.nodes)
    assert ids == list(range(1, 301))


def test_each_participant_serves_at_most_one_lower_robot():
    inst = generate_instance(3, "l2", 500, 8)
    for policy in MatchingPolicy:
        res = simulate(inst, SimConfig("l2", policy))
        lower = set(res.lower)
        wakers = [n.waker_id for n in res.tree.nodes if n.robot_id in lower]
        assert len(wakers) == len(set(wakers)) == len(lower)


def test_upper_paths_are_z_monotone():
    res = simulate(generate_instance(3, "l1", 400, 2))
    for rec in res.path_records[:50]:
        assert all(b >= a for a, b in zip(rec.z, rec.z[1:]))
        assert len(rec.steps) == len(rec.z) - 1 == len(rec.planar)


def test_reflected_instance_validates_against_original():
    pts = np.array([[0.1, 0.2, -0.5], [0.3, -0.1, -0.2], [0.0, 0.4, 0.3]])
    inst = Instance(3, "l2", pts)
    res = simulate(inst)
    assert res.reflected
    assert validate_tree(inst, res.tree) == pytest.approx(res.makespan, abs=1e-12)


def test_tie_break_policies_both_valid():
    pts = [[0.5, 0.0, 0.2], [-0.5, 0.0, 0.2], [0.0, 0.5, 0.2], [0.0, -0.5, 0.2]]
    inst = Instance(3, "l1", pts)
    for tie in TieBreak:
        res = simulate(inst, SimConfig("l1", tie_break=tie))
        assert validate_tree(inst, res.tree) == pytest.approx(res.makespan)


def test_duplicate_points():
    inst = Instance(3, "l2", [[0.2, 0.2, 0.2]] * 40)
    res = simulate(inst)
    assert res.ok
    assert res.makespan == pytest.approx(math.sqrt(0.12))


def test_bound_check_constants():
    from freezetag.freeze3d import L2_PAIR_BOUND, L2_TAIL_BOUND, L2_TOTAL

    assert L2_PAIR_BOUND == pytest.approx(ref.FOUR_SIN_3PI_8, abs=1e-15)
    assert L2_TAIL_BOUND == pytest.approx(ref.TWO_SQRT2_PLUS_SQRT5, abs=1e-15)
    assert L2_TOTAL == pytest.approx(ref.L2_TOTAL, abs=1e-14)
    assert L2_TOTAL <= L2_BOUND


def test_check_reports_pair_bound_as_soft():
    res = simulate(generate_instance(3, "l2", 200, 1))
    checks = {c.name: c for c in check_path_bounds(res, Norm.L2)}
    assert not checks["pair_steps"].hard
    assert checks["tail_planar_total"].hard and checks["final_edge"].hard
