import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freezetag.geometry import (
    InputError,
    Instance,
    Norm,
    WakeTree,
    chord,
    distance,
    generate_instance,
    read_instance,
    read_instances,
    scalar_chord,
    validate_tree,
    write_instance,
    write_instances,
)
from reference import CROSS_OPTIMUM


def test_distance_examples():
    assert distance((1, 0, 0), (0, 1, 0), Norm.L1) == 2.0
    assert distance((1, 0), (-1, 0), Norm.L2) == 2.0
    assert distance((0.3, 0.4), (0, 0), Norm.L2) == pytest.approx(0.5, abs=1e-15)


def test_distance_dimension_mismatch():
    with pytest.raises(InputError):
        distance((1, 0), (1, 0, 0), Norm.L2)


def test_chord_examples():
    assert chord(1.0, 1.0, math.pi) == pytest.approx(2.0, abs=1e-15)
    assert chord(1.0, 1.0, math.pi / 2) == pytest.approx(math.sqrt(2), abs=1e-15)
    assert chord(0.5, 0.5, 0.0) == 0.0
    assert scalar_chord(0.5, 0.5, 0.0) == 0.0


@given(
    st.floats(0, 1), st.floats(0, 1), st.floats(-7, 7),
)
def test_chord_matches_cartesian_distance(ra, rb, dt):
    a = (ra, 0.0)
    b = (rb * math.cos(dt), rb * math.sin(dt))
    assert scalar_chord(ra, rb, dt) == pytest.approx(distance(a, b, Norm.L2), abs=1e-7)


def test_norm_parse_rejects_unknown():
    assert Norm.parse("L1") is Norm.L1
    with pytest.raises(InputError):
        Norm.parse("linf")


def test_single_direct_move():
    inst = Instance(2, "l2", [[1.0, 0.0]])
    tree = WakeTree()
    tree.add(1, 0, 1.0, (1.0, 0.0))
    assert validate_tree(inst, tree) == 1.0


def _cross_schedule():
    inst = Instance(2, "l2", [[0, 1], [1, 0], [-1, 0], [0, -1]])
    r2 = math.sqrt(2)
    tree = WakeTree()
    tree.add(1, 0, 1.0, (0, 1))
    tree.add(2, 0, 1 + r2, (1, 0))
    tree.add(3, 1, 1 + r2, (-1, 0))
    tree.add(4, 0, 1 + 2 * r2, (0, -1))
    return inst, tree


def test_cross_schedule_makespan():
    inst, tree = _cross_schedule()
    assert validate_tree(inst, tree) == pytest.approx(CROSS_OPTIMUM, abs=1e-12)
    assert tree.makespan == pytest.approx(CROSS_OPTIMUM, abs=1e-12)


def test_event_tree_is_binary():
    _, tree = _cross_schedule()
    ev = tree.event_tree()
    assert len(ev[0]) == 1
    assert all(len(kids) <= 2 for kids in ev.values())
    assert sorted(r for kids in ev.values() for r in kids) == [1, 2, 3, 4]


def test_chain_schedule():
    inst = Instance(2, "l2", [[1, 0], [-1, 0]])
    tree = WakeTree()
    tree.add(1, 0, 1.0, (1, 0))
    tree.add(2, 1, 3.0, (-1, 0))
    assert validate_tree(inst, tree) == 3.0
    assert tree.depth() == 2


def test_validate_rejects_early_wake():
    inst = Instance(2, "l2", [[1, 0], [-1, 0]])
    tree = WakeTree()
    tree.add(1, 0, 1.0, (1, 0))
    tree.add(2, 1, 2.5, (-1, 0))
    with pytest.raises(InputError, match="reachable"):
        validate_tree(inst, tree)


def test_validate_rejects_missing_and_duplicate():
    inst = Instance(2, "l2", [[1, 0], [-1, 0]])
    tree = WakeTree()
    tree.add(1, 0, 1.0, (1, 0))
    with pytest.raises(InputError, match="cover"):
        validate_tree(inst, tree)
    tree.add(1, 0, 1.0, (1, 0))
    with pytest.raises(InputError, match="more than once"):
        validate_tree(inst, tree)


def test_validate_rejects_sleeping_waker():
    inst = Instance(2, "l2", [[1, 0], [-1, 0]])
    tree = WakeTree()
    tree.add(2, 1, 3.0, (-1, 0))
    tree.add(1, 2, 5.0, (1, 0))
    with pytest.raises(InputError):
        validate_tree(inst, tree)


def test_validate_follows_legs():
    inst = Instance(2, "l1", [[1, 0]])
    tree = WakeTree()
    tree.add(1, 0, 2.0, (1, 0), legs=[(0, 0.5), (1, 0)])
    assert validate_tree(inst, tree) == pytest.approx(2.0)
    bad = WakeTree()
    bad.add(1, 0, 2.0, (1, 0), legs=[(0, 0.5)])
    with pytest.raises(InputError, match="legs"):
        validate_tree(inst, bad)


def test_generate_l1_ball():
    inst = generate_instance(3, Norm.L1, 1000, seed=7)
    assert inst.n == 1000
    assert np.all(np.abs(inst.points).sum(axis=1) <= 1.0)


def test_generate_is_seeded():
    a = generate_instance(2, "l2", 50, seed=11)
    b = generate_instance(2, "l2", 50, seed=11)
    c = generate_instance(2, "l2", 50, seed=12)
    assert a == b
    assert a != c


def test_generate_disc_mean_radius():
    inst = generate_instance(2, "l2", 10**5, seed=3)
    assert abs(inst.radii.mean() - 2 / 3) <= 0.01


def test_round_trip_bit_exact(tmp_path):
    inst = generate_instance(3, "l2", 200, seed=5)
    path = tmp_path / "i.jsonl"
    write_instance(inst, path)
    back = read_instance(path)
    assert back == inst
    assert back.points.tobytes() == inst.points.tobytes()


def test_multi_record_file(tmp_path):
    insts = [generate_instance(2, "l1", k + 1, seed=k) for k in range(3)]
    path = tmp_path / "many.jsonl"
    write_instances(insts, path)
    assert list(read_instances(path)) == insts


def test_point_outside_ball_rejected(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(json.dumps({"dim": 2, "norm": "l2", "points": [[1.5, 0]]}) + "\n")
    with pytest.raises(InputError, match="outside"):
        read_instance(path)


def test_malformed_records(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"dim": 2, "norm": "l2", "points": [[1, 0, 0]]}\n')
    with pytest.raises(InputError):
        read_instance(path)
    path.write_text("{not json\n")
    with pytest.raises(InputError):
        read_instance(path)


def test_empty_instance_storable_but_not_solvable(tmp_path):
    inst = Instance(3, "l1", [])
    path = tmp_path / "empty.jsonl"
    write_instance(inst, path)
    back = read_instance(path)
    assert back.n == 0
    with pytest.raises(InputError):
        back.require_nonempty()


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 40), st.integers(0, 2**31), st.sampled_from(["l1", "l2"]), st.sampled_from([2, 3]))
def test_generated_points_stay_in_ball(n, seed, norm, dim):
    inst = generate_instance(dim, norm, n, seed)
    assert inst.n == n
    assert np.all(inst.radii <= 1.0)
