"""Points, norms, instances, wake-up trees and instance files."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

RADIUS_TOL = 1e-12
TIME_TOL = 1e-9
ROOT = 0


class InputError(ValueError):
    """Malformed or out-of-contract input."""


class Norm(str, enum.Enum):
    L1 = "l1"
    L2 = "l2"

    @classmethod
    def parse(cls, value) -> "Norm":
        if isinstance(value, Norm):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InputError(f"unknown norm {value!r}; expected 'l1' or 'l2'") from None


def norm_of(v, norm: Norm) -> float:
    v = np.asarray(v, dtype=float)
    if norm is Norm.L1:
        return float(np.abs(v).sum())
    return float(math.sqrt(float(np.dot(v, v))))


def distance(a: Sequence[float], b: Sequence[float], norm: Norm) -> float:
    if len(a) != len(b):
        raise InputError(f"dimension mismatch: {len(a)} vs {len(b)}")
    if norm is Norm.L1:
        return math.fsum(abs(x - y) for x, y in zip(a, b))
    return math.sqrt(math.fsum((x - y) ** 2 for x, y in zip(a, b)))


def chord(r_a, r_b, delta_theta):
    """Euclidean distance between points at radii r_a, r_b separated by an angle."""
    sq = r_a * r_a + r_b * r_b - 2.0 * r_a * r_b * np.cos(delta_theta)
    return np.sqrt(np.maximum(sq, 0.0))


def scalar_chord(r_a: float, r_b: float, delta_theta: float) -> float:
    sq = r_a * r_a + r_b * r_b - 2.0 * r_a * r_b * math.cos(delta_theta)
    return math.sqrt(sq) if sq > 0.0 else 0.0


@dataclass(frozen=True)
class PolarPoint:
    r: float
    theta: float

    def __post_init__(self):
        if self.r < 0:
            raise InputError(f"negative radius {self.r}")
        object.__setattr__(self, "theta", self.theta % (2.0 * math.pi))

    def cartesian(self) -> tuple[float, float]:
        return (self.r * math.cos(self.theta), self.r * math.sin(self.theta))


@dataclass(frozen=True)
class Instance:
    """Asleep robots around a single awake source at the origin."""

    dim: int
    norm: Norm
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise InputError(f"dimension must be 2 or 3, got {self.dim}")
        object.__setattr__(self, "norm", Norm.parse(self.norm))
        pts = np.array(self.points, dtype=float).reshape(-1, self.dim) if len(self.points) else np.zeros((0, self.dim))
        if not np.all(np.isfinite(pts)):
            raise InputError("non-finite coordinate")
        radii = self.radii_of(pts)
        if len(radii) and radii.max() > 1.0 + RADIUS_TOL:
            i = int(radii.argmax())
            raise InputError(f"point {i} at radius {radii[i]!r} lies outside the unit {self.norm.value} ball")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def radii_of(self, pts: np.ndarray) -> np.ndarray:
        if self.norm is Norm.L1:
            return np.abs(pts).sum(axis=1)
        return np.sqrt((pts * pts).sum(axis=1))

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def radii(self) -> np.ndarray:
        return self.radii_of(self.points)

    def position(self, robot_id: int) -> tuple[float, ...]:
        """Position of robot ``robot_id``; id 0 is the source at the origin."""
        if robot_id == ROOT:
            return (0.0,) * self.dim
        return tuple(float(c) for c in self.points[robot_id - 1])

    def require_nonempty(self):
        if self.n == 0:
            raise InputError("instance has no asleep robots")

    def scaled(self, s: float) -> "Instance":
        return Instance(self.dim, self.norm, self.points * s)

    def __eq__(self, other):
        return (
            isinstance(other, Instance)
            and self.dim == other.dim
            and self.norm is other.norm
            and np.array_equal(self.points, other.points)
        )

    __hash__ = None


@dataclass
class WakeNode:
    """One wake event.  ``legs`` is the waker's polyline from its previous stop.

    The previous stop is the waker's own wake position (for its first child)
    or the wake position of the child it woke before this one.  The last
    vertex of ``legs`` must be ``wake_position``; an empty list means a
    straight move.
    """

    robot_id: int
    waker_id: int
    wake_time: float
    wake_position: tuple[float, ...]
    legs: list[tuple[float, ...]] = field(default_factory=list)


@dataclass
class WakeTree:
    nodes: list[WakeNode] = field(default_factory=list)

    def add(self, robot_id, waker_id, wake_time, wake_position, legs=None):
        self.nodes.append(WakeNode(robot_id, waker_id, float(wake_time), tuple(wake_position), list(legs or [])))

    @property
    def makespan(self) -> float:
        return max((n.wake_time for n in self.nodes), default=0.0)

    def children(self) -> dict[int, list[WakeNode]]:
        out: dict[int, list[WakeNode]] = {}
        for node in self.nodes:
            out.setdefault(node.waker_id, []).append(node)
        for kids in out.values():
            kids.sort(key=lambda n: (n.wake_time, n.robot_id))
        return out

    def event_tree(self) -> dict[int, list[int]]:
        """Binary wake-up tree in event form.

        After robot ``w`` wakes ``c`` both continue from ``c``: the event-tree
        children of ``c`` are the first robot ``c`` wakes and the next robot
        ``w`` wakes.  Every node therefore has at most two children and the
        root exactly one, whatever the per-robot fan-out of the schedule.
        """
        tree: dict[int, list[int]] = {ROOT: []}
        for waker, seq in self.children().items():
            prev = waker
            for node in seq:
                tree.setdefault(prev, []).append(node.robot_id)
                tree.setdefault(node.robot_id, [])
                prev = node.robot_id
        return tree

    def depth(self) -> int:
        """Number of wake events on the longest root-to-leaf chain."""
        parent = {n.robot_id: n.waker_id for n in self.nodes}
        memo: dict[int, int] = {ROOT: 0}
        for start in parent:
            chain = []
            r = start
            while r not in memo:
                chain.append(r)
                r = parent[r]
            base = memo[r]
            for r in reversed(chain):
                base += 1
                memo[r] = base
        return max(memo.values())

    def to_json(self) -> dict:
        return {
            "nodes": [
                {
                    "robot": n.robot_id,
                    "waker": n.waker_id,
                    "time": n.wake_time,
                    "position": list(n.wake_position),
                    "legs": [list(p) for p in n.legs],
                }
                for n in self.nodes
            ]
        }


def polyline_length(start, legs: Sequence[Sequence[float]], norm: Norm) -> float:
    total, here = 0.0, start
    for p in legs:
        total += distance(here, p, norm)
        here = p
    return total


def validate_tree(inst: Instance, tree: WakeTree) -> float:
    """Check a claimed schedule and return its makespan.

    Every wake time is recomputed as the earliest time the waker can reach
    the child along the declared legs at unit speed, with the waker's
    children visited in order of declared wake time.  Raises
    :class:`InputError` on a missing or duplicated robot, a waker that is
    not awake, or a declared time earlier than feasible.
    """
    ids = [n.robot_id for n in tree.nodes]
    expected = set(range(1, inst.n + 1))
    if len(ids) != len(set(ids)):
        raise InputError("a robot is woken more than once")
    if set(ids) != expected:
        missing = sorted(expected - set(ids))
        extra = sorted(set(ids) - expected)
        raise InputError(f"tree does not cover the instance (missing {missing}, unknown {extra})")

    by_id = {n.robot_id: n for n in tree.nodes}
    kids = tree.children()
    for waker in kids:
        if waker != ROOT and waker not in by_id:
            raise InputError(f"waker {waker} is never woken")

    recomputed: dict[int, float] = {ROOT: 0.0}
    stack = [ROOT]
    while stack:
        waker = stack.pop()
        here = inst.position(waker)
        clock = recomputed[waker]
        if waker != ROOT and tree_position_mismatch(inst, by_id[waker]):
            raise InputError(f"robot {waker} declared at {by_id[waker].wake_position}, not its position")
        for node in kids.get(waker, []):
            path = list(node.legs) or [node.wake_position]
            if distance(path[-1], node.wake_position, inst.norm) > TIME_TOL:
                raise InputError(f"legs of robot {node.robot_id} do not end at its position")
            earliest = clock + polyline_length(here, path, inst.norm)
            if node.wake_time < earliest - TIME_TOL:
                raise InputError(
                    f"robot {node.robot_id} declared awake at {node.wake_time} but reachable only at {earliest}"
                )
            recomputed[node.robot_id] = earliest
            clock = earliest
            here = node.wake_position
            stack.append(node.robot_id)
    if len(recomputed) != inst.n + 1:
        raise InputError("wake tree contains a cycle or unreachable robot")
    return max(recomputed.values())


def tree_position_mismatch(inst: Instance, node: WakeNode) -> bool:
    return distance(inst.position(node.robot_id), node.wake_position, inst.norm) > TIME_TOL


def generate_instance(dim: int, norm, n: int, seed: int) -> Instance:
    """Uniform points in the unit ball by rejection from the bounding cube."""
    norm = Norm.parse(norm)
    if n < 1:
        raise InputError("n must be >= 1")
    if dim not in (2, 3):
        raise InputError("dim must be 2 or 3")
    rng = np.random.default_rng(seed)
    kept: list[np.ndarray] = []
    have = 0
    while have < n:
        batch = rng.uniform(-1.0, 1.0, size=(max(64, 2 * (n - have)), dim))
        r = np.abs(batch).sum(axis=1) if norm is Norm.L1 else np.sqrt((batch * batch).sum(axis=1))
        batch = batch[r <= 1.0]
        kept.append(batch)
        have += len(batch)
    return Instance(dim, norm, np.concatenate(kept)[:n])


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def instance_to_line(inst: Instance) -> str:
    pts = ",".join("[" + ",".join(_fmt(c) for c in p) + "]" for p in inst.points)
    return f'{{"dim":{inst.dim},"norm":"{inst.norm.value}","points":[{pts}]}}'


def instance_from_record(rec: dict) -> Instance:
    try:
        dim = int(rec["dim"])
        norm = Norm.parse(rec["norm"])
        raw = rec["points"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed instance record: {exc}") from None
    if not isinstance(raw, list) or any(not isinstance(p, list) or len(p) != dim for p in raw):
        raise InputError(f"points must be a list of {dim}-coordinate lists")
    try:
        pts = np.array(raw, dtype=float).reshape(len(raw), dim)
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed coordinates: {exc}") from None
    return Instance(dim, norm, pts)


def write_instances(instances: Iterable[Instance], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(instance_to_line(inst) + "\n")


def write_instance(inst: Instance, path) -> None:
    write_instances([inst], path)


def read_instances(path) -> Iterator[Instance]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
            yield instance_from_record(rec)


def read_instance(path) -> Instance:
    """First instance stored in ``path``."""
    for inst in read_instances(path):
        return inst
    raise InputError(f"{Path(path)} contains no instance record")
