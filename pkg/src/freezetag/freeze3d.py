"""Recursive-partition wake-up schedule in the unit ball of R^3.

The source wakes the upper half first.  Projections onto the xy plane
live in a base square that is halved alternately along u and v; every
awake robot owns one region, walks to the lowest asleep robot in it and,
after the wake, the pair splits the region between them.  A robot whose
region runs dry walks to the lower-half robot it was matched with.

For l1 the base square is the diamond |x| + |y| <= 1 seen in the rotated
frame u = x + y, v = y - x, where the l1 distance of two projections is
max(|du|, |dv|).  For l2 it is the axis square [-1, 1]^2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import ROOT, InputError, Instance, Norm, WakeTree

L1_BOUND = 12.0
L2_BOUND = 12.7601
L1_UPPER_SERIES = 9.0
L2_PAIR_BOUND = 4.0 * math.sin(3.0 * math.pi / 8.0)
L2_TAIL_BOUND = 2.0 * math.sqrt(2.0) + math.sqrt(5.0)
L2_TOTAL = 1.0 + 1.0 + L2_PAIR_BOUND + L2_TAIL_BOUND + 2.0
BALL_DIAMETER = 2.0
CHECK_TOL = 1e-9

# above this many members a region is partitioned with numpy
_VECTOR_MIN = 256


class InvariantViolation(RuntimeError):
    """A proven bound was exceeded; indicates a bug, not bad input."""


class Frame(str, enum.Enum):
    ROTATED = "rotated"
    AXIS = "axis"


class MatchingPolicy(str, enum.Enum):
    INDEX_ORDER = "index"
    GREEDY_NEAREST = "greedy"


class TieBreak(str, enum.Enum):
    # equal z is resolved by (x, y, id) or by id alone
    COORDINATES = "coordinates"
    INDEX = "index"


def frame_for(norm: Norm) -> Frame:
    return Frame.ROTATED if Norm.parse(norm) is Norm.L1 else Frame.AXIS


def project(x, y, frame: Frame):
    if frame is Frame.ROTATED:
        return x + y, y - x
    return x, y


@dataclass(frozen=True)
class DyadicRegion:
    """Rectangle [u_lo, u_hi) x [v_lo, v_hi) in frame coordinates.

    An interval touching the top of the base square is closed on the
    right so every point of the square belongs to exactly one region.
    """

    depth: int
    u_interval: tuple[float, float]
    v_interval: tuple[float, float]
    frame: Frame
    u_closed: bool = True
    v_closed: bool = True

    @classmethod
    def root(cls, frame: Frame) -> "DyadicRegion":
        return cls(0, (-1.0, 1.0), (-1.0, 1.0), Frame(frame))

    @property
    def u_width(self) -> float:
        return self.u_interval[1] - self.u_interval[0]

    @property
    def v_width(self) -> float:
        return self.v_interval[1] - self.v_interval[0]

    def diameter(self) -> float:
        """Diameter in the plane norm matching the frame."""
        if self.frame is Frame.ROTATED:
            return max(self.u_width, self.v_width)
        return math.hypot(self.u_width, self.v_width)

    def contains(self, u: float, v: float) -> bool:
        (ul, uh), (vl, vh) = self.u_interval, self.v_interval
        in_u = ul <= u < uh or (self.u_closed and u == uh)
        in_v = vl <= v < vh or (self.v_closed and v == vh)
        return in_u and in_v

    @property
    def splits_u(self) -> bool:
        """Whether the next split cuts u (odd target depth) or v."""
        return (self.depth + 1) % 2 == 1


def split_region(r: DyadicRegion) -> tuple[DyadicRegion, DyadicRegion]:
    """Lower and upper halves of ``r`` at depth ``r.depth + 1``."""
    d = r.depth + 1
    if r.splits_u:
        lo, hi = r.u_interval
        mid = 0.5 * (lo + hi)
        return (
            DyadicRegion(d, (lo, mid), r.v_interval, r.frame, False, r.v_closed),
            DyadicRegion(d, (mid, hi), r.v_interval, r.frame, r.u_closed, r.v_closed),
        )
    lo, hi = r.v_interval
    mid = 0.5 * (lo + hi)
    return (
        DyadicRegion(d, r.u_interval, (lo, mid), r.frame, r.u_closed, False),
        DyadicRegion(d, r.u_interval, (mid, hi), r.frame, r.u_closed, r.v_closed),
    )


def depth_diameter(depth: int, frame: Frame) -> float:
    """Diameter of every region at ``depth`` of the base-square partition."""
    u_halvings = (depth + 1) // 2
    v_halvings = depth // 2
    uw, vw = 2.0 * 0.5**u_halvings, 2.0 * 0.5**v_halvings
    if Frame(frame) is Frame.ROTATED:
        return max(uw, vw)
    return math.hypot(uw, vw)


@dataclass(frozen=True)
class SimConfig:
    norm: Norm = Norm.L1
    matching_policy: MatchingPolicy = MatchingPolicy.INDEX_ORDER
    tie_break: TieBreak = TieBreak.COORDINATES

    def __post_init__(self):
        object.__setattr__(self, "norm", Norm.parse(self.norm))
        object.__setattr__(self, "matching_policy", MatchingPolicy(self.matching_policy))
        object.__setattr__(self, "tie_break", TieBreak(self.tie_break))


@dataclass(frozen=True)
class PathStats:
    """Running aggregates along a chain, updated in O(1) per move."""

    moves: int = 0
    z_variation: float = 0.0
    max_drop: float = -math.inf
    first_step: float = 0.0
    planar_after_first: float = 0.0
    planar_tail: float = 0.0
    planar_pair: float = 0.0
    region_excess: float = -math.inf


class PathRecord:
    """One root-to-leaf chain of moves.

    ``z`` holds the heights of the visited positions starting with the
    source, ``steps`` the full move lengths and ``planar`` their xy
    projections.  ``final_edge`` is the walk into the lower half, if any.
    The sequences are rebuilt from shared chain links on access.
    """

    __slots__ = ("leaf_robot", "_chain", "final_edge")

    def __init__(self, leaf_robot: int, chain, final_edge: float | None):
        self.leaf_robot = leaf_robot
        self._chain = chain
        self.final_edge = final_edge

    @property
    def stats(self) -> PathStats:
        return self._chain[4] if self._chain is not None else PathStats()

    def _columns(self):
        z, steps, flat = [], [], []
        node = self._chain
        while node is not None:
            node, zi, s, p, _ = node
            z.append(zi)
            steps.append(s)
            flat.append(p)
        z.append(0.0)
        return tuple(reversed(z)), tuple(reversed(steps)), tuple(reversed(flat))

    @property
    def z(self) -> tuple[float, ...]:
        return self._columns()[0]

    @property
    def steps(self) -> tuple[float, ...]:
        return self._columns()[1]

    @property
    def planar(self) -> tuple[float, ...]:
        return self._columns()[2]


def _extend(chain, z: float, step: float, flat: float, norm: Norm, diam: list[float]):
    prev = chain[4] if chain is not None else PathStats()
    prev_z = chain[1] if chain is not None else 0.0
    k = prev.moves
    excess = prev.region_excess
    if k >= 1 and (norm is Norm.L1 or k >= 3):
        limit = diam[k - 1] if k - 1 < len(diam) else depth_diameter(k - 1, frame_for(norm))
        excess = max(excess, flat - limit)
    stats = PathStats(
        moves=k + 1,
        z_variation=prev.z_variation + abs(z - prev_z),
        max_drop=max(prev.max_drop, prev_z - z),
        first_step=step if k == 0 else prev.first_step,
        planar_after_first=prev.planar_after_first + (flat if k >= 1 else 0.0),
        planar_tail=prev.planar_tail + (flat if k >= 3 else 0.0),
        planar_pair=prev.planar_pair + (flat if 1 <= k <= 2 else 0.0),
        region_excess=excess,
    )
    return (chain, z, step, flat, stats)


@dataclass(frozen=True)
class BoundCheck:
    name: str
    worst: float
    limit: float
    hard: bool
    passed: bool

    @property
    def margin(self) -> float:
        return self.limit - self.worst


@dataclass
class SimResult:
    tree: WakeTree
    makespan: float
    path_records: list[PathRecord]
    config: SimConfig
    reflected: bool = False
    upper: list[int] = field(default_factory=list)
    lower: list[int] = field(default_factory=list)
    bound_checks: list[BoundCheck] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.bound_checks if c.hard)

    def failures(self) -> list[BoundCheck]:
        return [c for c in self.bound_checks if c.hard and not c.passed]


def hemisphere_split(inst: Instance) -> tuple[list[int], list[int], bool]:
    """Robot ids of the upper and lower halves and whether z was flipped.

    Robots on the plane z = 0 cost nothing in height, so they all join the
    upper half; the instance is reflected only when strictly more robots
    lie below the plane than on or above it.
    """
    if inst.dim != 3:
        raise InputError("hemisphere split needs a 3D instance")
    z = inst.points[:, 2] if inst.n else np.zeros(0)
    below = int((z < 0).sum())
    reflected = below > inst.n - below
    if reflected:
        z = -z
    upper = [i + 1 for i in range(inst.n) if z[i] >= 0]
    lower = [i + 1 for i in range(inst.n) if z[i] < 0]
    return upper, lower, reflected


def _dist_fn(norm: Norm):
    if norm is Norm.L1:
        return lambda a, b: abs(a[0] - b[0]) + abs(a[1] - b[1]) + abs(a[2] - b[2])
    return lambda a, b: math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2)


def _planar_fn(norm: Norm):
    if norm is Norm.L1:
        return lambda a, b: abs(a[0] - b[0]) + abs(a[1] - b[1])
    return lambda a, b: math.hypot(a[0] - b[0], a[1] - b[1])


def match_lower(participants: list[int], lower: list[int], pts: np.ndarray, cfg: SimConfig) -> dict[int, int]:
    """Assign each lower robot to a distinct participant (0 is the source).

    INDEX_ORDER pairs the sorted lists positionally.  GREEDY_NEAREST lets
    each lower robot, in id order, take the closest free participant by
    starting position; it is quadratic and meant for moderate n.
    """
    if len(lower) > len(participants):
        raise InvariantViolation("more lower-half robots than participants")
    if cfg.matching_policy is MatchingPolicy.INDEX_ORDER:
        return dict(zip(sorted(participants), sorted(lower)))
    origin = np.zeros((1, 3))
    ppos = np.vstack([origin if p == ROOT else pts[p - 1 : p] for p in participants])
    free = np.ones(len(participants), dtype=bool)
    out: dict[int, int] = {}
    for target in sorted(lower):
        diff = ppos - pts[target - 1]
        if cfg.norm is Norm.L1:
            d = np.abs(diff).sum(axis=1)
        else:
            d = np.sqrt((diff * diff).sum(axis=1))
        d[~free] = np.inf
        k = int(np.argmin(d))
        free[k] = False
        out[participants[k]] = target
    return out


def _order(ids: list[int], pts: np.ndarray, tie: TieBreak) -> list[int]:
    if not ids:
        return []
    arr = np.asarray(ids)
    p = pts[arr - 1]
    if tie is TieBreak.COORDINATES:
        keys = np.lexsort((arr, p[:, 1], p[:, 0], p[:, 2]))
    else:
        keys = np.lexsort((arr, p[:, 2]))
    return arr[keys].tolist()


def simulate(inst: Instance, cfg: SimConfig | None = None, check: bool = True) -> SimResult:
    """Run the partition schedule and return its wake-up tree.

    Each region is handled on its own, since robots in disjoint regions
    never interact: wake times are path lengths from the source.
    """
    if inst.dim != 3:
        raise InputError("simulate needs a 3D instance")
    inst.require_nonempty()
    cfg = cfg or SimConfig(norm=inst.norm)
    if cfg.norm is not inst.norm:
        cfg = SimConfig(inst.norm, cfg.matching_policy, cfg.tie_break)
    norm = cfg.norm
    frame = frame_for(norm)

    upper, lower, reflected = hemisphere_split(inst)
    pts = np.array(inst.points, dtype=float)
    if reflected:
        pts[:, 2] = -pts[:, 2]
    coords = [(0.0, 0.0, 0.0)] + [tuple(p) for p in pts.tolist()]
    orig = [(0.0, 0.0, 0.0)] + [tuple(p) for p in inst.points.tolist()]
    uu, vv = project(pts[:, 0], pts[:, 1], frame)
    u_list = [0.0] + uu.tolist()
    v_list = [0.0] + vv.tolist()
    u_arr = np.concatenate([[0.0], uu])
    v_arr = np.concatenate([[0.0], vv])

    matching = match_lower([ROOT] + upper, lower, pts, cfg)
    dist = _dist_fn(norm)
    planar = _planar_fn(norm)
    diam = [depth_diameter(i, frame) for i in range(1100)]

    tree = WakeTree()
    records: list[PathRecord] = []
    # chain node: (parent, z, step, planar); the source is the empty chain
    start = _order(upper, pts, cfg.tie_break)
    stack = [(ROOT, ROOT, 0.0, DyadicRegion.root(frame), start, None)]
    while stack:
        robot, at, clock, region, members, chain = stack.pop()
        here = coords[at]
        if len(members) == 0:
            target = matching.get(robot)
            edge = None
            if target is not None:
                edge = dist(here, coords[target])
                tree.add(target, robot, clock + edge, orig[target])
            records.append(PathRecord(robot, chain, edge))
            continue
        t = int(members[0])
        there = coords[t]
        step = dist(here, there)
        now = clock + step
        tree.add(t, robot, now, orig[t])
        link = _extend(chain, there[2], step, planar(here, there), norm, diam)
        low, high = split_region(region)
        rest = members[1:]
        if len(rest) > _VECTOR_MIN:
            rest = np.asarray(rest)
            mask = _member_mask(low, u_arr[rest], v_arr[rest])
            parts = (rest[mask], rest[~mask])
        else:
            a, b = [], []
            for m in rest:
                (a if low.contains(u_list[m], v_list[m]) else b).append(m)
            parts = (a, b)
        mine = 0 if low.contains(u_list[t], v_list[t]) else 1
        kids = (low, high)
        stack.append((robot, t, now, kids[1 - mine], parts[1 - mine], link))
        stack.append((t, t, now, kids[mine], parts[mine], link))

    res = SimResult(tree, tree.makespan, records, cfg, reflected, upper, lower)
    if check:
        res.bound_checks = check_path_bounds(res, norm)
    return res


def _member_mask(r: DyadicRegion, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    (ul, uh), (vl, vh) = r.u_interval, r.v_interval
    in_u = (u >= ul) & ((u < uh) | (r.u_closed & (u == uh)))
    in_v = (v >= vl) & ((v < vh) | (r.v_closed & (v == vh)))
    return in_u & in_v


def check_path_bounds(res: SimResult, norm) -> list[BoundCheck]:
    """Worst value over all paths of every per-path bound.

    Values are oriented so that ``worst <= limit`` is a pass.  The l2
    two-step pair bound is informational only.
    """
    norm = Norm.parse(norm)
    worst: dict[str, float] = {}

    def see(name, value):
        if value > worst.get(name, -math.inf):
            worst[name] = value

    for rec in res.path_records:
        st = rec.stats
        see("z_nondecreasing", max(st.max_drop, 0.0) if st.moves else 0.0)
        see("z_variation", st.z_variation)
        if st.moves:
            see("first_step", st.first_step)
        if st.region_excess > -math.inf:
            see("step_within_region", st.region_excess)
        if norm is Norm.L1:
            see("upper_planar_total", st.first_step + st.planar_after_first)
        else:
            see("tail_planar_total", st.planar_tail)
            if st.moves > 1:
                see("pair_steps", st.planar_pair)
        if rec.final_edge is not None:
            see("final_edge", rec.final_edge)
    see("makespan", res.makespan)

    limits = {
        "z_nondecreasing": (0.0, True),
        "z_variation": (1.0, True),
        "first_step": (1.0, True),
        "step_within_region": (0.0, True),
        "upper_planar_total": (L1_UPPER_SERIES, True),
        "tail_planar_total": (L2_TAIL_BOUND, True),
        "pair_steps": (L2_PAIR_BOUND, False),
        "final_edge": (BALL_DIAMETER, True),
        "makespan": (L1_BOUND if norm is Norm.L1 else L2_BOUND, True),
    }
    out = []
    for name, (limit, hard) in limits.items():
        if name in worst:
            v = worst[name]
            out.append(BoundCheck(name, v, limit, hard, v <= limit + CHECK_TOL))
    served = sum(1 for r in res.path_records if r.final_edge is not None)
    out.append(BoundCheck("lower_served", float(len(res.lower) - served), 0.0, True, served == len(res.lower)))
    return out


def assert_bounds(res: SimResult) -> None:
    bad = res.failures()
    if bad:
        msg = ", ".join(f"{c.name}={c.worst:.12g} > {c.limit:.12g}" for c in bad)
        raise InvariantViolation(msg)


def report(res: SimResult) -> dict:
    return {
        "norm": res.config.norm.value,
        "policy": res.config.matching_policy.value,
        "tie_break": res.config.tie_break.value,
        "n": len(res.upper) + len(res.lower),
        "upper": len(res.upper),
        "lower": len(res.lower),
        "reflected": res.reflected,
        "makespan": res.makespan,
        "bound": L1_BOUND if res.config.norm is Norm.L1 else L2_BOUND,
        "tree_depth": res.tree.depth(),
        "ok": res.ok,
        "checks": [
            {"name": c.name, "worst": c.worst, "limit": c.limit, "margin": c.margin, "hard": c.hard, "passed": c.passed}
            for c in res.bound_checks
        ],
    }
