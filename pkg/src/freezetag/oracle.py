"""Exact optimum over direct-move schedules for small instances.

A direct-move schedule only ever sends robots straight from one robot
position to another.  After a robot standing at p wakes q, two robots
stand at q and split what is left between them, so

    best(p, S) = min over q in S and splits S - {q} = A + B of
                 d(p, q) + max(best(q, A), best(q, B))

with best(p, {}) = 0.  The source at the origin starts alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import ROOT, InputError, Instance, WakeTree, distance

DEFAULT_MAX_N = 9


@dataclass
class SearchState:
    """Agents as (robot id, position id, free time) plus the asleep set.

    Used by the unpruned enumeration; position ids index the instance
    with 0 for the origin.
    """

    agents: tuple[tuple[int, int, float], ...]
    asleep: frozenset[int]

    @property
    def makespan(self) -> float:
        return max((t for _, _, t in self.agents), default=0.0)


def distance_matrix(inst: Instance) -> list[list[float]]:
    pos = [inst.position(i) for i in range(inst.n + 1)]
    return [[distance(a, b, inst.norm) for b in pos] for a in pos]


def lower_bound(inst: Instance) -> float:
    """Farthest robot from the source; no schedule can finish sooner."""
    origin = (0.0,) * inst.dim
    return max((distance(origin, inst.position(i), inst.norm) for i in range(1, inst.n + 1)), default=0.0)


def _check_size(inst: Instance, max_n: int):
    inst.require_nonempty()
    if inst.n > max_n:
        raise InputError(f"oracle limited to {max_n} robots, instance has {inst.n}")


class _Solver:
    def __init__(self, inst: Instance):
        self.n = inst.n
        self.d = distance_matrix(inst)
        self.memo: dict[tuple[int, int], tuple[float, int, int]] = {}
        # robot ids of every mask bit, bit k is robot k + 1
        self.members = [[k + 1 for k in range(self.n) if m >> k & 1] for m in range(1 << self.n)]

    def reach(self, p: int, mask: int) -> float:
        row = self.d[p]
        return max((row[q] for q in self.members[mask]), default=0.0)

    def best(self, p: int, mask: int) -> float:
        if mask == 0:
            return 0.0
        key = (p, mask)
        hit = self.memo.get(key)
        if hit is not None:
            return hit[0]
        row = self.d[p]
        incumbent, choice = math.inf, (0, 0)
        for q in sorted(self.members[mask], key=lambda r: (row[r], r)):
            step = row[q]
            rest = mask & ~(1 << (q - 1))
            if step + self.reach(q, rest) >= incumbent:
                continue
            if rest == 0:
                incumbent, choice = step, (q, 0)
                continue
            low = rest & -rest
            others = rest ^ low
            sub = others
            while True:
                a = sub | low
                b = rest ^ a
                if step + max(self.reach(q, a), self.reach(q, b)) < incumbent:
                    v = step + max(self.best(q, a), self.best(q, b))
                    if v < incumbent:
                        incumbent, choice = v, (q, a)
                if sub == 0:
                    break
                sub = (sub - 1) & others
        self.memo[key] = (incumbent, choice[0], choice[1])
        return incumbent

    def build(self, inst: Instance) -> WakeTree:
        tree = WakeTree()
        # (agent robot id, position id, clock, mask)
        stack = [(ROOT, ROOT, 0.0, (1 << self.n) - 1)]
        while stack:
            agent, p, clock, mask = stack.pop()
            if mask == 0:
                continue
            self.best(p, mask)
            _, q, a = self.memo[(p, mask)]
            now = clock + self.d[p][q]
            tree.add(q, agent, now, inst.position(q))
            rest = mask & ~(1 << (q - 1))
            stack.append((agent, q, now, a))
            stack.append((q, q, now, rest ^ a))
        return tree


def optimal_makespan(inst: Instance, max_n: int = DEFAULT_MAX_N) -> tuple[float, WakeTree]:
    """Optimal direct-move makespan and a schedule achieving it."""
    _check_size(inst, max_n)
    solver = _Solver(inst)
    value = solver.best(ROOT, (1 << inst.n) - 1)
    return value, solver.build(inst)


def exhaustive_makespan(inst: Instance, max_n: int = 6) -> float:
    """Unpruned enumeration of every (agent, target) wake sequence.

    Independent of the recursion above: it replays schedules event by
    event, letting any awake agent take any asleep robot next.
    """
    _check_size(inst, max_n)
    d = distance_matrix(inst)
    best = math.inf

    def dfs(state: SearchState):
        nonlocal best
        if not state.asleep:
            best = min(best, state.makespan)
            return
        for k, (robot, p, t) in enumerate(state.agents):
            for q in sorted(state.asleep):
                now = t + d[p][q]
                agents = state.agents[:k] + ((robot, q, now), (q, q, now)) + state.agents[k + 1 :]
                dfs(SearchState(agents, state.asleep - {q}))

    dfs(SearchState(((ROOT, ROOT, 0.0),), frozenset(range(1, inst.n + 1))))
    return best


def relabel(inst: Instance, order) -> Instance:
    """Instance with robots permuted; ``order[i]`` is the old index of new robot i."""
    return Instance(inst.dim, inst.norm, inst.points[list(order)])

