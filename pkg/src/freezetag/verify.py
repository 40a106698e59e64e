"""Seeded self-checks behind ``freezetag verify``.

Each suite returns a list of :class:`Check`; nothing here raises on a
failed property, so the CLI can print every line before deciding the
exit code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import certify, crowns, freeze3d, oracle, strategies
from .geometry import Instance, Norm, generate_instance, validate_tree

SUITES = ("crowns", "strategies", "certifier", "freeze3d", "oracle")


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.suite}.{self.name} {self.detail}".rstrip()


def _close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol


def crowns_suite(samples: int = 10**6, seed: int = 0) -> list[Check]:
    out = []
    slack = crowns.sample_route_slack(samples, seed)
    bad = int((slack < -1e-12).sum())
    out.append(Check("crowns", "inner_route_inequality", bad == 0, f"violations={bad} min_slack={slack.min():.3e}"))
    tc = strategies.two_crowns(0.87).bound
    out.append(Check("crowns", "two_crowns_0.87", tc <= 4.27 and _close(tc, 4.2624, 1e-4), f"value={tc:.7f}"))
    rng = np.random.default_rng(seed)
    theta, w = rng.uniform(0, crowns.TWO_PI, 1000), rng.uniform(0, 1, 1000)
    l1 = theta + crowns.PHI * w
    l2 = theta + crowns.outer_coefficient(theta) * w
    l3 = crowns.inner_corner_time(theta, w)
    ordered = bool(np.all(l2 <= l1 + 1e-12) and np.all(l1 <= l3 + 1e-12))
    out.append(Check("crowns", "lemma_ordering", ordered, "two robots <= one robot <= interior corner"))
    worst = 0.0
    for _ in range(200):
        a, b, c = rng.uniform(0.1, 2.0, 3)
        hi = rng.uniform(0.5, 3.0)
        f = lambda x: a * x  # noqa: E731
        g = lambda x: b * (hi - x) + c  # noqa: E731
        res = crowns.equalize(f, g, 0.0, hi)
        exact = (b * hi + c) / (a + b) * a if (b * hi + c) / (a + b) <= hi else max(f(hi), g(hi))
        worst = max(worst, abs(res.value - exact))
    out.append(Check("crowns", "equalizer_linear", worst <= 1e-8, f"max_err={worst:.2e}"))
    return out


def strategies_suite(seed: int = 0, count: int = 200) -> list[Check]:
    out = []
    rng = np.random.default_rng(seed)
    g = certify.GridSpec()
    radii, mu = g.radii(), g.angles()
    low = high = 0
    worst = 0.0
    for _ in range(count):
        i = int(rng.integers(0, 30))
        j = int(rng.integers(i, 34))
        block = np.arange(j, g.n_radial + 1)
        k = int(rng.integers(0, len(block)))
        a, b = (int(x) for x in rng.integers(0, len(mu), 2))
        c = int(rng.integers(0, 2))
        s = certify.scenario_at(g, (i, j, int(block[k]), a, b, c))
        ev = strategies.best_bound(s, g.beta_step, g.x_tol)
        low += ev.bound < s.r1 - 1e-12
        high += ev.bound > strategies.two_crowns(s.r1).bound + 1e-12
        val, _ = certify.evaluate_block(g, radii[i], radii[j], radii[[int(block[k])]])
        worst = max(worst, abs(float(val[0, a, b, c]) - ev.bound))
    out.append(Check("strategies", "bound_at_least_r1", low == 0, f"violations={low}"))
    out.append(Check("strategies", "bound_at_most_two_crowns", high == 0, f"violations={high}"))
    out.append(Check("strategies", "kernel_matches_scalar", worst <= 1e-8, f"max_err={worst:.2e}"))
    return out


def certifier_suite() -> list[Check]:
    out = []
    eps = certify.epsilon_total(certify.GridSpec.fine())
    out.append(Check("certifier", "fine_grid_epsilon", _close(eps, 0.033541, 1e-6) and eps <= 0.0336, f"value={eps:.7f}"))
    coarse = certify.GridSpec(n_radial=4, angle_step=0.5, beta_step=0.5)
    fine = certify.GridSpec(n_radial=8, angle_step=0.25, beta_step=0.5)
    a = certify.sweep(coarse, parallelism=1)
    b = certify.sweep(coarse, parallelism=2)
    same = a.grid_max == b.grid_max and a.argmax_cell == b.argmax_cell
    out.append(Check("certifier", "worker_independence", same, f"grid_max={a.grid_max:.9f}"))
    f = certify.sweep(fine, parallelism=1)
    out.append(Check("certifier", "grid_nesting", f.grid_max >= a.grid_max - 1e-12, f"coarse={a.grid_max:.6f} fine={f.grid_max:.6f}"))
    return out


def freeze3d_suite(seed: int = 0, per_size: int = 25) -> list[Check]:
    out = []
    rng = np.random.default_rng(seed)
    p, q = rng.uniform(-1, 1, (10**5, 2)), rng.uniform(-1, 1, (10**5, 2))
    l1 = np.abs(p - q).sum(axis=1)
    (pu, pv), (qu, qv) = freeze3d.project(p[:, 0], p[:, 1], freeze3d.Frame.ROTATED), freeze3d.project(
        q[:, 0], q[:, 1], freeze3d.Frame.ROTATED
    )
    rot = np.maximum(np.abs(pu - qu), np.abs(pv - qv))
    err = float(np.abs(l1 - rot).max())
    out.append(Check("freeze3d", "rotated_frame_identity", err <= 1e-12, f"max_err={err:.2e}"))
    for norm in (Norm.L1, Norm.L2):
        bound = freeze3d.L1_BOUND if norm is Norm.L1 else freeze3d.L2_BOUND
        worst, failed, tree_err = 0.0, 0, 0.0
        for n in (1, 2, 10, 1000):
            for k in range(per_size):
                inst = generate_instance(3, norm, n, seed * 100_003 + n * 1000 + k)
                res = freeze3d.simulate(inst, freeze3d.SimConfig(norm))
                worst = max(worst, res.makespan)
                failed += not res.ok
                if n <= 10:
                    tree_err = max(tree_err, abs(validate_tree(inst, res.tree) - res.makespan))
        out.append(Check("freeze3d", f"{norm.value}_makespan", worst <= bound and failed == 0, f"worst={worst:.6f} bound={bound} failed={failed}"))
        out.append(Check("freeze3d", f"{norm.value}_tree_valid", tree_err <= 1e-9, f"max_err={tree_err:.2e}"))
    return out


def oracle_suite(seed: int = 0, count: int = 50) -> list[Check]:
    out = []
    cross = Instance(2, Norm.L2, [[0, 1], [0, -1], [1, 0], [-1, 0]])
    v, _ = oracle.optimal_makespan(cross)
    out.append(Check("oracle", "cross_instance", _close(v, 1 + 2 * math.sqrt(2), 1e-9), f"value={v:.10f}"))
    pair = Instance(2, Norm.L2, [[1, 0], [-1, 0]])
    v2, _ = oracle.optimal_makespan(pair)
    out.append(Check("oracle", "opposite_pair", _close(v2, 3.0, 1e-9), f"value={v2:.10f}"))
    bad = 0
    for k in range(count):
        inst = generate_instance(2 + k % 2, "l1" if k % 3 else "l2", 1 + k % 5, seed + k)
        bad += not _close(oracle.optimal_makespan(inst)[0], oracle.exhaustive_makespan(inst), 1e-9)
    out.append(Check("oracle", "pruning_sound", bad == 0, f"mismatches={bad}/{count}"))
    inst = generate_instance(2, "l2", 6, seed)
    a = oracle.optimal_makespan(inst)[0]
    b = oracle.optimal_makespan(inst.scaled(0.5))[0]
    out.append(Check("oracle", "homogeneity", _close(b, 0.5 * a, 1e-9), f"ratio={b / a:.12f}"))
    return out


_RUNNERS = {
    "crowns": crowns_suite,
    "strategies": strategies_suite,
    "certifier": certifier_suite,
    "freeze3d": freeze3d_suite,
    "oracle": oracle_suite,
}


def run(suite: str) -> list[Check]:
    names = SUITES if suite == "all" else (suite,)
    checks: list[Check] = []
    for name in names:
        checks.extend(_RUNNERS[name]())
    return checks
