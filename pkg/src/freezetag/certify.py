"""Certified planar wake-up ratio by exhaustive grid evaluation.

The grid covers r1 <= r2 <= r3 on {0, 1/n, ..., 1}, mu12 and mu13 on the
angle grid over [0, pi] and both placements of p3.  Every cell gets the
best strategy bound; the certified ratio is the grid maximum plus the
discretisation allowance of moving each of p1, p2, p3 to a grid corner
and back.

Work is split into (r1, r2) slabs.  A slab is always evaluated the same
way whichever worker picks it up, and the reduction (max plus top-K) only
compares values and lexicographic cell indices, so results do not depend
on the number of workers or on completion order.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import multiprocessing as mp
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .crowns import TWO_PI, bisection_steps, equalize_array, inner_corner_time
from .strategies import (
    PI,
    STRATEGY_ORDER,
    Mu23Case,
    Scenario2D,
    angle_grid,
    dagger_gaps,
    early_four_curves,
    early_three_curves,
    fold_angle,
    four_crowns_curves,
    three_crowns_curves,
    two_crowns_beta_value,
    two_crowns_r2,
    two_crowns_r3_curves,
)

log = logging.getLogger(__name__)

REFERENCE_GRID_MAX = 4.2773
PRIOR_BOUND = 4.62
CASES = (Mu23Case.SUM, Mu23Case.DIFF)
PRUNED = "two_crowns_r2[pruned]"
CELL_BUDGET = 400_000


@dataclass(frozen=True)
class GridSpec:
    n_radial: int = 40
    angle_step: float = 0.05
    beta_step: float = 0.05
    x_tol: float = 1e-9
    r2_cutoff: float = 0.87

    def __post_init__(self):
        if self.n_radial < 2:
            raise ValueError("n_radial must be >= 2")
        if not (0.0 < self.angle_step <= PI):
            raise ValueError("angle_step must lie in (0, pi]")
        if not (0.0 < self.beta_step <= PI):
            raise ValueError("beta_step must lie in (0, pi]")
        if not (0.0 < self.r2_cutoff <= 1.0):
            raise ValueError("r2_cutoff must lie in (0, 1]")
        if self.x_tol <= 0:
            raise ValueError("x_tol must be positive")

    @classmethod
    def fine(cls) -> "GridSpec":
        return cls(n_radial=200, angle_step=0.01, beta_step=0.01)

    def radii(self) -> np.ndarray:
        return np.array([i / self.n_radial for i in range(self.n_radial + 1)])

    def angles(self) -> np.ndarray:
        return angle_grid(self.angle_step, PI)

    def betas(self) -> np.ndarray:
        return angle_grid(self.beta_step, PI)

    def cell_count(self) -> int:
        n = self.n_radial + 1
        return n * (n + 1) * (n + 2) // 6 * len(self.angles()) ** 2 * len(CASES)


def epsilon_total(g: GridSpec) -> float:
    """Twice the corner distance of each of the three scenario robots."""
    return 3.0 * math.sqrt(g.angle_step**2 + (1.0 / g.n_radial) ** 2)


def prune(s: Scenario2D, cutoff: float) -> float | None:
    if s.r2 > cutoff:
        return two_crowns_r2(s.r1, s.r2).bound
    return None


@dataclass(frozen=True)
class CellResult:
    scenario: Scenario2D
    bound: float
    strategy: str

    def row(self) -> list:
        s = self.scenario
        return [s.r1, s.r2, s.r3, s.mu12, s.mu13, s.mu23_case.value, self.bound, self.strategy]


@dataclass
class CertifiedBound:
    grid_max: float
    argmax_cell: CellResult
    epsilon_total: float
    certified: float
    grid: GridSpec
    top: list[CellResult] = field(default_factory=list)
    cells_evaluated: int = 0
    cells_pruned: int = 0
    deviations: list[CellResult] = field(default_factory=list)
    deviation_count: int = 0
    wall_time: float = 0.0
    warnings: list[str] = field(default_factory=list)


# ------------------------------------------------------------------ kernel


def _kernel_names() -> list[str]:
    return list(STRATEGY_ORDER)


def evaluate_block(g: GridSpec, r1: float, r2: float, r3: np.ndarray, steps: int | None = None):
    """Best bound and argmin strategy index for every cell of a block.

    The block fixes r1 and r2 and spans ``r3`` x angles x angles x cases;
    results have shape ``(len(r3), M, M, 2)`` in that lexicographic order.
    """
    steps = bisection_steps(TWO_PI, g.x_tol) if steps is None else steps
    mu = g.angles()
    M = len(mu)
    R3 = np.asarray(r3, dtype=float).reshape(-1, 1, 1, 1)
    M12 = mu.reshape(1, M, 1, 1)
    M13 = mu.reshape(1, 1, M, 1)
    sign = np.array([-1.0, 1.0]).reshape(1, 1, 1, 2)
    M23 = fold_angle(M12 - sign * M13)
    shape = (R3.shape[0], M, M, 2)

    def eq(curves):
        f, gg, lo, hi = curves
        return equalize_array(f, gg, lo, hi, steps=steps)[1]

    vals = {}
    vals["three_crowns"] = eq(three_crowns_curves(r1, r2, M12))
    vals["two_crowns"] = np.asarray(two_crowns_beta_value(r1, 0.0))
    vals["two_crowns_r2"] = np.asarray(r2 + inner_corner_time(PI, 1.0 - r2))
    right, left = two_crowns_r3_curves(r2, R3, M12)
    vals["two_crowns_r3"] = R3 + np.minimum(eq(right), eq(left))
    vals["three_crowns_r3"] = eq(early_three_curves(r1, r2, R3, M12))
    vals["two_or_four"] = _two_or_four_block(g, r1, r2, R3[:, :, :, 0], mu, steps)[..., None]

    vals["early_p3_four[1]"] = eq(early_four_curves(r1, r2, R3, R3, M12, M13, M23))
    vals["early_p3_four[2]"] = eq(early_four_curves(r2, r1, R3, R3, M12, M23, M13))
    vals["early_p3_four[3]"] = eq(early_four_curves(R3, r1, r2, R3, M13, M23, M12))

    vals["early_p3_three[1,2]"] = vals["three_crowns_r3"]
    vals["early_p3_three[1,3]"] = eq(early_three_curves(r1, R3, r2, M13))
    vals["early_p3_three[2,1]"] = eq(early_three_curves(r2, r1, R3, M12))
    # mu23 takes few distinct values; evaluate once per value and scatter
    u23, inv = np.unique(M23, return_inverse=True)
    U = u23.reshape(1, -1)
    R3u = R3[:, :, 0, 0]
    inv = inv.reshape(M23.shape)[0]
    v23 = eq(early_three_curves(r2, R3u, r1, U))
    v32 = eq(early_three_curves(R3u, r2, r1, U))
    vals["early_p3_three[2,3]"] = v23[:, inv]
    vals["early_p3_three[3,1]"] = eq(early_three_curves(R3, r1, r2, M13))
    vals["early_p3_three[3,2]"] = v32[:, inv]

    stack = np.stack([np.broadcast_to(vals[name], shape) for name in STRATEGY_ORDER])
    best = stack.argmin(axis=0)
    value = np.take_along_axis(stack, best[None], axis=0)[0]
    return value, best


def _two_or_four_block(g: GridSpec, r1, r2, R3, mu, steps):
    """Max over feasible beta of min(four crowns, two crowns), shape (R, M, M)."""
    betas = g.betas()
    B = betas.reshape(1, 1, -1)
    M12 = mu.reshape(1, -1, 1)
    near, far = dagger_gaps(M12, B)
    four = None
    for gap in (near, far):
        f, gg, lo, hi = four_crowns_curves(r1, r2, R3, M12, B, gap)
        v = equalize_array(f, gg, lo, hi, steps=steps)[1]
        four = v if four is None else np.maximum(four, v)
    pick = np.minimum(four, two_crowns_beta_value(r1, B))
    running = np.maximum.accumulate(pick, axis=-1)
    limit = PI - np.maximum(mu.reshape(-1, 1), mu.reshape(1, -1))
    idx = np.searchsorted(betas, limit, side="right") - 1
    return running[:, np.arange(len(mu))[:, None], idx]


def _r3_blocks(g: GridSpec, j: int):
    per_r3 = len(g.angles()) ** 2 * 2
    size = max(1, CELL_BUDGET // per_r3)
    idx = list(range(j, g.n_radial + 1))
    return [idx[k : k + size] for k in range(0, len(idx), size)]


def run_slab(g: GridSpec, i: int, j: int, top_k: int = 10, deviation_cap: int = 1000) -> dict:
    """Evaluate all cells with r1 = radii[i], r2 = radii[j]."""
    radii = g.radii()
    M = len(g.angles())
    r1, r2 = radii[i], radii[j]
    per_r3 = M * M * 2
    n_cells = (g.n_radial + 1 - j) * per_r3
    names = _kernel_names()

    if r2 > g.r2_cutoff:
        v = float(r2 + inner_corner_time(PI, 1.0 - r2))
        cell = [j, 0, 0, 0]
        flat = [(v, [i, j] + cell, PRUNED)]
        dev = flat if v > REFERENCE_GRID_MAX else []
        return {
            "i": i,
            "j": j,
            "max": [v, [i, j] + cell, PRUNED],
            "top": flat,
            "evaluated": 0,
            "pruned": n_cells,
            "deviations": dev,
            "deviation_count": n_cells if v > REFERENCE_GRID_MAX else 0,
        }

    top: list = []
    dev: list = []
    dev_count = 0
    best = None
    for block in _r3_blocks(g, j):
        value, arg = evaluate_block(g, r1, r2, radii[block])
        flat = value.ravel()
        k = min(top_k, flat.size)
        # stable sort on -value keeps the lexicographic order among ties
        order = np.argsort(-flat, kind="stable")[:k]
        for pos in order:
            top.append((float(flat[pos]), _cell_index(i, j, block, value.shape, pos), names[arg.flat[pos]]))
        over = np.flatnonzero(flat > REFERENCE_GRID_MAX)
        dev_count += len(over)
        for pos in over[: max(0, deviation_cap - len(dev))]:
            dev.append((float(flat[pos]), _cell_index(i, j, block, value.shape, pos), names[arg.flat[pos]]))
        pos = int(np.argmax(flat))
        cand = (float(flat[pos]), _cell_index(i, j, block, value.shape, pos), names[arg.flat[pos]])
        if best is None or _better(cand, best):
            best = cand
    top = sorted(top, key=_rank_key)[:top_k]
    return {
        "i": i,
        "j": j,
        "max": list(best),
        "top": [list(t) for t in top],
        "evaluated": n_cells,
        "pruned": 0,
        "deviations": [list(d) for d in dev],
        "deviation_count": dev_count,
    }


def _cell_index(i, j, block, shape, pos):
    a, b, c, d = np.unravel_index(pos, shape)
    return [i, j, block[a], int(b), int(c), int(d)]


def _rank_key(entry):
    return (-entry[0], tuple(entry[1]))


def _better(a, b) -> bool:
    return _rank_key(a) < _rank_key(b)


# ------------------------------------------------------------------- sweep


def _slab_worker(args):
    g, i, j, top_k = args
    return run_slab(g, i, j, top_k)


def _grid_header(g: GridSpec) -> dict:
    return {"kind": "header", "grid": asdict(g)}


def _load_checkpoint(path: Path, g: GridSpec, warnings: list[str]) -> dict:
    done: dict = {}
    if not path.exists():
        return done
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [json.loads(line) for line in fh if line.strip()]
        if not lines or lines[0] != json.loads(json.dumps(_grid_header(g))):
            raise ValueError("checkpoint header does not match the grid")
        for rec in lines[1:]:
            if rec.get("kind") != "slab":
                raise ValueError(f"unexpected record kind {rec.get('kind')!r}")
            res = rec["result"]
            for key in ("i", "j", "max", "top", "evaluated", "pruned", "deviations", "deviation_count"):
                if key not in res:
                    raise ValueError(f"slab record lacks {key!r}")
            done[(res["i"], res["j"])] = res
    except (ValueError, KeyError, TypeError) as exc:
        msg = f"checkpoint {path} unusable ({exc}); restarting from scratch"
        log.warning(msg)
        warnings.append(msg)
        path.unlink()
        return {}
    return done


def slab_order(g: GridSpec) -> list[tuple[int, int]]:
    n = g.n_radial
    return [(i, j) for i in range(n + 1) for j in range(i, n + 1)]


def sweep(
    g: GridSpec,
    parallelism: int = 1,
    checkpoint: str | os.PathLike | None = None,
    top_k: int = 10,
    progress=None,
) -> CertifiedBound:
    start = time.perf_counter()
    warnings: list[str] = []
    done: dict = {}
    ck_fh = None
    if checkpoint is not None:
        ck_path = Path(checkpoint)
        done = _load_checkpoint(ck_path, g, warnings)
        fresh = not ck_path.exists()
        ck_fh = open(ck_path, "a", encoding="utf-8")
        if fresh:
            ck_fh.write(json.dumps(_grid_header(g)) + "\n")
            ck_fh.flush()

    todo = [(g, i, j, top_k) for (i, j) in slab_order(g) if (i, j) not in done]
    results = dict(done)

    def absorb(res):
        results[(res["i"], res["j"])] = res
        if ck_fh is not None:
            ck_fh.write(json.dumps({"kind": "slab", "result": res}) + "\n")
            ck_fh.flush()
        if progress is not None:
            progress(len(results), len(todo) + len(done))

    try:
        if parallelism <= 1 or len(todo) <= 1:
            for task in todo:
                absorb(_slab_worker(task))
        else:
            ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else mp.get_context()
            with ctx.Pool(parallelism) as pool:
                for res in pool.imap_unordered(_slab_worker, todo, chunksize=1):
                    absorb(res)
    finally:
        if ck_fh is not None:
            ck_fh.close()

    return _reduce(g, results, top_k, time.perf_counter() - start, warnings)


def _reduce(g: GridSpec, results: dict, top_k: int, wall: float, warnings: list[str]) -> CertifiedBound:
    best = None
    top: list = []
    devs: list = []
    evaluated = pruned = dev_count = 0
    for key in sorted(results):
        res = results[key]
        m = tuple(res["max"])
        if best is None or _better(m, best):
            best = m
        top.extend(tuple(t) for t in res["top"])
        devs.extend(tuple(d) for d in res["deviations"])
        evaluated += res["evaluated"]
        pruned += res["pruned"]
        dev_count += res["deviation_count"]
    top = sorted(top, key=_rank_key)[:top_k]
    devs = sorted(devs, key=_rank_key)
    eps = epsilon_total(g)
    cell = lambda e: CellResult(scenario_at(g, e[1]), e[0], e[2])  # noqa: E731
    return CertifiedBound(
        grid_max=best[0],
        argmax_cell=cell(best),
        epsilon_total=eps,
        certified=best[0] + eps,
        grid=g,
        top=[cell(t) for t in top],
        cells_evaluated=evaluated,
        cells_pruned=pruned,
        deviations=[cell(d) for d in devs],
        deviation_count=dev_count,
        wall_time=wall,
        warnings=warnings,
    )


def scenario_at(g: GridSpec, index) -> Scenario2D:
    i, j, k, a, b, c = index
    radii, mu = g.radii(), g.angles()
    return Scenario2D(float(radii[i]), float(radii[j]), float(radii[k]), float(mu[a]), float(mu[b]), CASES[c])


def tradeoff_max(n_radial: int = 400, angle_step: float = 0.01, x_tol: float = 1e-9) -> tuple[float, tuple[float, float, float]]:
    """Max over r1 <= r2 and mu12 of min(three crowns, two crowns).

    Returns the value and the maximising ``(r1, r2, mu12)``.  The
    two-strategy portfolio only involves p1 and p2.
    """
    steps = bisection_steps(TWO_PI, x_tol)
    radii = np.array([i / n_radial for i in range(n_radial + 1)])
    mu = angle_grid(angle_step, PI).reshape(1, -1)
    best, where = -math.inf, None
    for i, r1 in enumerate(radii):
        r2 = radii[i:].reshape(-1, 1)
        f, gg, lo, hi = three_crowns_curves(r1, r2, mu)
        three = equalize_array(f, gg, lo, hi, steps=steps)[1]
        pick = np.minimum(three, two_crowns_beta_value(r1, 0.0))
        k = int(np.argmax(pick))
        v = float(pick.flat[k])
        if v > best:
            a, b = np.unravel_index(k, pick.shape)
            best, where = v, (float(r1), float(r2[a, 0]), float(mu[0, b]))
    return best, where


# ------------------------------------------------------------------ report


def summary(c: CertifiedBound) -> dict:
    s = c.argmax_cell.scenario
    return {
        "grid": asdict(c.grid),
        "grid_max": c.grid_max,
        "epsilon_total": c.epsilon_total,
        "certified": c.certified,
        "argmax": {
            "r1": s.r1,
            "r2": s.r2,
            "r3": s.r3,
            "mu12": s.mu12,
            "mu13": s.mu13,
            "case": s.mu23_case.value,
            "strategy": c.argmax_cell.strategy,
        },
        "cells_evaluated": c.cells_evaluated,
        "cells_pruned": c.cells_pruned,
        "convention_deviations": c.deviation_count,
        "reference_grid_max": REFERENCE_GRID_MAX,
        "prior_bound": PRIOR_BOUND,
        "warnings": list(c.warnings),
        "wall_time": c.wall_time,
    }


CSV_HEADER = ["r1", "r2", "r3", "mu12", "mu13", "case", "bound", "strategy"]


def report(c: CertifiedBound, path, top_k: int | None = None) -> tuple[Path, Path]:
    """Write ``<path>.json`` (summary) and ``<path>.csv`` (worst cells, descending)."""
    base = Path(path)
    if base.suffix in (".json", ".csv"):
        base = base.with_suffix("")
    rows = c.top if top_k is None else c.top[:top_k]
    csv_path = base.with_suffix(".csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for cell in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in cell.row()])
    if c.deviations:
        with open(base.with_name(base.name + "_deviations.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for cell in c.deviations:
                w.writerow([repr(v) if isinstance(v, float) else v for v in cell.row()])
    json_path = base.with_suffix(".json")
    json_path.write_text(json.dumps(summary(c), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return json_path, csv_path
