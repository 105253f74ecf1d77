"""Loop-phase landscapes and their optima.

A landscape evaluates one transport criterion on a uniform grid of loop
phases in ``[0, 2*pi)``. The best grid point is then refined locally: by a
bounded Brent search for one phase and by coordinate descent for two.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .graphs import Graph, build, distance
from .hamiltonian import TWO_PI, build_hamiltonian, normalize_phases
from .notation import Chain, GraphSpec, parse, validate
from .propagator import (
    FIRST_MAX,
    WINDOW_MAX,
    SearchConfig,
    TransportEvent,
    diagonalize,
    first_maximum,
    window_maximum,
)

SCHEMA = "chiralwalk.landscape/1"
REFINE_TOL = 1e-6

Phases = Tuple[float, ...]


def _search(criterion: str):
    if criterion == FIRST_MAX:
        return first_maximum
    if criterion == WINDOW_MAX:
        return window_maximum
    raise ValueError(f"unknown criterion {criterion!r}")


def evaluate(
    g: Graph, phases: Sequence[float], cfg: SearchConfig = SearchConfig(),
    criterion: str = FIRST_MAX,
) -> TransportEvent:
    """Transport event from start to target for one phase assignment."""
    es = diagonalize(build_hamiltonian(g, phases))
    return _search(criterion)(es, g.start, g.target, distance(g), cfg)


def _workers(threads: Optional[int]) -> int:
    return max(1, threads if threads else (os.cpu_count() or 1))


def _map(fn, items, threads: Optional[int]):
    items = list(items)
    k = _workers(threads)
    if k == 1 or len(items) < 2:
        return [fn(x) for x in items]
    # eigh releases the GIL; results come back in input order
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))


def _rank_key(phases: Phases, ev: TransportEvent):
    return (-round(ev.probability, 10), round(ev.time, 10), normalize_phases(phases))


@dataclass(frozen=True)
class PhaseLandscape:
    """Criterion values on a phase grid plus the refined optimum.

    ``grid[i]`` holds the per-unit phase tuple and ``best`` indexes the best
    grid point. ``optimum`` and ``optimum_event`` hold the refined result.
    """

    grid: Tuple[Phases, ...]
    events: Tuple[TransportEvent, ...]
    criterion: str
    best: int
    optimum: Phases
    optimum_event: TransportEvent
    notation: str = ""
    shape: Tuple[int, ...] = ()

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([e.probability for e in self.events])

    @property
    def times(self) -> np.ndarray:
        return np.array([e.time for e in self.events])

    def to_csv(self) -> str:
        width = len(self.grid[0]) if self.grid else 0
        names = ["phi"] if width == 1 else [f"phi{i + 1}" for i in range(width)]
        buf = io.StringIO()
        buf.write(f"# schema={SCHEMA} graph={self.notation} criterion={self.criterion}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(names + ["p_star", "t_star"])
        for ph, ev in zip(self.grid, self.events):
            w.writerow([repr(float(x)) for x in ph] + [repr(ev.probability), repr(ev.time)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        out = {
            "schema": SCHEMA,
            "graph": self.notation,
            "criterion": self.criterion,
            "optimum": list(self.optimum),
            "optimum_event": self.optimum_event.to_dict(),
            "best_index": self.best,
        }
        if len(self.shape) == 2:
            rows, cols = self.shape
            out["phi1"] = [self.grid[i * cols][0] for i in range(rows)]
            out["phi2"] = [self.grid[j][1] for j in range(cols)]
            out["p_star"] = self.probabilities.reshape(rows, cols).tolist()
            out["t_star"] = self.times.reshape(rows, cols).tolist()
        else:
            out["phi"] = [list(ph) for ph in self.grid]
            out["p_star"] = self.probabilities.tolist()
            out["t_star"] = self.times.tolist()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def uniform_grid(size: int) -> np.ndarray:
    if size < 1:
        raise ValueError("grid size must be positive")
    return TWO_PI * np.arange(size) / size


def _brent(fn: Callable[[float], float], center: float, half_width: float) -> float:
    res = minimize_scalar(lambda x: -fn(x), bounds=(center - half_width, center + half_width),
                          method="bounded", options={"xatol": REFINE_TOL})
    return float(res.x)


def _landscape(
    expand: Callable[[Phases], List[float]],
    g: Graph,
    points: Sequence[Phases],
    cfg: SearchConfig,
    criterion: str,
    threads: Optional[int],
    shape: Tuple[int, ...],
    refine: Callable[[Phases, TransportEvent], Tuple[Phases, TransportEvent]],
) -> PhaseLandscape:
    events = _map(lambda ph: evaluate(g, expand(ph), cfg, criterion), points, threads)
    best = min(range(len(points)), key=lambda i: _rank_key(points[i], events[i]))
    opt, opt_ev = refine(points[best], events[best])
    if _rank_key(opt, opt_ev) > _rank_key(points[best], events[best]):
        opt, opt_ev = points[best], events[best]
    return PhaseLandscape(tuple(points), tuple(events), criterion, best,
                          normalize_phases(opt), opt_ev, g.notation, shape)


def _refine_1d(g, expand, cfg, criterion, cell):
    def refine(start: Phases, _ev):
        cache = {}

        def p(x):
            if x not in cache:
                cache[x] = evaluate(g, expand((x,)), cfg, criterion)
            return cache[x].probability

        x = _brent(p, start[0], cell)
        return (x,), evaluate(g, expand((x,)), cfg, criterion)

    return refine


def _refine_2d(g, expand, cfg, criterion, cell, sweeps: int = 8):
    def refine(start: Phases, start_ev):
        x = list(start)
        cur = start_ev.probability
        for _ in range(sweeps):
            moved = 0.0
            for axis in range(2):
                def p(v, axis=axis):
                    y = list(x)
                    y[axis] = v
                    return evaluate(g, expand(tuple(y)), cfg, criterion).probability

                v = _brent(p, x[axis], cell)
                if p(v) > cur:
                    moved = max(moved, abs(v - x[axis]))
                    x[axis] = v
                    cur = p(v)
            if moved < REFINE_TOL:
                break
        return tuple(x), evaluate(g, expand(tuple(x)), cfg, criterion)

    return refine


def scan_phase(
    g: Graph,
    grid_size: int = 64,
    cfg: SearchConfig = SearchConfig(),
    criterion: str = FIRST_MAX,
    threads: Optional[int] = None,
) -> PhaseLandscape:
    """One-phase landscape of a single-loop graph."""
    if len(g.loops) != 1:
        raise ValueError(f"scan_phase needs exactly one loop, graph has {len(g.loops)}")
    expand = list
    cell = TWO_PI / grid_size
    points = [(float(x),) for x in uniform_grid(grid_size)]
    return _landscape(expand, g, points, cfg, criterion, threads, (grid_size,),
                      _refine_1d(g, expand, cfg, criterion, cell))


def scan_two_phase(
    g: Graph,
    grid_size: int = 48,
    cfg: SearchConfig = SearchConfig(),
    criterion: str = FIRST_MAX,
    threads: Optional[int] = None,
) -> PhaseLandscape:
    """``grid_size x grid_size`` landscape of a two-loop graph (row index is phi1)."""
    if len(g.loops) != 2:
        raise ValueError(f"scan_two_phase needs exactly two loops, graph has {len(g.loops)}")
    expand = list
    cell = TWO_PI / grid_size
    axis = uniform_grid(grid_size)
    points = [(float(a), float(b)) for a in axis for b in axis]
    return _landscape(expand, g, points, cfg, criterion, threads,
                      (grid_size, grid_size), _refine_2d(g, expand, cfg, criterion, cell))


def _unit_spec(unit: Union[GraphSpec, str]) -> GraphSpec:
    return parse(unit) if isinstance(unit, str) else validate(unit)


def optimize_homogeneous_chain(
    unit: Union[GraphSpec, str],
    n_units: int,
    grid_size: int = 64,
    cfg: SearchConfig = SearchConfig(),
    criterion: str = FIRST_MAX,
    full_2d: bool = False,
    threads: Optional[int] = None,
) -> PhaseLandscape:
    """Scan ``chain(unit, n_units)`` with the same phases on every unit.

    Two-loop units are scanned along ``(phi, -phi)`` unless ``full_2d``;
    grid entries then hold the per-unit pair.
    """
    spec = _unit_spec(unit)
    g = build(Chain(spec, n_units))
    per_unit = len(build(spec).loops)
    if per_unit > 2:
        raise ValueError("units with more than two loops are not supported")
    if per_unit == 0:
        ev = evaluate(g, [], cfg, criterion)
        return PhaseLandscape(((),), (ev,), criterion, 0, (), ev, g.notation, (1,))

    def tile(ph: Phases) -> List[float]:
        return list(ph) * n_units

    cell = TWO_PI / grid_size
    axis = uniform_grid(grid_size)
    if per_unit == 1:
        points = [(float(x),) for x in axis]
        return _landscape(tile, g, points, cfg, criterion, threads, (grid_size,),
                          _refine_1d(g, tile, cfg, criterion, cell))
    if full_2d:
        points = [(float(a), float(b)) for a in axis for b in axis]
        return _landscape(tile, g, points, cfg, criterion, threads,
                          (grid_size, grid_size), _refine_2d(g, tile, cfg, criterion, cell))

    def anti(ph: Phases) -> List[float]:
        return [ph[0], -ph[0]] * n_units

    points1 = [(float(x),) for x in axis]
    scan = _landscape(anti, g, points1, cfg, criterion, threads, (grid_size,),
                      _refine_1d(g, anti, cfg, criterion, cell))
    pairs = tuple(normalize_phases((ph[0], -ph[0])) for ph in scan.grid)
    opt = normalize_phases((scan.optimum[0], -scan.optimum[0]))
    return PhaseLandscape(pairs, scan.events, criterion, scan.best, opt, scan.optimum_event,
                          g.notation, scan.shape)


def solo_optimum(cycle_size: int) -> float:
    """Best single-loop phase of a bare cycle: 0 for even sizes, pi/2 for odd."""
    return 0.0 if cycle_size % 2 == 0 else math.pi / 2
