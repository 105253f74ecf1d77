"""Reference experiment protocols.

Each target returns a :class:`Report` holding CSV datasets, a JSON-ready
summary and a list of checks against published reference values. Checks
with ``passed=None`` are informational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from .export import csv_text
from .graphs import Graph, build, chain
from .hamiltonian import build_hamiltonian
from .krylov import (
    lanczos,
    overlap_map,
    speedup_sweep,
    w_opt_reference,
)
from .notation import parse, to_text
from .phaseopt import optimize_homogeneous_chain, scan_phase, scan_two_phase
from .propagator import FIRST_MAX, WINDOW_MAX, SearchConfig, diagonalize
from .scaling import (
    FIRST_PEAK_THRESHOLD,
    Family,
    family,
    fit_asymptotic,
    fit_linear,
    log_spaced,
    sizes_for_distances,
    transport_series,
)
from .spectral import spectrum_linearity

SCALES = ("desk", "full")

# published reference values: (m, q, m/m_P)
TABLE1A_REF = {
    "P": (0.522, 1.454, 1.0),
    "C-even": (0.532, 0.541, 1.02),
    "C-odd": (0.533, 0.753, 1.02),
    "hC-even": (0.558, 0.768, 1.07),
    "hC-odd": (0.558, 1.031, 1.07),
}
TABLE1B_REF = {
    "C3": (0.451, 1.310, 0.86),
    "C4": (0.378, 1.488, 0.72),
    "C7": (0.538, 1.246, 1.03),
    "C10": (0.471, 1.508, 0.90),
    "DiC4(1,3)": (0.395, 1.350, 0.76),
}
# (c1, c2, c1/c1_P)
TABLE3_REF = {
    "P": (7.27, -23.4, 1.0),
    "C3": (23.7, -304.0, 3.25),
    "C4": (27.2, -383.0, 3.74),
    "DiC4(1,3)": (43.9, -893.0, 6.04),
}

FIRST_PEAK = SearchConfig(threshold=FIRST_PEAK_THRESHOLD)


@dataclass
class Check:
    name: str
    value: object
    expected: object
    tolerance: str
    passed: Optional[bool]

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "expected": self.expected,
                "tolerance": self.tolerance, "passed": self.passed}


@dataclass
class Report:
    target: str
    scale: str
    checks: List[Check] = field(default_factory=list)
    datasets: Dict[str, str] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed is not False for c in self.checks)

    def check(self, name, value, expected, tolerance, passed):
        self.checks.append(Check(name, value, expected, tolerance,
                                 None if passed is None else bool(passed)))

    def to_dict(self) -> dict:
        return {"target": self.target, "scale": self.scale, "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks], "summary": self.summary,
                "datasets": sorted(self.datasets)}


def rel_close(value: float, expected: float, rel: float) -> bool:
    return abs(value - expected) <= rel * abs(expected)


# protocols shared by the reproduction targets and the acceptance suite

TABLE1A_SIZES = {
    "P": list(range(2, 62)),
    "C-even": list(range(4, 35, 2)),
    "C-odd": list(range(3, 36, 2)),
    "hC-even": list(range(4, 35, 2)),
    "hC-odd": list(range(3, 36, 2)),
}
TABLE1B_UNITS = list(range(1, 11))


def _series_csv(points, **meta) -> str:
    return csv_text("series", ["size", "d", "t_star", "p_star", "above_threshold"],
                    [(p.size, p.distance, p.time, p.probability, p.above_threshold)
                     for p in points], **meta)


def table1a_fits(threads=None):
    out = {}
    for name, sizes in TABLE1A_SIZES.items():
        pts = transport_series(family(name), sizes, FIRST_PEAK, threads=threads)
        out[name] = (pts, fit_linear([(p.distance, p.time) for p in pts]))
    return out


def table1b_fits(threads=None, units=TABLE1B_UNITS):
    out = {}
    p_pts = transport_series(family("P"), TABLE1A_SIZES["P"], FIRST_PEAK, threads=threads)
    out["P"] = (p_pts, fit_linear([(p.distance, p.time) for p in p_pts]))
    for unit in TABLE1B_REF:
        pts = transport_series(Family("chain", parse(unit)), units, FIRST_PEAK, threads=threads)
        out[unit] = (pts, fit_linear([(p.distance, p.time) for p in pts]))
    return out


def table3_distances(scale: str) -> List[int]:
    if scale == "desk":
        return log_spaced(200, 600, 16)
    return log_spaced(500, 1000, 24)


def table3_fits(scale="desk", threads=None):
    ds = table3_distances(scale)
    out = {}
    for key in TABLE3_REF:
        fam = family("P") if key == "P" else Family("chain", parse(key))
        pts = transport_series(fam, sizes_for_distances(fam, ds), FIRST_PEAK, threads=threads)
        out[key] = (pts, fit_asymptotic([(p.distance, p.probability) for p in pts]))
    return out


MILESTONE_D = 50
FIG4_CHAINS = ("C3", "C4", "DiC4(1,3)")


def milestone_events(d: int = MILESTONE_D, cfg: SearchConfig = FIRST_PEAK):
    """``{family: SeriesPoint}`` at distance ``d`` for P and the three chains."""
    out = {}
    for key in ("P",) + FIG4_CHAINS:
        fam = family("P") if key == "P" else Family("chain", parse(key))
        size = fam.size_for(d)
        (pt,) = transport_series(fam, [size], cfg)
        out[key] = pt
    return out


# targets


def _table1a(scale, threads):
    rep = Report("table1a", scale)
    fits = table1a_fits(threads)
    m_p = fits["P"][1].m
    rows = []
    for name, (pts, fit) in fits.items():
        ref = TABLE1A_REF[name]
        ratio = fit.m / m_p
        rows.append((name, fit.m, fit.q, fit.r2, ratio, ref[0], ref[1], ref[2]))
        rep.datasets[f"table1a_{name}.csv"] = _series_csv(pts, family=name)
        if name == "P":
            rep.check("m_P", fit.m, ref[0], "2%", rel_close(fit.m, ref[0], 0.02))
        else:
            rep.check(f"m/m_P {name}", ratio, ref[2], "3%", rel_close(ratio, ref[2], 0.03))
        rep.check(f"r2 {name}", fit.r2, 0.999, "> 0.999", fit.r2 > 0.999)
    rep.datasets["table1a.csv"] = csv_text(
        "table1a", ["family", "m", "q", "r2", "ratio", "ref_m", "ref_q", "ref_ratio"], rows)
    rep.summary = {r[0]: {"m": r[1], "q": r[2], "r2": r[3], "ratio": r[4]} for r in rows}
    return rep


def _table1b(scale, threads):
    rep = Report("table1b", scale)
    fits = table1b_fits(threads)
    m_p = fits["P"][1].m
    rows = []
    for name, (pts, fit) in fits.items():
        if name == "P":
            continue
        ref = TABLE1B_REF[name]
        ratio = fit.m / m_p
        rows.append((name, fit.m, fit.q, fit.r2, ratio, ref[0], ref[1], ref[2]))
        rep.datasets[f"table1b_{to_text(parse(name))}.csv"] = _series_csv(pts, unit=name)
        rep.check(f"m/m_P {name}", ratio, ref[2], "5%", rel_close(ratio, ref[2], 0.05))
        rep.check(f"r2 {name}", fit.r2, 0.999, "> 0.999", fit.r2 > 0.999)
    rep.datasets["table1b.csv"] = csv_text(
        "table1b", ["unit", "m", "q", "r2", "ratio", "ref_m", "ref_q", "ref_ratio"], rows)
    rep.summary = {"m_P": m_p, **{r[0]: {"m": r[1], "q": r[2], "r2": r[3], "ratio": r[4]}
                                  for r in rows}}
    return rep


def _table3(scale, threads):
    rep = Report("table3", scale)
    tol = 0.15 if scale == "desk" else 0.10
    fits = table3_fits(scale, threads)
    c1_p = fits["P"][1].c1
    rows = []
    for name, (pts, fit) in fits.items():
        ref = TABLE3_REF[name]
        ratio = fit.c1 / c1_p
        rows.append((name, fit.c1, fit.c2, ratio, fit.residual, ref[0], ref[1], ref[2]))
        rep.datasets[f"table3_{name}.csv"] = _series_csv(pts, family=name)
        if name != "P":
            rep.check(f"c1/c1_P {name}", ratio, ref[2], f"{int(tol * 100)}%",
                      rel_close(ratio, ref[2], tol))
            rep.check(f"c2 sign {name}", fit.c2, "negative", "< 0", fit.c2 < 0)
    rep.datasets["table3.csv"] = csv_text(
        "table3", ["family", "c1", "c2", "ratio", "rms", "ref_c1", "ref_c2", "ref_ratio"],
        rows, distances=f"{table3_distances(scale)[0]}..{table3_distances(scale)[-1]}")
    rep.summary = {r[0]: {"c1": r[1], "c2": r[2], "ratio": r[3]} for r in rows}
    return rep


def _fig3(scale, threads):
    rep = Report("fig3", scale)
    top = 40 if scale == "desk" else 60
    rows = []
    for nu in (1.0, 2.0, 20.0):
        cfg = SearchConfig(nu=nu, threshold=0.5)
        for name in ("P", "C-odd", "C-even"):
            fam = family(name)
            sizes = sizes_for_distances(fam, range(1, top + 1))
            pts = transport_series(fam, sizes, cfg, WINDOW_MAX, threads=threads)
            rows += [(nu, name, p.distance, p.time, p.probability, p.above_threshold)
                     for p in pts]
            if name == "P":
                fit = fit_linear([(p.distance, p.time) for p in pts])
                if nu == 1.0:
                    rep.check("P linear at nu=1", fit.r2, 0.999, "r2 > 0.999", fit.r2 > 0.999)
                if nu == 20.0:
                    t = np.array([p.time for p in pts])
                    rep.check("P non-monotone at nu=20", bool(np.any(np.diff(t) < 0)), True,
                              "t* decreases somewhere", bool(np.any(np.diff(t) < 0)))
    rep.datasets["fig3.csv"] = csv_text(
        "fig3", ["nu", "family", "d", "t_star", "p_star", "above_threshold"], rows)
    return rep


def _fig4(scale, threads):
    rep = Report("fig4", scale)
    top = 60 if scale == "desk" else 150
    rows = []
    best_units = None
    for key in ("P",) + FIG4_CHAINS:
        fam = family("P") if key == "P" else Family("chain", parse(key))
        sizes = sizes_for_distances(fam, range(3, top + 1))
        pts = transport_series(fam, sizes, FIRST_PEAK, threads=threads)
        rows += [(key, p.size, p.distance, p.probability, p.time) for p in pts]
        if key == "DiC4(1,3)":
            best_units = max(pts, key=lambda p: p.probability).size
    ms = milestone_events()
    for key, pt in ms.items():
        if key == "P":
            rep.check("P p* < 0.5 at d=50", pt.probability, 0.5, "< 0.5", pt.probability < 0.5)
        else:
            rep.check(f"chain {key} p* > 0.8 at d=50", pt.probability, 0.8, "> 0.8",
                      pt.probability > 0.8)
    rep.check("best DiC4 chain unit count", best_units, 10, "informational", None)
    rep.datasets["fig4.csv"] = csv_text("fig4", ["family", "size", "d", "p_star", "t_star"], rows)
    rep.summary = {"milestone": {k: {"d": v.distance, "p_star": v.probability}
                                 for k, v in ms.items()},
                   "best_dic4_units": best_units}
    return rep


def _landscape_rows(label, land):
    return [(label, land.criterion, *ph, ev.probability, ev.time)
            for ph, ev in zip(land.grid, land.events)]


def _fig5(scale, threads):
    rep = Report("fig5", scale)
    grid = 64 if scale == "desk" else 256
    rows = []
    for spec in ("h(C6)", "C7"):
        g = build(spec)
        first = scan_phase(g, grid, SearchConfig(), FIRST_MAX, threads)
        rows += _landscape_rows(f"{spec} first", first)
        for nu in (2.0, 5.0, 10.0):
            win = scan_phase(g, grid, SearchConfig(nu=nu), WINDOW_MAX, threads)
            rows += _landscape_rows(f"{spec} window nu={nu:g}", win)
            dom = bool(np.all(win.probabilities >= first.probabilities - 1e-9))
            rep.check(f"{spec} window nu={nu:g} dominates first", dom, True, "pointwise", dom)
    rep.datasets["fig5.csv"] = csv_text("fig5", ["graph", "criterion", "phi", "p_star", "t_star"],
                                        rows)
    return rep


def _fig7(scale, threads):
    rep = Report("fig7", scale)
    grid = 48 if scale == "desk" else 96
    rows = []
    expect = {"C9/C4": (math.pi / 2, 0.0), "DiC4(1,3)": (math.pi / 2, 3 * math.pi / 2)}
    for spec in ("C9/C4", "C8+C8", "DiC4(1,3)"):
        g = build(spec)
        first = scan_two_phase(g, grid, SearchConfig(), FIRST_MAX, threads)
        win = scan_two_phase(g, grid, SearchConfig(nu=10.0), WINDOW_MAX, threads)
        rows += _landscape_rows(f"{spec} first", first) + _landscape_rows(f"{spec} window", win)
        if spec in expect:
            err = max(abs(math.remainder(a - b, 2 * math.pi))
                      for a, b in zip(first.optimum, expect[spec]))
            rep.check(f"{spec} optimum", list(first.optimum), list(expect[spec]), "1e-3 rad",
                      err < 1e-3)
        else:
            p = first.probabilities.reshape(grid, grid)
            asym = float(np.max(np.abs(p - p.T)))
            rep.check(f"{spec} swap symmetry", asym, 0.0, "< 1e-9", asym < 1e-9)
    rep.datasets["fig7.csv"] = csv_text(
        "fig7", ["graph", "criterion", "phi1", "phi2", "p_star", "t_star"], rows)
    return rep


def _fig8(scale, threads):
    rep = Report("fig8", scale)
    grid = 64 if scale == "desk" else 256
    rows = []
    for unit, expect in (("C3", math.pi / 2), ("C4", 0.0)):
        land = optimize_homogeneous_chain(unit, 10, grid, SearchConfig(), FIRST_MAX,
                                          threads=threads)
        rows += _landscape_rows(f"chain({unit},10)", land)
        err = abs(math.remainder(land.optimum[0] - expect, 2 * math.pi))
        rep.check(f"chain({unit},10) optimum", land.optimum[0], expect, "1e-3 rad", err < 1e-3)
        ok = [e.time for e in land.events if e.above_threshold]
        gap = land.optimum_event.time / min(ok) - 1
        rep.check(f"chain({unit},10) optimum time vs fastest above threshold", gap, 0.0,
                  "within 5%", gap <= 0.05)
    rep.datasets["fig8.csv"] = csv_text("fig8", ["graph", "criterion", "phi", "p_star", "t_star"],
                                        rows)
    return rep


def _fig9(scale, threads):
    rep = Report("fig9", scale)
    k = 30 if scale == "desk" else 60
    g = chain("C3", k)
    kr = lanczos(build_hamiltonian(g, [math.pi / 2] * k))
    om = overlap_map(kr)
    rep.datasets["fig9_overlap.csv"] = csv_text(
        "overlap", ["n"] + [f"site{j + 1}" for j in range(g.n)],
        [(i + 1, *row) for i, row in enumerate(om)], graph=g.notation)
    g4 = chain("C4", k // 2)
    kr4 = lanczos(build_hamiltonian(g4, [0.0] * (k // 2)))
    rows = [("C3", i + 1, b) for i, b in enumerate(kr.betas)]
    rows += [("C4", i + 1, b) for i, b in enumerate(kr4.betas)]
    rep.datasets["fig9_couplings.csv"] = csv_text("couplings", ["unit", "i", "beta"], rows)
    dist = _bfs(g)
    peaks = [dist[int(np.argmax(r)) + 1] for r in om[:k]]
    mono = all(b >= a for a, b in zip(peaks, peaks[1:]))
    rep.check("C3 chain Krylov peaks move outward", mono, True, "non-decreasing", mono)
    pair_like = all(_pair_vector(r) for r in overlap_map(kr4))
    rep.check("C4 chain Krylov vectors are sites or even pairs", pair_like, True, "exact",
              pair_like)
    return rep


def _bfs(g: Graph) -> Dict[int, int]:
    adj = g.neighbors()
    dist = {g.start: 0}
    frontier = [g.start]
    while frontier:
        nxt = []
        for v in frontier:
            for u in adj[v]:
                if u not in dist:
                    dist[u] = dist[v] + 1
                    nxt.append(u)
        frontier = nxt
    return dist


def _pair_vector(row: np.ndarray, tol: float = 1e-10) -> bool:
    nz = np.sort(row[row > tol])[::-1]
    if len(nz) == 1:
        return abs(nz[0] - 1) < tol
    return len(nz) == 2 and np.allclose(nz, 1 / math.sqrt(2), atol=tol)


def _fig10(scale, threads):
    rep = Report("fig10", scale)
    ws = np.round(np.linspace(1.0, 2.0, 51 if scale == "desk" else 201), 6)
    rows = []
    for n in (11, 21, 31, 51, 101):
        sweep = speedup_sweep(n, ws)
        rows += [(n, w, p) for w, p in sweep]
        if n == 51:
            best_w = max(sweep, key=lambda r: r[1])[0]
            rep.check("n=51 argmax w in [1.2, 1.6]", best_w, [1.2, 1.6], "interval",
                      1.2 <= best_w <= 1.6)
            root2 = speedup_sweep(n, [math.sqrt(2), 1.0])
            rep.check("n=51 p*(sqrt2) > p*(1)", root2[0][1], root2[1][1], ">",
                      root2[0][1] > root2[1][1])
            rep.check("n=51 interior weight matching w_opt law", 1 / w_opt_reference(n), best_w,
                      "informational", None)
    rep.datasets["fig10.csv"] = csv_text("fig10", ["n", "w", "p_star"], rows)
    return rep


def _fig11(scale, threads):
    rep = Report("fig11", scale)
    units = 80
    gc = chain("C3", units)
    es_c = diagonalize(build_hamiltonian(gc, [math.pi / 2] * units))
    n = gc.n
    es_p = diagonalize(build_hamiltonian(build(f"P{n}"), []))
    end = w_opt_reference(n)
    a = np.diag(np.ones(n - 1), 1)
    a[0, 1] = a[-2, -1] = end
    es_m = diagonalize(a + a.T)
    rows = [(i + 1, x, y, z) for i, (x, y, z) in
            enumerate(zip(es_c.eigenvalues, es_p.eigenvalues, es_m.eigenvalues))]
    rep.datasets["fig11.csv"] = csv_text("spectrum", ["n", "lambda_chain_C3", "lambda_P",
                                                      "lambda_P_ends"], rows, sites=n)
    lin_c, lin_p, lin_m = (spectrum_linearity(e) for e in (es_c, es_p, es_m))
    rep.check("C3 chain more linear than P", lin_c, lin_p, "<", lin_c < lin_p)
    rep.check("P with modified end weights vs P", lin_m / lin_p - 1, 0.0, "informational", None)
    rep.summary = {"chain_C3": lin_c, "P": lin_p, "P_ends": lin_m, "sites": n}
    return rep


TARGETS: Dict[str, Callable[[str, Optional[int]], Report]] = {
    "table1a": _table1a,
    "table1b": _table1b,
    "table3": _table3,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig7": _fig7,
    "fig8": _fig8,
    "fig9": _fig9,
    "fig10": _fig10,
    "fig11": _fig11,
}


def reproduce(target: str, scale: str = "desk", threads: Optional[int] = None) -> Report:
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}; choose from {', '.join(TARGETS)}")
    if scale not in SCALES:
        raise ValueError(f"unknown scale {scale!r}")
    return TARGETS[target](scale, threads)
