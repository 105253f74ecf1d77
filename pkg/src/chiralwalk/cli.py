"""Command-line interface.

Exit codes: 0 on success, 2 when a reproduction check fails, 1 on error.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
import time
from pathlib import Path as FsPath
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .export import csv_text, json_text
from .graphs import build, count_free_phases, distance
from .hamiltonian import build_hamiltonian
from .krylov import lanczos, overlap_map
from .notation import NotationError
from .phaseopt import optimize_homogeneous_chain, scan_phase, scan_two_phase
from .propagator import FIRST_MAX, WINDOW_MAX, SearchConfig, diagonalize, first_maximum, \
    trace, window_maximum
from .reproduce import TARGETS, reproduce
from .scaling import (
    family,
    fit_asymptotic,
    fit_linear,
    log_spaced,
    sizes_for_distances,
    transport_series,
)
from .spectral import (
    amplitude_phase_profile,
    find_antisymmetry,
    mode_decomposition,
    phase_mean,
    phase_spread,
    spectrum_linearity,
)

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2

_ANGLE = re.compile(r"^([+-]?)(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)?\*?(pi)?(?:/(\d+(?:\.\d*)?))?$")


def parse_angle(text: str) -> float:
    """Accepts plain numbers and forms like ``pi/2``, ``-3pi/4``, ``0.5*pi``."""
    m = _ANGLE.match(text.strip().replace(" ", ""))
    if not m or not (m.group(2) or m.group(3)):
        raise ValueError(f"bad angle {text!r}")
    sign, num, pi, den = m.groups()
    val = float(num) if num else 1.0
    if pi:
        val *= math.pi
    if den:
        if float(den) == 0:
            raise ValueError(f"bad angle {text!r}: zero denominator")
        val /= float(den)
    return -val if sign == "-" else val


def parse_phases(text: Optional[str]) -> List[float]:
    if not text:
        return []
    return [parse_angle(tok) for tok in text.split(",") if tok.strip()]


def _range(text: str) -> List[int]:
    """``a:b`` or ``a:b:step`` (inclusive) or a comma list."""
    if ":" in text:
        parts = [int(x) for x in text.split(":")]
        lo, hi = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        return list(range(lo, hi + 1, step))
    return [int(x) for x in text.split(",")]


class Output:
    """Collects files for ``--out`` and echoes text to stdout otherwise."""

    def __init__(self, args):
        self.dir = FsPath(args.out) if getattr(args, "out", None) else None
        self.files: List[str] = []

    def emit(self, name: str, text: str, echo: bool = True):
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)
            (self.dir / name).write_text(text)
            self.files.append(name)
        elif echo:
            sys.stdout.write(text)

    def manifest(self, command: str, params: dict, started: float):
        if self.dir is None:
            return
        data = {
            "command": command,
            "parameters": params,
            "version": __version__,
            "wall_time": round(time.time() - started, 3),
            "outputs": sorted(self.files),
        }
        (self.dir / "manifest.json").write_text(json_text(data))


def _cfg(args) -> SearchConfig:
    return SearchConfig(nu=args.nu, threshold=args.threshold)


def _criterion(args) -> str:
    return WINDOW_MAX if args.criterion == "window" else FIRST_MAX


def cmd_inspect(args, out: Output) -> int:
    g = build(args.notation)
    info = {
        "notation": g.notation,
        "n": g.n,
        "e": g.num_edges,
        "phases": count_free_phases(g),
        "start": g.start,
        "target": g.target,
        "distance": distance(g),
        "loops": [list(loop) for loop in g.loops],
        "edges": [list(e) for e in g.edges],
    }
    if args.json:
        out.emit("inspect.json", json_text(info))
    else:
        lines = [f"{k}: {info[k]}" for k in ("notation", "n", "e", "phases", "start", "target",
                                              "distance")]
        lines += [f"loop {i + 1}: {' '.join(map(str, loop))}" for i, loop in
                  enumerate(info["loops"])]
        out.emit("inspect.txt", "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_evolve(args, out: Output) -> int:
    g = build(args.notation)
    times = np.arange(0.0, args.t_max + args.dt / 2, args.dt)
    if args.sweep:
        if len(g.loops) != 1:
            raise ValueError("--sweep needs a graph with exactly one loop")
        rows = []
        for phi in 2 * math.pi * np.arange(args.sweep) / args.sweep:
            es = diagonalize(build_hamiltonian(g, [phi]))
            rows += [(phi, t, p) for t, p, _ in trace(es, g.start, g.target, times)]
        out.emit("evolve_sweep.csv", csv_text("heatmap", ["phi", "t", "p"], rows,
                                              graph=g.notation))
        return EXIT_OK
    es = diagonalize(build_hamiltonian(g, parse_phases(args.phases)))
    rows = trace(es, g.start, g.target, times)
    out.emit("evolve.csv", csv_text("trace", ["t", "p", "dp_dt"], rows, graph=g.notation))
    if args.json:
        search = window_maximum if args.criterion == "window" else first_maximum
        ev = search(es, g.start, g.target, distance(g), _cfg(args))
        out.emit("event.json", json_text(ev.to_dict()), echo=False)
    return EXIT_OK


def _emit_landscape(out: Output, land, stem: str, as_json: bool):
    out.emit(f"{stem}.csv", land.to_csv(), echo=not as_json)
    summary = {"optimum": list(land.optimum), **land.optimum_event.to_dict()}
    if as_json:
        out.emit(f"{stem}.json", json_text(land.to_dict()))
    else:
        out.emit(f"{stem}_optimum.json", json_text(summary), echo=False)
        sys.stderr.write(f"optimum {list(land.optimum)} p*={land.optimum_event.probability:.6f}"
                         f" t*={land.optimum_event.time:.6f}\n")


def cmd_scan(args, out: Output) -> int:
    g = build(args.notation)
    if len(g.loops) == 1:
        land = scan_phase(g, args.grid or 64, _cfg(args), _criterion(args), args.threads)
    elif len(g.loops) == 2:
        land = scan_two_phase(g, args.grid or 48, _cfg(args), _criterion(args), args.threads)
    else:
        raise ValueError(f"scan supports one or two loops, graph has {len(g.loops)}")
    _emit_landscape(out, land, "scan", args.json)
    return EXIT_OK


def cmd_chain_opt(args, out: Output) -> int:
    land = optimize_homogeneous_chain(args.unit, args.units, args.grid or 64, _cfg(args),
                                      _criterion(args), args.full_2d, args.threads)
    _emit_landscape(out, land, "chain_opt", args.json)
    return EXIT_OK


def _series_rows(points):
    return [(p.size, p.distance, p.time, p.probability, p.above_threshold) for p in points]


def cmd_regress(args, out: Output) -> int:
    fam = family(args.family)
    cfg = _cfg(args)
    pts = transport_series(fam, _range(args.sizes), cfg, _criterion(args), args.threads)
    fit = fit_linear([(p.distance, p.time) for p in pts])
    out.emit("series.csv", csv_text("series", ["size", "d", "t_star", "p_star",
                                               "above_threshold"], _series_rows(pts),
                                     family=fam.name), echo=not args.json)
    out.emit("fit.json", json_text({"family": fam.name, **fit.to_dict()}), echo=args.json)
    return EXIT_OK


def cmd_fit(args, out: Output) -> int:
    fam = family(args.family)
    ds = log_spaced(args.d_min, args.d_max, args.per_decade)
    pts = transport_series(fam, sizes_for_distances(fam, ds), _cfg(args), _criterion(args),
                           args.threads)
    fit = fit_asymptotic([(p.distance, p.probability) for p in pts])
    out.emit("series.csv", csv_text("series", ["size", "d", "t_star", "p_star",
                                               "above_threshold"], _series_rows(pts),
                                     family=fam.name), echo=not args.json)
    out.emit("fit.json", json_text({"family": fam.name, **fit.to_dict()}), echo=args.json)
    return EXIT_OK


def cmd_krylov(args, out: Output) -> int:
    g = build(args.notation)
    kr = lanczos(build_hamiltonian(g, parse_phases(args.phases)))
    out.emit("krylov.json", json_text(kr.to_dict()))
    om = overlap_map(kr)
    out.emit("overlap.csv", csv_text("overlap", ["n"] + [f"site{j + 1}" for j in range(g.n)],
                                     [(i + 1, *row) for i, row in enumerate(om)],
                                     graph=g.notation), echo=False)
    return EXIT_OK


def cmd_spectral(args, out: Output) -> int:
    g = build(args.notation)
    h = build_hamiltonian(g, parse_phases(args.phases))
    es = diagonalize(h)
    md = mode_decomposition(es, g.start, g.target)
    report: Dict[str, object] = {
        "linearity": spectrum_linearity(es) if g.n >= 3 else None,
        "weights": md.weights,
        "mode_phases": md.phases,
    }
    if g.mirror is not None:
        witness = find_antisymmetry(h)
        report["antisymmetry"] = witness.to_dict()
        if witness.found:
            # the amplitude keeps one phase modulo pi; report it and its spread
            ts = np.linspace(0.0, 4.0 * g.n, 4001)
            prof = amplitude_phase_profile(es, g.start, g.target, ts)
            if len(prof):
                report["amplitude_phase"] = phase_mean(prof)
                report["amplitude_phase_spread"] = phase_spread(prof)
    out.emit("spectral.json", json_text(report))
    out.emit("spectrum.csv", csv_text("spectrum", ["n", "lambda_n"],
                                      [(i + 1, x) for i, x in enumerate(es.eigenvalues)],
                                      graph=g.notation), echo=False)
    return EXIT_OK


def cmd_reproduce(args, out: Output) -> int:
    targets = list(TARGETS) if args.target == "all" else [args.target]
    ok = True
    summary = {}
    for name in targets:
        rep = reproduce(name, args.scale, args.threads)
        for fname, text in sorted(rep.datasets.items()):
            out.emit(fname, text, echo=False)
        out.emit(f"{name}_report.json", json_text(rep.to_dict()), echo=False)
        summary[name] = rep.passed
        for c in rep.checks:
            mark = {True: "PASS", False: "FAIL", None: "INFO"}[c.passed]
            print(f"{mark} {name}: {c.name} = {_fmt(c.value)} (expected {_fmt(c.expected)},"
                  f" {c.tolerance})")
        ok = ok and rep.passed
    if args.json:
        sys.stdout.write(json_text(summary))
    return EXIT_OK if ok else EXIT_FAIL


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="JSON output")
    common.add_argument("--out", metavar="DIR", help="write files and a manifest to DIR")
    common.add_argument("--nu", type=float, default=2.0, help="search window nu (T = nu*d)")
    common.add_argument("--threshold", type=float, default=0.5)
    common.add_argument("--grid", type=int, default=None, help="phase grid size")
    common.add_argument("--criterion", choices=("first", "window"), default="first")
    common.add_argument("--scale", choices=("desk", "full"), default="desk")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: all cores)")

    p = argparse.ArgumentParser(prog="chiralwalk", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("inspect", parents=[common], help="graph summary")
    s.add_argument("notation")
    s.set_defaults(func=cmd_inspect)

    s = sub.add_parser("evolve", parents=[common], help="probability trace")
    s.add_argument("notation")
    s.add_argument("--phases", default="", help="comma list, e.g. pi/2,-pi/2")
    s.add_argument("--t-max", type=float, default=10.0)
    s.add_argument("--dt", type=float, default=0.01)
    s.add_argument("--sweep", type=int, default=0, metavar="K",
                   help="scan K phases of a one-loop graph instead")
    s.set_defaults(func=cmd_evolve)

    s = sub.add_parser("scan", parents=[common], help="phase landscape")
    s.add_argument("notation")
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("chain-opt", parents=[common], help="homogeneous chain phase scan")
    s.add_argument("unit")
    s.add_argument("--units", type=int, required=True)
    s.add_argument("--full-2d", action="store_true")
    s.set_defaults(func=cmd_chain_opt)

    s = sub.add_parser("regress", parents=[common], help="time vs distance regression")
    s.add_argument("family", help="P, C-even, C-odd, hC-even, hC-odd or chain:<unit>")
    s.add_argument("--sizes", required=True, help="a:b[:step] or comma list")
    s.set_defaults(func=cmd_regress)

    s = sub.add_parser("fit", parents=[common], help="asymptotic probability fit")
    s.add_argument("family")
    s.add_argument("--d-min", type=int, default=200)
    s.add_argument("--d-max", type=int, default=600)
    s.add_argument("--per-decade", type=int, default=8)
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("krylov", parents=[common], help="Lanczos reduction")
    s.add_argument("notation")
    s.add_argument("--phases", default="")
    s.set_defaults(func=cmd_krylov)

    s = sub.add_parser("spectral", parents=[common], help="spectrum and antisymmetry")
    s.add_argument("notation")
    s.add_argument("--phases", default="")
    s.set_defaults(func=cmd_spectral)

    s = sub.add_parser("reproduce", parents=[common], help="run a reference experiment")
    s.add_argument("target", choices=list(TARGETS) + ["all"])
    s.set_defaults(func=cmd_reproduce)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Output(args)
    started = time.time()
    try:
        code = args.func(args, out)
    except (NotationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    params = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    out.manifest(args.command, params, started)
    return code


if __name__ == "__main__":
    sys.exit(main())
