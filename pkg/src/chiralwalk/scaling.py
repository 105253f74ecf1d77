"""Transport scaling with distance.

Families of graphs are generated by a size parameter (sites for paths and
cycles, unit count for chains) with their optimal loop phases attached.
Series of first-maximum events feed two fits: the linear time law
``t = m*d + q`` and the asymptotic probability law
``p = c1*d**(-2/3) + c2*d**(-4/3)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import jv, jvp

from .graphs import Graph, build, distance
from .hamiltonian import build_hamiltonian
from .notation import Chain, Cycle, DiCycle, GraphSpec, Handles, Path, parse, to_text
from .phaseopt import _map
from .propagator import FIRST_MAX, SearchConfig, TransportEvent, diagonalize, first_maximum, \
    window_maximum

# threshold low enough that the first peak counts whatever its height
FIRST_PEAK_THRESHOLD = 1e-6

FAMILY_NAMES = ("P", "C-even", "C-odd", "hC-even", "hC-odd")


def unit_phases(unit: GraphSpec) -> Tuple[float, ...]:
    """Known optimal per-unit loop phases for chain building blocks."""
    if isinstance(unit, Path):
        return ()
    if isinstance(unit, Cycle):
        return (0.0,) if unit.n % 2 == 0 else (math.pi / 2,)
    if isinstance(unit, DiCycle) and (unit.n, unit.a, unit.b, unit.target) == (4, 1, 3, None):
        return (math.pi / 2, -math.pi / 2)
    raise ValueError(f"no known optimal phases for unit {to_text(unit)}; pass them explicitly")


@dataclass(frozen=True)
class Family:
    """Graph family indexed by an integer size.

    ``kind`` is one of ``P``, ``C-even``, ``C-odd``, ``hC-even``, ``hC-odd``
    or ``chain``; chains also carry ``unit`` and optionally ``phases``
    (per unit, defaulting to :func:`unit_phases`).
    """

    kind: str
    unit: Optional[GraphSpec] = None
    phases: Optional[Tuple[float, ...]] = None

    @property
    def name(self) -> str:
        return f"chain({to_text(self.unit)})" if self.kind == "chain" else self.kind

    def _unit_distance(self) -> int:
        return distance(build(self.unit))

    def spec(self, size: int) -> GraphSpec:
        k = self.kind
        if k == "P":
            return Path(size)
        if k in ("C-even", "C-odd", "hC-even", "hC-odd"):
            if size % 2 != (0 if k.endswith("even") else 1):
                raise ValueError(f"{k} family needs {k.split('-')[1]} cycle sizes, got {size}")
            return Handles(Cycle(size)) if k.startswith("h") else Cycle(size)
        if k == "chain":
            return Chain(self.unit, size)
        raise ValueError(f"unknown family {k!r}")

    def loop_phases(self, size: int) -> List[float]:
        k = self.kind
        if k == "P":
            return []
        if k == "chain":
            per = self.phases if self.phases is not None else unit_phases(self.unit)
            return list(per) * size
        return [0.0] if k.endswith("even") else [math.pi / 2]

    def distance_of(self, size: int) -> int:
        k = self.kind
        if k == "P":
            return size - 1
        if k == "chain":
            return size * self._unit_distance() + 2
        return size // 2 + (2 if k.startswith("h") else 0)

    def size_for(self, d: int) -> int:
        """Size whose distance is closest to ``d`` (valid sizes only)."""
        k = self.kind
        if k == "P":
            return max(1, d + 1)
        if k == "chain":
            return max(1, int(round((d - 2) / self._unit_distance())))
        base = d - (2 if k.startswith("h") else 0)
        size = 2 * base if k.endswith("even") else 2 * base + 1
        return max(4 if k.endswith("even") else 3, size)

    def graph(self, size: int) -> Graph:
        return build(self.spec(size))


def family(name: str) -> Family:
    """``P``, ``C-even``, ``C-odd``, ``hC-even``, ``hC-odd`` or ``chain:<unit>``."""
    if name in FAMILY_NAMES:
        return Family(name)
    if name.startswith("chain:"):
        return Family("chain", parse(name[len("chain:"):]))
    raise ValueError(f"unknown family {name!r}")


@dataclass(frozen=True)
class SeriesPoint:
    size: int
    distance: int
    time: float
    probability: float
    above_threshold: bool


def transport_series(
    fam: Family,
    sizes: Iterable[int],
    cfg: SearchConfig = SearchConfig(),
    criterion: str = FIRST_MAX,
    threads: Optional[int] = None,
) -> List[SeriesPoint]:
    """One transport event per size, with the family's phase policy applied."""
    search = first_maximum if criterion == FIRST_MAX else window_maximum

    def one(size: int) -> SeriesPoint:
        g = fam.graph(size)
        d = distance(g)
        es = diagonalize(build_hamiltonian(g, fam.loop_phases(size)))
        ev: TransportEvent = search(es, g.start, g.target, d, cfg)
        return SeriesPoint(size, d, ev.time, ev.probability, ev.above_threshold)

    return _map(one, list(sizes), threads)


def time_distance_series(fam, sizes, cfg=SearchConfig(), criterion=FIRST_MAX, threads=None):
    """``[(d, t*), ...]``"""
    return [(p.distance, p.time) for p in transport_series(fam, sizes, cfg, criterion, threads)]


def probability_distance_series(fam, sizes, cfg=SearchConfig(), criterion=FIRST_MAX,
                                threads=None):
    """``[(d, p*), ...]``"""
    return [(p.distance, p.probability)
            for p in transport_series(fam, sizes, cfg, criterion, threads)]


@dataclass(frozen=True)
class LinearFit:
    m: float
    q: float
    r2: float
    count: int

    @property
    def r(self) -> float:
        """Correlation coefficient (sign of the slope)."""
        return math.copysign(math.sqrt(self.r2), self.m)

    def to_dict(self) -> dict:
        return {"m": self.m, "q": self.q, "r2": self.r2, "r": self.r, "count": self.count}


def _xy(series) -> Tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("series must be a list of (d, value) pairs")
    return arr[:, 0], arr[:, 1]


def fit_linear(series: Sequence[Tuple[float, float]]) -> LinearFit:
    """Ordinary least squares ``value = m*d + q``."""
    x, y = _xy(series)
    if len(x) < 3:
        raise ValueError("linear fit needs at least 3 points")
    if np.ptp(x) == 0:
        raise ValueError("degenerate series: all distances equal")
    m, q = np.polyfit(x, y, 1)
    resid = y - (m * x + q)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    # a flat series is fitted exactly; round-off must not turn that into r2 = 0
    flat = ss_tot <= 1e-24 * float(np.sum(y ** 2))
    r2 = 1.0 if flat else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return LinearFit(float(m), float(q), min(1.0, max(0.0, r2)), len(x))


@dataclass(frozen=True)
class AsymptoticFit:
    c1: float
    c2: float
    residual: float
    d_range: Tuple[float, float]
    count: int

    def predict(self, d):
        d = np.asarray(d, dtype=float)
        return self.c1 * d ** (-2 / 3) + self.c2 * d ** (-4 / 3)

    def to_dict(self) -> dict:
        return {"c1": self.c1, "c2": self.c2, "residual": self.residual,
                "d_min": self.d_range[0], "d_max": self.d_range[1], "count": self.count}


def fit_asymptotic(series, d_min: Optional[float] = None,
                   d_max: Optional[float] = None) -> AsymptoticFit:
    """Least squares of ``p`` on the basis ``{d**(-2/3), d**(-4/3)}``."""
    x, y = _xy(series)
    keep = np.ones_like(x, dtype=bool)
    if d_min is not None:
        keep &= x >= d_min
    if d_max is not None:
        keep &= x <= d_max
    x, y = x[keep], y[keep]
    if len(np.unique(x)) < 4:
        raise ValueError("asymptotic fit needs at least 4 distinct distances")
    basis = np.column_stack([x ** (-2 / 3), x ** (-4 / 3)])
    (c1, c2), *_ = np.linalg.lstsq(basis, y, rcond=None)
    rms = float(np.sqrt(np.mean((basis @ [c1, c2] - y) ** 2)))
    return AsymptoticFit(float(c1), float(c2), rms, (float(x.min()), float(x.max())), len(x))


def log_spaced(lo: float, hi: float, per_decade: int = 8) -> List[int]:
    """Distinct integers ``round(lo * 10**(i/per_decade))`` up to ``hi``."""
    if not 0 < lo <= hi:
        raise ValueError("need 0 < lo <= hi")
    count = int(math.floor(per_decade * math.log10(hi / lo) + 1e-9)) + 1
    vals = np.round(lo * 10 ** (np.arange(count) / per_decade)).astype(int)
    return sorted(set(int(v) for v in vals))


def sizes_for_distances(fam: Family, distances: Iterable[int]) -> List[int]:
    return sorted({fam.size_for(int(d)) for d in distances})


def bessel_first_max(order: int) -> Tuple[float, float]:
    """First maximum ``(t*, |J_N(t*)|**2)`` of the squared Bessel function."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    if order == 0:
        return 0.0, 1.0
    n = float(order)
    # first zero of J_N' sits near N + 0.81 N^(1/3), well before the second
    lo, hi = n, n + 1.6 * n ** (1 / 3) + 1.0
    t = brentq(lambda x: jvp(order, x), lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    return float(t), float(jv(order, t) ** 2)


def bessel_peak_expansion(order: float) -> float:
    """Truncated large-order expansion of ``J_N`` at its first maximum."""
    x = float(order) ** (-2 / 3)
    return 0.6749 * order ** (-1 / 3) * (1 - 0.1617 * x + 0.0292 * x * x)


def path_event(d: int, cfg: SearchConfig = SearchConfig(threshold=FIRST_PEAK_THRESHOLD)):
    """First peak of end-to-end transport on the path with ``d`` edges."""
    g = build(Path(d + 1))
    es = diagonalize(build_hamiltonian(g, []))
    return first_maximum(es, g.start, g.target, d, cfg)


def to_family(obj: Union[Family, str]) -> Family:
    return obj if isinstance(obj, Family) else family(obj)
