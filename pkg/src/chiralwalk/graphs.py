"""Concrete graphs built from notation trees.

Vertices are 1-based. Every built graph starts at vertex 1. Composition keeps
the labels of the left operand and shifts the right operand; handles add a new
vertex 1 (start) and a new last vertex (target).
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from .notation import (
    Chain,
    Cycle,
    DiCycle,
    GraphSpec,
    Handles,
    Join,
    Merge,
    Path,
    parse,
    to_text,
    validate,
)

Edge = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph with transport endpoints and oriented loops.

    ``loops`` holds one oriented vertex cycle per independent loop; its
    length is always ``E - N + 1``. ``mirror`` is the end-to-end reversal
    permutation (``mirror[v-1]`` is the image of ``v``) when the construction
    is palindromic, else ``None``.
    """

    n: int
    edges: Tuple[Edge, ...]
    weights: Dict[Edge, float]
    start: int
    target: int
    loops: Tuple[Tuple[int, ...], ...] = ()
    mirror: Optional[Tuple[int, ...]] = None
    notation: str = ""
    _edge_set: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_edge_set", frozenset(self.edges))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, j: int, k: int) -> bool:
        return (min(j, k), max(j, k)) in self._edge_set

    def weight(self, j: int, k: int) -> float:
        return self.weights[(min(j, k), max(j, k))]

    def neighbors(self) -> List[List[int]]:
        adj: List[List[int]] = [[] for _ in range(self.n + 1)]
        for j, k in self.edges:
            adj[j].append(k)
            adj[k].append(j)
        for row in adj:
            row.sort()
        return adj

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and self.edges == other.edges
            and self.weights == other.weights
            and self.start == other.start
            and self.target == other.target
            and self.loops == other.loops
            and self.mirror == other.mirror
        )

    def to_dict(self) -> dict:
        return {
            "notation": self.notation,
            "n": self.n,
            "edges": [list(e) for e in self.edges],
            "weights": [self.weights[e] for e in self.edges],
            "start": self.start,
            "target": self.target,
            "loops": [list(loop) for loop in self.loops],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_edge_list(self) -> str:
        lines = [f"# n={self.n} start={self.start} target={self.target}"]
        lines += [f"{j} {k} {self.weights[(j, k)]!r}" for j, k in self.edges]
        return "\n".join(lines) + "\n"


def _key(j: int, k: int) -> Edge:
    return (j, k) if j < k else (k, j)


class _Parts:
    """Mutable assembly buffer used while building."""

    def __init__(self, n, edges, start, target, loops=(), mirror=None):
        self.n = n
        self.edges: Dict[Edge, float] = dict(edges)
        self.start = start
        self.target = target
        self.loops: List[Tuple[int, ...]] = list(loops)
        self.mirror: Optional[List[int]] = mirror

    def relabeled(self, fn) -> "_Parts":
        edges = {_key(fn(j), fn(k)): w for (j, k), w in self.edges.items()}
        loops = [tuple(fn(v) for v in loop) for loop in self.loops]
        return _Parts(self.n, edges, fn(self.start), fn(self.target), loops)


def _reflection(n: int, target: int) -> List[int]:
    # ring reflection exchanging vertex 1 and ``target``
    return [((target - v) % n) + 1 for v in range(1, n + 1)]


def _atom(spec) -> _Parts:
    if isinstance(spec, Path):
        n = spec.n
        edges = {}
        for j in range(1, n):
            inner = 1 < j < n - 1
            edges[(j, j + 1)] = float(spec.weight) if (spec.weight and inner) else 1.0
        return _Parts(n, edges, 1, n, mirror=[n + 1 - v for v in range(1, n + 1)])
    if isinstance(spec, Cycle):
        n = spec.n
        edges = {_key(j, j % n + 1): 1.0 for j in range(1, n + 1)}
        target = n // 2 + 1
        loops = [tuple(range(1, n + 1))]
        return _Parts(n, edges, 1, target, loops, _reflection(n, target))
    if isinstance(spec, DiCycle):
        n, a, b = spec.n, spec.a, spec.b
        edges = {_key(j, j % n + 1): 1.0 for j in range(1, n + 1)}
        edges[(a, b)] = 1.0
        target = spec.target if spec.target is not None else n // 2 + 1
        outer = tuple(range(1, a + 1)) + tuple(range(b, n + 1))
        inner = tuple(range(a, b + 1))
        mirror = _reflection(n, target)
        if _key(mirror[a - 1], mirror[b - 1]) != (a, b):
            mirror = None
        return _Parts(n, edges, 1, target, [outer, inner], mirror)
    raise TypeError(spec)


def _flatten(spec) -> Tuple[list, list]:
    """Split a Join/Merge tree into its unit sequence and connector ops."""
    if isinstance(spec, (Join, Merge)):
        lu, lo = _flatten(spec.left)
        ru, ro = _flatten(spec.right)
        op = "+" if isinstance(spec, Join) else "/"
        return lu + ru, lo + [op] + ro
    return [spec], []


def _assemble(spec) -> _Parts:
    if isinstance(spec, Chain):
        return _assemble(spec.expand())
    if isinstance(spec, Handles):
        child = _assemble(spec.child)
        inner = child.relabeled(lambda v: v + 1)
        n = inner.n + 2
        edges = dict(inner.edges)
        edges[_key(1, inner.start)] = 1.0
        edges[_key(inner.target, n)] = 1.0
        parts = _Parts(n, edges, 1, n, inner.loops)
        if child.mirror is not None:
            parts.mirror = [n] + [img + 1 for img in child.mirror] + [1]
        return parts
    if isinstance(spec, (Join, Merge)):
        units, ops = _flatten(spec)
        built = [_assemble(u) for u in units]
        first = built[0]
        n = first.n
        edges = dict(first.edges)
        loops = list(first.loops)
        target = first.target
        labels = [list(range(1, first.n + 1))]
        for op, part in zip(ops, built[1:]):
            if op == "+":
                shift = n
                fn = lambda v, s=shift: v + s
                edges[_key(target, part.start + shift)] = 1.0
                n += part.n
                lab = [v + shift for v in range(1, part.n + 1)]
            else:
                # the right start disappears into the left target
                old_target = target
                p0 = part.start

                def fn(v, s=n, p0=p0, t=old_target):
                    if v == p0:
                        return t
                    return s + v - (1 if v > p0 else 0)

                n += part.n - 1
                lab = [fn(v) for v in range(1, part.n + 1)]
            moved = part.relabeled(fn)
            edges.update(moved.edges)
            loops.extend(moved.loops)
            target = moved.target
            labels.append(lab)
        parts = _Parts(n, edges, first.start, target, loops)
        palindrome = units == units[::-1] and ops == ops[::-1]
        if palindrome and all(b.mirror is not None for b in built):
            k = len(units)
            mirror = [0] * n
            for i, part in enumerate(built):
                opp = labels[k - 1 - i]
                for v in range(1, part.n + 1):
                    mirror[labels[i][v - 1] - 1] = opp[part.mirror[v - 1] - 1]
            parts.mirror = mirror
        return parts
    return _atom(spec)


def build(spec: Union[GraphSpec, str]) -> Graph:
    """Build the concrete graph for a notation tree (or notation string)."""
    if isinstance(spec, str):
        spec = parse(spec)
    else:
        validate(spec)
    parts = _assemble(spec)
    edges = tuple(sorted(parts.edges))
    mirror = tuple(parts.mirror) if parts.mirror is not None else None
    return Graph(
        n=parts.n,
        edges=edges,
        weights={e: parts.edges[e] for e in edges},
        start=parts.start,
        target=parts.target,
        loops=tuple(parts.loops),
        mirror=mirror,
        notation=to_text(spec),
    )


def distance(g: Graph, source: Optional[int] = None, dest: Optional[int] = None) -> int:
    """Breadth-first edge count between start and target (or given vertices)."""
    source = g.start if source is None else source
    dest = g.target if dest is None else dest
    adj = g.neighbors()
    dist = {source: 0}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        if v == dest:
            return dist[v]
        for u in adj[v]:
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
    raise ValueError(f"vertex {dest} unreachable from {source}: graph is disconnected")


def is_connected(g: Graph) -> bool:
    adj = g.neighbors()
    seen = {1}
    stack = [1]
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == g.n


def count_free_phases(g: Graph) -> int:
    """Number of independent loop phases, ``E - N + 1``."""
    if not is_connected(g):
        raise ValueError("free-phase count needs a connected graph")
    return g.num_edges - g.n + 1


def weighted_path(n: int, w: float) -> Graph:
    """Path with internal edge weight ``w`` and unit extremal edges."""
    if n < 3:
        raise ValueError(f"weighted path needs n >= 3, got {n}")
    return build(Path(n, float(w)))


def chain(unit: Union[GraphSpec, str], count: int) -> Graph:
    if isinstance(unit, str):
        unit = parse(unit)
    return build(Chain(unit, count))


def graph_from_dict(data: dict) -> Graph:
    edges = tuple(tuple(e) for e in data["edges"])
    weights = data.get("weights") or [1.0] * len(edges)
    order = sorted(range(len(edges)), key=lambda i: _key(*edges[i]))
    keyed = tuple(_key(*edges[i]) for i in order)
    return Graph(
        n=int(data["n"]),
        edges=keyed,
        weights={keyed[j]: float(weights[i]) for j, i in enumerate(order)},
        start=int(data["start"]),
        target=int(data["target"]),
        loops=tuple(tuple(loop) for loop in data.get("loops", [])),
        notation=data.get("notation", ""),
    )


def check_graph(g: Graph) -> None:
    """Raise ``ValueError`` if a structural invariant of ``g`` is broken."""
    seen = set()
    for j, k in g.edges:
        if j == k:
            raise ValueError(f"self-loop at {j}")
        if not (1 <= j <= g.n and 1 <= k <= g.n) or j > k:
            raise ValueError(f"bad edge {(j, k)}")
        if (j, k) in seen:
            raise ValueError(f"duplicate edge {(j, k)}")
        seen.add((j, k))
    if g.n > 1 and g.start == g.target:
        raise ValueError("start equals target")
    for loop in g.loops:
        for i, v in enumerate(loop):
            if not g.has_edge(v, loop[(i + 1) % len(loop)]):
                raise ValueError(f"loop {loop} uses a non-edge")
    if len(g.loops) != count_free_phases(g):
        raise ValueError("loop count differs from E - N + 1")
    if g.mirror is not None:
        m = g.mirror
        if sorted(m) != list(range(1, g.n + 1)):
            raise ValueError("mirror is not a permutation")
        if m[g.start - 1] != g.target or m[g.target - 1] != g.start:
            raise ValueError("mirror does not exchange the endpoints")
        for j, k in g.edges:
            if not g.has_edge(m[j - 1], m[k - 1]):
                raise ValueError("mirror is not an automorphism")
