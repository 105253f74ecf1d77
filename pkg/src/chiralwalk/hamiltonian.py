"""Chiral Hamiltonians on built graphs.

The Hamiltonian starts from the weighted adjacency matrix. Each stored loop
carries its phase on one designated edge: the lexicographically smallest
oriented edge of the loop that no other loop uses. Entry ``H[j, k]`` (1-based
vertices ``j -> k`` along the loop orientation) is multiplied by
``exp(i*phi)`` and its transpose by the conjugate, so the product of entries
along the oriented loop has argument ``phi``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .graphs import Graph

TWO_PI = 2.0 * math.pi


def normalize_phases(phases: Sequence[float]) -> Tuple[float, ...]:
    """Reduce angles to ``[0, 2*pi)``."""
    out = []
    for phi in phases:
        r = math.fmod(float(phi), TWO_PI)
        if r < 0:
            r += TWO_PI
        if r >= TWO_PI:
            r = 0.0
        out.append(r)
    return tuple(out)


def angle_distance(a: float, b: float) -> float:
    """Distance between two angles measured on the unit circle."""
    return abs(math.remainder(a - b, TWO_PI))


@dataclass(frozen=True, eq=False)
class ChiralHamiltonian:
    matrix: np.ndarray
    graph: Graph
    phases: Tuple[float, ...] = ()

    @property
    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal().real.copy()

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def to_json_matrix(self) -> list:
        return [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix]

    def to_bytes(self) -> bytes:
        """Row-major little-endian float64 (re, im) pairs."""
        return np.ascontiguousarray(self.matrix, dtype="<c16").tobytes()


def matrix_from_bytes(data: bytes, n: int) -> np.ndarray:
    return np.frombuffer(data, dtype="<c16").reshape(n, n).copy()


def designated_edges(g: Graph) -> Tuple[Tuple[int, int], ...]:
    """Oriented edge carrying each loop's phase."""
    usage = Counter()
    oriented = []
    for loop in g.loops:
        steps = [(loop[i], loop[(i + 1) % len(loop)]) for i in range(len(loop))]
        oriented.append(steps)
        usage.update({(min(e), max(e)) for e in steps})
    chosen = []
    for steps in oriented:
        private = [e for e in steps if usage[(min(e), max(e))] == 1]
        if not private:
            raise ValueError("loop has no edge of its own; cannot place its phase")
        chosen.append(min(private))
    return tuple(chosen)


def adjacency_matrix(g: Graph, weighted: bool = True) -> np.ndarray:
    a = np.zeros((g.n, g.n))
    for (j, k), w in g.weights.items():
        a[j - 1, k - 1] = a[k - 1, j - 1] = w if weighted else 1.0
    return a


def build_hamiltonian(
    g: Graph,
    phases: Sequence[float] = (),
    diagonal: Optional[Sequence[float]] = None,
) -> ChiralHamiltonian:
    """Chiral Hamiltonian with one phase per stored loop of ``g``.

    >>> from chiralwalk.graphs import build
    >>> h = build_hamiltonian(build("C4"), [0.0])
    >>> h.matrix.real.astype(int)[0]
    array([0, 1, 0, 1])
    """
    phases = normalize_phases(phases)
    if len(phases) != len(g.loops):
        raise ValueError(f"{len(g.loops)} loop phase(s) expected, got {len(phases)}")
    h = adjacency_matrix(g).astype(complex)
    for (j, k), phi in zip(designated_edges(g) if g.loops else (), phases):
        z = np.exp(1j * phi)
        h[j - 1, k - 1] *= z
        h[k - 1, j - 1] = np.conj(h[j - 1, k - 1])
    if diagonal is not None:
        diagonal = np.asarray(diagonal, dtype=float)
        if diagonal.shape != (g.n,):
            raise ValueError(f"diagonal must have length {g.n}")
        h[np.diag_indices(g.n)] = diagonal
    return ChiralHamiltonian(h, g, phases)


def build_laplacian(g: Graph) -> np.ndarray:
    """Unweighted graph Laplacian ``D - A`` as an integer matrix."""
    a = adjacency_matrix(g, weighted=False).astype(int)
    return np.diag(a.sum(axis=1)) - a


def quasi_gauge(h: ChiralHamiltonian, alphas: Sequence[float]) -> ChiralHamiltonian:
    """Conjugate by ``diag(exp(i*alpha))``: ``H'_jk = e^{i a_j} H_jk e^{-i a_k}``."""
    alphas = np.asarray(alphas, dtype=float)
    if alphas.shape != (h.n,):
        raise ValueError(f"gauge vector must have length {h.n}")
    lam = np.exp(1j * alphas)
    m = lam[:, None] * h.matrix * lam.conj()[None, :]
    # diagonal is untouched in exact arithmetic; keep it bit-identical
    m[np.diag_indices(h.n)] = h.matrix.diagonal()
    return ChiralHamiltonian(m, h.graph, h.phases)


def loop_total_phases(h: ChiralHamiltonian) -> Tuple[float, ...]:
    """Argument of the entry product along each oriented loop, in ``[0, 2*pi)``."""
    out = []
    m = h.matrix
    for loop in h.graph.loops:
        prod = 1.0 + 0.0j
        for i, j in enumerate(loop):
            k = loop[(i + 1) % len(loop)]
            entry = m[j - 1, k - 1]
            if entry == 0:
                raise ValueError(f"zero Hamiltonian entry on loop edge {(j, k)}")
            prod *= entry / abs(entry)
        out.append(math.atan2(prod.imag, prod.real))
    return normalize_phases(out)
