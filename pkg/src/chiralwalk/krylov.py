"""Lanczos reduction of a walk to a weighted path.

Starting from a site vector, the three-term recurrence produces an
orthonormal Krylov basis in which the Hamiltonian is real tridiagonal.
Each new vector is fully reorthogonalised against the previous ones.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .graphs import Graph, weighted_path
from .hamiltonian import ChiralHamiltonian, build_hamiltonian
from .propagator import EigenSystem, SearchConfig, diagonalize, first_maximum

SCHEMA = "chiralwalk.krylov/1"


@dataclass(frozen=True, eq=False)
class KrylovReduction:
    """Basis rows are Krylov vectors in site coordinates."""

    dim: int
    basis: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray
    target_overlap: float
    target_weight: float
    start: int
    target: int

    def tridiagonal(self) -> np.ndarray:
        t = np.diag(self.alphas.astype(complex))
        if self.dim > 1:
            t += np.diag(self.betas, 1) + np.diag(self.betas, -1)
        return t.real

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "dim": self.dim,
            "alphas": [float(a) for a in self.alphas],
            "betas": [float(b) for b in self.betas],
            "target_overlap": self.target_overlap,
            "target_weight": self.target_weight,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def lanczos(
    h: ChiralHamiltonian,
    start: Optional[int] = None,
    tol: float = 1e-10,
    target: Optional[int] = None,
) -> KrylovReduction:
    """Krylov reduction of ``h`` seeded with the site vector ``|start>``.

    Stops when the next coupling drops below ``tol`` or the basis is
    complete. ``target_overlap`` is ``|<target|k_M>|`` for the last vector
    and ``target_weight`` the norm of the target's projection on the span.
    """
    m = h.matrix if isinstance(h, ChiralHamiltonian) else np.asarray(h, dtype=complex)
    n = m.shape[0]
    g = h.graph if isinstance(h, ChiralHamiltonian) else None
    start = (g.start if g else 1) if start is None else start
    target = (g.target if g else n) if target is None else target
    basis = np.zeros((n, n), dtype=complex)
    basis[0, start - 1] = 1.0
    alphas: List[float] = []
    betas: List[float] = []
    dim = 1
    prev_beta = 0.0
    for i in range(n):
        v = basis[i]
        w = m @ v
        alpha = float(np.real(np.vdot(v, w)))
        alphas.append(alpha)
        w = w - alpha * v
        if i > 0:
            w = w - prev_beta * basis[i - 1]
        # two passes of Gram-Schmidt keep the basis orthonormal to round-off
        for _ in range(2):
            w = w - basis[: i + 1].T @ (basis[: i + 1].conj() @ w)
        beta = float(np.linalg.norm(w))
        if i == n - 1 or beta < tol:
            break
        betas.append(beta)
        basis[i + 1] = w / beta
        prev_beta = beta
        dim += 1
    k = basis[:dim]
    overlap = float(abs(k[-1, target - 1]))
    weight = float(np.linalg.norm(k[:, target - 1]))
    return KrylovReduction(dim, k, np.array(alphas), np.array(betas), overlap, weight,
                           start, target)


def overlap_map(kr: KrylovReduction) -> np.ndarray:
    """``|<j|k_n>|`` with Krylov index ``n`` along rows."""
    return np.abs(kr.basis)


def overlap_csv(kr: KrylovReduction) -> str:
    om = overlap_map(kr)
    buf = io.StringIO()
    buf.write(f"# schema={SCHEMA} overlap rows=krylov index cols=site\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n"] + [f"site{j + 1}" for j in range(om.shape[1])])
    for i, row in enumerate(om):
        w.writerow([i + 1] + [repr(float(x)) for x in row])
    return buf.getvalue()


def build_weighted_path(n: int, w: float) -> Graph:
    """Path of ``n`` sites with internal couplings ``w`` and unit end couplings."""
    return weighted_path(n, w)


def path_couplings(n: int, w: float) -> np.ndarray:
    c = np.full(n - 1, float(w))
    c[0] = c[-1] = 1.0
    return c


def tridiagonal_eigensystem(kr: KrylovReduction) -> EigenSystem:
    return diagonalize(kr.tridiagonal())


def w_opt_reference(n: int) -> float:
    """Known optimum of the end couplings for a path with unit interior."""
    return 1.03 * (n - 2) ** (-1 / 6)


def speedup_sweep(
    n: int, w_grid: Iterable[float], cfg: SearchConfig = SearchConfig(threshold=1e-6)
) -> List[Tuple[float, float]]:
    """First-peak end-to-end probability on the weighted path for each ``w``."""
    if n < 5:
        raise ValueError("speedup sweep needs n >= 5")
    out = []
    for w in w_grid:
        g = build_weighted_path(n, w)
        es = diagonalize(build_hamiltonian(g, []))
        ev = first_maximum(es, g.start, g.target, n - 1, cfg)
        out.append((float(w), ev.probability))
    return out


def coupling_profile(kr: KrylovReduction) -> np.ndarray:
    """Rows ``(i, beta_i)`` for plotting."""
    return np.column_stack([np.arange(1, len(kr.betas) + 1), kr.betas])


def even_cycle_betas(half: int) -> np.ndarray:
    """Expected couplings for the ring of ``2*half`` sites at zero phase."""
    if half == 2:
        return np.array([math.sqrt(2), math.sqrt(2)])
    b = np.ones(half)
    b[0] = b[-1] = math.sqrt(2)
    return b


def reduced_probability(kr: KrylovReduction, times: Sequence[float]) -> np.ndarray:
    """End-to-end probability on the tridiagonal chain."""
    es = tridiagonal_eigensystem(kr)
    u = es.eigenvectors
    c = u[kr.dim - 1] * u[0].conj()
    ph = np.exp(-1j * np.multiply.outer(np.asarray(times, dtype=float), es.eigenvalues))
    return np.abs(ph @ c) ** 2
