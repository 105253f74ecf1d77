"""Eigenmode view of transport.

The start-to-target amplitude is a sum over modes with fixed complex
coefficients. When the Hamiltonian is mapped to its negative by the
end-to-end reversal combined with a diagonal phase gauge, the spectrum is
symmetric about zero and the amplitude keeps a constant phase in time.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .hamiltonian import TWO_PI, ChiralHamiltonian
from .propagator import EigenSystem, amplitude


@dataclass(frozen=True, eq=False)
class ModeDecomposition:
    weights: np.ndarray
    coefficients: np.ndarray
    eigenvalues: np.ndarray

    @property
    def phases(self) -> np.ndarray:
        return np.angle(self.coefficients)

    def amplitude(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-1j * np.multiply.outer(t, self.eigenvalues)) @ self.coefficients


def mode_decomposition(es: EigenSystem, start: int, target: int) -> ModeDecomposition:
    """Start weights ``R_n`` and coefficients ``U[target,n] conj(U[start,n])``."""
    u = es.eigenvectors
    weights = np.abs(u[start - 1]) ** 2
    coef = u[target - 1] * u[start - 1].conj()
    return ModeDecomposition(weights, coef, es.eigenvalues.copy())


def spectrum_linearity(es_or_values) -> float:
    """RMS distance of the sorted eigenvalues from a straight line in the index.

    The result is divided by the spectral radius. Zero means equispaced.
    """
    lam = np.sort(np.asarray(getattr(es_or_values, "eigenvalues", es_or_values), dtype=float))
    if len(lam) < 3:
        raise ValueError("linearity needs at least 3 eigenvalues")
    rho = float(np.max(np.abs(lam)))
    if rho == 0:
        return 0.0
    idx = np.arange(len(lam), dtype=float)
    slope, icpt = np.polyfit(idx, lam, 1)
    return float(np.sqrt(np.mean((lam - (slope * idx + icpt)) ** 2)) / rho)


@dataclass(frozen=True, eq=False)
class AntisymmetryWitness:
    found: bool
    diag_phases: np.ndarray
    permutation: Tuple[int, ...]
    residual: float

    def operator(self) -> np.ndarray:
        n = len(self.permutation)
        s = np.zeros((n, n), dtype=complex)
        for j, mj in enumerate(self.permutation):
            s[mj - 1, j] = np.exp(1j * self.diag_phases[mj - 1])
        return s

    def to_dict(self) -> dict:
        return {"found": self.found, "residual": self.residual,
                "diag_phases": [float(a) for a in self.diag_phases]}


def _residual(m: np.ndarray, alphas: np.ndarray, perm: Sequence[int]) -> float:
    idx = np.asarray(perm) - 1
    d = np.exp(1j * alphas)
    # (U_D Pi)^dag H (U_D Pi) evaluated entrywise
    mapped = d.conj()[idx][:, None] * m[np.ix_(idx, idx)] * d[idx][None, :]
    return float(np.max(np.abs(mapped + m)))


def find_antisymmetry(h: ChiralHamiltonian, tol: float = 1e-10) -> AntisymmetryWitness:
    """Look for diagonal phases ``a`` with ``(D Pi)^dag H (D Pi) = -H``.

    ``Pi`` is the builder's reversal permutation. Each edge fixes the
    difference of two phases; they are propagated breadth-first from the
    start vertex and the remaining edges are checked for consistency.
    """
    g = h.graph
    if g.mirror is None:
        raise ValueError(f"graph {g.notation or '?'} has no reversal permutation")
    perm = g.mirror
    m = h.matrix
    n = h.n
    alphas = np.zeros(n)
    known = np.zeros(n, dtype=bool)
    adj = g.neighbors()
    consistent = True
    for root in range(1, n + 1):
        if known[root - 1]:
            continue
        known[root - 1] = True
        queue = deque([root])
        while queue:
            a = queue.popleft()
            for b in adj[a]:
                ma, mb = perm[a - 1], perm[b - 1]
                # e^{i(alpha_b - alpha_a)} H_ab = -H_{m(a) m(b)}
                want = float(np.angle(-m[ma - 1, mb - 1]) - np.angle(m[a - 1, b - 1]))
                if not known[b - 1]:
                    alphas[b - 1] = alphas[a - 1] + want
                    known[b - 1] = True
                    queue.append(b)
                else:
                    gap = math.remainder(alphas[b - 1] - alphas[a - 1] - want, TWO_PI)
                    if abs(gap) > tol:
                        consistent = False
    alphas = np.mod(alphas, TWO_PI)
    res = _residual(m, alphas, perm)
    return AntisymmetryWitness(consistent and res < tol, alphas, tuple(perm), res)


def amplitude_phase_profile(
    es: EigenSystem, start: int, target: int, t_grid, eps: float = 1e-3
) -> np.ndarray:
    """Rows ``(t, arg A(t))`` where ``|A(t)| > eps``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    t = np.asarray(t_grid, dtype=float)
    a = amplitude(es, start, target, t)
    keep = np.abs(a) > eps
    return np.column_stack([t[keep], np.angle(a[keep])])


def _folded(profile: np.ndarray, period: float) -> Tuple[np.ndarray, float]:
    if len(profile) == 0:
        raise ValueError("empty phase profile")
    scale = TWO_PI / period
    return np.exp(1j * scale * profile[:, 1]), scale


def phase_mean(profile: np.ndarray, period: float = math.pi) -> float:
    """Circular mean of the profile phases modulo ``period``, in ``(-period/2, period/2]``."""
    z, scale = _folded(profile, period)
    return float(np.angle(z.mean())) / scale


def phase_spread(profile: np.ndarray, period: float = math.pi) -> float:
    """Largest distance of the profile phases from their circular mean.

    Phases are compared modulo ``period``. The default of ``pi`` ignores
    the sign changes of an amplitude that is real up to a fixed phase.
    """
    z, scale = _folded(profile, period)
    centre = np.angle(z.mean())
    return float(np.max(np.abs(np.angle(z * np.exp(-1j * centre))))) / scale


def spectrum_is_symmetric(es: EigenSystem, tol: float = 1e-10) -> bool:
    lam = np.sort(es.eigenvalues)
    return bool(np.max(np.abs(lam + lam[::-1])) < tol)
