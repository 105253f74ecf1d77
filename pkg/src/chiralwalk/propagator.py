"""Exact dynamics from a Hermitian eigendecomposition.

Amplitudes are ``<dst| exp(-iHt) |src>`` with 1-based vertices. Transport
events are found on a time grid and refined by root bracketing on the
analytic derivative of the transport probability.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .hamiltonian import ChiralHamiltonian

FIRST_MAX = "first"
WINDOW_MAX = "window"

# peaks below this probability are treated as round-off
NOISE_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class EigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def diagonalize(h: Union[ChiralHamiltonian, np.ndarray]) -> EigenSystem:
    """Eigenvalues ascending; each eigenvector's largest entry made real positive."""
    m = h.matrix if isinstance(h, ChiralHamiltonian) else np.asarray(h)
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("Hamiltonian must be square")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12 * scale:
        raise ValueError("Hamiltonian is not Hermitian")
    lam, u = np.linalg.eigh(m)
    # ties resolve to the first index, so the convention is deterministic
    idx = np.argmax(np.abs(u) - 1e-12 * np.arange(u.shape[0])[:, None], axis=0)
    pivot = u[idx, np.arange(u.shape[1])]
    u = u * (pivot.conj() / np.abs(pivot))[None, :]
    return EigenSystem(lam, u)


def _coefficients(es: EigenSystem, src: int, dst: int) -> np.ndarray:
    u = es.eigenvectors
    return u[dst - 1] * u[src - 1].conj()


def amplitude(es: EigenSystem, src: int, dst: int, t):
    """``<dst|exp(-iHt)|src> = sum_k U[dst,k] conj(U[src,k]) exp(-i lambda_k t)``.

    ``t`` may be a scalar or an array.
    """
    c = _coefficients(es, src, dst)
    t = np.asarray(t, dtype=float)
    return np.exp(-1j * np.multiply.outer(t, es.eigenvalues)) @ c


def transport_probability(es: EigenSystem, src: int, dst: int, t):
    return np.abs(amplitude(es, src, dst, t)) ** 2


def transport_derivative(es: EigenSystem, src: int, dst: int, t):
    """Analytic ``dp/dt = 2 Re(conj(A) dA/dt)``."""
    c = _coefficients(es, src, dst)
    t = np.asarray(t, dtype=float)
    phase = np.exp(-1j * np.multiply.outer(t, es.eigenvalues))
    a = phase @ c
    da = phase @ (-1j * es.eigenvalues * c)
    return 2.0 * np.real(np.conj(a) * da)


@dataclass(frozen=True)
class SearchConfig:
    nu: float = 2.0
    threshold: float = 0.5
    grid_step: Optional[float] = None
    refine_tol: float = 1e-10

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        if not 0 < self.threshold <= 1:
            raise ValueError("threshold must lie in (0, 1]")
        if self.grid_step is not None and not self.grid_step > 0:
            raise ValueError("grid_step must be positive")

    def step_for(self, es: EigenSystem) -> float:
        if self.grid_step is not None:
            return self.grid_step
        rho = es.spectral_radius
        return min(0.05, math.pi / (20.0 * rho)) if rho > 0 else 0.05


@dataclass(frozen=True)
class TransportEvent:
    time: float
    probability: float
    kind: str
    above_threshold: bool
    nu: float
    threshold: float

    def to_dict(self) -> dict:
        return {
            "t_star": self.time,
            "p_star": self.probability,
            "kind": self.kind,
            "above_threshold": self.above_threshold,
            "nu": self.nu,
            "threshold": self.threshold,
        }


class _Signal:
    """Probability and derivative of one (src, dst) pair, vectorised in time."""

    def __init__(self, es: EigenSystem, src: int, dst: int):
        c = _coefficients(es, src, dst)
        keep = np.abs(c) > 1e-15
        self.lam = es.eigenvalues[keep]
        self.c = c[keep]
        self.dc = -1j * self.lam * self.c

    def __call__(self, t):
        phase = np.exp(-1j * np.multiply.outer(np.asarray(t, dtype=float), self.lam))
        a = phase @ self.c
        da = phase @ self.dc
        return np.abs(a) ** 2, 2.0 * np.real(np.conj(a) * da)

    def p(self, t: float) -> float:
        return float(self(t)[0])

    def dp(self, t: float) -> float:
        return float(self(t)[1])


def _chunks(t_max: float, step: float, size: int = 4096):
    count = max(2, int(math.ceil(t_max / step)) + 1)
    grid = np.linspace(0.0, t_max, count)
    for lo in range(0, count - 1, size - 1):
        yield grid[lo:lo + size]


def first_maximum(
    es: EigenSystem, src: int, dst: int, distance: float, cfg: SearchConfig = SearchConfig()
) -> TransportEvent:
    """Earliest local maximum of ``p(t)`` in ``(0, nu*distance]`` reaching the threshold.

    If no peak reaches the threshold the earliest peak is returned with
    ``above_threshold=False``; with no peak at all the window maximum is
    returned the same way.
    """
    t_max = cfg.nu * distance
    if not t_max > 0:
        raise ValueError("search window nu*d must be positive")
    sig = _Signal(es, src, dst)
    step = min(cfg.step_for(es), t_max / 2)
    fallback = None
    best_grid = (0.0, -1.0)
    for ts in _chunks(t_max, step):
        p, dp = sig(ts)
        i_best = int(np.argmax(p))
        if p[i_best] > best_grid[1]:
            best_grid = (float(ts[i_best]), float(p[i_best]))
        cand = np.nonzero((dp[:-1] > 0) & (dp[1:] <= 0))[0]
        for i in cand:
            if max(p[i], p[i + 1]) < NOISE_FLOOR:
                continue
            if dp[i + 1] == 0:
                t_star = float(ts[i + 1])
            else:
                t_star = brentq(sig.dp, ts[i], ts[i + 1], xtol=cfg.refine_tol, rtol=1e-15)
            p_star = sig.p(t_star)
            if p_star >= cfg.threshold:
                return TransportEvent(t_star, p_star, FIRST_MAX, True, cfg.nu, cfg.threshold)
            if fallback is None:
                fallback = (t_star, p_star)
    if fallback is None:
        fallback = best_grid
    return TransportEvent(fallback[0], fallback[1], FIRST_MAX, False, cfg.nu, cfg.threshold)


def window_maximum(
    es: EigenSystem, src: int, dst: int, distance: float, cfg: SearchConfig = SearchConfig()
) -> TransportEvent:
    """Global maximum of ``p(t)`` over ``[0, nu*distance]``; earliest wins ties."""
    t_max = cfg.nu * distance
    if not t_max > 0:
        raise ValueError("search window nu*d must be positive")
    sig = _Signal(es, src, dst)
    step = min(cfg.step_for(es), t_max / 2)
    best_t, best_p = 0.0, -1.0
    for ts in _chunks(t_max, step):
        p, _ = sig(ts)
        i = int(np.argmax(p))
        if p[i] > best_p:
            best_t, best_p = float(ts[i]), float(p[i])
    lo, hi = max(0.0, best_t - step), min(t_max, best_t + step)
    if hi > lo:
        dlo, dhi = sig.dp(lo), sig.dp(hi)
        if dlo > 0 > dhi:
            t_ref = brentq(sig.dp, lo, hi, xtol=cfg.refine_tol, rtol=1e-15)
        else:
            res = minimize_scalar(lambda t: -sig.p(t), bounds=(lo, hi), method="bounded",
                                  options={"xatol": cfg.refine_tol})
            t_ref = float(res.x)
        p_ref = sig.p(t_ref)
        if p_ref > best_p:
            best_t, best_p = t_ref, p_ref
    return TransportEvent(best_t, best_p, WINDOW_MAX, best_p >= cfg.threshold, cfg.nu,
                          cfg.threshold)


def trace(es: EigenSystem, src: int, dst: int, times) -> np.ndarray:
    """Rows of ``(t, p, dp/dt)``."""
    times = np.asarray(times, dtype=float)
    sig = _Signal(es, src, dst)
    p, dp = sig(times)
    return np.column_stack([times, p, dp])


def event_as_dict(event: TransportEvent) -> dict:
    return asdict(event)
