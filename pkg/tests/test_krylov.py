import json
import math

import numpy as np
import pytest

from oracles import random_notations
from chiralwalk.graphs import build, graph_from_dict
from chiralwalk.hamiltonian import build_hamiltonian
from chiralwalk.krylov import (
    build_weighted_path,
    coupling_profile,
    even_cycle_betas,
    lanczos,
    overlap_csv,
    overlap_map,
    path_couplings,
    reduced_probability,
    speedup_sweep,
    w_opt_reference,
)
from chiralwalk.propagator import diagonalize, first_maximum, transport_probability

HALF_PI = math.pi / 2


def _h(text, phases=None):
    g = build(text)
    rng = np.random.default_rng(len(text))
    ph = phases if phases is not None else list(rng.uniform(0, 2 * math.pi, len(g.loops)))
    return build_hamiltonian(g, ph)


@pytest.mark.parametrize("text", random_notations(10, seed=21))
def test_reduction_invariants(text):
    h = _h(text)
    kr = lanczos(h)
    k = kr.basis
    assert np.max(np.abs(k.conj() @ k.T - np.eye(kr.dim))) < 1e-10
    assert np.max(np.abs(k.conj() @ h.matrix @ k.T - kr.tridiagonal())) < 1e-10
    assert np.all(kr.betas > 0) and len(kr.betas) == kr.dim - 1
    assert abs(k[0, h.graph.start - 1]) == 1.0


def test_path_is_already_tridiagonal():
    kr = lanczos(_h("P5"))
    assert kr.dim == 5
    assert np.allclose(np.abs(kr.basis), np.eye(5))
    assert np.allclose(kr.betas, 1.0) and np.allclose(kr.alphas, 0.0)
    assert kr.target_overlap == pytest.approx(1.0)


@pytest.mark.parametrize("half", [2, 3, 5])
def test_even_cycle_dimensions(half):
    n = 2 * half
    zero = lanczos(_h(f"C{n}", [0.0]))
    assert zero.dim == half + 1
    assert np.allclose(zero.betas, even_cycle_betas(half))
    blocked = lanczos(_h(f"C{n}", [math.pi]))
    assert blocked.dim == half
    assert blocked.target_weight < 1e-10


def test_kite_chain_matches_weighted_triangle_chain():
    # each kite with opposite quarter phases reduces to a triangle with sqrt(2) sides
    for k in (1, 3, 6):
        kite = lanczos(_h(f"chain(DiC4(1,3),{k})", [HALF_PI, -HALF_PI] * k))
        tri = build(f"chain(C3,{k})")
        deg = [len(nb) for nb in tri.neighbors()]
        data = tri.to_dict()
        data["weights"] = [math.sqrt(2) if 2 in (deg[a], deg[b]) else 1.0 for a, b in tri.edges]
        ref = lanczos(build_hamiltonian(graph_from_dict(data), [HALF_PI] * k))
        assert kite.dim == ref.dim
        assert np.max(np.abs(kite.betas - ref.betas)) < 1e-10


@pytest.mark.parametrize("text,phases", [
    ("chain(C3,5)", [HALF_PI] * 5),
    ("chain(C4,4)", [0.0] * 4),
    ("h(C9)", [HALF_PI]),
    ("chain(DiC4(1,3),3)", [HALF_PI, -HALF_PI] * 3),
    ("C8", [0.0]),
])
def test_projected_transport_equals_full(text, phases):
    # the evolved state never leaves the Krylov space
    h = _h(text, phases)
    g = h.graph
    kr = lanczos(h)
    assert kr.target_weight == pytest.approx(1.0, abs=1e-10)
    es = diagonalize(kr.tridiagonal())
    ts = np.linspace(0, 20, 81)
    u = es.eigenvectors
    evolved = np.exp(-1j * np.multiply.outer(ts, es.eigenvalues)) @ (u * u[0].conj()).T
    amp = evolved @ kr.basis[:, g.target - 1]
    full = transport_probability(diagonalize(h), g.start, g.target, ts)
    assert np.max(np.abs(np.abs(amp) ** 2 - full)) < 1e-10
    if kr.target_overlap > 1 - 1e-12:
        assert np.max(np.abs(reduced_probability(kr, ts) - full)) < 1e-10


def test_weighted_paths():
    g = build_weighted_path(6, 1.5)
    assert [g.weights[e] for e in g.edges] == list(path_couplings(6, 1.5))
    with pytest.raises(ValueError):
        build_weighted_path(2, 1.0)
    assert w_opt_reference(51) == pytest.approx(1.03 * 49 ** (-1 / 6))


def test_speedup_sweep_unit_weight_is_plain_path():
    ((w, p),) = speedup_sweep(11, [1.0])
    es = diagonalize(build_hamiltonian(build("P11"), []))
    from chiralwalk.propagator import SearchConfig
    ref = first_maximum(es, 1, 11, 10, SearchConfig(threshold=1e-6))
    assert w == 1.0 and p == pytest.approx(ref.probability, abs=1e-12)
    with pytest.raises(ValueError):
        speedup_sweep(4, [1.0])


def test_exports():
    kr = lanczos(_h("C6", [0.0]))
    d = json.loads(kr.to_json())
    assert d["dim"] == 4 and len(d["betas"]) == 3
    lines = overlap_csv(kr).splitlines()
    assert lines[0].startswith("# schema=chiralwalk.krylov/1")
    assert len(lines) == 2 + kr.dim
    assert overlap_map(kr).shape == (4, 6)
    assert coupling_profile(kr)[:, 0].tolist() == [1, 2, 3]
