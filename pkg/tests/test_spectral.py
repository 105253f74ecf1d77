import math

import numpy as np
import pytest

from oracles import krawtchouk_couplings, random_notations, tridiag
from chiralwalk.graphs import build
from chiralwalk.hamiltonian import build_hamiltonian
from chiralwalk.propagator import amplitude, diagonalize, first_maximum
from chiralwalk.spectral import (
    amplitude_phase_profile,
    find_antisymmetry,
    mode_decomposition,
    phase_mean,
    phase_spread,
    spectrum_is_symmetric,
    spectrum_linearity,
)

HALF_PI = math.pi / 2


@pytest.mark.parametrize("text", random_notations(8, seed=4))
def test_mode_weights_and_reconstruction(text):
    g = build(text)
    rng = np.random.default_rng(2)
    es = diagonalize(build_hamiltonian(g, list(rng.uniform(0, 6, len(g.loops)))))
    md = mode_decomposition(es, g.start, g.target)
    assert md.weights.sum() == pytest.approx(1.0, abs=1e-12)
    ts = np.linspace(0, 12, 25)
    assert np.max(np.abs(md.amplitude(ts) - amplitude(es, g.start, g.target, ts))) < 1e-12


def test_path_mode_phases_alternate():
    es = diagonalize(build_hamiltonian(build("P6"), []))
    md = mode_decomposition(es, 1, 6)
    signs = np.sign(md.coefficients.real)
    assert np.all(np.abs(md.coefficients.imag) < 1e-14)
    assert np.all(signs[1:] == -signs[:-1])


def test_equispaced_spectrum_transfers_perfectly():
    n = 9
    es = diagonalize(tridiag(krawtchouk_couplings(n)))
    assert spectrum_linearity(es) < 1e-12
    ev = first_maximum(es, 1, n, n - 1)
    assert ev.probability == pytest.approx(1.0, abs=1e-9)
    assert ev.time == pytest.approx(math.pi, abs=1e-8)


def test_linearity_edge_cases():
    assert spectrum_linearity([0.0, 0.0, 0.0]) == 0.0
    with pytest.raises(ValueError):
        spectrum_linearity([1.0, 2.0])


@pytest.mark.parametrize("text,phases", [
    ("P7", []),
    ("C4", [0.0]),
    ("C5", [HALF_PI]),
    ("chain(C3,4)", [HALF_PI] * 4),
    ("chain(DiC4(1,3),3)", [HALF_PI, -HALF_PI] * 3),
    ("h(C7)", [HALF_PI]),
])
def test_witness_gives_symmetric_spectrum_and_fixed_phase(text, phases):
    h = build_hamiltonian(build(text), phases)
    w = find_antisymmetry(h)
    assert w.found and w.residual < 1e-10
    s = w.operator()
    assert np.max(np.abs(s.conj().T @ h.matrix @ s + h.matrix)) < 1e-10
    es = diagonalize(h)
    assert spectrum_is_symmetric(es)
    prof = amplitude_phase_profile(es, h.graph.start, h.graph.target, np.linspace(0.5, 30, 400))
    assert phase_spread(prof) < 1e-8


@pytest.mark.parametrize("text,phases", [("C3", [math.pi / 4]), ("C5", [0.3]),
                                         ("chain(C3,3)", [1.0] * 3)])
def test_no_witness_off_optimum(text, phases):
    h = build_hamiltonian(build(text), phases)
    w = find_antisymmetry(h)
    assert not w.found
    es = diagonalize(h)
    prof = amplitude_phase_profile(es, 1, h.graph.target, np.linspace(0.5, 30, 400))
    assert phase_spread(prof) > 1e-3


def test_witness_needs_mirror():
    with pytest.raises(ValueError):
        find_antisymmetry(build_hamiltonian(build("C5/C4"), [0.0, 0.0]))


def test_phase_spread_modulo_pi():
    prof = np.column_stack([np.arange(4.0), [0.2, 0.2 + math.pi, 0.2 - math.pi, 0.2]])
    assert phase_spread(prof) < 1e-12
    odd = np.column_stack([np.arange(3.0), [0.2, 0.2, 0.2 + math.pi]])
    assert phase_spread(odd) < 1e-12
    assert phase_spread(odd, period=2 * math.pi) == pytest.approx(math.pi)
    with pytest.raises(ValueError):
        phase_spread(np.zeros((0, 2)))
    with pytest.raises(ValueError):
        amplitude_phase_profile(diagonalize(np.eye(2)), 1, 2, [0.0], eps=0)


def test_phase_mean():
    prof = np.column_stack([np.arange(3.0), [0.3, 0.3 - math.pi, 0.3 + math.pi]])
    assert phase_mean(prof) == pytest.approx(0.3)
    assert phase_mean(np.array([[0.0, math.pi - 1e-9]])) == pytest.approx(0.0, abs=1e-8)


def test_path_amplitude_phase_is_quarter_turns():
    # A(t) on a real path is i^(-d) times a real function
    for n in (5, 6):
        es = diagonalize(build_hamiltonian(build(f"P{n}"), []))
        prof = amplitude_phase_profile(es, 1, n, np.linspace(0.5, 20, 200))
        want = 0.0 if (n - 1) % 2 == 0 else math.pi / 2
        assert abs(math.remainder(phase_mean(prof) - want, math.pi)) < 1e-10
