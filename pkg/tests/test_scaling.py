import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import jnp_zeros, jv

from chiralwalk.graphs import distance
from chiralwalk.notation import parse
from chiralwalk.scaling import (
    Family,
    bessel_first_max,
    bessel_peak_expansion,
    family,
    fit_asymptotic,
    fit_linear,
    log_spaced,
    path_event,
    sizes_for_distances,
    time_distance_series,
    unit_phases,
)


@given(st.floats(-5, 5), st.floats(-50, 50), st.integers(3, 30))
def test_linear_fit_exact(m, q, count):
    xs = np.arange(1, count + 1, dtype=float)
    fit = fit_linear(list(zip(xs, m * xs + q)))
    assert fit.m == pytest.approx(m, abs=1e-9)
    assert fit.q == pytest.approx(q, abs=1e-7)
    assert fit.r2 == pytest.approx(1.0) and fit.count == count


def test_linear_fit_errors():
    with pytest.raises(ValueError):
        fit_linear([(1, 1), (2, 2)])
    with pytest.raises(ValueError):
        fit_linear([(3, 1), (3, 2), (3, 5)])
    with pytest.raises(ValueError):
        fit_linear([1, 2, 3])


def test_asymptotic_fit_recovers_synthetic():
    d = np.array(log_spaced(100, 1000, 16), dtype=float)
    y = 2.5 * d ** (-2 / 3) - 4.0 * d ** (-4 / 3)
    fit = fit_asymptotic(list(zip(d, y)))
    assert fit.c1 == pytest.approx(2.5, rel=1e-10)
    assert fit.c2 == pytest.approx(-4.0, rel=1e-8)
    assert fit.residual < 1e-12
    sub = fit_asymptotic(list(zip(d, y)), d_min=300)
    assert sub.d_range[0] >= 300 and sub.count < fit.count
    with pytest.raises(ValueError):
        fit_asymptotic([(10, 1), (20, 1), (30, 1)])


@pytest.mark.parametrize("order", [1, 2, 5, 10, 50, 100, 400])
def test_bessel_first_max_matches_scipy_zero(order):
    t, p = bessel_first_max(order)
    assert t == pytest.approx(jnp_zeros(order, 1)[0], rel=1e-12)
    assert p == pytest.approx(jv(order, t) ** 2, rel=1e-12)


def test_bessel_frozen_values():
    assert bessel_first_max(1)[0] == pytest.approx(1.841183781, abs=1e-9)
    assert bessel_first_max(0) == (0.0, 1.0)
    assert bessel_peak_expansion(100) == pytest.approx(jv(100, bessel_first_max(100)[0]),
                                                       rel=1e-4)


@pytest.mark.parametrize("name,sizes", [
    ("P", [2, 7, 30]),
    ("C-even", [4, 10, 22]),
    ("C-odd", [3, 9, 21]),
    ("hC-even", [4, 12]),
    ("hC-odd", [5, 13]),
    ("chain:C3", [1, 4, 9]),
    ("chain:C4", [2, 5]),
    ("chain:DiC4(1,3)", [1, 3, 7]),
    ("chain:C7", [2, 3]),
])
def test_family_distance_matches_graph(name, sizes):
    fam = family(name)
    for s in sizes:
        g = fam.graph(s)
        assert fam.distance_of(s) == distance(g)
        assert len(fam.loop_phases(s)) == len(g.loops)
        assert fam.size_for(fam.distance_of(s)) == s


def test_family_errors():
    with pytest.raises(ValueError):
        family("Q")
    with pytest.raises(ValueError):
        family("C-even").spec(5)
    with pytest.raises(ValueError):
        unit_phases(parse("DiC5(1,3)"))
    assert Family("chain", parse("DiC5(1,3)"), (0.1, 0.2)).loop_phases(2) == [0.1, 0.2] * 2


def test_log_spaced():
    assert log_spaced(10, 100, 1) == [10, 100]
    vals = log_spaced(200, 600, 16)
    assert vals[0] == 200 and vals[-1] <= 600
    assert vals == sorted(set(vals))
    with pytest.raises(ValueError):
        log_spaced(0, 10)


def test_sizes_for_distances_deduplicate():
    assert sizes_for_distances(family("C-odd"), [5, 5, 6]) == [11, 13]


def test_path_series_and_event():
    series = time_distance_series(family("P"), [5, 10, 20, 40], threads=1)
    fit = fit_linear(series)
    assert 0.5 < fit.m < 0.6 and fit.r2 > 0.999
    ev = path_event(1)
    assert ev.time == pytest.approx(math.pi / 2, abs=1e-8)
