import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gapcert.errors import CapabilityError, DomainError, ValidationError
from gapcert.interval_maps import make_doubling, make_pomeau_manneville
from gapcert.optimal_transport import (
    DiscreteMeasure,
    dual_contraction_check,
    kantorovich_duality_check,
    pushforward_dual,
    random_probability,
    w1,
    w_alpha,
    w_alpha_lp,
)
from gapcert.regularity import GridFunction, random_lipschitz_function

from oracles import wasserstein_equal_atoms

D = DiscreteMeasure.dirac
unit = st.floats(min_value=0, max_value=1)


@st.composite
def probabilities(draw, max_atoms=6):
    n = draw(st.integers(1, max_atoms))
    pts = draw(st.lists(unit, min_size=n, max_size=n))
    w = draw(st.lists(st.floats(min_value=0.01, max_value=1), min_size=n, max_size=n))
    w = np.array(w)
    return DiscreteMeasure(pts, w / w.sum())


def test_measure_merges_and_sorts():
    m = DiscreteMeasure([0.5, 0.1, 0.5], [0.25, 0.5, 0.25])
    assert m.support.tolist() == [0.1, 0.5] and m.weights.tolist() == [0.5, 0.5]
    with pytest.raises(ValidationError):
        DiscreteMeasure([0.1], [-1.0])
    with pytest.raises(ValidationError):
        DiscreteMeasure([], [])


def test_measure_csv_round_trip():
    m = DiscreteMeasure([0.1, 0.7, 0.3], [0.2, 0.5, 0.3])
    back = DiscreteMeasure.from_csv(m.to_csv())
    assert np.array_equal(back.support, m.support) and np.array_equal(back.weights, m.weights)
    assert m.to_csv().splitlines()[0] == "point,weight"
    with pytest.raises(ValidationError):
        DiscreteMeasure.from_csv("point,weight\n0.1\n")


def test_w1_examples():
    assert w1(D(0.25), D(0.75)) == pytest.approx(0.5)
    m = DiscreteMeasure([0.2, 0.4], [0.5, 0.5])
    assert w1(m, m) == 0.0
    mix = DiscreteMeasure([0.0, 0.5], [0.5, 0.5])
    assert w1(mix, D(0.25)) == pytest.approx(0.25)
    assert w_alpha_lp(mix, D(0.25)) == pytest.approx(0.25)
    with pytest.raises(DomainError):
        w1(D(0.0), DiscreteMeasure([0.0], [2.0]))


def test_w_alpha_examples():
    assert w_alpha_lp(D(0.1), D(0.5), 0.5) == pytest.approx(math.sqrt(0.4))
    a = DiscreteMeasure([0.0, 1.0], [0.5, 0.5])
    b = DiscreteMeasure([0.1, 0.9], [0.5, 0.5])
    assert w_alpha_lp(a, b, 0.5) == pytest.approx(math.sqrt(0.1), abs=1e-12)
    assert w_alpha_lp(a, b, 0.5) == pytest.approx(wasserstein_equal_atoms([0, 1], [0.1, 0.9], 0.5), abs=1e-12)


def test_lp_size_limit():
    big = DiscreteMeasure.uniform(np.linspace(0, 1, 201))
    with pytest.raises(CapabilityError):
        w_alpha_lp(big, big, 0.5)


@given(st.integers(1, 5), st.sampled_from([0.3, 0.5, 1.0]), st.integers(0, 10_000))
def test_lp_matches_permutation_oracle(n, alpha, seed):
    rng = np.random.default_rng(seed)
    xs, ys = rng.uniform(size=n), rng.uniform(size=n)
    got = w_alpha_lp(DiscreteMeasure.uniform(xs), DiscreteMeasure.uniform(ys), alpha)
    assert got == pytest.approx(wasserstein_equal_atoms(list(xs), list(ys), alpha), rel=1e-9, abs=1e-12)


@given(probabilities(), probabilities())
def test_w1_equals_lp(mu, nu):
    assert w1(mu, nu) == pytest.approx(w_alpha_lp(mu, nu, 1.0), abs=1e-9)


@given(probabilities(), probabilities(), probabilities(), st.sampled_from([0.5, 1.0]))
def test_metric_axioms(mu, nu, rho, alpha):
    d = lambda a, b: w_alpha(a, b, alpha)
    assert d(mu, mu) == pytest.approx(0, abs=1e-12)
    assert d(mu, nu) == pytest.approx(d(nu, mu), abs=1e-9)
    assert d(mu, rho) <= d(mu, nu) + d(nu, rho) + 1e-9
    if not (np.array_equal(mu.support, nu.support) and np.allclose(mu.weights, nu.weights)):
        assert d(mu, nu) > 0


def test_circle_metric_is_shorter():
    a, b = D(0.05), D(0.95)
    assert w_alpha_lp(a, b, 1.0, "circle", 1.0) == pytest.approx(0.1)
    assert w_alpha(a, b, 1.0) == pytest.approx(0.9)


# dual operator ---------------------------------------------------------------


@given(probabilities())
def test_pushforward_conserves_mass(mu):
    for spec in (make_pomeau_manneville(1.0), make_doubling("interval")):
        assert pushforward_dual(spec, mu).mass == pytest.approx(1.0, abs=1e-15)


def test_tent_dual_contraction_on_diracs():
    spec = make_doubling("tent")
    rep = dual_contraction_check(spec, 1.0, 1, pairs=[(D(0.0), D(1.0))])
    assert rep.max_ratio == pytest.approx(0.5)
    rep = dual_contraction_check(spec, 1.0, 1, pairs=[(D(0.3), D(0.3))])
    assert rep.skipped == 1 and rep.passed


@pytest.mark.parametrize("q", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("alpha", [0.5, 1.0])
def test_pm_dual_contraction(q, alpha):
    rep = dual_contraction_check(make_pomeau_manneville(q), alpha, 40, rng=int(10 * q))
    assert rep.passed and rep.max_ratio <= 0.5 + 2 ** -(1 + alpha) + 1e-9


def test_dual_contraction_threads_agree(monkeypatch):
    spec = make_pomeau_manneville(1.0)
    serial = dual_contraction_check(spec, 1.0, 30, rng=4)
    monkeypatch.setenv("GAPCERT_THREADS", "4")
    threaded = dual_contraction_check(spec, 1.0, 30, rng=4)
    assert threaded.ratios == serial.ratios


def test_duality_examples():
    x = np.linspace(0, 1, 11)
    rep = kantorovich_duality_check(D(0.0), D(1.0), 1.0, [GridFunction(x, x)])
    assert rep.gaps == [pytest.approx(1.0)] and rep.w_alpha == pytest.approx(1.0) and rep.passed
    rep = kantorovich_duality_check(D(0.0), D(1.0), 1.0, [GridFunction.constant(3.0, x)])
    assert rep.gaps == [0.0]


def test_duality_random_lipschitz():
    rng = np.random.default_rng(8)
    x = np.linspace(0, 1, 64)
    mu = random_probability(rng, (0, 1), 16)
    nu = random_probability(rng, (0, 1), 16)
    cands = [random_lipschitz_function(x, rng) for _ in range(20)]
    assert kantorovich_duality_check(mu, nu, 1.0, cands).passed


def test_duality_rejects_steep_candidate_with_index():
    x = np.linspace(0, 1, 11)
    with pytest.raises(ValidationError) as err:
        kantorovich_duality_check(D(0.0), D(1.0), 1.0, [GridFunction(x, x), GridFunction(x, 2 * x)])
    assert err.value.witnesses == [1]
