import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gapcert.errors import CapabilityError, DomainError, InequalityViolation, ValidationError
from gapcert.regularity import (
    GridFunction,
    Space,
    banach_product_check,
    bvp_bruteforce_oracle,
    bvp_seminorm,
    centered_norm_excess,
    exp_distance,
    full_norm,
    holder_implies_bvp,
    holder_seminorm,
    norm,
    random_lipschitz_function,
    random_step_function,
    turning_points,
)

from oracles import pvariation_recursive

finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)
short_seqs = st.lists(finite, min_size=2, max_size=10)
exponents = st.sampled_from([1.0, 1.25, 1.5, 2.0, 3.0])


def grid_fn(values, interp="linear"):
    return GridFunction(np.linspace(0, 1, len(values)), values, interp)


# spaces ---------------------------------------------------------------------


def test_space_parse_round_trip():
    assert Space.parse("hol:0.5") == Space("hol", 0.5)
    assert Space.parse("lip") == Space("hol", 1.0)
    assert Space.parse("bv") == Space("bvp", 1.0)
    assert str(Space.parse("bvp:2")) == "bvp:2"


@pytest.mark.parametrize("text", ["hol:0", "hol:1.5", "bvp:0.5", "foo:1", "hol:x", "hol"])
def test_space_parse_rejects(text):
    if text == "hol":
        assert Space.parse(text).is_holder
        return
    with pytest.raises((DomainError, ValidationError)):
        Space.parse(text)


# grid functions -------------------------------------------------------------


def test_grid_function_validation():
    with pytest.raises(ValidationError):
        GridFunction([0, 1], [1.0])
    with pytest.raises(ValidationError) as err:
        GridFunction([0, 0.5, 0.5, 1], [0, 0, 0, 0])
    assert err.value.witnesses == [1]
    with pytest.raises(ValidationError):
        GridFunction([0, 1], [0, np.nan])
    with pytest.raises(ValidationError):
        GridFunction([0, 2], [0, 0], domain=(0, 1))


def test_interpolation_rules():
    f = GridFunction([0, 0.5, 1], [0, 1, 0])
    assert f(0.25) == pytest.approx(0.5)
    g = GridFunction([0, 0.5, 1], [0, 1, 0], "constant")
    assert g(0.49) == 0 and g(0.5) == 1 and g(0.99) == 1


def test_csv_and_json_round_trip():
    f = GridFunction(np.linspace(0, 1, 7), np.sin(np.arange(7.0)), "constant")
    back = GridFunction.from_csv(f.to_csv(), interp="constant")
    assert np.array_equal(back.grid, f.grid) and np.array_equal(back.values, f.values)
    back = GridFunction.from_dict(f.to_dict())
    assert back.interp == "constant" and np.array_equal(back.values, f.values)


def test_csv_diagnostics_name_the_line():
    with pytest.raises(ValidationError, match="line 3"):
        GridFunction.from_csv("x,value\n0,1\n0.5,oops\n")
    with pytest.raises(ValidationError, match="line 2"):
        GridFunction.from_csv("x,value\n0,1,2\n")


# Hölder ----------------------------------------------------------------------


def test_holder_identity():
    assert holder_seminorm(GridFunction.from_callable(lambda x: x, np.linspace(0, 1, 50)), 1.0) == pytest.approx(1.0)


def test_holder_sqrt_on_three_points():
    f = GridFunction([0, 0.25, 1], [0, 0.5, 1])
    assert holder_seminorm(f, 0.5) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0])
def test_holder_constant_is_zero(alpha):
    assert holder_seminorm(GridFunction.constant(2.0, np.linspace(0, 1, 9)), alpha) == 0.0


@given(st.lists(finite, min_size=2, max_size=12), st.sampled_from([0.25, 0.5, 0.75, 1.0]))
def test_holder_matches_pairwise_definition(vals, alpha):
    f = grid_fn(vals)
    x, v = f.grid, f.values
    expected = max(abs(v[i] - v[j]) / abs(x[i] - x[j]) ** alpha for i in range(len(x)) for j in range(i))
    assert holder_seminorm(f, alpha) == pytest.approx(expected, rel=1e-12, abs=1e-14)


# p-variation ----------------------------------------------------------------


def test_bvp_worked_values():
    assert bvp_seminorm([0, 1, 0, 1], 1) == pytest.approx(3.0)
    assert bvp_seminorm([0, 1, 0, 1], 2) == pytest.approx(math.sqrt(3), abs=1e-15)
    assert bvp_bruteforce_oracle([0, 1, 0, 1], 2) == pytest.approx(math.sqrt(3), abs=1e-15)
    for p in (1, 1.5, 2, 3):
        assert bvp_seminorm([0, 0.2, 0.9, 1], p) == pytest.approx(1.0)
        assert bvp_seminorm([4, 4, 4], p) == 0.0


def test_oracle_limits():
    with pytest.raises(CapabilityError):
        bvp_bruteforce_oracle(np.zeros(21), 2)
    assert bvp_bruteforce_oracle([1.0], 2) == 0.0


@given(short_seqs, exponents)
def test_bvp_matches_both_oracles(vals, p):
    dp = bvp_seminorm(vals, p)
    assert dp == pytest.approx(bvp_bruteforce_oracle(vals, p), rel=1e-12, abs=1e-12)
    assert dp == pytest.approx(pvariation_recursive(vals, p), rel=1e-12, abs=1e-12)


@given(short_seqs, exponents)
def test_turning_points_preserve_pvariation(vals, p):
    assert bvp_bruteforce_oracle(turning_points(np.array(vals)), p) == pytest.approx(bvp_bruteforce_oracle(vals, p), rel=1e-12, abs=1e-12)


@given(short_seqs)
def test_bv1_is_sum_of_increments(vals):
    assert bvp_seminorm(vals, 1) == pytest.approx(np.abs(np.diff(vals)).sum(), rel=1e-12, abs=1e-12)


@given(short_seqs, exponents, finite, st.floats(min_value=-5, max_value=5))
def test_bvp_translation_and_scaling(vals, p, shift, scale):
    base = bvp_seminorm(vals, p)
    assert bvp_seminorm(np.array(vals) + shift, p) == pytest.approx(base, rel=1e-9, abs=1e-9)
    assert bvp_seminorm(scale * np.array(vals), p) == pytest.approx(abs(scale) * base, rel=1e-9, abs=1e-9)


@given(short_seqs)
def test_bvp_nonincreasing_in_p(vals):
    seq = [bvp_seminorm(vals, p) for p in (1, 1.5, 2, 3, 5)]
    assert all(a >= b - 1e-12 for a, b in zip(seq, seq[1:]))


@given(short_seqs, exponents, st.data())
def test_bvp_refinement_monotone(vals, p, data):
    keep = data.draw(st.lists(st.booleans(), min_size=len(vals), max_size=len(vals)))
    sub = [v for v, k in zip(vals, keep) if k]
    assert bvp_seminorm(sub, p) <= bvp_seminorm(vals, p) + 1e-12


# inequalities ---------------------------------------------------------------


def test_holder_implies_bvp_examples():
    x = np.linspace(0, 1, 200)
    assert holder_implies_bvp(GridFunction(x, x), 1.0) == pytest.approx(1.0)
    assert bvp_seminorm(x, 1) == pytest.approx(1.0)
    holder_implies_bvp(GridFunction(x, np.sqrt(x)), 0.5)
    assert bvp_seminorm(np.sqrt(x), 2) <= 1 + 1e-12
    assert holder_implies_bvp(GridFunction.constant(1, x), 0.5) == 0.0


@given(st.integers(0, 10_000), st.sampled_from([0.5, 1.0]))
def test_holder_implies_bvp_random(seed, alpha):
    f = random_lipschitz_function(np.linspace(0, 1, 12), np.random.default_rng(seed))
    holder_implies_bvp(f, alpha)


def test_banach_product_examples():
    x = np.linspace(0, 1, 11)
    one = GridFunction.constant(1.0, x)
    assert banach_product_check(one, one, "hol:1") == (1.0, 1.0)
    f = GridFunction(x, x)
    assert banach_product_check(f, f, "hol:1") == banach_product_check(f, -f, "hol:1")


@given(st.integers(0, 10_000), st.sampled_from(["hol:1", "hol:0.5", "bvp:1", "bvp:2"]))
def test_banach_product_random(seed, space):
    rng = np.random.default_rng(seed)
    x = np.linspace(0, 1, 10)
    if Space.parse(space).is_holder:
        f, g = random_lipschitz_function(x, rng), random_lipschitz_function(x, rng)
    else:
        f, g = random_step_function(x, rng), random_step_function(x, rng)
    lhs, rhs = banach_product_check(f, g, space)
    assert lhs <= rhs + 1e-9


def test_centered_norm_examples():
    x = np.linspace(0, 1, 101)
    assert centered_norm_excess(GridFunction.constant(3.0, x), "hol:1") == 0.0
    assert centered_norm_excess(GridFunction(x, x), "hol:1") == pytest.approx(1.5)
    assert centered_norm_excess(GridFunction([0, 0.5, 1], [0, 1, 0], "constant"), "bvp:1") == pytest.approx(2.5)


@given(st.integers(0, 10_000), st.sampled_from(["hol:1", "hol:0.5", "bvp:1", "bvp:2"]))
def test_centered_norm_bound_random(seed, space):
    rng = np.random.default_rng(seed)
    x = np.linspace(0, 2, 14)
    make = random_lipschitz_function if Space.parse(space).is_holder else random_step_function
    centered_norm_excess(make(x, rng), space)


def test_centered_norm_violation_is_raised():
    with pytest.raises(InequalityViolation):
        centered_norm_excess(GridFunction(np.linspace(0, 1, 5), np.linspace(0, 1, 5)), "hol:1", eps=-1.0)


def test_exp_distance():
    assert exp_distance(0.0) == 0.0
    assert exp_distance(math.log(97 / 96)) == pytest.approx(1 / 96, rel=1e-14)
    assert exp_distance(0.001) == pytest.approx(0.0010005001667, rel=1e-10)
    with pytest.raises(DomainError):
        exp_distance(-1.0)


def test_norm_record():
    f = GridFunction(np.linspace(0, 2, 5), np.linspace(0, 2, 5))
    info = norm(f, "hol:0.5")
    assert info.diam_factor == pytest.approx(math.sqrt(2))
    assert info.full_norm == pytest.approx(info.sup_norm + math.sqrt(2) * info.seminorm)
    assert set(info.to_dict()) == {"space", "seminorm", "sup", "full"}
    assert full_norm(f, "bvp:1") == pytest.approx(4.0)
