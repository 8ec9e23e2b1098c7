"""Tower arithmetic: the numbers the selection chains produce are far past
float range, so the representation and its total order carry real weight."""

import math

import pytest
from hypothesis import given, strategies as st

from bvmix.tower import (TowerReal, exp_ceil, from_real, parse, render,
                         tetrate, to_real, tower_compare, tower_exp,
                         tower_ln, tower_negate, tower_pow, tower_recip,
                         tower_scale)

finite_floats = st.floats(min_value=-1e12, max_value=1e12,
                          allow_nan=False, allow_infinity=False)


def test_tetrate_base_cases():
    assert to_real(tetrate(0, 2.5)) == 2.5
    assert to_real(tetrate(1, 0.0)) == 1.0
    assert to_real(tetrate(2, 0.0)) == pytest.approx(math.e, rel=1e-15)


def test_tetrate_triple_exp_of_one():
    got = to_real(tetrate(3, 1.0))
    assert got == pytest.approx(math.exp(math.exp(math.e)), rel=1e-12)


def test_tetrate_negative_count_rejected():
    with pytest.raises(ValueError):
        tetrate(-1, 1.0)


def test_tetrate_order():
    # e^e^10 dwarfs e^e^e even though 3 > 2 applications
    assert tower_compare(tetrate(2, 10.0), tetrate(3, 1.0)) > 0
    assert tower_compare(tetrate(10, 1.0), tetrate(9, 1.0)) > 0


def test_exp_of_zero():
    assert tower_compare(tower_exp(from_real(0.0)), from_real(1.0)) == 0


def test_ln_inverts_exp():
    for v in (0.5, 3.0, 700.0, 1e150):
        a = from_real(v)
        assert to_real(tower_ln(tower_exp(a))) == pytest.approx(v, rel=1e-12)
    # above plain float reach the round trip is exact structurally
    big = tetrate(6, 0.4)
    assert tower_compare(tower_ln(tower_exp(big)), big) == 0


def test_scale_shifts_logarithm():
    # e^e scaled by e is e^(e+1)
    scaled = tower_scale(tetrate(2, 1.0), math.e)
    assert to_real(tower_ln(scaled)) == pytest.approx(1.0 + math.e, rel=1e-12)


def test_scale_by_one_is_identity():
    t = tetrate(4, 0.3)
    assert tower_compare(tower_scale(t, 1.0), t) == 0


def test_tall_towers_absorb_huge_factors():
    # at height 5 a factor of 10^100 is below representable resolution
    t = tetrate(5, 1.0)
    assert tower_compare(tower_scale(t, 1e100), t) == 0


def test_recip_and_negate():
    t = tetrate(4, 1.0)
    r = tower_recip(t)
    assert tower_compare(r, from_real(0.0)) > 0
    assert tower_compare(r, from_real(1e-300)) < 0
    assert tower_compare(tower_negate(t), from_real(0.0)) < 0
    assert tower_compare(tower_recip(r), t) == 0
    # within plain range the reciprocal is literal
    assert to_real(tower_recip(tetrate(3, 1.0))) == pytest.approx(
        1.0 / math.exp(math.exp(math.e)), rel=1e-12)


def test_pow_matches_float():
    assert to_real(tower_pow(from_real(3.0), 4)) == pytest.approx(81.0, rel=1e-12)


def test_round_trip_floats():
    # plain reach is |v| <= e^355 or so; past that the class is coarse
    for v in (0.0, 1.0, -2.5, 1e-150, -3e122, 1e150):
        assert to_real(from_real(v)) == pytest.approx(v, rel=1e-12)


def test_saturation_above_plain_range():
    a = from_real(1e300)
    assert to_real(a) == math.inf
    assert tower_compare(a, from_real(1e150)) > 0
    assert tower_compare(a, tetrate(3, 1.0)) > 0
    assert tower_compare(a, tetrate(4, 1.0)) < 0


def test_render_parse_round_trip():
    samples = [from_real(0.0), from_real(-7.25), tetrate(3, 1.0),
               tower_recip(tetrate(4, 0.5)), tower_negate(tetrate(2, 2.0))]
    for t in samples:
        assert tower_compare(parse(render(t)), t) == 0


def test_render_forms():
    assert render(from_real(0.0)) == "0"
    assert render(tetrate(4, 1.0)) == "exp^5(0.0)"
    assert render(tower_recip(tetrate(4, 1.0))) == "1/exp^5(0.0)"


def test_parse_rejects_garbage():
    for bad in ("", "exp(1)", "1/exp^0(0.5)", "exp^2(1.5)"):
        with pytest.raises(ValueError):
            parse(bad)


def test_exp_ceil_small_values():
    assert exp_ceil(0.0) == 1
    assert exp_ceil(1.0) == 3
    assert exp_ceil(5.0) == 149
    assert exp_ceil(7.0) == 1097
    assert exp_ceil(8.4) == 4448
    assert exp_ceil(0.0, 4.0) == 4


def test_exp_ceil_past_float_range():
    # 10^400-ish: the float path would overflow, the integer must not
    v = exp_ceil(1000.0)
    assert v > 10**434
    assert v < 10**435


def test_exp_ceil_digit_cap():
    with pytest.raises(OverflowError):
        exp_ceil(1e7)


@given(finite_floats, finite_floats)
def test_order_embeds_floats(x, y):
    cmp = tower_compare(from_real(x), from_real(y))
    assert cmp == (x > y) - (x < y)


@given(finite_floats, finite_floats)
def test_exp_is_monotone(x, y):
    # non-strict: floats below exp's resolution legitimately collapse
    if x < y:
        assert tower_compare(tower_exp(from_real(x)), tower_exp(from_real(y))) <= 0


def test_exp_strictly_orders_separated_points():
    for x, y in ((0.0, 0.5), (-3.0, 2.0), (100.0, 101.0)):
        assert tower_compare(tower_exp(from_real(x)), tower_exp(from_real(y))) < 0


@given(finite_floats)
def test_antisymmetry_with_negate(x):
    a = from_real(x)
    assert tower_compare(tower_negate(a), a) == -tower_compare(a, tower_negate(a))
