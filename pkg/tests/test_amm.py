import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memewatch.amm import (PoolState, cost_to_multiply_price, spot_price, swap_exact_quote_out,
                           swap_exact_token_out, swap_quote_in, swap_token_in,
                           tokens_to_divide_price)
from memewatch.exceptions import InputError

reserve = st.floats(min_value=1e-3, max_value=1e9)
fraction = st.floats(min_value=1e-9, max_value=0.95)
fee = st.sampled_from([0.0, 0.001, 0.003, 0.01])


def test_spot_price_examples():
    assert spot_price(PoolState(1000, 1)) == 0.001
    assert spot_price(PoolState(7.5, 7.5)) == 1.0
    assert spot_price(PoolState(500, 2)) == 0.004


def test_quote_in_example():
    out, pool = swap_quote_in(PoolState(1000, 1), 1.0)
    assert out == pytest.approx(500, rel=1e-12)
    assert (pool.reserve_token, pool.reserve_quote) == pytest.approx((500, 2), rel=1e-12)


def test_tiny_swaps_move_almost_nothing():
    out, _ = swap_quote_in(PoolState(1000, 1), 1e-12)
    assert 0 < out < 1e-8
    cost, _ = swap_exact_token_out(PoolState(1000, 1), 1e-9)
    assert 0 < cost < 1e-11


def test_split_buys_equal_one_buy_without_fee():
    pool = PoolState(1000, 1)
    a, mid = swap_quote_in(pool, 0.5)
    b, _ = swap_quote_in(mid, 0.5)
    one, _ = swap_quote_in(pool, 1.0)
    assert a + b == pytest.approx(one, rel=1e-12)
    feeful = PoolState(1000, 1, 0.003)
    a, mid = swap_quote_in(feeful, 0.5)
    b, _ = swap_quote_in(mid, 0.5)
    assert a + b < swap_quote_in(feeful, 1.0)[0]


def test_round_trip_restores_pool():
    pool = PoolState(1000, 1)
    cost, mid = swap_exact_token_out(pool, 500)
    back, end = swap_token_in(mid, 500)
    assert back == pytest.approx(cost, rel=1e-12)
    assert end.reserve_quote == pytest.approx(1.0, rel=1e-12)
    assert end.reserve_token == pytest.approx(1000, rel=1e-12)


def test_multiplier_examples():
    pool = PoolState(1000, 1)
    cost = cost_to_multiply_price(pool, 9)
    assert cost == pytest.approx(2.0, rel=1e-12)
    out, after = swap_quote_in(pool, cost)
    assert out == pytest.approx(2000 / 3, rel=1e-12)
    assert after.price == pytest.approx(0.009, rel=1e-12)
    assert cost_to_multiply_price(PoolState(50, 10), 4) == pytest.approx(10, rel=1e-12)
    eps = 1e-6
    assert cost_to_multiply_price(pool, 1 + eps) == pytest.approx(eps / 2, rel=1e-6)


def test_bad_inputs():
    with pytest.raises(InputError):
        PoolState(0, 1)
    with pytest.raises(InputError):
        PoolState(1, 1, 0.02)
    pool = PoolState(1000, 1)
    for call in (lambda: swap_quote_in(pool, 0), lambda: swap_token_in(pool, -1),
                 lambda: swap_exact_token_out(pool, 1000), lambda: swap_exact_quote_out(pool, 1),
                 lambda: cost_to_multiply_price(pool, 1), lambda: tokens_to_divide_price(pool, .5)):
        with pytest.raises(InputError):
            call()


@settings(max_examples=300)
@given(reserve, reserve, st.lists(st.tuples(st.integers(0, 3), fraction), min_size=1, max_size=20))
def test_zero_fee_swaps_conserve_k(x, y, ops):
    pool = PoolState(x, y)
    k0 = pool.k
    for op, frac in ops:
        if op == 0:
            _, pool = swap_quote_in(pool, frac * pool.reserve_quote)
        elif op == 1:
            _, pool = swap_token_in(pool, frac * pool.reserve_token)
        elif op == 2:
            _, pool = swap_exact_token_out(pool, frac * pool.reserve_token)
        else:
            _, pool = swap_exact_quote_out(pool, frac * pool.reserve_quote)
        assert abs(pool.k - k0) / k0 <= 1e-12 * 20


@given(reserve, reserve, fee, fraction)
def test_buys_raise_and_sells_lower_the_price(x, y, f, frac):
    pool = PoolState(x, y, f)
    assert swap_quote_in(pool, frac * y)[1].price > pool.price
    assert swap_token_in(pool, frac * x)[1].price < pool.price


@given(reserve, reserve, fee)
def test_fees_never_shrink_k(x, y, f):
    pool = PoolState(x, y, f)
    _, after = swap_quote_in(pool, 0.3 * y)
    assert after.k >= pool.k * (1 - 1e-12)


@given(reserve, reserve, fee, st.floats(min_value=1.0001, max_value=1e4))
def test_price_multiplier_matches_simulation(x, y, f, m):
    pool = PoolState(x, y, f)
    _, up = swap_quote_in(pool, cost_to_multiply_price(pool, m))
    assert up.price / pool.price == pytest.approx(m, rel=1e-9)
    _, down = swap_token_in(pool, tokens_to_divide_price(pool, m))
    assert pool.price / down.price == pytest.approx(m, rel=1e-9)


@given(reserve, st.floats(min_value=1.0001, max_value=1e4))
def test_zero_fee_cost_closed_form(y, m):
    assert cost_to_multiply_price(PoolState(1.0, y), m) == pytest.approx(
        y * (m - 1) / (math.sqrt(m) + 1), rel=1e-12)
