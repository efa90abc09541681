import math
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from dexcex.amm_v2 import (
    PoolStateV2,
    amount_out,
    ba_spread,
    execute_swap,
    half_spread,
    impermanent_loss_v2,
    quoted_price,
    transaction_price,
)
from dexcex.domain import Pair
from dexcex.errors import DomainError

PAIR = Pair.parse("ETH-USDC")
reserve = st.floats(min_value=1e-3, max_value=1e12)
fee = st.floats(min_value=0.0, max_value=0.05)


def pool(x, y, f=0.003):
    return PoolStateV2(PAIR, x, y, f)


def test_quoted_price():
    assert quoted_price(pool(1000, 1000)) == 1.0
    assert quoted_price(pool(100, 200)) == 2.0
    p = pool(200, 100)
    assert quoted_price(p) == 0.5
    assert quoted_price(p, inverse=True) == 2.0


def test_amount_out_examples():
    # exact rational evaluation of y*phi*dx/(x+phi*dx)
    phi = 1 - Fraction(3, 1000)
    expected = 1000 * phi * 100 / (1000 + phi * 100)
    assert amount_out(pool(1000, 1000), 100) == pytest.approx(float(expected), rel=1e-15)
    assert float(expected) == pytest.approx(90.6611, abs=1e-4)
    assert amount_out(pool(1000, 1000, 0.0), 1000) == 500.0
    assert amount_out(pool(1000, 1000), 1e-12) == pytest.approx(0.0, abs=1e-11)
    with pytest.raises(DomainError):
        amount_out(pool(1000, 1000), 0.0)
    with pytest.raises(DomainError):
        amount_out(pool(1000, 1000), -1.0)


def test_execute_swap_example():
    res = execute_swap(pool(1000, 1000), 100)
    assert res.new_state.x == pytest.approx(1099.7)
    assert res.new_state.y == pytest.approx(909.3389, abs=1e-4)
    assert res.new_state.x * res.new_state.y == pytest.approx(1e6, rel=1e-12)
    assert res.new_state.fees_x == pytest.approx(0.3)
    assert res.transaction_price == pytest.approx(res.amount_out / (0.997 * 100), rel=1e-14)


def test_execute_swap_tiny_trade_leaves_state_nearly_unchanged():
    p = pool(1000, 1000, 0.0)
    res = execute_swap(p, 1e-15)
    assert res.new_state.x == pytest.approx(p.x, rel=1e-15)
    assert res.new_state.y == pytest.approx(p.y, rel=1e-15)


@given(reserve, reserve, st.floats(1e-6, 1e3), st.floats(1e-6, 1e3))
def test_two_swaps_compose_without_fees(x, y, a, b):
    p = pool(x, y, 0.0)
    first = execute_swap(p, a * x)
    second = execute_swap(first.new_state, b * x)
    combined = execute_swap(p, a * x + b * x)
    assert first.amount_out + second.amount_out == pytest.approx(combined.amount_out, rel=1e-9)


def test_half_spread_examples():
    assert half_spread(pool(1000, 1000), 100) == pytest.approx(906.611, abs=1e-3)
    assert half_spread(pool(1000, 1000, 0.0), 1000) == pytest.approx(5000.0, rel=1e-15)
    assert half_spread(pool(1000, 1000), 1e-12) < 1e-9


def test_ba_spread_symmetric_and_asymmetric():
    sym = pool(1000, 1000, 0.0)
    # 100 USD at 1 USD per token is dx = dy = 100
    assert ba_spread(sym, 100, 1.0, 1.0) == pytest.approx(half_spread(sym, 100), rel=1e-15)

    # at USD prices matching the pool quote both directions move the same share of
    # reserves; an external X price off the pool quote breaks the symmetry
    asym = pool(100, 10_000, 0.003)
    usd_x, usd_y = 80.0, 1.0
    phi = 0.997
    up = 1e4 * phi * 12.5 / (100 + phi * 12.5)  # 1000 USD buys 12.5 X
    down = 1e4 * phi * 1000 / (10_000 + phi * 1000)
    assert up == pytest.approx(half_spread(asym, 12.5), rel=1e-14)
    assert up != pytest.approx(down)
    assert ba_spread(asym, 1000, usd_x, usd_y) == pytest.approx((up + down) / 2, rel=1e-12)
    assert ba_spread(asym, 1e-9, usd_x, usd_y) < 1e-6


def test_impermanent_loss_examples():
    assert impermanent_loss_v2(1.0).value == 0.0
    il = impermanent_loss_v2(4.0)
    assert (il.lp_return, il.hold_return, il.value) == (2.0, 2.5, 0.5)
    assert impermanent_loss_v2(0.25).value == 0.125
    assert impermanent_loss_v2(4.0, percentage=True).value == pytest.approx(2 * 2 / 5 - 1)
    with pytest.raises(DomainError):
        impermanent_loss_v2(0.0)


def test_pool_validation():
    with pytest.raises(DomainError):
        pool(0, 1)
    with pytest.raises(DomainError):
        pool(1, 1, 1.0)
    with pytest.raises(DomainError):
        pool(1, 1, -0.1)


@given(reserve, reserve, fee, st.floats(1e-9, 1e3))
def test_constant_product_invariance(x, y, f, rel_dx):
    p = pool(x, y, f)
    dx = rel_dx * x
    dy = amount_out(p, dx)
    assert dy < y
    assert (x + p.phi * dx) * (y - dy) == pytest.approx(x * y, rel=1e-12)


@given(reserve, reserve, fee, st.floats(1e-9, 1e3))
def test_transaction_price_below_quote(x, y, f, rel_dx):
    p = pool(x, y, f)
    assert transaction_price(p, rel_dx * x) < quoted_price(p)


def test_transaction_price_tends_to_quote():
    p = pool(1000, 2000)
    assert transaction_price(p, 1e-9) == pytest.approx(quoted_price(p), rel=1e-11)


@given(reserve, fee, st.floats(1e-6, 10), st.floats(1e-6, 10), st.floats(1e-6, 10))
def test_half_spread_increasing_and_concave(x, f, a, b, c):
    d1, d2, d3 = sorted({a * x, b * x, c * x})[:3] if len({a, b, c}) == 3 else (None,) * 3
    assume(d1 is not None and d3 - d2 > 1e-6 * x and d2 - d1 > 1e-6 * x)
    p = pool(x, x, f)
    s1, s2, s3 = (half_spread(p, d) for d in (d1, d2, d3))
    assert s1 < s2 < s3
    # chord slopes decrease for a concave function
    assert (s3 - s2) / (d3 - d2) <= (s2 - s1) / (d2 - d1) * (1 + 1e-9)


@given(st.floats(1e-6, 1e6))
def test_il_nonnegative(dp):
    il = impermanent_loss_v2(dp).value
    assert il >= 0
    if dp != 1.0:
        assert il > 0 or math.isclose(dp, 1.0, rel_tol=1e-7)
        assert impermanent_loss_v2(1 / dp).value >= 0


@given(reserve, reserve, st.floats(1e-6, 10))
def test_round_trip_without_fee(x, y, rel_dx):
    p = pool(x, y, 0.0)
    dx = rel_dx * x
    fwd = execute_swap(p, dx)
    back = execute_swap(fwd.new_state.inverted(), fwd.amount_out)
    assert back.amount_out == pytest.approx(dx, rel=1e-9)
