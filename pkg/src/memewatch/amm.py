"""Constant-product liquidity pool arithmetic (x * y = k).

Pools hold ``reserve_token`` units of the traded token and ``reserve_quote``
units of the quote asset. Swaps never mutate a pool; they return the amount
moved and the resulting pool. Fees are taken on the input side and stay in
the pool, so ``k`` only grows when ``fee_fraction > 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import InputError


@dataclass(frozen=True)
class PoolState:
    reserve_token: float
    reserve_quote: float
    fee_fraction: float = 0.0

    def __post_init__(self):
        if not (self.reserve_token > 0 and self.reserve_quote > 0):
            raise InputError("pool reserves must be strictly positive")
        if not 0.0 <= self.fee_fraction <= 0.01:
            raise InputError(f"fee_fraction must lie in [0, 0.01], got {self.fee_fraction}")

    @property
    def k(self) -> float:
        return self.reserve_token * self.reserve_quote

    @property
    def price(self) -> float:
        return self.reserve_quote / self.reserve_token


def spot_price(pool: PoolState) -> float:
    return pool.reserve_quote / pool.reserve_token


def swap_quote_in(pool: PoolState, dq: float) -> tuple[float, PoolState]:
    """Buy tokens with ``dq`` quote units. Returns ``(tokens_out, new_pool)``."""
    if not dq > 0:
        raise InputError(f"quote input must be positive, got {dq!r}")
    x, y, f = pool.reserve_token, pool.reserve_quote, pool.fee_fraction
    new_x = x * y / (y + dq * (1.0 - f))
    return x - new_x, PoolState(new_x, y + dq, f)


def swap_token_in(pool: PoolState, dx: float) -> tuple[float, PoolState]:
    """Sell ``dx`` tokens into the pool. Returns ``(quote_out, new_pool)``."""
    if not dx > 0:
        raise InputError(f"token input must be positive, got {dx!r}")
    x, y, f = pool.reserve_token, pool.reserve_quote, pool.fee_fraction
    new_y = x * y / (x + dx * (1.0 - f))
    return y - new_y, PoolState(x + dx, new_y, f)


def swap_exact_token_out(pool: PoolState, dx: float) -> tuple[float, PoolState]:
    """Quote needed (fee included) to take exactly ``dx`` tokens out of the pool."""
    x, y, f = pool.reserve_token, pool.reserve_quote, pool.fee_fraction
    if not 0 < dx < x:
        raise InputError(f"token output must lie in (0, {x}), got {dx!r}")
    new_x = x - dx
    gross = (x * y / new_x - y) / (1.0 - f)
    return gross, PoolState(new_x, y + gross, f)


def swap_exact_quote_out(pool: PoolState, dq: float) -> tuple[float, PoolState]:
    """Tokens needed (fee included) to take exactly ``dq`` quote out of the pool."""
    x, y, f = pool.reserve_token, pool.reserve_quote, pool.fee_fraction
    if not 0 < dq < y:
        raise InputError(f"quote output must lie in (0, {y}), got {dq!r}")
    new_y = y - dq
    gross = (x * y / new_y - x) / (1.0 - f)
    return gross, PoolState(x + gross, new_y, f)


def _input_for_ratio(reserve: float, m: float, fee: float) -> float:
    # positive root of (1-f) d^2 + (2-f) r d + (1-m) r^2 = 0, written without
    # cancellation so m -> 1 stays accurate
    a = 2.0 - fee
    return 2.0 * (m - 1.0) * reserve / (a + math.sqrt(a * a + 4.0 * (1.0 - fee) * (m - 1.0)))


def cost_to_multiply_price(pool: PoolState, m: float) -> float:
    """Quote input that lifts the spot price by a factor ``m`` in one buy.

    At zero fee this is ``reserve_quote * (sqrt(m) - 1)``.
    """
    if not m > 1:
        raise InputError(f"price multiplier must exceed 1, got {m!r}")
    return _input_for_ratio(pool.reserve_quote, m, pool.fee_fraction)


def tokens_to_divide_price(pool: PoolState, m: float) -> float:
    """Token input that cuts the spot price by a factor ``m`` in one sell."""
    if not m > 1:
        raise InputError(f"price divisor must exceed 1, got {m!r}")
    return _input_for_ratio(pool.reserve_token, m, pool.fee_fraction)
