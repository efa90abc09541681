"""Value types shared by every engine.

Prices, basis points and hour stamps are plain ``float``/``int`` values
validated at the boundaries; tokens and pairs are small frozen dataclasses.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NewType

from .errors import DomainError

HourStamp = NewType("HourStamp", int)
"""Whole hours since the Unix epoch."""

BPS = 1e-4
NATIVE_SYMBOLS = frozenset({"ETH"})


class TokenKind(enum.Enum):
    NATIVE = "native"
    ERC20 = "erc20"


@dataclass(frozen=True, order=True)
class Token:
    symbol: str
    kind: TokenKind = TokenKind.ERC20

    def __post_init__(self) -> None:
        if not self.symbol:
            raise DomainError("token symbol must be non-empty")
        if not isinstance(self.kind, TokenKind):
            raise DomainError(f"unknown token kind {self.kind!r}")

    @classmethod
    def from_symbol(cls, symbol: str, native: frozenset[str] = NATIVE_SYMBOLS) -> Token:
        kind = TokenKind.NATIVE if symbol in native else TokenKind.ERC20
        return cls(symbol, kind)

    @property
    def is_native(self) -> bool:
        return self.kind is TokenKind.NATIVE


@dataclass(frozen=True, order=True)
class Pair:
    """An exchange pair; prices are quoted in units of ``quote`` per ``base``."""

    base: Token
    quote: Token

    def __post_init__(self) -> None:
        if self.base.symbol == self.quote.symbol:
            raise DomainError(f"pair legs must differ, got {self.base.symbol} twice")

    @classmethod
    def parse(cls, name: str, native: frozenset[str] = NATIVE_SYMBOLS) -> Pair:
        """Parse ``"ETH-USDC"`` into a pair."""
        parts = name.strip().split("-")
        if len(parts) != 2 or not all(parts):
            raise DomainError(f"pair must look like BASE-QUOTE, got {name!r}")
        return cls(Token.from_symbol(parts[0], native), Token.from_symbol(parts[1], native))

    @property
    def name(self) -> str:
        return f"{self.base.symbol}-{self.quote.symbol}"

    def inverted(self) -> Pair:
        return Pair(self.quote, self.base)

    def __str__(self) -> str:
        return self.name


def check_price(value: float, what: str = "price") -> float:
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise DomainError(f"{what} must be positive and finite, got {value!r}")
    return value


def check_positive(value: float, what: str) -> float:
    return check_price(value, what)


def invert_price(price: float) -> float:
    """P_YX from P_XY."""
    return 1.0 / check_price(price)


def to_bps(fraction: float) -> float:
    return fraction * 1e4


def from_bps(bps: float) -> float:
    return bps / 1e4


@dataclass(frozen=True)
class TradeSize:
    usd: float
    token_amount: float

    def __post_init__(self) -> None:
        check_positive(self.usd, "usd size")
        check_positive(self.token_amount, "token amount")


def usd_to_token_amount(pair_price: float, usd: float) -> float:
    """Token amount worth ``usd`` dollars when one token is worth ``pair_price`` dollars."""
    return check_positive(usd, "usd") / check_price(pair_price)


def trade_size(usd: float, usd_price: float) -> TradeSize:
    return TradeSize(usd, usd_to_token_amount(usd_price, usd))
