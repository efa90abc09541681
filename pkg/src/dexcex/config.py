"""Run configuration: venue fees, gas units, size grid, windows."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .costs import GasSchedule
from .errors import DomainError

DEFAULT_SIZES = (1e3, 1e4, 1e5, 1e6)


@dataclass(frozen=True)
class Config:
    taker_fees_bps: dict[str, float] = field(
        default_factory=lambda: {"binance": 10.0, "kraken": 26.0}
    )
    default_taker_fee_bps: float = 10.0
    gas: GasSchedule = field(default_factory=GasSchedule)
    sizes: tuple[float, ...] = DEFAULT_SIZES
    window_hours: int = 168
    window_days: int = 14
    native_tokens: frozenset[str] = frozenset({"ETH"})
    usd_stable_tokens: frozenset[str] = frozenset({"USDC", "USDT", "DAI", "USD"})
    dex_prefixes: tuple[str, ...] = ("uniswap",)
    include_dw: bool = True

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.taker_fees_bps.values()) or self.default_taker_fee_bps < 0:
            raise DomainError("fees must be non-negative")
        sizes = tuple(float(s) for s in self.sizes)
        if not sizes or any(s <= 0 for s in sizes) or list(sizes) != sorted(set(sizes)):
            raise DomainError("trade sizes must be positive, distinct and sorted")
        object.__setattr__(self, "sizes", sizes)

    def taker_fee(self, exchange: str) -> float:
        return self.taker_fees_bps.get(exchange.lower(), self.default_taker_fee_bps)

    def is_dex(self, exchange: str) -> bool:
        return exchange.lower().startswith(self.dex_prefixes)

    @classmethod
    def load(cls, path: str | Path) -> Config:
        """Read overrides from a JSON object whose keys match the field names."""
        raw = json.loads(Path(path).read_text())
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        if "gas" in raw:
            raw["gas"] = GasSchedule(**raw["gas"])
        for key in ("native_tokens", "usd_stable_tokens"):
            if key in raw:
                raw[key] = frozenset(raw[key])
        for key in ("sizes", "dex_prefixes"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)
