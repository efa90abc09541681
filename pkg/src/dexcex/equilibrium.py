"""Competitive liquidity provision: x* = f * E[V] / E[IL].

Expectations are trailing means over the previous ``window_days`` days (the
current day excluded), and the model is checked by regressing log observed
liquidity on log predicted liquidity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .amm_v2 import impermanent_loss_v2
from .errors import DomainError, FitError, UndefinedEquilibriumError


@dataclass(frozen=True)
class DayObservation:
    day: int
    volume: float
    il: float
    liquidity: float

    def __post_init__(self) -> None:
        if self.volume < 0:
            raise DomainError("volume must be non-negative")
        if self.il < 0:
            raise DomainError("impermanent loss must be non-negative")
        if not self.liquidity > 0:
            raise DomainError("observed liquidity must be positive")


@dataclass(frozen=True)
class PairDailySeries:
    pair: str
    days: tuple[DayObservation, ...]


@dataclass(frozen=True)
class FitReport:
    slope: float
    intercept: float
    r_squared: float
    n_observations: int


def daily_il(open_price: float, close_price: float) -> float:
    """Realized IL of a full-range position over one day's open-to-close move."""
    return impermanent_loss_v2(close_price / open_price).value


def trailing_mean(values: Sequence[float], window: int) -> list[float | None]:
    """Mean of the ``window`` values strictly before each position."""
    if window < 1:
        raise ValueError("window must be at least 1")
    out: list[float | None] = []
    for i in range(len(values)):
        out.append(math.fsum(values[i - window : i]) / window if i >= window else None)
    return out


def expected_stats(
    series: PairDailySeries, window_days: int = 14
) -> list[tuple[float, float] | None]:
    """Per day, ``(E[V], E[IL])`` from the previous ``window_days`` days, or ``None``."""
    ev = trailing_mean([d.volume for d in series.days], window_days)
    eil = trailing_mean([d.il for d in series.days], window_days)
    return [None if v is None else (v, i) for v, i in zip(ev, eil)]


def predicted_liquidity(fee: float, ev: float, eil: float) -> float:
    if eil < 0 or ev < 0 or fee < 0:
        raise DomainError("fee, volume and IL must be non-negative")
    if eil == 0:
        raise UndefinedEquilibriumError("expected IL of zero: equilibrium liquidity is unbounded")
    return fee * ev / eil


def model_fit(observed: Sequence[float], predicted: Sequence[float | None]) -> FitReport:
    """OLS of log(observed) on log(predicted).

    Pairs whose prediction is missing or non-positive are dropped before fitting.
    """
    if len(observed) != len(predicted):
        raise FitError("observed and predicted must have equal length")
    pairs = [(o, p) for o, p in zip(observed, predicted) if p is not None and p > 0]
    if any(o <= 0 for o, _ in pairs):
        raise FitError("observed liquidity must be positive to take logs")
    if len(pairs) < 2:
        raise FitError(f"need at least two usable observations, got {len(pairs)}")
    y = np.log([o for o, _ in pairs])
    x = np.log([p for _, p in pairs])
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx <= 1e-300 or np.ptp(x) == 0:
        raise FitError("predicted liquidity has no variance")
    slope = float(xc @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    sst = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float(resid @ resid) / sst if sst > 0 else 1.0
    return FitReport(slope, intercept, min(max(r2, 0.0), 1.0), len(pairs))


@dataclass(frozen=True)
class EquilibriumRow:
    pair: str
    day: int
    expected_volume: float
    expected_il: float
    predicted: float | None
    observed: float


def equilibrium_panel(
    series: Sequence[PairDailySeries], fee: float, window_days: int = 14
) -> list[EquilibriumRow]:
    """Pair-day rows with a defined expectation; ``predicted`` is ``None`` when E[IL] = 0."""
    rows = []
    for s in series:
        for day, stats in zip(s.days, expected_stats(s, window_days)):
            if stats is None:
                continue
            ev, eil = stats
            try:
                pred = predicted_liquidity(fee, ev, eil)
            except UndefinedEquilibriumError:
                pred = None
            rows.append(EquilibriumRow(s.pair, day.day, ev, eil, pred, day.liquidity))
    return rows
