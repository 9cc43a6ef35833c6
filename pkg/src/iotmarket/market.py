"""Domain types for sensing-information markets.

A market is a list of services selling binary event-detection reports to a
population of users who differ only in how much they weight detection
against false alarms and price.  Users either pick one service
(substitute goods) or buy every service and fuse the reports with an OR or
AND rule (complementary goods).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np


class MarketError(ValueError):
    """Raised for invalid market objects or operations used in the wrong mode."""


class ModeError(MarketError):
    """Operation called on a scenario of the wrong market mode."""


def _check_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise MarketError(f"{name} must be finite, got {value!r}")
    return value


def _check_probability(name: str, value: float) -> float:
    value = _check_finite(name, value)
    if not 0.0 <= value <= 1.0:
        raise MarketError(f"{name} must lie in [0, 1], got {value!r}")
    return value


@dataclass(frozen=True)
class Service:
    """One seller of sensing information.

    Attributes:
        detection_prob: probability of reporting an event that happened.
        false_alarm_prob: probability of reporting an event that did not happen.
        fixed_cost: cost of producing the information; independent of demand.
    """

    detection_prob: float
    false_alarm_prob: float
    fixed_cost: float = 0.0

    def __post_init__(self):
        object.__setattr__(
            self, "detection_prob", _check_probability("detection_prob", self.detection_prob)
        )
        object.__setattr__(
            self, "false_alarm_prob", _check_probability("false_alarm_prob", self.false_alarm_prob)
        )
        cost = _check_finite("fixed_cost", self.fixed_cost)
        if cost < 0:
            raise MarketError(f"fixed_cost must be nonnegative, got {cost!r}")
        object.__setattr__(self, "fixed_cost", cost)


class FusionRule(enum.Enum):
    OR = "or"
    AND = "and"


@dataclass(frozen=True)
class Uniform:
    """Valuation weight uniform on [lo, hi]."""

    lo: float = 0.0
    hi: float = 2.0

    def __post_init__(self):
        lo = _check_finite("lo", self.lo)
        hi = _check_finite("hi", self.hi)
        if not 0.0 <= lo < hi:
            raise MarketError(f"uniform valuation needs 0 <= lo < hi, got [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def v_max(self) -> float:
        return self.hi

    def mass(self, a, b):
        """Probability of the valuation falling in (a, b); vectorised over arrays."""
        a = np.clip(a, self.lo, self.hi)
        b = np.clip(b, self.lo, self.hi)
        return np.maximum(b - a, 0.0) / (self.hi - self.lo)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=n)


@dataclass(frozen=True)
class Empirical:
    """Valuation weight drawn from a finite list of observed values."""

    samples: tuple

    def __post_init__(self):
        values = tuple(_check_finite("sample", s) for s in self.samples)
        if not values:
            raise MarketError("empirical valuation needs at least one sample")
        if min(values) < 0:
            raise MarketError("empirical valuation samples must be nonnegative")
        object.__setattr__(self, "samples", values)

    @property
    def v_max(self) -> float:
        return max(self.samples)

    @cached_property
    def _sorted(self) -> np.ndarray:
        return np.sort(np.asarray(self.samples, dtype=float))

    def mass(self, a, b):
        """Fraction of samples strictly inside (a, b); vectorised over arrays."""
        xs = self._sorted
        above_a = len(xs) - np.searchsorted(xs, a, side="right")
        above_b = len(xs) - np.searchsorted(xs, b, side="left")
        return np.maximum(above_a - above_b, 0) / len(xs)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.choice(np.asarray(self.samples, dtype=float), size=n, replace=True)


ValuationDistribution = Union[Uniform, Empirical]


@dataclass(frozen=True)
class Substitute:
    """Each user buys from at most one service."""


@dataclass(frozen=True)
class Complementary:
    """Each user buys from all services or none, fusing reports with `rule`."""

    rule: FusionRule


MarketMode = Union[Substitute, Complementary]


@dataclass(frozen=True)
class Scenario:
    services: tuple
    mode: MarketMode = field(default_factory=Substitute)
    valuation: ValuationDistribution = field(default_factory=Uniform)

    def __post_init__(self):
        services = tuple(self.services)
        if not services:
            raise MarketError("a scenario needs at least one service")
        if not all(isinstance(s, Service) for s in services):
            raise MarketError("services must be Service instances")
        if not isinstance(self.mode, (Substitute, Complementary)):
            raise MarketError(f"unknown market mode {self.mode!r}")
        if not isinstance(self.valuation, (Uniform, Empirical)):
            raise MarketError(f"unknown valuation distribution {self.valuation!r}")
        object.__setattr__(self, "services", services)

    @property
    def n_services(self) -> int:
        return len(self.services)

    @property
    def is_substitute(self) -> bool:
        return isinstance(self.mode, Substitute)

    def with_costs(self, costs: Sequence[float]) -> "Scenario":
        if len(costs) != self.n_services:
            raise MarketError("one cost per service is required")
        services = tuple(
            Service(s.detection_prob, s.false_alarm_prob, c) for s, c in zip(self.services, costs)
        )
        return Scenario(services, self.mode, self.valuation)

    def default_price_bounds(self) -> tuple[float, float]:
        """Price box beyond which every service's demand is zero."""
        hi = self.valuation.v_max * max(s.detection_prob for s in self.services)
        return 0.0, hi


class PriceVector(tuple):
    """Immutable tuple of nonnegative finite prices, one per service."""

    def __new__(cls, prices: Sequence[float]):
        values = [float(p) for p in prices]
        for p in values:
            if not math.isfinite(p) or p < 0:
                raise MarketError(f"prices must be finite and nonnegative, got {p!r}")
        return super().__new__(cls, values)

    def replace(self, index: int, price: float) -> "PriceVector":
        values = list(self)
        values[index] = price
        return PriceVector(values)


def as_prices(prices: Sequence[float], scenario: Scenario) -> PriceVector:
    prices = prices if isinstance(prices, PriceVector) else PriceVector(prices)
    if len(prices) != scenario.n_services:
        raise MarketError(
            f"expected {scenario.n_services} prices, got {len(prices)}"
        )
    return prices


def _fuse(probs: Sequence[float], rule: FusionRule) -> float:
    if len(probs) == 0:
        raise MarketError("fusion needs at least one service")
    rule = FusionRule(rule)
    if rule is FusionRule.OR:
        return 1.0 - math.prod(1.0 - p for p in probs)
    return math.prod(probs)


def fused_detection(services: Sequence[Service], rule: FusionRule) -> float:
    """Detection probability of the fused report, assuming independent sensors."""
    return _fuse([s.detection_prob for s in services], rule)


def fused_false_alarm(services: Sequence[Service], rule: FusionRule) -> float:
    """False-alarm probability of the fused report, assuming independent sensors."""
    return _fuse([s.false_alarm_prob for s in services], rule)


def utility_substitute(v: float, service: Service, price: float) -> float:
    """Utility of a user with weight ``v`` who buys only from ``service``."""
    return v * service.detection_prob - service.false_alarm_prob - price


def utility_complementary(v: float, scenario: Scenario, prices: Sequence[float]) -> float:
    """Utility of a user with weight ``v`` who buys every service and fuses them."""
    if not isinstance(scenario.mode, Complementary):
        raise ModeError("utility_complementary needs a complementary scenario")
    prices = as_prices(prices, scenario)
    rule = scenario.mode.rule
    return (
        v * fused_detection(scenario.services, rule)
        - fused_false_alarm(scenario.services, rule)
        - math.fsum(prices)
    )


def reference_services() -> tuple[Service, Service]:
    """The two reference services: (Pd, Pf) = (0.8, 0.1) and (0.9, 0.2)."""
    return Service(0.8, 0.1), Service(0.9, 0.2)


def reference_scenario(mode: MarketMode | None = None) -> Scenario:
    """Two reference services with valuation uniform on [0, 2]."""
    return Scenario(reference_services(), mode or Substitute(), Uniform(0.0, 2.0))
