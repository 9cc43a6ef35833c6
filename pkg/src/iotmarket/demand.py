"""Demand for sensing services as fractions of the user population.

Utilities are linear in the user's weight ``v``, so the set of users that
buy from a given service is an interval of ``v``.  Demand under a uniform
weight is therefore a length ratio; the Monte Carlo path draws users and
applies the per-user choice rule directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .market import (
    Complementary,
    MarketError,
    ModeError,
    PriceVector,
    Scenario,
    Uniform,
    as_prices,
    fused_detection,
    fused_false_alarm,
)

ALL_SERVICES = "all"

Choice = Union[None, int, str]


class UnsupportedValuation(MarketError):
    """Analytic demand requested for a valuation distribution it cannot handle."""


@dataclass(frozen=True)
class Segment:
    """Interval of user weights sharing one purchase decision.

    ``choice`` is None (no purchase), a 0-based service index, or
    ``ALL_SERVICES`` for complementary markets.
    """

    lo: float
    hi: float
    choice: Choice

    @property
    def length(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class DemandResult:
    demand: tuple
    segments: tuple = ()

    def __getitem__(self, s: int) -> float:
        return self.demand[s]


def _require_uniform(scenario: Scenario) -> Uniform:
    if not isinstance(scenario.valuation, Uniform):
        raise UnsupportedValuation(
            "analytic demand needs a uniform valuation; use demand_monte_carlo"
        )
    return scenario.valuation


def _require_substitute(scenario: Scenario) -> None:
    if not scenario.is_substitute:
        raise ModeError("operation needs a substitute scenario")


def _require_complementary(scenario: Scenario) -> Complementary:
    if not isinstance(scenario.mode, Complementary):
        raise ModeError("operation needs a complementary scenario")
    return scenario.mode


def substitute_choice(v: float, scenario: Scenario, prices: Sequence[float]) -> Optional[int]:
    """Service bought by a user with weight ``v``, or None.

    Highest utility wins, ties go to the lowest index, and a purchase needs
    strictly positive utility.
    """
    best, best_u = None, 0.0
    for s, (svc, p) in enumerate(zip(scenario.services, prices)):
        u = v * svc.detection_prob - svc.false_alarm_prob - p
        if u > best_u:
            best, best_u = s, u
    return best


def segment_substitute(scenario: Scenario, prices: Sequence[float]) -> list[Segment]:
    """Partition the weight support into maximal intervals of constant choice."""
    _require_substitute(scenario)
    val = _require_uniform(scenario)
    prices = as_prices(prices, scenario)

    pd = [s.detection_prob for s in scenario.services]
    intercept = [s.false_alarm_prob + p for s, p in zip(scenario.services, prices)]
    cuts = {val.lo, val.hi}
    for s in range(len(pd)):
        if pd[s] > 0:
            cuts.add(intercept[s] / pd[s])
        for j in range(s + 1, len(pd)):
            if pd[s] != pd[j]:
                cuts.add((intercept[s] - intercept[j]) / (pd[s] - pd[j]))
    points = sorted(c for c in cuts if val.lo <= c <= val.hi)

    segments: list[Segment] = []
    for a, b in zip(points, points[1:]):
        if b <= a:
            continue
        choice = substitute_choice(0.5 * (a + b), scenario, prices)
        if segments and segments[-1].choice == choice:
            segments[-1] = Segment(segments[-1].lo, b, choice)
        else:
            segments.append(Segment(a, b, choice))
    return segments


def demand_from_segments(
    segments: Sequence[Segment], scenario: Scenario
) -> tuple:
    val = _require_uniform(scenario)
    width = val.hi - val.lo
    demand = [0.0] * scenario.n_services
    for seg in segments:
        if seg.choice is None:
            continue
        if seg.choice == ALL_SERVICES:
            demand = [d + seg.length / width for d in demand]
        else:
            demand[seg.choice] += seg.length / width
    return tuple(min(max(d, 0.0), 1.0) for d in demand)


def demand_substitute(scenario: Scenario, prices: Sequence[float]) -> DemandResult:
    segments = segment_substitute(scenario, prices)
    return DemandResult(demand_from_segments(segments, scenario), tuple(segments))


def complementary_threshold(scenario: Scenario, prices: Sequence[float]) -> float:
    """Lowest weight at which buying the fused bundle pays; inf if never."""
    mode = _require_complementary(scenario)
    prices = as_prices(prices, scenario)
    pd = fused_detection(scenario.services, mode.rule)
    pf = fused_false_alarm(scenario.services, mode.rule)
    if pd == 0:
        return np.inf
    return (pf + sum(prices)) / pd


def demand_complementary(scenario: Scenario, prices: Sequence[float]) -> DemandResult:
    """Every service gets the mass of users whose bundle utility is positive."""
    val = _require_uniform(scenario)
    v_th = complementary_threshold(scenario, prices)
    cut = min(max(v_th, val.lo), val.hi)
    segments = []
    if cut > val.lo:
        segments.append(Segment(val.lo, cut, None))
    if cut < val.hi:
        segments.append(Segment(cut, val.hi, ALL_SERVICES))
    d = float(val.mass(v_th, val.hi))
    return DemandResult((d,) * scenario.n_services, tuple(segments))


def demand(scenario: Scenario, prices: Sequence[float]) -> DemandResult:
    """Analytic demand for either market mode (uniform valuation only)."""
    if scenario.is_substitute:
        return demand_substitute(scenario, prices)
    return demand_complementary(scenario, prices)


def demand_monte_carlo(
    scenario: Scenario, prices: Sequence[float], n_samples: int, seed: int = 42
) -> DemandResult:
    """Empirical demand fractions from ``n_samples`` simulated users.

    Deterministic in ``seed``.  Works for every valuation distribution.
    """
    if n_samples < 1:
        raise MarketError("n_samples must be positive")
    prices = as_prices(prices, scenario)
    rng = np.random.default_rng(seed)
    v = scenario.valuation.sample(rng, n_samples)
    return DemandResult(tuple(float(d) for d in _choose(scenario, prices, v)))


def _choose(scenario: Scenario, prices: PriceVector, v: np.ndarray) -> np.ndarray:
    n_services = scenario.n_services
    if scenario.is_substitute:
        pd = np.array([s.detection_prob for s in scenario.services])
        intercept = np.array([s.false_alarm_prob for s in scenario.services]) + np.array(prices)
        utility = v[:, None] * pd[None, :] - intercept[None, :]
        best = np.argmax(utility, axis=1)
        buys = utility[np.arange(len(v)), best] > 0
        counts = np.bincount(best[buys], minlength=n_services)
        return counts / len(v)
    rule = scenario.mode.rule
    pd = fused_detection(scenario.services, rule)
    pf = fused_false_alarm(scenario.services, rule)
    frac = np.count_nonzero(v * pd - pf - sum(prices) > 0) / len(v)
    return np.full(n_services, frac)


def substitute_interval(
    scenario: Scenario, s: int, prices: Sequence[float], own_prices: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Weight interval (lo, hi) of users choosing service ``s``, per own price.

    Vectorised over ``own_prices``; entries of ``prices`` other than ``s``
    are held fixed.  An empty interval has ``hi <= lo``.
    """
    own_prices = np.asarray(own_prices, dtype=float)
    svc = scenario.services[s]
    # near-zero Pd gaps overflow to +-inf, which is the right bound
    with np.errstate(over="ignore"):
        c_own = svc.false_alarm_prob + own_prices
        lo = np.full_like(own_prices, -np.inf)
        hi = np.full_like(own_prices, np.inf)
        if svc.detection_prob > 0:
            lo = np.maximum(lo, c_own / svc.detection_prob)
        else:
            hi = np.full_like(own_prices, -np.inf)

        for j, other in enumerate(scenario.services):
            if j == s:
                continue
            # s beats j where (Pd_s - Pd_j) v > c_own - c_j.
            dpd = svc.detection_prob - other.detection_prob
            c = c_own - (other.false_alarm_prob + prices[j])
            if dpd > 0:
                lo = np.maximum(lo, c / dpd)
            elif dpd < 0:
                hi = np.minimum(hi, c / dpd)
            else:
                wins = c < 0 if j < s else c <= 0
                hi = np.where(wins, hi, -np.inf)
    return lo, hi


def demand_curve(
    scenario: Scenario, s: int, prices: Sequence[float], own_prices: np.ndarray
) -> np.ndarray:
    """Demand of service ``s`` as its own price runs over ``own_prices``.

    Exact for any valuation exposing ``mass``: length ratio for uniform
    weights, sample fraction for empirical ones.
    """
    prices = as_prices(prices, scenario)
    own_prices = np.asarray(own_prices, dtype=float)
    val = scenario.valuation
    if scenario.is_substitute:
        lo, hi = substitute_interval(scenario, s, prices, own_prices)
        return np.asarray(val.mass(lo, np.maximum(lo, hi)), dtype=float)

    rule = scenario.mode.rule
    pd = fused_detection(scenario.services, rule)
    pf = fused_false_alarm(scenario.services, rule)
    others = sum(p for j, p in enumerate(prices) if j != s)
    if pd == 0:
        return np.zeros_like(own_prices)
    v_th = (pf + others + own_prices) / pd
    return np.asarray(val.mass(v_th, np.full_like(v_th, np.inf)), dtype=float)
