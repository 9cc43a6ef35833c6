"""Profits, best responses and Nash equilibrium prices.

Each service picks its price to maximise ``price * demand - fixed_cost``.
Under a uniform weight, profit is piecewise quadratic in the service's own
price with kinks where users start switching or abstaining, so best
responses use a dense grid followed by local grid refinement rather than a
derivative method that can stall on a kink.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .demand import demand_curve
from .market import MarketError, PriceVector, Scenario, as_prices

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    """Search settings shared by best responses and the equilibrium solver.

    ``price_hi=None`` means ``v_max * max(detection_prob)`` for the
    scenario at hand, above which no service can sell anything.
    """

    price_lo: float = 0.0
    price_hi: Optional[float] = None
    grid_points: int = 2001
    refine_rounds: int = 3
    br_tolerance: float = 1e-6
    fixed_point_tolerance: float = 1e-6
    max_iterations: int = 500

    def __post_init__(self):
        if self.price_lo < 0:
            raise MarketError("price_lo must be nonnegative")
        if self.price_hi is not None and not self.price_lo < self.price_hi:
            raise MarketError("price_lo must be below price_hi")
        if self.grid_points < 3:
            raise MarketError("grid_points must be at least 3")
        if self.refine_rounds < 0:
            raise MarketError("refine_rounds must be nonnegative")
        if self.br_tolerance <= 0 or self.fixed_point_tolerance <= 0:
            raise MarketError("tolerances must be positive")
        if self.max_iterations < 1:
            raise MarketError("max_iterations must be positive")

    def bounds(self, scenario: Scenario) -> tuple[float, float]:
        hi = self.price_hi if self.price_hi is not None else scenario.default_price_bounds()[1]
        if not self.price_lo < hi:
            raise MarketError(f"empty price range [{self.price_lo}, {hi}]")
        return self.price_lo, hi


class BestResponse(NamedTuple):
    price: float
    profit: float
    flat: bool  # demand is zero at every price in range, so any price is optimal


@dataclass(frozen=True)
class EquilibriumResult:
    prices: PriceVector
    profits: tuple
    iterations: int
    converged: bool
    trace: list = field(repr=False)


@dataclass(frozen=True)
class NashCertificate:
    passed: bool
    epsilon: float
    gains: tuple  # best unilateral profit gain per service
    deviation_prices: tuple  # price attaining that gain


def _check_index(s: int, scenario: Scenario) -> None:
    if not 0 <= s < scenario.n_services:
        raise IndexError(f"service index {s} out of range for {scenario.n_services} services")


def revenue_curve(s: int, prices: Sequence[float], scenario: Scenario, own_prices) -> np.ndarray:
    own_prices = np.asarray(own_prices, dtype=float)
    return own_prices * demand_curve(scenario, s, prices, own_prices)


def profit(s: int, prices: Sequence[float], scenario: Scenario) -> float:
    """Profit of service ``s``: own price times own demand minus fixed cost."""
    _check_index(s, scenario)
    prices = as_prices(prices, scenario)
    rev = revenue_curve(s, prices, scenario, [prices[s]])[0]
    return float(rev) - scenario.services[s].fixed_cost


def profits(prices: Sequence[float], scenario: Scenario) -> tuple:
    return tuple(profit(s, prices, scenario) for s in range(scenario.n_services))


def best_response(
    s: int, prices: Sequence[float], scenario: Scenario, cfg: SolverConfig = SolverConfig()
) -> BestResponse:
    """Profit-maximising price of service ``s`` with the other prices fixed.

    ``prices[s]`` is ignored.  Fixed costs do not move the maximiser, so the
    search runs on revenue and subtracts the cost at the end.
    """
    _check_index(s, scenario)
    prices = as_prices(prices, scenario)
    lo, hi = cfg.bounds(scenario)

    grid = np.linspace(lo, hi, cfg.grid_points)
    dem = demand_curve(scenario, s, prices, grid)
    cost = scenario.services[s].fixed_cost
    if not np.any(dem > 0):
        return BestResponse(lo, -cost, True)

    rev = grid * dem
    k = int(np.argmax(rev))
    best, best_rev = grid[k], rev[k]
    step = (hi - lo) / (cfg.grid_points - 1)
    for _ in range(cfg.refine_rounds):
        a, b = max(lo, best - step), min(hi, best + step)
        local = np.linspace(a, b, cfg.grid_points)
        local_rev = revenue_curve(s, prices, scenario, local)
        k = int(np.argmax(local_rev))
        if local_rev[k] > best_rev:
            best, best_rev = local[k], local_rev[k]
        step = (b - a) / (cfg.grid_points - 1)
    return BestResponse(float(best), float(best_rev) - cost, False)


def nash_solve(
    scenario: Scenario,
    cfg: SolverConfig = SolverConfig(),
    initial: Optional[Sequence[float]] = None,
) -> EquilibriumResult:
    """Iterated best response, updating services in index order each sweep.

    Stops when no price moved by more than ``cfg.fixed_point_tolerance``
    over a full sweep.  Running out of iterations is reported through
    ``converged=False``, not raised.
    """
    lo, hi = cfg.bounds(scenario)
    if initial is None:
        initial = [lo] * scenario.n_services
    p = as_prices(initial, scenario)
    if any(not lo <= x <= hi for x in p):
        raise MarketError(f"initial prices {tuple(p)} outside [{lo}, {hi}]")

    trace = [p]
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        previous = p
        for s in range(scenario.n_services):
            p = p.replace(s, best_response(s, p, scenario, cfg).price)
        trace.append(p)
        change = max(abs(a - b) for a, b in zip(p, previous))
        if change <= cfg.fixed_point_tolerance:
            converged = True
            break
    if not converged:
        logger.warning("best-response iteration did not converge in %d sweeps", iterations)
    return EquilibriumResult(p, profits(p, scenario), iterations, converged, trace)


def verify_epsilon_nash(
    prices: Sequence[float],
    scenario: Scenario,
    epsilon: float,
    check_grid: int = 10_000,
    bounds: Optional[tuple[float, float]] = None,
) -> NashCertificate:
    """Check that no unilateral move on a price grid gains more than ``epsilon``."""
    if epsilon <= 0:
        raise MarketError("epsilon must be positive")
    if check_grid < 2:
        raise MarketError("check_grid must be at least 2")
    prices = as_prices(prices, scenario)
    lo, hi = bounds if bounds is not None else scenario.default_price_bounds()
    grid = np.linspace(lo, hi, check_grid)

    gains, where = [], []
    for s in range(scenario.n_services):
        incumbent = revenue_curve(s, prices, scenario, [prices[s]])[0]
        rev = revenue_curve(s, prices, scenario, grid)
        k = int(np.argmax(rev))
        gains.append(float(rev[k] - incumbent))
        where.append(float(grid[k]))
    return NashCertificate(all(g <= epsilon for g in gains), epsilon, tuple(gains), tuple(where))


def best_response_curve(
    s: int,
    other_price_grid: Sequence[float],
    scenario: Scenario,
    cfg: SolverConfig = SolverConfig(),
) -> list[tuple[float, float]]:
    """Best response of service ``s`` against each opponent price (duopoly only)."""
    if scenario.n_services != 2:
        raise MarketError("best-response curves are defined for two services only")
    _check_index(s, scenario)
    other = 1 - s
    curve = []
    for q in other_price_grid:
        prices = [0.0, 0.0]
        prices[other] = q
        curve.append((float(q), best_response(s, prices, scenario, cfg).price))
    return curve


def curve_crossings(
    curve_0: Sequence[tuple[float, float]], curve_1: Sequence[tuple[float, float]]
) -> list[tuple[float, float]]:
    """Approximate intersections of two best-response curves.

    ``curve_0`` maps the price of service 1 to the best response of service
    0; ``curve_1`` maps the price of service 0 to the best response of
    service 1.  Crossings are roots of ``b0(b1(p0)) - p0`` along the grid
    of ``curve_1``, located by linear interpolation.
    """
    q1, b0 = (np.asarray(a) for a in zip(*curve_0))
    q0, b1 = (np.asarray(a) for a in zip(*curve_1))
    gap = np.interp(b1, q1, b0) - q0
    found = []
    for i in range(len(q0) - 1):
        g0, g1 = gap[i], gap[i + 1]
        if g0 == 0:
            found.append((float(q0[i]), float(b1[i])))
        elif g0 * g1 < 0:
            t = g0 / (g0 - g1)
            found.append(
                (float(q0[i] + t * (q0[i + 1] - q0[i])), float(b1[i] + t * (b1[i + 1] - b1[i])))
            )
    if gap[-1] == 0:
        found.append((float(q0[-1]), float(b1[-1])))
    return found
