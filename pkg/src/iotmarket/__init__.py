"""Price competition among sensing-information services, plus value-of-information tools."""

from .demand import (
    DemandResult,
    Segment,
    demand,
    demand_complementary,
    demand_curve,
    demand_monte_carlo,
    demand_substitute,
    segment_substitute,
)
from .equilibrium import (
    BestResponse,
    EquilibriumResult,
    NashCertificate,
    SolverConfig,
    best_response,
    best_response_curve,
    nash_solve,
    profit,
    verify_epsilon_nash,
)
from .market import (
    Complementary,
    Empirical,
    FusionRule,
    MarketError,
    ModeError,
    PriceVector,
    Scenario,
    Service,
    Substitute,
    Uniform,
    fused_detection,
    fused_false_alarm,
    reference_scenario,
    reference_services,
    utility_complementary,
    utility_substitute,
)
from .voi import (
    DecisionProblem,
    VoiReport,
    expected_voi,
    information_gain,
    optimal_action,
    posterior,
    select_source,
    value_pointwise,
)

__version__ = "0.1.0"
