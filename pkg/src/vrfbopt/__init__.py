"""Scheduling electrolyte-rebalancing services for flow batteries doing energy arbitrage."""

from .analytic import AnalyticInputs, optimal_service_count
from .core import BatteryParams, Horizon, MarketSeries, ServiceSchedule, ValidationError
from .scheduler import PlanResult, run_algorithm1, step1_sweep, step2_optimize

__all__ = [
    "AnalyticInputs", "BatteryParams", "Horizon", "MarketSeries", "PlanResult",
    "ServiceSchedule", "ValidationError", "optimal_service_count", "run_algorithm1",
    "step1_sweep", "step2_optimize",
]
__version__ = "0.1.0"
