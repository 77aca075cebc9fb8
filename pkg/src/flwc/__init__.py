"""Fuzzy-weight coordination of EV charging stations in a parking lot."""

from .coordinator import Scheme, SimulationResult, StationState, run_simulation, select_next
from .estimator import FuzzyWeightRegressor
from .fuzzy import (
    FuzzySystem,
    LinguisticVariable,
    Rule,
    RuleBase,
    Trapezoidal,
    Triangular,
    compute_weight,
    defuzzify_cog,
    fire_rules,
    fuzzify,
    mf_eval,
)
from .metrics import ComparisonReport, average_utilization, compare_schemes, station_utilization, sweep
from .scenario import EvRecord, ScenarioConfig, normalize_inputs, required_slots, sample_fleet

__version__ = "0.1.0"
