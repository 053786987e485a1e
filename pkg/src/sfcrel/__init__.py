"""Reliability analysis of service function chains over data-center hierarchies."""

from sfcrel.analytic import (
    ReliabilityValue,
    TermBudgetExceeded,
    reliability_general,
    reliability_placement_independent,
    reliability_single_class,
)
from sfcrel.model import (
    CommonRoot,
    Hierarchy,
    PlacementPreset,
    ReliabilityClassSpec,
    Scenario,
    ScenarioError,
    ServiceDemand,
    expand_preset,
    load_scenario,
    validate_scenario,
)
from sfcrel.oracle import (
    exhaustive_reliability,
    instantiate_tree,
    monte_carlo_estimate,
)

__all__ = [
    "CommonRoot",
    "Hierarchy",
    "PlacementPreset",
    "ReliabilityClassSpec",
    "ReliabilityValue",
    "Scenario",
    "ScenarioError",
    "ServiceDemand",
    "TermBudgetExceeded",
    "exhaustive_reliability",
    "expand_preset",
    "instantiate_tree",
    "load_scenario",
    "monte_carlo_estimate",
    "reliability_general",
    "reliability_placement_independent",
    "reliability_single_class",
    "validate_scenario",
]
