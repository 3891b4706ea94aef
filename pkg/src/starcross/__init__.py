"""starcross: a desk-scale road-crossing training engine.

Style-conditioned driver agents (LLM-driven, fully mockable) express yield
intents through speed, gestures, and narrated speech; a 30 Hz session server
runs the star-collection crossing task, adjudicates outcomes, adapts
difficulty on two axes, and journals everything for replay and analytics.
"""

from .domain import (
    BehaviorPlan,
    DifficultyState,
    DrivingStyle,
    GestureKind,
    SessionPhase,
    Spirit,
    style_template,
)
from .scenario import ScenarioConfig, default_scenario, load_scenario, validate_scenario

__version__ = "0.1.0"

__all__ = [
    "BehaviorPlan",
    "DifficultyState",
    "DrivingStyle",
    "GestureKind",
    "ScenarioConfig",
    "SessionPhase",
    "Spirit",
    "default_scenario",
    "load_scenario",
    "style_template",
    "validate_scenario",
    "__version__",
]
