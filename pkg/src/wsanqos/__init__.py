"""Discrete-event simulation of feedback scheduling in a small wireless sensor/actuator network."""

from .config import ConfigError, ScenarioConfig, config_from_dict, default_scenario_path, parse_config
from .fuzzy import FuzzyInference, fuzzy_infer
from .mac import MacParams, frame_airtime
from .metrics import RunSummary, summarize, write_outputs
from .qos import ControllerParams, controller_tick
from .sim import RunResult, Simulation, run_scenario

__all__ = [
    "ConfigError",
    "ControllerParams",
    "FuzzyInference",
    "MacParams",
    "RunResult",
    "RunSummary",
    "ScenarioConfig",
    "Simulation",
    "config_from_dict",
    "controller_tick",
    "default_scenario_path",
    "frame_airtime",
    "fuzzy_infer",
    "parse_config",
    "run_scenario",
    "summarize",
    "write_outputs",
]

__version__ = "0.1.0"
