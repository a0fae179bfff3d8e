"""Household load shaping and leakage scoring.

Thin wrapper over the native module: score grid-visible load against the
sensitive household load, run closed-form reference checks, generate
synthetic households, and drive full receding-horizon scenarios.
"""

from ._privshape import (
    Bins,
    BinningScheme,
    ScenarioConfig,
    generate_profile,
    mi_iid,
    mi_markov,
    parse_config,
    run_scenario,
    score_pair,
    serialize_config,
    standard_scenario,
    theory_checks,
)

__all__ = [
    "Bins",
    "BinningScheme",
    "ScenarioConfig",
    "generate_profile",
    "mi_iid",
    "mi_markov",
    "parse_config",
    "run_scenario",
    "score_pair",
    "serialize_config",
    "standard_scenario",
    "theory_checks",
]
