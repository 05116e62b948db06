"""System-level simulator for UAV-assisted space-air-ground integrated networks.

The package couples a load-aware cellular interference model with five
decision algorithms (tabular Q-learning, UCB bandits, a small deep Q
network, satisfaction-based learning and particle swarm optimization)
that steer UAV base stations and allocate channels.  Nine end-to-end
schemes built from those pieces can be run and compared through
:func:`saginsim.engine.run_once`, :func:`saginsim.engine.run_campaign`
or the ``saginsim`` command line tool.
"""

from saginsim.scenario import (
    AlgoParams,
    ConfigError,
    RangeError,
    Scenario,
    SchemeError,
    SchemeId,
    default_scenario,
    load_config,
    save_config,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "AlgoParams",
    "ConfigError",
    "RangeError",
    "Scenario",
    "SchemeError",
    "SchemeId",
    "default_scenario",
    "load_config",
    "save_config",
    "validate",
    "__version__",
]
