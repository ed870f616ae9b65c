"""Dual-domain joint communication and sensing link simulator.

OFDM data for several UEs is placed on the frequency-time grid and a sparse
sensing pulse designed on the delay-Doppler grid is mapped onto the same
resources with the ISFFT; a BS-side monostatic receiver recovers range and
velocity while each UE demodulates its block.
"""

from .config import (
    REFERENCE_CASES,
    ConfigError,
    Resolutions,
    SystemConfig,
    UserScenario,
    UserSpec,
    load_config,
    power_split,
    reference_scenario,
    resolutions,
    validate,
)
from .experiments import (
    STEADY_TARGETS,
    SweepResult,
    SweepSpec,
    TrialOptions,
    TrialResult,
    default_beta_grid,
    emit_csv,
    run_sweep,
    run_trial,
)
from .numerics import isfft, sfft

__version__ = "0.1.0"
