"""Fractional optimal control of a Caputo-order COVID-19 SEIR model."""

from .config import ConfigError, ScenarioConfig, load_config, paper_scenario, parse_config
from .focp import (
    AdjointMode,
    SweepConfig,
    SweepSolution,
    fbsm_solve,
    rhs_adjoint,
    stationarity_residual,
    stationary_controls,
)
from .fracode import (
    TimeGrid,
    abm_weights,
    integrate_adjoint_tvp,
    integrate_caputo_ivp,
    l1_caputo_derivative,
    mittag_leffler,
)
from .model import (
    Control,
    ModelParams,
    ObjectiveWeights,
    State,
    objective,
    rhs_controlled,
    rhs_uncontrolled,
    total_population,
)
from .output import read_csv, write_csv
from .scenario import run_scenario

__version__ = "0.1.0"
