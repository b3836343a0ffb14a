"""Beam-aware stochastic multihop routing for UAV swarms."""

from .beamforming import BeamPattern, UpaConfig, full_beam, make_beam, upa_shape
from .channel import ChannelParams
from .config import ConfigError, dump_config, load_config
from .geometry import Attitude, UavState
from .harness import ExperimentConfig, run_experiment, simulate_scenario
from .routing import (
    DisconnectedError,
    LinkWeight,
    NetworkBelief,
    RouteResult,
    leximin_path,
    route,
    route_basmurf,
    route_dbr,
    route_smurf,
    widest_path,
)
from .tracking import MobilityParams, TrackerParams
from .uncertainty import PositionEstimate, SwarmBelief, link_existence_probability, log_link_probability

__version__ = "0.1.0"
