"""Resilient lossless source coding for vector sources with one deviating component."""

from .ahlswede import StateFamily, ahlswede_bounds, check_entropy_positiveness
from .coding import Adversary, SimConfig, SimResult, decode, encode, simulate, simulate_suite
from .games import Game, builtin_game, expected_utility, observation_channel, sweep_region
from .graphs import Coloring, DeviationGraph, build_deviation_graph, chromatic_number
from .probability import (Channel, Dist, JointDist, conditional_entropy, entropy, fix_component,
                          mixture, product, side_entropy)
from .rate import RateReport, SourceModel, resilient_rate

__version__ = "0.1.0"
