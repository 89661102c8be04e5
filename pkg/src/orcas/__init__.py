"""ORCAS codes: Plotkin concatenations of NPRS/NPRSD component codes.

Also ships a length-matched DEGA polar baseline and a BI-AWGN simulator.
"""

from .designer import design, design_for_target, evaluate, evolve
from .nprs import nprs_generator, nprs_weight_distribution
from .nprsd import nprsd_code, nprsd_weight_distribution
from .polar import construct_polar, polar_encode, polar_sc_decode
from .simulator import ChannelConfig, StopRule, orcas_codec, polar_codec, run_point, run_sweep
from .tree import RateProfile, build_tree, encode, sc_decode

__version__ = "0.1.0"

__all__ = [
    "ChannelConfig",
    "RateProfile",
    "StopRule",
    "build_tree",
    "construct_polar",
    "design",
    "design_for_target",
    "encode",
    "evaluate",
    "evolve",
    "nprs_generator",
    "nprs_weight_distribution",
    "nprsd_code",
    "nprsd_weight_distribution",
    "orcas_codec",
    "polar_codec",
    "polar_encode",
    "polar_sc_decode",
    "run_point",
    "run_sweep",
    "sc_decode",
]
