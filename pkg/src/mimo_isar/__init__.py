"""Simulation, MIMO-ISAR imaging and motion compensation for TDM-MIMO FMCW radar."""

from .config import ScenarioConfig, load_config, parse_config, serialize_config
from .export import export_image
from .imaging import FrameStack, RDImage, mimo_image, nci, range_doppler, range_profiles
from .params import DerivedParams, RadarParams, derive_params, validate_params
from .scene import RotationLaw, Scatterer, Scene, TrajectorySpec, builtin_scenarios, get_scenario, pose_at
from .io import read_cube, write_cube
from .metrics import MetricsReport, comparison_table, image_entropy, noise_floor_cov
from .pipeline import run_pipeline
from .synth import RawCube, synthesize_frame, synthesize_sequence

__version__ = "0.1.0"

__all__ = [
    "DerivedParams",
    "FrameStack",
    "MetricsReport",
    "RDImage",
    "RadarParams",
    "RawCube",
    "RotationLaw",
    "Scatterer",
    "ScenarioConfig",
    "Scene",
    "TrajectorySpec",
    "builtin_scenarios",
    "comparison_table",
    "derive_params",
    "export_image",
    "get_scenario",
    "image_entropy",
    "load_config",
    "mimo_image",
    "nci",
    "noise_floor_cov",
    "parse_config",
    "pose_at",
    "range_doppler",
    "range_profiles",
    "read_cube",
    "run_pipeline",
    "serialize_config",
    "synthesize_frame",
    "synthesize_sequence",
    "validate_params",
    "write_cube",
]
