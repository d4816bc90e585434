"""Federated SVM classification in the Poincare disc from quantized convex hulls."""
from ._backend import name as backend_name
from .data import Dataset, SynthSpec, load_dataset, point_to_plane_distance, save_dataset, synth_generate
from .errors import HypfedError
from .federation import RunConfig, run_experiment, run_trial
from .hull import ConvexHull, brute_force_hull, graham_scan
from .quantize import QuantGrid, build_equal_area_grid, build_grid, epsilon_minimal_hull, uniform_sample

__version__ = "0.1.0"
