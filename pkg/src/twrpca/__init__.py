"""Through-wall radar imaging via Kronecker-structured robust PCA.

The package separates a stack of stepped-frequency radar returns into a
low-rank wall component and a sparse scene reflectivity supported on a
multipath dictionary.  Four solvers are provided: subspace-projected sparse
reconstruction, a nuclear-norm ADMM, and two Huber-robustified variants
(semi-split and fully split).  Supporting modules cover scene synthesis,
heavy-tailed noise injection, ROC evaluation, Monte Carlo trials and a small
binary matrix format for artifacts.
"""

from .config import ExperimentConfig, example_config_text, load_config, parse_config_text
from .dictionary import Dictionary, apply_dictionary, build_dictionary, hermitian_top_eigenvalue
from .errors import InputError, NumericalError
from .evaluation import (DEFAULT_RADIUS, DetectionMap, RocCurve, auc, average_rocs,
                         detection_map, f1_at_threshold, roc_curve)
from .geometry import (C0, MultipathScheme, RadarConfig, SceneGrid, WallSpec,
                       refraction_delay, refraction_path, reverb_delays)
from .matio import read_matrix, write_complex_csv, write_matrix, write_pgm16
from .montecarlo import (SOLVER_NAMES, Scenario, TrialRecord, make_solver,
                         run_monte_carlo, summarize_records, sweep_hyperparameters,
                         trial_seed, write_trial_records)
from .noise import (NoiseSpec, calibrate_sigma_for_snr, inject_outliers, sample_complex_t_columnwise,
                    sample_complex_t_pointwise, sample_noise)
from .partitions import Partition
from .proxops import (HuberParams, huber, huber_grad, huber_majorizer_weight, prox_huber,
                      prox_huber_frobenius, row_threshold, soft_threshold, svt)
from .solvers import (DecompositionResult, Diagnostics, SolverConfig, hkrpca_fd_solve,
                      hkrpca_sd_solve, huber_residual_gradient, krpca_solve, srcs_solve,
                      wall_subspace_removal, weighted_ridge_update)
from .synth import TargetSpec, synthesize_scene, synthesize_wall_returns

__version__ = "0.1.0"

__all__ = [
    "C0",
    "DEFAULT_RADIUS",
    "DecompositionResult",
    "Diagnostics",
    "Dictionary",
    "DetectionMap",
    "ExperimentConfig",
    "HuberParams",
    "InputError",
    "MultipathScheme",
    "NoiseSpec",
    "NumericalError",
    "Partition",
    "RadarConfig",
    "RocCurve",
    "SOLVER_NAMES",
    "Scenario",
    "SceneGrid",
    "SolverConfig",
    "TargetSpec",
    "TrialRecord",
    "WallSpec",
    "apply_dictionary",
    "auc",
    "average_rocs",
    "build_dictionary",
    "calibrate_sigma_for_snr",
    "detection_map",
    "example_config_text",
    "f1_at_threshold",
    "hermitian_top_eigenvalue",
    "hkrpca_fd_solve",
    "hkrpca_sd_solve",
    "huber",
    "huber_grad",
    "huber_majorizer_weight",
    "huber_residual_gradient",
    "inject_outliers",
    "krpca_solve",
    "load_config",
    "make_solver",
    "parse_config_text",
    "prox_huber",
    "prox_huber_frobenius",
    "read_matrix",
    "refraction_delay",
    "refraction_path",
    "reverb_delays",
    "roc_curve",
    "row_threshold",
    "run_monte_carlo",
    "sample_complex_t_columnwise",
    "sample_complex_t_pointwise",
    "sample_noise",
    "soft_threshold",
    "srcs_solve",
    "summarize_records",
    "svt",
    "sweep_hyperparameters",
    "synthesize_scene",
    "synthesize_wall_returns",
    "trial_seed",
    "wall_subspace_removal",
    "weighted_ridge_update",
    "write_complex_csv",
    "write_matrix",
    "write_pgm16",
    "write_trial_records",
]
