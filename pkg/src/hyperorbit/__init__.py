"""Hypercyclicity of finitely generated abelian matrix semigroups."""

import os as _os

# HYPERORBIT_THREADS caps the BLAS thread pools; it must be set before numpy loads
_threads = _os.environ.get("HYPERORBIT_THREADS")
if _threads and _threads.isdigit() and int(_threads) > 0:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

__version__ = "0.1.0"

from .analysis import AnalysisReport, analyze_family  # noqa: E402
from .constructor import ConstructionRecipe, build_generators, choose_alpha, reference_example  # noqa: E402
from .density import DensityVerdict, density_verdict, empirical_coverage, integer_relation  # noqa: E402
from .exp_log import exp_K, principal_log_K  # noqa: E402
from .matrix_core import BlockPartition, ToleranceConfig  # noqa: E402
from .normal_form import NormalForm, compute_normal_form  # noqa: E402
from .orbit import OrbitSample, enumerate_orbit  # noqa: E402
from .semigroup import AdditiveSemigroup, compute_g2_v0, compute_index  # noqa: E402

__all__ = [
    "AdditiveSemigroup",
    "AnalysisReport",
    "BlockPartition",
    "ConstructionRecipe",
    "DensityVerdict",
    "NormalForm",
    "OrbitSample",
    "ToleranceConfig",
    "analyze_family",
    "build_generators",
    "choose_alpha",
    "compute_g2_v0",
    "compute_index",
    "compute_normal_form",
    "density_verdict",
    "empirical_coverage",
    "enumerate_orbit",
    "exp_K",
    "integer_relation",
    "principal_log_K",
    "reference_example",
]
