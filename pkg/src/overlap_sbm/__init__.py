"""Spectral detectability of overlapping stochastic block models.

Modules: :mod:`.sbm_models` (parameters and samplers), :mod:`.spectral_engine`
(modularity spectra and accuracy), :mod:`.replica_solver` (saddle-point
equations), :mod:`.experiments` (figure reproductions), :mod:`.cli_io` (CLI).
"""

from .graph import SparseGraph, read_edgelist, write_edgelist
from .replica_solver import (
    DetectabilityReport,
    SaddleSolution,
    classify,
    classify_bimodal,
    detectability_D,
    phase_boundary,
    sigma_sweep,
    solve_bimodal_detectable,
    solve_bimodal_undetectable,
    solve_detectable,
    solve_undetectable,
)
from .sbm_models import (
    AffinityMatrix,
    BimodalParams,
    InfeasibleParameters,
    MicrocanonicalSpec,
    OverlapParams,
    RewireStall,
    build_overlap_params,
    mmsbm_equivalent_sigma,
    overlap_affinity,
    sample_bimodal,
    sample_canonical,
    sample_microcanonical,
)
from .spectral_engine import (
    ModularityOperator,
    NonConverged,
    PartitionScore,
    SpectrumResult,
    dense_spectrum_oracle,
    leading_eigenpair,
    modularity_matvec,
    overlap_accuracy,
    partition_by_sign,
    top_k_eigenvalues,
)

__version__ = "0.1.0"
