"""blocksense: sensing-matrix design and evaluation for block-sparse recovery."""

from .bomp import BompConfig, RankDeficientSupportError, bomp_decode, bomp_decode_batch
from .coherence import (
    CoherenceReport,
    block_recovery_bound,
    coherence_report,
    decomposition_check,
    deviation,
    idealized,
    inter_block_coherence,
    mutual_coherence,
    normalization_penalty,
    objective_gradient,
    sparse_recovery_bound,
    sub_block_coherence,
    total_inter_block_coherence,
    total_sub_block_coherence,
    weighted_objective,
)
from .ds import design_ds, ds_objective
from .harness import (
    ExperimentConfig,
    SweepResult,
    SweepSummary,
    TrialResult,
    classification_rate,
    dct_matrix,
    generate_dictionary,
    generate_signals,
    representation_error,
    run_histogram,
    run_sweep,
    run_trial,
    write_sweep_outputs,
)
from .kernels import BACKEND
from .model import (
    BlockGram,
    BlockSparseVector,
    BlockStructure,
    Dictionary,
    EquivalentDictionary,
    SensingMatrix,
    equivalent_dictionary,
    gram,
    sym_eig,
)
from .wcm import (
    WcmConfig,
    WcmReport,
    run_wcm,
    surrogate_gradient,
    surrogate_target,
    surrogate_value,
    wcm_step,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BlockGram",
    "BlockSparseVector",
    "BlockStructure",
    "BompConfig",
    "CoherenceReport",
    "Dictionary",
    "EquivalentDictionary",
    "ExperimentConfig",
    "RankDeficientSupportError",
    "SensingMatrix",
    "SweepResult",
    "SweepSummary",
    "TrialResult",
    "WcmConfig",
    "WcmReport",
    "block_recovery_bound",
    "bomp_decode",
    "bomp_decode_batch",
    "classification_rate",
    "coherence_report",
    "dct_matrix",
    "decomposition_check",
    "design_ds",
    "deviation",
    "ds_objective",
    "equivalent_dictionary",
    "generate_dictionary",
    "generate_signals",
    "gram",
    "idealized",
    "inter_block_coherence",
    "mutual_coherence",
    "normalization_penalty",
    "objective_gradient",
    "representation_error",
    "run_histogram",
    "run_sweep",
    "run_trial",
    "run_wcm",
    "sparse_recovery_bound",
    "sub_block_coherence",
    "surrogate_gradient",
    "surrogate_target",
    "surrogate_value",
    "sym_eig",
    "total_inter_block_coherence",
    "total_sub_block_coherence",
    "weighted_objective",
    "wcm_step",
    "write_sweep_outputs",
]
