"""sobikit: second-order blind identification for EEG-style signals.

Separation (classic Jacobi joint diagonalization and a one-shot Schur
backend), spectral artifact removal, ERD/ERS band-power features, a
from-scratch SMO-trained SVM, a deterministic synthetic-EEG generator, and
a timing benchmark comparing the two separation backends.
"""

from .bss import (
    ArtifactCriteria,
    Diagnostics,
    Recording,
    SeparationResult,
    Whitener,
    center,
    diagonalize_schur,
    flag_artifact_components,
    joint_diagonalize_jacobi,
    lagged_covariance,
    lagged_covariance_set,
    remove_components,
    sobi,
    whiten,
)
from .bench import BenchmarkReport, BenchmarkRow, run_benchmark
from .errors import SobikitError
from .features import (
    BETA_BAND,
    Band,
    DEFAULT_BANDS,
    MU_BAND,
    band_power,
    energy,
    erd_percentage,
    extract_features,
    periodogram,
)
from .linalg import (
    EigenPair,
    SchurForm,
    givens_rotation,
    hessenberg,
    pseudo_inverse,
    real_schur,
    sym_eig,
)
from .pipeline import PipelineConfig, PipelineReport, run_pipeline
from .rng import Xorshift64Star, stream
from .svm import (
    LabeledDataset,
    SvmModel,
    cross_validate,
    load_model,
    save_model,
    svm_predict,
    svm_train,
)
from .synth import (
    GroundTruth,
    SourceSpec,
    Trial,
    TrialSchedule,
    TrialSet,
    generate_sources,
    make_dataset,
    mix_sources,
)

__version__ = "0.1.0"

__all__ = [
    "ArtifactCriteria",
    "BETA_BAND",
    "Band",
    "BenchmarkReport",
    "BenchmarkRow",
    "DEFAULT_BANDS",
    "Diagnostics",
    "EigenPair",
    "GroundTruth",
    "LabeledDataset",
    "MU_BAND",
    "PipelineConfig",
    "PipelineReport",
    "Recording",
    "SchurForm",
    "SeparationResult",
    "SobikitError",
    "SourceSpec",
    "SvmModel",
    "Trial",
    "TrialSchedule",
    "TrialSet",
    "Whitener",
    "Xorshift64Star",
    "band_power",
    "center",
    "cross_validate",
    "diagonalize_schur",
    "energy",
    "erd_percentage",
    "extract_features",
    "flag_artifact_components",
    "generate_sources",
    "givens_rotation",
    "hessenberg",
    "joint_diagonalize_jacobi",
    "lagged_covariance",
    "lagged_covariance_set",
    "load_model",
    "make_dataset",
    "mix_sources",
    "periodogram",
    "pseudo_inverse",
    "real_schur",
    "remove_components",
    "run_benchmark",
    "run_pipeline",
    "save_model",
    "sobi",
    "stream",
    "svm_predict",
    "svm_train",
    "sym_eig",
    "whiten",
]
