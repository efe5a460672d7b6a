"""Covariate-assisted spectral grade-of-membership estimation."""

from ._cogom import (
    AlignedError,
    ArgumentError,
    ConvergenceError,
    CvReport,
    DegenerateSpectrumError,
    Error,
    GenerationError,
    GeometryError,
    GomModel,
    HeteroPcaResult,
    IoError,
    NumericalError,
    RankError,
    ShapeError,
    SignalError,
    ValidationError,
    align,
    check_identifiability,
    cross_validate_alpha,
    default_alpha_grid,
    fit,
    generate,
    hetero_pca,
    optimal_assignment,
    parallel_analysis,
    predict,
    project_to_simplex,
    subspace_distance,
    successive_projection,
)

__version__ = "0.1.0"
