"""Data models for Ergoline."""

from ergoline.models.experiment import (
    ExperimentConfig,
    FeasibilityParams,
    FitRequest,
    StationaryParams,
)
from ergoline.models.lyapunov import (
    AffineV,
    ExpV,
    FracPowerV,
    LyapunovSpec,
    PowerAffineV,
    Truncation,
)
from ergoline.models.process import (
    CompoundMeasure,
    DensityMeasure,
    DiffusionModel,
    ExpDisplacementKernel,
    ExponentialInitial,
    ExponentialLaw,
    InitialLaw,
    JumpDiffusionModel,
    LevyMeasureSpec,
    LevyModel,
    ParetoLaw,
    PointInitial,
    PointLaw,
    ProcessModel,
    SimConfig,
    TranslationKernel,
    UniformInitial,
    UniformLaw,
)
from ergoline.models.rates import (
    ConstantPhi,
    CustomPhi,
    LinearPhi,
    PhiSpec,
    PowerPhi,
    YoungPair,
    scaled_phi,
)
from ergoline.models.reports import (
    AuditReport,
    BoundReport,
    BoundRow,
    EmpiricalStationary,
    GridSpec,
    RateCertificate,
    StationaryDiagnostics,
    SupermartingaleReport,
    SupermartingaleRow,
    VerdictStatus,
)

__all__ = [
    "AffineV",
    "AuditReport",
    "BoundReport",
    "BoundRow",
    "CompoundMeasure",
    "ConstantPhi",
    "CustomPhi",
    "DensityMeasure",
    "DiffusionModel",
    "EmpiricalStationary",
    "ExpDisplacementKernel",
    "ExpV",
    "ExperimentConfig",
    "ExponentialInitial",
    "ExponentialLaw",
    "FeasibilityParams",
    "FitRequest",
    "FracPowerV",
    "GridSpec",
    "InitialLaw",
    "JumpDiffusionModel",
    "LevyMeasureSpec",
    "LevyModel",
    "LinearPhi",
    "LyapunovSpec",
    "ParetoLaw",
    "PhiSpec",
    "PointInitial",
    "PointLaw",
    "PowerAffineV",
    "PowerPhi",
    "ProcessModel",
    "RateCertificate",
    "SimConfig",
    "StationaryDiagnostics",
    "StationaryParams",
    "SupermartingaleReport",
    "SupermartingaleRow",
    "TranslationKernel",
    "Truncation",
    "UniformInitial",
    "UniformLaw",
    "VerdictStatus",
    "YoungPair",
    "scaled_phi",
]
