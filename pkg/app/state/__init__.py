from .experiment_state import (
    DEFAULT_THRESHOLD,
    GENERATORS,
    ExperimentConfig,
    PropertyResult,
    VerificationRequest,
)

__all__ = [
    "DEFAULT_THRESHOLD",
    "GENERATORS",
    "ExperimentConfig",
    "PropertyResult",
    "VerificationRequest",
]
