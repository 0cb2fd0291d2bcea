from .experiment_service import ExperimentService
from .result_writer import ResultWriter
from .verification_service import VerificationService

__all__ = [
    "ExperimentService",
    "ResultWriter",
    "VerificationService",
]
