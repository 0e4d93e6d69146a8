from .data_service import DataService
from .experiment_service import ExperimentService
from .fit_service import FitService
from .predict_service import PredictService
from .progress_service import progress_service

__all__ = ["DataService", "ExperimentService", "FitService", "PredictService", "progress_service"]
