"""
combopredict - predict combination-therapy response, duration of response
and tumor-size change from monotherapy data under independent drug action
"""

from .design import power_two_proportions, reverse_engineer_r2, sample_size_two_proportions
from .exceptions import ComboPredictError
from .main import Main
from .models import (
    CorrelationSpec,
    PredictedBand,
    Rate,
    SurvivalCurve,
    WaterfallSample,
    predict_dor_curve,
    predict_orr,
)
from .models.waterfall import bootstrap_band, deep_response_rate, predict_waterfall
from .schemas import CopulaConfig, DesignSpec, StudyInput
from .utils import resolve_config_path

__version__ = "0.1.0"

__all__ = [
    'power_two_proportions',
    'reverse_engineer_r2',
    'sample_size_two_proportions',
    'ComboPredictError',
    'Main',
    'CorrelationSpec',
    'PredictedBand',
    'Rate',
    'SurvivalCurve',
    'WaterfallSample',
    'predict_dor_curve',
    'predict_orr',
    'bootstrap_band',
    'deep_response_rate',
    'predict_waterfall',
    'CopulaConfig',
    'DesignSpec',
    'StudyInput',
    'resolve_config_path',
]
