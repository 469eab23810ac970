from .base import (
    CorrelationSpec,
    MedianOrdering,
    Ordering,
    PredictedBand,
    Rate,
    ResponderMix,
    SurvivalCurve,
    WaterfallMode,
    WaterfallSample,
)
from .dor import (
    classify_median_ordering,
    compare_observed_dor,
    median_of_curve,
    phi_of_t,
    predict_dor_band,
    predict_dor_curve,
)
from .orr import feasible_phi_range, predict_orr, responder_mix

__all__ = [
    'CorrelationSpec',
    'MedianOrdering',
    'Ordering',
    'PredictedBand',
    'Rate',
    'ResponderMix',
    'SurvivalCurve',
    'WaterfallMode',
    'WaterfallSample',
    'classify_median_ordering',
    'compare_observed_dor',
    'median_of_curve',
    'phi_of_t',
    'predict_dor_band',
    'predict_dor_curve',
    'feasible_phi_range',
    'predict_orr',
    'responder_mix',
]
