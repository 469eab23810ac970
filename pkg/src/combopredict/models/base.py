import logging
from dataclasses import dataclass, field, fields
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..exceptions import EmptySample, InvariantViolation

logger = logging.getLogger(__name__)

# PDX studies put the cell-kill correlation in this range for most combinations
TUMOR_CORRELATION_RANGE = (0.0, 0.3)


@dataclass(frozen=True)
class Ordering:
    """Predicted combination median relative to the longer monotherapy median"""
    combo_shorter: str = "combo_shorter"
    combo_equal: str = "combo_equal"
    combo_longer: str = "combo_longer"

    @classmethod
    def get_fields(cls):
        return [f.default for f in fields(cls)]


@dataclass(frozen=True)
class WaterfallMode:
    """Pair-combination rule used by the waterfall engine"""
    proposed: str = "proposed"
    palmer: str = "palmer"

    @classmethod
    def get_fields(cls):
        return [f.default for f in fields(cls)]


@dataclass(frozen=True)
class Rate:
    """A response probability, optionally with the arm size it was observed on"""
    value: float
    n: Optional[int] = None

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0) or np.isnan(self.value):
            raise InvariantViolation(f"rate must lie in [0, 1], got {self.value}")
        if self.n is not None and self.n < 1:
            raise InvariantViolation(f"arm size must be >= 1, got {self.n}")

    def __float__(self) -> float:
        return float(self.value)

    @property
    def variance(self) -> Optional[float]:
        """Binomial variance of the observed rate, None without an arm size"""
        if self.n is None:
            return None
        return self.value * (1.0 - self.value) / self.n


RateLike = Union[Rate, float]


def as_rate(value: RateLike) -> Rate:
    if isinstance(value, Rate):
        return value
    return Rate(float(value))


@dataclass(frozen=True)
class CorrelationSpec:
    """
    Correlations linking the two monotherapies

    Args:
        phi_prime: correlation of the two response indicators
        phi_dprime: correlation of the duration-exceedance indicators; a scalar
            constant in t, or one value per grid point for research use
        phi_tumor: correlation of the two drugs' cell-kill fractions
    """
    phi_prime: float = 0.0
    phi_dprime: Union[float, Sequence[float]] = 0.0
    phi_tumor: float = 0.0

    def __post_init__(self):
        dprime = np.atleast_1d(np.asarray(self.phi_dprime, dtype=float))
        for name, values in (
            ("phi_prime", np.atleast_1d(self.phi_prime)),
            ("phi_dprime", dprime),
            ("phi_tumor", np.atleast_1d(self.phi_tumor)),
        ):
            if np.any(np.abs(values) > 1.0) or np.any(np.isnan(values)):
                raise InvariantViolation(f"{name} must lie in [-1, 1]")
        lo, hi = TUMOR_CORRELATION_RANGE
        if not (lo <= self.phi_tumor <= hi):
            logger.warning(
                f"phi_tumor={self.phi_tumor} is outside the usual range [{lo}, {hi}]"
            )

    def dprime_on(self, n_points: int) -> np.ndarray:
        """phi_dprime broadcast onto a grid of ``n_points``"""
        values = np.asarray(self.phi_dprime, dtype=float)
        if values.ndim == 0:
            return np.full(n_points, float(values))
        if values.shape != (n_points,):
            raise InvariantViolation(
                f"phi_dprime override has {values.size} values for a {n_points}-point grid"
            )
        return values


@dataclass
class CurveMetadata:
    """Bookkeeping attached to loaded or predicted curves"""
    inserted_origin: bool = False
    monotone_adjustment: float = 0.0
    source: Optional[str] = None


@dataclass
class SurvivalCurve:
    """
    Tabulated survival function S(t) on a time grid in months

    The curve is read as a right-continuous step function: S(t) equals the
    tabulated value at the last grid time <= t, and the last value beyond
    the grid.
    """
    times: np.ndarray
    probs: np.ndarray
    std_err: Optional[np.ndarray] = None
    metadata: CurveMetadata = field(default_factory=CurveMetadata)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.probs = np.asarray(self.probs, dtype=float)
        if self.std_err is not None:
            self.std_err = np.asarray(self.std_err, dtype=float)
        self.validate()

    def validate(self):
        times, probs = self.times, self.probs
        if times.ndim != 1 or times.shape != probs.shape:
            raise InvariantViolation("times and probs must be 1-d arrays of equal length")
        if times.size < 2:
            raise InvariantViolation("a survival curve needs at least 2 points")
        if not np.all(np.isfinite(times)) or not np.all(np.isfinite(probs)):
            raise InvariantViolation("times and probs must be finite")
        if times[0] != 0.0:
            raise InvariantViolation("curve must start at t = 0", row=1)
        if abs(probs[0] - 1.0) > 1e-12:
            raise InvariantViolation("curve must start at S(0) = 1", row=1)
        for i in range(1, times.size):
            if times[i] < 0:
                raise InvariantViolation(f"negative time {times[i]}", row=i + 1)
            if times[i] <= times[i - 1]:
                raise InvariantViolation("times must be strictly increasing", row=i + 1)
            if not (0.0 <= probs[i] <= 1.0):
                raise InvariantViolation(f"probability {probs[i]} outside [0, 1]", row=i + 1)
            if probs[i] > probs[i - 1]:
                raise InvariantViolation("survival probabilities must be nonincreasing", row=i + 1)
        if self.std_err is not None:
            if self.std_err.shape != times.shape:
                raise InvariantViolation("std_err must be grid-aligned with the curve")
            if np.any(self.std_err < 0) or not np.all(np.isfinite(self.std_err)):
                raise InvariantViolation("std_err entries must be finite and >= 0")

    def evaluate(self, t) -> np.ndarray:
        """Step-function lookup of S at time(s) ``t``"""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.times, t, side="right") - 1
        return self.probs[np.clip(idx, 0, None)]

    def evaluate_std_err(self, t) -> Optional[np.ndarray]:
        if self.std_err is None:
            return None
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.times, t, side="right") - 1
        return self.std_err[np.clip(idx, 0, None)]

    @property
    def support(self) -> float:
        return float(self.times[-1])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"time_months": self.times, "survival_prob": self.probs})


@dataclass(frozen=True)
class ResponderMix:
    """Split of combination responders by which monotherapy they respond to"""
    r12: float
    r10: float
    r02: float
    r: float

    def __post_init__(self):
        parts = (self.r12, self.r10, self.r02)
        if min(parts) < -1e-12:
            raise InvariantViolation(f"negative responder proportion in {parts}")
        if abs(sum(parts) - 1.0) > 1e-12:
            raise InvariantViolation(f"responder proportions sum to {sum(parts)}, not 1")


@dataclass
class MedianOrdering:
    """Outcome of the median-ordering rule"""
    ordering: str
    s1_at_u2: float
    threshold: float
    extrapolated: bool = False


@dataclass
class WaterfallSample:
    """Best % change from baseline per patient; negative values are shrinkage"""
    values: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.values.size == 0:
            raise EmptySample("waterfall sample is empty")
        bad = np.flatnonzero(~np.isfinite(self.values))
        if bad.size:
            raise InvariantViolation("non-finite % change", row=int(bad[0]) + 1)
        bad = np.flatnonzero(self.values < -100.0)
        if bad.size:
            raise InvariantViolation(
                f"% change {self.values[bad[0]]} is below -100", row=int(bad[0]) + 1
            )

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass
class PredictedBand:
    """
    Predicted waterfall sorted decreasing, with the patient-fraction index

    ``lower``/``upper``/``mean`` are set only for bootstrap results.
    """
    index: np.ndarray
    predicted: np.ndarray
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    mean: Optional[np.ndarray] = None
    seed: Optional[int] = None
    nboot: int = 0

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"index": self.index, "predicted": self.predicted})
        frame["lower"] = self.lower if self.lower is not None else np.nan
        frame["upper"] = self.upper if self.upper is not None else np.nan
        return frame
