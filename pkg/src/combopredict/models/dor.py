"""
Duration of response (DoR) of a combination under independent drug action

Responders to the combination fall into three groups: dual responders
(DoR = max(T1, T2)), Drug-1-only responders (DoR = T1) and Drug-2-only
responders (DoR = T2). Equivalently, with Y_i = X_i * T_i and
Y = max(Y1, Y2), the combination DoR survival is P(Y > t) / P(X = 1).
Both forms are implemented; ``predict_dor_curve`` uses the product form.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.stats import norm

from ..exceptions import (
    DegenerateMargin,
    GridMismatch,
    InfeasibleCorrelation,
    InvariantViolation,
    NoResponders,
    OutOfRange,
)
from .base import (
    CorrelationSpec,
    CurveMetadata,
    MedianOrdering,
    Ordering,
    RateLike,
    SurvivalCurve,
    as_rate,
)
from .orr import FEASIBILITY_TOL, _joint_both, joint_response_table

logger = logging.getLogger(__name__)


def align_curves(
    s1: SurvivalCurve,
    s2: SurvivalCurve,
    grid: Optional[Sequence[float]] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Put two curves on a common grid by right-continuous step lookup

    Without an explicit grid the union of both time grids is used, cut at the
    shorter support so neither curve is extrapolated.

    Raises:
        GridMismatch: if an explicit grid leaves the common support
    """
    support = min(s1.support, s2.support)
    if grid is None:
        times = np.union1d(s1.times, s2.times)
        times = times[times <= support]
    else:
        times = np.asarray(grid, dtype=float)
        if times.ndim != 1 or times.size < 2 or np.any(np.diff(times) <= 0):
            raise GridMismatch("explicit grid must be strictly increasing with >= 2 points")
        if times[0] < 0 or times[-1] > support:
            raise GridMismatch(
                f"grid [{times[0]}, {times[-1]}] leaves the common support [0, {support}]"
            )
    return times, s1.evaluate(times), s2.evaluate(times)


def _cross_term(r1, r2, phi_prime, s1, s2, phi_dprime):
    """
    P(X1 T1 > t, X2 T2 > t) - P(X1 T1 > t) P(X2 T2 > t)

    Responses and durations are linked only through phi' and phi''(t), so the
    joint exceedance factors into P(X1 = X2 = 1) * P(T1 > t, T2 > t).
    """
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    both_respond = _joint_both(r1, r2, phi_prime)
    both_last = s1 * s2 + phi_dprime * np.sqrt(s1 * (1.0 - s1) * s2 * (1.0 - s2))
    return both_respond * both_last - r1 * r2 * s1 * s2


def phi_of_t(
    phi_prime: float,
    phi_dprime,
    r1: RateLike,
    r2: RateLike,
    s1,
    s2,
):
    """
    Correlation of the indicators I(X1 T1 > t) and I(X2 T2 > t)

    Accepts scalars or grid-aligned arrays for ``phi_dprime``, ``s1``, ``s2``.

    Raises:
        DegenerateMargin: if r_i * S_i(t) is 0 or 1 anywhere
    """
    r1, r2 = as_rate(r1).value, as_rate(r2).value
    m1 = r1 * np.asarray(s1, dtype=float)
    m2 = r2 * np.asarray(s2, dtype=float)
    if np.any((m1 <= 0.0) | (m1 >= 1.0) | (m2 <= 0.0) | (m2 >= 1.0)):
        raise DegenerateMargin("phi(t) is undefined where r_i * S_i(t) is 0 or 1")
    numerator = _cross_term(r1, r2, phi_prime, s1, s2, np.asarray(phi_dprime, dtype=float))
    phi = numerator / np.sqrt(m1 * (1.0 - m1) * m2 * (1.0 - m2))
    if np.ndim(phi) == 0:
        return float(phi)
    return phi


def _phi_on_grid(r1, r2, phi_prime, s1, s2, phi_dprime) -> np.ndarray:
    """phi(t) on a grid, 0 where the margin is degenerate (its weight vanishes there)"""
    m1, m2 = r1 * s1, r2 * s2
    ok = (m1 > 0.0) & (m1 < 1.0) & (m2 > 0.0) & (m2 < 1.0)
    phi = np.zeros_like(s1)
    if np.any(ok):
        phi[ok] = phi_of_t(phi_prime, phi_dprime[ok], r1, r2, s1[ok], s2[ok])
    return phi


def _check_duration_feasibility(times, s1, s2, phi_dprime):
    both_last = s1 * s2 + phi_dprime * np.sqrt(s1 * (1.0 - s1) * s2 * (1.0 - s2))
    lower = np.maximum(0.0, s1 + s2 - 1.0)
    upper = np.minimum(s1, s2)
    bad = np.flatnonzero(
        (both_last < lower - FEASIBILITY_TOL) | (both_last > upper + FEASIBILITY_TOL)
    )
    if bad.size:
        i = int(bad[0])
        raise InfeasibleCorrelation(
            f"phi''={phi_dprime[i]} is infeasible at t={times[i]} "
            f"(S1={s1[i]}, S2={s2[i]})"
        )


def _combination_rate(r1: float, r2: float, phi_prime: float) -> float:
    joint_response_table(r1, r2, phi_prime)
    r = r1 + r2 - _joint_both(r1, r2, phi_prime)
    if r <= 0.0:
        raise NoResponders("predicted combination ORR is 0; DoR is undefined")
    return r


def survival_by_response_type(r1, r2, phi_prime, s1, s2, phi_dprime) -> np.ndarray:
    """
    Mixture form: sum over responder type of P(T > t | type) P(type)

    Unprojected values on the grid of ``s1``/``s2``.
    """
    r1, r2 = as_rate(r1).value, as_rate(r2).value
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    r = _combination_rate(r1, r2, phi_prime)
    both = _joint_both(r1, r2, phi_prime)
    r12, r10, r02 = both / r, (r1 - both) / r, (r2 - both) / r
    longer_of_two = s1 + s2 - s1 * s2 - np.asarray(phi_dprime) * np.sqrt(
        s1 * (1.0 - s1) * s2 * (1.0 - s2)
    )
    return r12 * longer_of_two + r10 * s1 + r02 * s2


def survival_by_duration_product(r1, r2, phi_prime, s1, s2, phi_dprime) -> np.ndarray:
    """
    Product form: P(max(X1 T1, X2 T2) > t) / r with phi(t) from ``phi_of_t``

    Unprojected values on the grid of ``s1``/``s2``.
    """
    r1, r2 = as_rate(r1).value, as_rate(r2).value
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    phi_dprime = np.broadcast_to(np.asarray(phi_dprime, dtype=float), s1.shape)
    r = _combination_rate(r1, r2, phi_prime)
    m1, m2 = r1 * s1, r2 * s2
    phi = _phi_on_grid(r1, r2, phi_prime, s1, s2, phi_dprime)
    spread = np.sqrt(np.clip(m1 * (1.0 - m1) * m2 * (1.0 - m2), 0.0, None))
    return (m1 + m2 - m1 * m2 - phi * spread) / r


def predict_dor_curve(
    s1: SurvivalCurve,
    s2: SurvivalCurve,
    r1: RateLike,
    r2: RateLike,
    corr: Optional[CorrelationSpec] = None,
    grid: Optional[Sequence[float]] = None,
) -> SurvivalCurve:
    """
    Predict the DoR survival curve of the combination's responders

    The raw prediction is projected onto nonincreasing curves with a running
    minimum; the largest change is kept in ``metadata.monotone_adjustment``.

    Raises:
        GridMismatch: for an explicit grid outside the common support
        InfeasibleCorrelation: if phi' or phi''(t) is infeasible anywhere
    """
    corr = corr or CorrelationSpec()
    r1v, r2v = as_rate(r1).value, as_rate(r2).value
    times, a, b = align_curves(s1, s2, grid)
    phi_dprime = corr.dprime_on(times.size)
    joint_response_table(r1v, r2v, corr.phi_prime)
    _check_duration_feasibility(times, a, b, phi_dprime)
    logger.debug(f"DoR prediction on {times.size} grid points up to t={times[-1]}")

    raw = survival_by_duration_product(r1v, r2v, corr.phi_prime, a, b, phi_dprime)
    projected = np.minimum.accumulate(np.clip(raw, 0.0, 1.0))
    projected[0] = 1.0
    adjustment = float(np.max(np.abs(raw - projected)))
    if adjustment > 1e-9:
        logger.warning(f"predicted DoR curve was not monotone; max adjustment {adjustment:.3g}")
    return SurvivalCurve(
        times=times,
        probs=projected,
        metadata=CurveMetadata(monotone_adjustment=adjustment, source="predicted"),
    )


def dor_variance(
    s1,
    s2,
    r1: RateLike,
    r2: RateLike,
    phi,
    sigma_s1,
    sigma_s2,
    phi_prime: float = 0.0,
    printed_pairing: bool = False,
):
    """
    First-order variance of the predicted S(t) from the monotherapy curve errors

    ``phi_prime`` only enters through the combination ORR in the denominator.
    By default A1 = r2S2(1-r2S2)(1-2r1S1) multiplies the sigma_S1 term, which
    is the derivative of the prediction with respect to S1; with
    ``printed_pairing`` A1 and A2 swap roles. Both agree when phi = 0.

    Raises:
        DegenerateMargin: if B = 0 where phi != 0 and an input sigma is positive
    """
    r1, r2 = as_rate(r1).value, as_rate(r2).value
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    phi = np.asarray(phi, dtype=float)
    sigma_s1 = np.asarray(sigma_s1, dtype=float)
    sigma_s2 = np.asarray(sigma_s2, dtype=float)
    if np.any(sigma_s1 < 0) or np.any(sigma_s2 < 0):
        raise InvariantViolation("standard errors must be >= 0")

    r = _combination_rate(r1, r2, phi_prime)
    m1, m2 = r1 * s1, r2 * s2
    a1 = m2 * (1.0 - m2) * (1.0 - 2.0 * m1)
    a2 = m1 * (1.0 - m1) * (1.0 - 2.0 * m2)
    b = r1 * r2 * s1 * s2 * (1.0 - m1) * (1.0 - m2)

    uncertain = (sigma_s1 > 0) | (sigma_s2 > 0)
    if np.any((b <= 0) & (phi != 0) & uncertain):
        raise DegenerateMargin("variance needs B > 0 wherever phi != 0")
    half_inv_sqrt_b = np.divide(
        0.5, np.sqrt(np.clip(b, 0.0, None)),
        out=np.zeros(np.broadcast(b, phi).shape), where=b > 0,
    )
    if printed_pairing:
        a1, a2 = a2, a1
    coef1 = (1.0 - m2) - phi * a1 * half_inv_sqrt_b
    coef2 = (1.0 - m1) - phi * a2 * half_inv_sqrt_b
    var = (r1 ** 2 * coef1 ** 2 * sigma_s1 ** 2 + r2 ** 2 * coef2 ** 2 * sigma_s2 ** 2) / r ** 2
    if np.ndim(var) == 0:
        return float(var)
    return var


def survival_standard_error(curve: SurvivalCurve, n_responders: int) -> np.ndarray:
    """Binomial approximation sqrt(S(1-S)/n) to pointwise KM standard errors"""
    if n_responders < 1:
        raise InvariantViolation("need at least one responder for a standard error")
    return np.sqrt(curve.probs * (1.0 - curve.probs) / n_responders)


@dataclass
class DorBand:
    """Predicted curve with pointwise variance and normal-approximation band"""
    curve: SurvivalCurve
    phi: np.ndarray
    variance: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def to_frame(self):
        frame = self.curve.to_frame()
        frame["variance"] = self.variance
        frame["lower"] = self.lower
        frame["upper"] = self.upper
        return frame


def _curve_sigma(curve: SurvivalCurve, rate, times) -> Optional[np.ndarray]:
    if curve.std_err is not None:
        return curve.evaluate_std_err(times)
    rate = as_rate(rate)
    if rate.n is None:
        return None
    n_responders = max(1, int(round(rate.value * rate.n)))
    probs = curve.evaluate(times)
    return np.sqrt(probs * (1.0 - probs) / n_responders)


def predict_dor_band(
    s1: SurvivalCurve,
    s2: SurvivalCurve,
    r1: RateLike,
    r2: RateLike,
    corr: Optional[CorrelationSpec] = None,
    level: float = 0.95,
    printed_pairing: bool = False,
) -> DorBand:
    """
    Predicted DoR curve with its pointwise variance

    Curve standard errors come from a ``std_err`` column when the curve has
    one, otherwise from the binomial approximation with r_i * n_i responders.
    Without either, the variance is NaN.
    """
    corr = corr or CorrelationSpec()
    curve = predict_dor_curve(s1, s2, r1, r2, corr)
    times = curve.times
    a, b = s1.evaluate(times), s2.evaluate(times)
    phi_dprime = corr.dprime_on(times.size)
    r1v, r2v = as_rate(r1).value, as_rate(r2).value
    phi = _phi_on_grid(r1v, r2v, corr.phi_prime, a, b, phi_dprime)

    sigma1 = _curve_sigma(s1, r1, times)
    sigma2 = _curve_sigma(s2, r2, times)
    if sigma1 is None or sigma2 is None:
        logger.warning("no standard errors for the monotherapy curves; variance left empty")
        variance = np.full(times.size, np.nan)
    else:
        variance = dor_variance(
            a, b, r1v, r2v, phi, sigma1, sigma2,
            phi_prime=corr.phi_prime, printed_pairing=printed_pairing,
        )
    half = norm.ppf(0.5 + level / 2.0) * np.sqrt(variance)
    lower = np.clip(curve.probs - half, 0.0, 1.0)
    upper = np.clip(curve.probs + half, 0.0, 1.0)
    return DorBand(curve=curve, phi=phi, variance=variance, lower=lower, upper=upper)


def median_of_curve(curve: SurvivalCurve) -> Optional[float]:
    """
    Earliest time with S(t) <= 0.5, interpolating linearly inside the step

    Returns:
        The median in months, or None when the curve never reaches 0.5
    """
    probs, times = curve.probs, curve.times
    below = np.flatnonzero(probs <= 0.5)
    if below.size == 0:
        return None
    i = int(below[0])
    if probs[i] == 0.5 or i == 0:
        return float(times[i])
    p0, p1 = probs[i - 1], probs[i]
    return float(times[i - 1] + (p0 - 0.5) / (p0 - p1) * (times[i] - times[i - 1]))


def median_threshold(r2: RateLike) -> float:
    """Value of S1(u2) at which the combination median equals u2"""
    r2 = as_rate(r2).value
    return (1.0 - r2) / (2.0 - r2)


def classify_median_ordering(s1: SurvivalCurve, r2: RateLike, u2: float) -> MedianOrdering:
    """
    Place the combination median relative to u2, the longer monotherapy median

    Assumes independence (phi' = phi'' = 0). Beyond the support of ``s1`` the
    curve is held at its last value and the result is flagged.

    Raises:
        OutOfRange: if u2 is negative
    """
    if u2 < 0:
        raise OutOfRange(f"u2 must be >= 0, got {u2}")
    extrapolated = u2 > s1.support
    if extrapolated:
        logger.warning(f"u2={u2} is beyond the Drug 1 curve support {s1.support}; holding last value")
    s1_at_u2 = float(s1.evaluate(u2))
    threshold = median_threshold(r2)
    if math.isclose(s1_at_u2, threshold, rel_tol=1e-9, abs_tol=1e-12):
        ordering = Ordering.combo_equal
    elif s1_at_u2 < threshold:
        ordering = Ordering.combo_shorter
    else:
        ordering = Ordering.combo_longer
    return MedianOrdering(
        ordering=ordering,
        s1_at_u2=s1_at_u2,
        threshold=threshold,
        extrapolated=extrapolated,
    )


@dataclass
class ObservedDorComparison:
    """Observed combination DoR curve set against the predicted band"""
    coverage: Optional[float]
    max_abs_difference: float
    predicted_median: Optional[float]
    observed_median: Optional[float]
    n_points: int


def compare_observed_dor(band: DorBand, observed: SurvivalCurve) -> ObservedDorComparison:
    """
    Compare an observed combination curve with the predicted band

    Both curves are read on the predicted grid up to the observed support.
    ``coverage`` is the fraction of those times where the observed value lies
    inside [lower, upper]; it is None when the band has no variance.
    """
    times = band.curve.times[band.curve.times <= observed.support]
    keep = times.size
    obs = observed.evaluate(times)
    pred = band.curve.probs[:keep]
    coverage = None
    if np.all(np.isfinite(band.variance[:keep])):
        inside = (obs >= band.lower[:keep] - 1e-12) & (obs <= band.upper[:keep] + 1e-12)
        coverage = float(np.mean(inside))
    else:
        logger.warning("predicted band has no variance; observed coverage not computed")
    return ObservedDorComparison(
        coverage=coverage,
        max_abs_difference=float(np.max(np.abs(obs - pred))),
        predicted_median=median_of_curve(band.curve),
        observed_median=median_of_curve(observed),
        n_points=int(keep),
    )
