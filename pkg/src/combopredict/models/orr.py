"""
Objective response rate of a combination under independent drug action

A patient responds to the combination when they respond to either drug,
X = max(X1, X2). With phi' = corr(X1, X2) the joint cell
P(X1 = 1, X2 = 1) = r1*r2 + phi' * sqrt(r1(1-r1) r2(1-r2)), and the
combination ORR is r1 + r2 minus that cell. phi' = 0 is Bliss independence.
"""

import math
from typing import Tuple

import numpy as np
from scipy.stats import norm

from ..exceptions import DegenerateRate, InfeasibleCorrelation, InvariantViolation, NoResponders
from .base import Rate, RateLike, ResponderMix, as_rate

FEASIBILITY_TOL = 1e-12


def _sd_product(r1: float, r2: float) -> float:
    return math.sqrt(r1 * (1.0 - r1) * r2 * (1.0 - r2))


def _joint_both(r1: float, r2: float, phi_prime: float) -> float:
    return r1 * r2 + phi_prime * _sd_product(r1, r2)


def joint_response_table(r1: RateLike, r2: RateLike, phi_prime: float) -> np.ndarray:
    """
    Joint Bernoulli table of (X1, X2)

    Returns:
        2x2 array ``t`` with ``t[x1, x2] = P(X1 = x1, X2 = x2)``

    Raises:
        InfeasibleCorrelation: if any cell falls outside [0, 1]
    """
    r1, r2 = as_rate(r1).value, as_rate(r2).value
    p11 = _joint_both(r1, r2, phi_prime)
    table = np.array([
        [1.0 - r1 - r2 + p11, r2 - p11],
        [r1 - p11, p11],
    ])
    if np.any(table < -FEASIBILITY_TOL) or np.any(table > 1.0 + FEASIBILITY_TOL):
        raise InfeasibleCorrelation(
            f"phi'={phi_prime} is infeasible for r1={r1}, r2={r2} "
            f"(joint cells {table.ravel().round(6).tolist()})"
        )
    return table


def feasible_phi_range(r1: RateLike, r2: RateLike) -> Tuple[float, float]:
    """
    Closed interval of phi' keeping every joint cell in [0, 1]

    These are the Frechet bounds max(0, r1+r2-1) <= P(1,1) <= min(r1, r2)
    rescaled to the correlation scale.
    """
    r1, r2 = as_rate(r1).value, as_rate(r2).value
    if r1 in (0.0, 1.0) or r2 in (0.0, 1.0):
        raise DegenerateRate(f"correlation is undefined for r1={r1}, r2={r2}")
    sd = _sd_product(r1, r2)
    lower = (max(0.0, r1 + r2 - 1.0) - r1 * r2) / sd
    upper = (min(r1, r2) - r1 * r2) / sd
    return max(-1.0, lower), min(1.0, upper)


def predict_orr(r1: RateLike, r2: RateLike, phi_prime: float = 0.0) -> Rate:
    """
    Predict the combination ORR

    Args:
        r1: ORR of monotherapy Drug 1
        r2: ORR of monotherapy Drug 2
        phi_prime: correlation of the two response indicators

    Returns:
        Combination ORR r = r1 + r2 - r1*r2 - phi' * sqrt(r1(1-r1) r2(1-r2))

    Raises:
        InfeasibleCorrelation: if phi' implies a joint cell outside [0, 1]
    """
    r1, r2 = as_rate(r1).value, as_rate(r2).value
    joint_response_table(r1, r2, phi_prime)
    value = r1 + r2 - _joint_both(r1, r2, phi_prime)
    return Rate(min(1.0, max(0.0, value)))


def orr_standard_error(r1: RateLike, r2: RateLike, phi_prime: float = 0.0) -> float:
    """Delta-method standard error of the predicted ORR from the two arm sizes"""
    r1, r2 = as_rate(r1), as_rate(r2)
    if r1.n is None or r2.n is None:
        raise InvariantViolation("arm sizes for both monotherapies are needed for a standard error")
    a, b = r1.value, r2.value
    sd = _sd_product(a, b)
    if sd > 0.0:
        d_sd_da = (1.0 - 2.0 * a) * b * (1.0 - b) / (2.0 * sd)
        d_sd_db = (1.0 - 2.0 * b) * a * (1.0 - a) / (2.0 * sd)
    else:
        d_sd_da = d_sd_db = 0.0
    grad_a = 1.0 - b - phi_prime * d_sd_da
    grad_b = 1.0 - a - phi_prime * d_sd_db
    return math.sqrt(grad_a ** 2 * r1.variance + grad_b ** 2 * r2.variance)


def orr_confidence_interval(
    r1: RateLike,
    r2: RateLike,
    phi_prime: float = 0.0,
    level: float = 0.95,
) -> Tuple[float, float, float]:
    """Point prediction with a normal-approximation interval clipped to [0, 1]"""
    r = predict_orr(r1, r2, phi_prime).value
    half = norm.ppf(0.5 + level / 2.0) * orr_standard_error(r1, r2, phi_prime)
    return r, max(0.0, r - half), min(1.0, r + half)


def responder_mix(r1: RateLike, r2: RateLike, phi_prime: float = 0.0) -> ResponderMix:
    """
    Split combination responders into dual, Drug-1-only and Drug-2-only

    Raises:
        NoResponders: if the predicted combination ORR is 0
    """
    r1, r2 = as_rate(r1).value, as_rate(r2).value
    r = predict_orr(r1, r2, phi_prime).value
    if r <= 0.0:
        raise NoResponders("predicted combination ORR is 0; responder mix is undefined")
    both = _joint_both(r1, r2, phi_prime)
    return ResponderMix(
        r12=both / r,
        r10=(r1 - both) / r,
        r02=(r2 - both) / r,
        r=r,
    )
