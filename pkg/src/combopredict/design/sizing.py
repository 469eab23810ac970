"""
Sample size and power for comparing two response proportions

Normal approximation with a pooled-variance null term and an unpooled
alternative term, one-sided alpha. ``allocation_ratio`` k puts k
experimental patients per control patient.
"""

import math
from typing import NamedTuple

from scipy.stats import norm

from ..exceptions import InvariantViolation
from ..schemas import DesignSpec


class SampleSize(NamedTuple):
    n_per_arm: int
    n_total: int


def _terms(spec: DesignSpec):
    p1, p2, k = spec.p_control, spec.p_experimental, spec.allocation_ratio
    p_bar = (p1 + k * p2) / (1.0 + k)
    null_sd = math.sqrt(p_bar * (1.0 - p_bar) * (1.0 + 1.0 / k))
    alt_sd = math.sqrt(p1 * (1.0 - p1) + p2 * (1.0 - p2) / k)
    return abs(p2 - p1), null_sd, alt_sd


def sample_size_two_proportions(spec: DesignSpec) -> SampleSize:
    """
    Patients needed to detect p_experimental vs p_control

    Returns:
        SampleSize(n_per_arm, n_total); ``n_per_arm`` is the control arm,
        the experimental arm has ceil(k * n_per_arm) patients

    Examples:
        >>> sample_size_two_proportions(DesignSpec(p_control=0.7, p_experimental=0.8))
        SampleSize(n_per_arm=231, n_total=462)
    """
    delta, null_sd, alt_sd = _terms(spec)
    z_alpha = norm.ppf(1.0 - spec.alpha_one_sided)
    z_beta = norm.ppf(spec.power)
    n = (z_alpha * null_sd + z_beta * alt_sd) ** 2 / delta ** 2

    if spec.continuity_correction:
        k = spec.allocation_ratio
        n = n / 4.0 * (1.0 + math.sqrt(1.0 + 2.0 * (k + 1.0) / (n * k * delta))) ** 2

    n_control = math.ceil(n)
    n_experimental = math.ceil(spec.allocation_ratio * n_control)
    return SampleSize(n_per_arm=n_control, n_total=n_control + n_experimental)


def power_two_proportions(spec: DesignSpec, n_per_arm: int) -> float:
    """Power of the one-sided test with ``n_per_arm`` control patients"""
    if n_per_arm < 2:
        raise InvariantViolation(f"n_per_arm must be >= 2, got {n_per_arm}")
    delta, null_sd, alt_sd = _terms(spec)
    z_alpha = norm.ppf(1.0 - spec.alpha_one_sided)
    return float(norm.cdf((delta * math.sqrt(n_per_arm) - z_alpha * null_sd) / alt_sd))
