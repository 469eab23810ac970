"""
Patient-level simulation of the independent-drug-action model

Used as an oracle for the closed-form predictions: draw response indicators
and response durations for a large virtual population and estimate the
combination DoR survival directly from Y = max(X1 T1, X2 T2).
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.stats import norm

from ..exceptions import NoResponders
from .base import RateLike, SurvivalCurve, as_rate
from .orr import feasible_phi_range, joint_response_table

logger = logging.getLogger(__name__)


def draw_joint_bernoulli(
    p1: float,
    p2: float,
    phi: float,
    size: int,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Draw ``size`` correlated Bernoulli pairs with margins p1, p2 and correlation phi

    Returns:
        two boolean arrays
    """
    cells = joint_response_table(p1, p2, phi).ravel()
    cells = np.clip(cells, 0.0, None)
    cells = cells / cells.sum()
    # cell order: (0,0), (0,1), (1,0), (1,1)
    outcome = rng.choice(4, size=size, p=cells)
    return outcome >= 2, (outcome % 2) == 1


def simulate_dor_survival(
    r1: RateLike,
    r2: RateLike,
    phi_prime: float,
    s1_values,
    s2_values,
    phi_dprime,
    n_patients: int,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Monte Carlo estimate of the combination DoR survival at each grid point

    Response indicators are drawn once per patient; at each grid point the
    exceedance indicators I(T_i > t) are drawn from their joint table with
    correlation phi''(t), independently of the responses.

    Args:
        r1, r2: monotherapy ORRs
        phi_prime: response correlation
        s1_values, s2_values: monotherapy DoR survival on a common grid
        phi_dprime: scalar or per-point duration correlation
        n_patients: virtual population size
        rng: random stream

    Returns:
        (estimate, standard_error) arrays on the grid
    """
    r1, r2 = as_rate(r1).value, as_rate(r2).value
    s1_values = np.asarray(s1_values, dtype=float)
    s2_values = np.asarray(s2_values, dtype=float)
    phi_dprime = np.broadcast_to(np.asarray(phi_dprime, dtype=float), s1_values.shape)

    x1, x2 = draw_joint_bernoulli(r1, r2, phi_prime, n_patients, rng)
    responders = x1 | x2
    n_resp = int(responders.sum())
    if n_resp == 0:
        raise NoResponders("simulated population has no responders")

    estimate = np.empty(s1_values.size)
    for j, (a, b, phi) in enumerate(zip(s1_values, s2_values, phi_dprime)):
        i1, i2 = draw_joint_bernoulli(a, b, phi, n_patients, rng)
        estimate[j] = np.sum((x1 & i1) | (x2 & i2)) / n_resp
    std_err = np.sqrt(estimate * (1.0 - estimate) / n_resp)
    logger.debug(f"simulated {n_patients} patients, {n_resp} responders")
    return estimate, std_err


def _duration_from_uniform(curve: SurvivalCurve, v: np.ndarray) -> np.ndarray:
    """Inverse of a step survival curve: T > t exactly when S(t) > v"""
    idx = np.searchsorted(-curve.probs, -v, side="left")
    times = np.append(curve.times, np.inf)
    return times[idx]


def simulate_duration_pairs(
    s1: SurvivalCurve,
    s2: SurvivalCurve,
    phi_dprime: float,
    size: int,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Draw (T1, T2) response durations coupled by a Gaussian copula

    The copula correlation is sin(pi * phi'' / 2), which makes the
    exceedance indicators correlate at phi'' where both curves cross 1/2.
    Durations beyond a curve's last time point are ``inf``.
    """
    rho = float(np.sin(np.pi * phi_dprime / 2.0))
    z1 = rng.standard_normal(size)
    z2 = rho * z1 + np.sqrt(1.0 - rho ** 2) * rng.standard_normal(size)
    return (
        _duration_from_uniform(s1, norm.cdf(z1)),
        _duration_from_uniform(s2, norm.cdf(z2)),
    )


def simulate_combination_dor(
    r1: RateLike,
    r2: RateLike,
    phi_prime: float,
    s1: SurvivalCurve,
    s2: SurvivalCurve,
    times,
    n_patients: int,
    rng: np.random.Generator,
    phi_dprime: float = 0.0,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Empirical DoR survival of max(X1 T1, X2 T2) among simulated responders

    Returns:
        (estimate, standard_error) at ``times``
    """
    r1, r2 = as_rate(r1).value, as_rate(r2).value
    x1, x2 = draw_joint_bernoulli(r1, r2, phi_prime, n_patients, rng)
    t1, t2 = simulate_duration_pairs(s1, s2, phi_dprime, n_patients, rng)
    y = np.maximum(np.where(x1, t1, 0.0), np.where(x2, t2, 0.0))
    responders = x1 | x2
    n_resp = int(responders.sum())
    if n_resp == 0:
        raise NoResponders("simulated population has no responders")
    y = np.sort(y[responders])
    times = np.asarray(times, dtype=float)
    estimate = 1.0 - np.searchsorted(y, times, side="right") / n_resp
    std_err = np.sqrt(estimate * (1.0 - estimate) / n_resp)
    return estimate, std_err


@dataclass
class DorInstance:
    """Random feasible inputs for the DoR formulas on a common grid"""
    r1: float
    r2: float
    phi_prime: float
    s1: np.ndarray
    s2: np.ndarray
    phi_dprime: float

    def curves(self) -> Tuple[SurvivalCurve, SurvivalCurve]:
        times = np.arange(self.s1.size + 1, dtype=float)
        return (
            SurvivalCurve(times, np.insert(self.s1, 0, 1.0)),
            SurvivalCurve(times, np.insert(self.s2, 0, 1.0)),
        )


def _duration_feasible(s1: np.ndarray, s2: np.ndarray, phi_dprime: float) -> bool:
    both = s1 * s2 + phi_dprime * np.sqrt(s1 * (1.0 - s1) * s2 * (1.0 - s2))
    return bool(np.all(both >= np.maximum(0.0, s1 + s2 - 1.0)) and np.all(both <= np.minimum(s1, s2)))


def random_dor_instance(
    rng: np.random.Generator,
    n_points: int = 20,
    max_phi_dprime: float = 0.3,
    attempts: int = 100,
) -> DorInstance:
    """
    Draw ORRs, a feasible phi', two nonincreasing survival grids and a phi''
    feasible at every grid point (0 if none is found within ``attempts``)
    """
    r1, r2 = rng.uniform(0.1, 0.9, size=2)
    lo, hi = feasible_phi_range(r1, r2)
    phi_prime = float(rng.uniform(0.8 * lo, 0.8 * hi))
    s1 = np.sort(rng.uniform(0.05, 0.95, size=n_points))[::-1]
    s2 = np.sort(rng.uniform(0.05, 0.95, size=n_points))[::-1]
    phi_dprime = 0.0
    for _ in range(attempts):
        candidate = float(rng.uniform(-max_phi_dprime, max_phi_dprime))
        if _duration_feasible(s1, s2, candidate):
            phi_dprime = candidate
            break
    return DorInstance(float(r1), float(r2), phi_prime, s1, s2, phi_dprime)
