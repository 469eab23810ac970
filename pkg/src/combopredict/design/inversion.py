"""
Recover a monotherapy ORR from a combination ORR

Given the combination ORR r, the Drug 1 ORR r1 and the response correlation
phi', solve r = r1 + r2 - r1*r2 - phi' * sqrt(r1(1-r1) r2(1-r2)) for r2.
"""

import logging

import numpy as np
from scipy.optimize import brentq

from ..exceptions import DegenerateRate, NoFeasibleSolution, NonUnique
from ..models.base import Rate, RateLike, as_rate
from ..models.orr import FEASIBILITY_TOL

logger = logging.getLogger(__name__)

SCAN_POINTS = 2001
ROOT_XTOL = 1e-14


def _orr_gap(r2, r: float, r1: float, phi_prime: float):
    r2 = np.asarray(r2, dtype=float)
    spread = np.sqrt(r1 * (1.0 - r1) * np.clip(r2 * (1.0 - r2), 0.0, None))
    return r1 + r2 - r1 * r2 - phi_prime * spread - r


def _feasible(r2: float, r1: float, phi_prime: float) -> bool:
    both = r1 * r2 + phi_prime * np.sqrt(r1 * (1.0 - r1) * r2 * (1.0 - r2))
    return (max(0.0, r1 + r2 - 1.0) - FEASIBILITY_TOL <= both <= min(r1, r2) + FEASIBILITY_TOL)


def reverse_engineer_r2(r: RateLike, r1: RateLike, phi_prime: float = 0.0) -> Rate:
    """
    Solve the combination ORR formula for the Drug 2 ORR

    With phi' = 0 the closed form (r - r1) / (1 - r1) is used. Otherwise the
    unit interval is scanned for sign changes and each bracket is refined
    with Brent's method; roots with an infeasible joint table are dropped.

    Args:
        r: combination ORR
        r1: Drug 1 ORR
        phi_prime: response correlation

    Returns:
        The Drug 2 ORR

    Raises:
        NoFeasibleSolution: if no r2 in [0, 1] reproduces r
        NonUnique: if several r2 do; ``.roots`` lists them
    """
    r, r1 = as_rate(r).value, as_rate(r1).value

    if phi_prime == 0.0:
        if r1 == 1.0:
            raise DegenerateRate("r1 = 1 makes the combination ORR independent of r2")
        r2 = (r - r1) / (1.0 - r1)
        if r2 < -FEASIBILITY_TOL or r2 > 1.0 + FEASIBILITY_TOL:
            raise NoFeasibleSolution(f"no r2 in [0, 1] gives r={r} with r1={r1}")
        return Rate(min(1.0, max(0.0, r2)))

    if r1 in (0.0, 1.0):
        raise DegenerateRate(f"correlation is undefined for r1={r1}")

    grid = np.linspace(0.0, 1.0, SCAN_POINTS)
    gap = _orr_gap(grid, r, r1, phi_prime)
    roots = [float(x) for x in grid[gap == 0.0]]
    brackets = np.flatnonzero(gap[:-1] * gap[1:] < 0.0)
    for i in brackets:
        roots.append(brentq(_orr_gap, grid[i], grid[i + 1], args=(r, r1, phi_prime), xtol=ROOT_XTOL))

    roots = sorted(x for x in roots if _feasible(x, r1, phi_prime))
    unique = []
    for x in roots:
        if not unique or x - unique[-1] > 1e-8:
            unique.append(x)
    logger.debug(f"r2 scan found {len(unique)} feasible root(s) for r={r}, r1={r1}, phi'={phi_prime}")

    if not unique:
        raise NoFeasibleSolution(f"no feasible r2 gives r={r} with r1={r1}, phi'={phi_prime}")
    if len(unique) > 1:
        raise NonUnique(
            f"r2 is not identified: {', '.join(f'{x:.6f}' for x in unique)} all give r={r}",
            roots=unique,
        )
    return Rate(min(1.0, max(0.0, unique[0])))
