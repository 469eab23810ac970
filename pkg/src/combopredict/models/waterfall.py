"""
Combination waterfall prediction

Two monotherapy waterfalls (best % change from baseline per patient) are
coupled with a Gaussian copula. Each simulated patient gets a pair of
changes; dual responders (both changes below the response cutoff) combine
their reduction fractions with a Bliss rule corrected by the cell-kill
correlation, every other patient takes the better of the two changes.

The copula correlation ``rho`` is also the cell-kill correlation in the
Bliss rule.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy.stats import ks_2samp, norm

from ..exceptions import InvariantViolation
from ..schemas import BootstrapConfig, CopulaConfig
from ..utils.rng import make_generator
from .base import PredictedBand, Rate, WaterfallMode, WaterfallSample

logger = logging.getLogger(__name__)

MIN_CHANGE = -100.0

SampleLike = Union[WaterfallSample, Sequence[float], np.ndarray]


def _as_sample(sample: SampleLike) -> WaterfallSample:
    if isinstance(sample, WaterfallSample):
        return sample
    return WaterfallSample(np.asarray(sample, dtype=float))


def _values(data) -> np.ndarray:
    if isinstance(data, PredictedBand):
        return np.asarray(data.predicted, dtype=float)
    return _as_sample(data).values


def grid_ecdf(sample: SampleLike, grid: np.ndarray) -> np.ndarray:
    """ECDF of ``sample`` evaluated at each grid point"""
    values = np.sort(_as_sample(sample).values)
    return np.searchsorted(values, grid, side="right") / values.size


def empirical_quantile(sample: SampleLike, u, cfg: Optional[CopulaConfig] = None):
    """
    Generalized inverse of the sample ECDF

    With ``quantile_method="grid"`` the result is the smallest grid value x
    with ECDF(x) >= u; with ``"exact"`` it is the inverted-CDF sample
    quantile. Either way the result is clamped to >= -100.

    Args:
        sample: monotherapy waterfall
        u: probability or array of probabilities in [0, 1]
        cfg: copula settings holding the grid and quantile method

    Returns:
        float for scalar ``u``, array otherwise

    Raises:
        EmptySample: if the sample is empty
    """
    cfg = cfg or CopulaConfig()
    sample = _as_sample(sample)
    u_arr = np.asarray(u, dtype=float)
    if np.any((u_arr < 0.0) | (u_arr > 1.0)):
        raise InvariantViolation("quantile probabilities must lie in [0, 1]")

    if cfg.quantile_method == "exact":
        out = np.quantile(sample.values, u_arr, method="inverted_cdf")
    else:
        grid = cfg.grid()
        cdf = grid_ecdf(sample, grid)
        idx = np.minimum(np.searchsorted(cdf, u_arr, side="left"), grid.size - 1)
        out = grid[idx]

    out = np.maximum(out, MIN_CHANGE)
    if np.ndim(out) == 0:
        return float(out)
    return out


def gaussian_copula_pairs(
    s1: SampleLike,
    s2: SampleLike,
    cfg: Optional[CopulaConfig] = None,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """
    Draw ``cfg.n_draws`` correlated (Drug 1, Drug 2) % change pairs

    Standard-normal pairs with correlation ``rho`` are mapped to uniforms and
    through the two inverse ECDFs.

    Returns:
        array of shape (n_draws, 2)
    """
    cfg = cfg or CopulaConfig()
    s1, s2 = _as_sample(s1), _as_sample(s2)
    rng = rng if rng is not None else make_generator(cfg.seed)

    # lower Cholesky factor of [[1, rho], [rho, 1]]
    factor = np.array([[1.0, 0.0], [cfg.rho, np.sqrt(1.0 - cfg.rho ** 2)]])
    z = rng.standard_normal((cfg.n_draws, 2)) @ factor.T
    u = norm.cdf(z)

    pairs = np.column_stack([
        empirical_quantile(s1, u[:, 0], cfg),
        empirical_quantile(s2, u[:, 1], cfg),
    ])
    logger.debug(f"drew {cfg.n_draws} copula pairs at rho={cfg.rho}")
    return pairs


def combine_pairs(p1, p2, cutoff: float = -30.0, rho: float = 0.0,
                  mode: str = WaterfallMode.proposed) -> np.ndarray:
    """Vectorized ``combine_pair``"""
    if mode not in WaterfallMode.get_fields():
        raise InvariantViolation(f"unknown waterfall mode '{mode}'")
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    best = np.minimum(p1, p2)
    if mode == WaterfallMode.palmer:
        return np.maximum(best, MIN_CHANGE)

    dual = (p1 < cutoff) & (p2 < cutoff)
    q1 = np.abs(p1) / 100.0
    q2 = np.abs(p2) / 100.0
    spread = np.sqrt(np.clip(q1 * (1.0 - q1) * q2 * (1.0 - q2), 0.0, None))
    # survival-product form: a complete response (q = 1) gives exactly -100
    bliss = -100.0 * (1.0 - (1.0 - q1) * (1.0 - q2) - rho * spread)
    if rho <= 0.0:
        # at rho <= 0 the Bliss reduction is never shallower than the better drug
        bliss = np.minimum(bliss, best)
    return np.maximum(np.where(dual, bliss, best), MIN_CHANGE)


def combine_pair(p1_chg: float, p2_chg: float, cutoff: float = -30.0, rho: float = 0.0,
                 mode: str = WaterfallMode.proposed) -> float:
    """
    Combination % change for one simulated patient

    palmer: the better (lower) change. proposed: dual responders (both
    changes strictly below ``cutoff``) get the correlated Bliss reduction
    p1 + p2 - p1*p2 - rho*sqrt(p1(1-p1)p2(1-p2)) on reduction fractions;
    everyone else gets the better change. Result is clamped to >= -100.

    Examples:
        >>> combine_pair(-50, -40, -30, 0.0)
        -70.0
        >>> combine_pair(-50, -10, -30, 0.25)
        -50.0
    """
    return float(combine_pairs(np.array([p1_chg]), np.array([p2_chg]), cutoff, rho, mode)[0])


def _sorted_band(values: np.ndarray) -> PredictedBand:
    predicted = np.sort(values)[::-1]
    return PredictedBand(index=np.linspace(0.0, 1.0, predicted.size), predicted=predicted)


def _predict_values(s1: WaterfallSample, s2: WaterfallSample, cfg: CopulaConfig,
                    rng: Optional[np.random.Generator]) -> np.ndarray:
    pairs = gaussian_copula_pairs(s1, s2, cfg, rng)
    combined = combine_pairs(pairs[:, 0], pairs[:, 1], cfg.cutoff, cfg.rho, cfg.mode)
    return np.sort(combined)[::-1]


def predict_waterfall(
    s1: SampleLike,
    s2: SampleLike,
    cfg: Optional[CopulaConfig] = None,
    rng: Optional[np.random.Generator] = None,
) -> PredictedBand:
    """
    Predict the combination waterfall

    Returns:
        PredictedBand with values sorted decreasing and index
        linspace(0, 1, n_draws); no band
    """
    cfg = cfg or CopulaConfig()
    band = _sorted_band(_predict_values(_as_sample(s1), _as_sample(s2), cfg, rng))
    band.seed = cfg.seed
    return band


def predict_waterfall_sweep(
    s1: SampleLike,
    s2: SampleLike,
    rhos: Iterable[float],
    cfg: Optional[CopulaConfig] = None,
) -> pd.DataFrame:
    """
    Predicted waterfalls for several copula correlations

    Every rho reuses the same seed, so differences between columns come from
    rho alone.

    Returns:
        DataFrame with ``index`` and one ``predicted_rho_<rho>`` column per rho
    """
    cfg = cfg or CopulaConfig()
    frame = None
    for rho in rhos:
        band = predict_waterfall(s1, s2, cfg.model_copy(update={"rho": float(rho)}))
        if frame is None:
            frame = pd.DataFrame({"index": band.index})
        frame[f"predicted_rho_{float(rho):g}"] = band.predicted
    if frame is None:
        raise InvariantViolation("at least one rho is needed for a sweep")
    return frame


def bootstrap_band(
    s1: SampleLike,
    s2: SampleLike,
    cfg: Optional[CopulaConfig] = None,
    nboot: int = 2000,
    resample_size: Optional[int] = None,
    workers: int = 1,
) -> PredictedBand:
    """
    Bootstrap confidence band for the predicted waterfall

    Each replicate resamples both monotherapy arms with replacement and
    reruns the prediction. Replicate k draws from the stream (seed, k), so
    the band does not depend on ``workers``.

    Args:
        s1, s2: monotherapy waterfalls
        cfg: copula settings
        nboot: number of replicates (>= 100)
        resample_size: size of each resampled arm, default the arm size
        workers: threads running replicates

    Returns:
        PredictedBand holding the point prediction, 5th/95th percentile
        bounds (widened to contain the point prediction) and replicate mean
    """
    cfg = cfg or CopulaConfig()
    settings = BootstrapConfig(nboot=nboot, workers=workers, resample_size=resample_size)
    s1, s2 = _as_sample(s1), _as_sample(s2)
    size1 = settings.resample_size or len(s1)
    size2 = settings.resample_size or len(s2)

    point = predict_waterfall(s1, s2, cfg)

    def replicate(k: int) -> np.ndarray:
        rng = make_generator(cfg.seed, k)
        arm1 = WaterfallSample(rng.choice(s1.values, size=size1, replace=True))
        arm2 = WaterfallSample(rng.choice(s2.values, size=size2, replace=True))
        return _predict_values(arm1, arm2, cfg, rng)

    draws = np.empty((settings.nboot, cfg.n_draws))
    logger.debug(f"bootstrap: {settings.nboot} replicates on {settings.workers} worker(s)")
    if settings.workers > 1:
        with ThreadPoolExecutor(max_workers=settings.workers) as pool:
            for k, values in enumerate(pool.map(replicate, range(settings.nboot))):
                draws[k] = values
    else:
        for k in range(settings.nboot):
            draws[k] = replicate(k)

    lower = np.quantile(draws, 0.05, axis=0)
    upper = np.quantile(draws, 0.95, axis=0)
    widened = int(np.sum((point.predicted < lower) | (point.predicted > upper)))
    if widened:
        logger.warning(f"widened the bootstrap band at {widened} indices to contain the point prediction")
    point.lower = np.minimum(lower, point.predicted)
    point.upper = np.maximum(upper, point.predicted)
    point.mean = draws.mean(axis=0)
    point.nboot = settings.nboot
    return point


def deep_response_rate(sample_or_band, threshold_reduction: float = 75.0) -> Rate:
    """
    Fraction of patients with at least ``threshold_reduction`` % shrinkage

    Accepts a WaterfallSample, a PredictedBand (uses the point prediction) or
    a plain sequence of % changes.
    """
    if not (0.0 < threshold_reduction <= 100.0):
        raise InvariantViolation(f"threshold must lie in (0, 100], got {threshold_reduction}")
    values = _values(sample_or_band)
    hits = int(np.sum(values <= -threshold_reduction))
    return Rate(hits / values.size, n=int(values.size))


def objective_response_rate(sample_or_band, cutoff: float = -30.0) -> Rate:
    """Fraction of patients whose change is strictly below ``cutoff``"""
    values = _values(sample_or_band)
    return Rate(int(np.sum(values < cutoff)) / values.size, n=int(values.size))


def waterfall_cdf_distance(predicted, observed) -> float:
    """Kolmogorov-Smirnov distance between two sets of % changes"""
    return float(ks_2samp(_values(predicted), _values(observed)).statistic)


def band_coverage(band: PredictedBand, observed: SampleLike, tol: float = 1e-9) -> float:
    """
    Fraction of band indices where the observed waterfall lies in the band

    The observed waterfall is sorted decreasing and interpolated onto the
    band's patient-fraction index.
    """
    if band.lower is None or band.upper is None:
        raise InvariantViolation("band has no bootstrap bounds")
    obs = np.sort(_as_sample(observed).values)[::-1]
    if obs.size == 1:
        curve = np.full(band.index.size, obs[0])
    else:
        curve = np.interp(band.index, np.linspace(0.0, 1.0, obs.size), obs)
    inside = (curve >= band.lower - tol) & (curve <= band.upper + tol)
    return float(np.mean(inside))
