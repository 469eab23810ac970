"""
Worked-example checks against the bundled fixtures

Each check recomputes one published number or one model property from the
fixtures in ``combopredict/fixtures`` and compares it with its target. No
network access and no files outside the package are used.
"""

import logging
import math
import time
from dataclasses import dataclass, fields
from typing import Callable, List, Optional

import numpy as np

from .design import reverse_engineer_r2, sample_size_two_proportions
from .exceptions import NonUnique
from .models.base import Ordering, Rate, WaterfallMode
from .models.dor import (
    classify_median_ordering,
    compare_observed_dor,
    dor_variance,
    median_of_curve,
    predict_dor_band,
    predict_dor_curve,
    survival_by_duration_product,
    survival_by_response_type,
)
from .models.orr import feasible_phi_range, predict_orr
from .models.simulation import random_dor_instance, simulate_dor_survival
from .models.waterfall import (
    band_coverage,
    bootstrap_band,
    combine_pairs,
    deep_response_rate,
    objective_response_rate,
    predict_waterfall,
    waterfall_cdf_distance,
)
from .schemas import CopulaConfig, DesignSpec
from .utils.csvio import load_survival_csv, load_waterfall_csv
from .utils.path import fixture_path
from .utils.rng import make_generator

logger = logging.getLogger(__name__)

REPRODUCE_SEED = 20201


@dataclass(frozen=True)
class CheckStatus:
    """Outcome of one reproduce check"""
    passed: str = "pass"
    failed: str = "fail"

    @classmethod
    def get_fields(cls):
        return [f.default for f in fields(cls)]


@dataclass
class CheckResult:
    name: str
    target: str
    observed: str
    status: str
    note: str = ""
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == CheckStatus.passed


@dataclass(frozen=True)
class ReproduceSettings:
    """Workload sizes; ``fast`` shrinks the Monte Carlo and bootstrap runs"""
    nboot: int = 2000
    mc_patients: int = 1_000_000
    mc_configs: int = 20
    mc_points: int = 20
    variance_configs: int = 10
    variance_replicates: int = 100_000
    equivalence_instances: int = 1000
    inversion_triples: int = 10_000
    workers: int = 1

    @classmethod
    def fast(cls, workers: int = 1) -> "ReproduceSettings":
        return cls(
            nboot=200,
            mc_patients=100_000,
            mc_configs=5,
            variance_replicates=20_000,
            equivalence_instances=200,
            inversion_triples=1000,
            workers=workers,
        )


def _status(ok: bool) -> str:
    return CheckStatus.passed if ok else CheckStatus.failed


def check_orr_keynote062(settings: ReproduceSettings) -> CheckResult:
    r = predict_orr(0.372, 0.148, 0.0).value
    return CheckResult("orr_keynote062", "0.4649 +/- 0.0005", f"{r:.4f}", _status(abs(r - 0.4649) <= 5e-4))


def check_orr_checkmate067(settings: ReproduceSettings) -> CheckResult:
    r = predict_orr(0.190, 0.437, 0.0).value
    return CheckResult("orr_checkmate067", "0.5440 +/- 0.0005", f"{r:.4f}", _status(abs(r - 0.5440) <= 5e-4))


def check_median_ordering_keynote062(settings: ReproduceSettings) -> CheckResult:
    chemo = load_survival_csv(fixture_path("keynote062_chemo_dor.csv"))
    pembro = load_survival_csv(fixture_path("keynote062_pembro_dor.csv"))
    u2 = median_of_curve(pembro)
    result = classify_median_ordering(chemo, 0.148, u2)
    ok = abs(result.threshold - 0.460) <= 1e-3 and result.ordering == Ordering.combo_shorter
    return CheckResult(
        "median_ordering_keynote062",
        "threshold 0.460 +/- 0.001, combo_shorter",
        f"threshold {result.threshold:.4f}, S1(u2={u2:g}) {result.s1_at_u2:.2f}, {result.ordering}",
        _status(ok),
    )


def check_dor_median_keynote062(settings: ReproduceSettings) -> CheckResult:
    chemo = load_survival_csv(fixture_path("keynote062_chemo_dor.csv"))
    pembro = load_survival_csv(fixture_path("keynote062_pembro_dor.csv"))
    predicted = predict_dor_curve(chemo, pembro, 0.372, 0.148)
    median = median_of_curve(predicted)
    ok = median is not None and 7.0 <= median <= 9.0
    observed = "not reached" if median is None else f"{median:.2f} months"
    return CheckResult("dor_median_keynote062", "median in [7.0, 9.0] months", observed, _status(ok))


def check_dor_observed_keynote062(settings: ReproduceSettings) -> CheckResult:
    chemo = load_survival_csv(fixture_path("keynote062_chemo_dor.csv"))
    pembro = load_survival_csv(fixture_path("keynote062_pembro_dor.csv"))
    observed = load_survival_csv(fixture_path("keynote062_combo_dor.csv"))
    band = predict_dor_band(chemo, pembro, Rate(0.372, n=250), Rate(0.148, n=256))
    result = compare_observed_dor(band, observed)
    ok = (
        result.coverage is not None
        and result.coverage >= 0.60
        and result.observed_median is not None
        and abs(result.observed_median - 6.8) <= 0.1
        and result.predicted_median is not None
        and result.observed_median < result.predicted_median
    )
    coverage = "n/a" if result.coverage is None else f"{result.coverage:.1%}"
    return CheckResult(
        "dor_observed_keynote062",
        "observed median 6.8 months below predicted; observed inside 95% band at >= 60% of times",
        f"observed median {result.observed_median:g}, predicted {result.predicted_median:.2f}, coverage {coverage}",
        _status(ok),
    )


def check_dor_forms_agree(settings: ReproduceSettings) -> CheckResult:
    rng = make_generator(REPRODUCE_SEED, 1)
    worst = 0.0
    for _ in range(settings.equivalence_instances):
        inst = random_dor_instance(rng)
        args = (inst.r1, inst.r2, inst.phi_prime, inst.s1, inst.s2, inst.phi_dprime)
        worst = max(worst, float(np.max(np.abs(
            survival_by_response_type(*args) - survival_by_duration_product(*args)
        ))))
    return CheckResult(
        "dor_forms_agree",
        f"max |difference| <= 1e-12 over {settings.equivalence_instances} instances",
        f"{worst:.2e}",
        _status(worst <= 1e-12),
    )


def check_dor_monte_carlo(settings: ReproduceSettings) -> CheckResult:
    rng = make_generator(REPRODUCE_SEED, 2)
    z_scores = []
    for _ in range(settings.mc_configs):
        inst = random_dor_instance(rng, n_points=settings.mc_points)
        exact = survival_by_duration_product(
            inst.r1, inst.r2, inst.phi_prime, inst.s1, inst.s2, inst.phi_dprime
        )
        estimate, std_err = simulate_dor_survival(
            inst.r1, inst.r2, inst.phi_prime, inst.s1, inst.s2, inst.phi_dprime,
            settings.mc_patients, rng,
        )
        z_scores.append(np.abs(estimate - exact) / np.maximum(std_err, 1e-12))
    z = np.concatenate(z_scores)
    return CheckResult(
        "dor_monte_carlo",
        "every grid point within 3 binomial SE",
        f"max {np.max(z):.2f} SE over {z.size} points",
        _status(bool(np.all(z <= 3.0))),
    )


def _perturbed_prediction(r1, r2, r, phi, s1, s2):
    m1, m2 = r1 * s1, r2 * s2
    spread = np.sqrt(np.clip(m1 * (1 - m1) * m2 * (1 - m2), 0.0, None))
    return (m1 + m2 - m1 * m2 - phi * spread) / r


def check_dor_variance(settings: ReproduceSettings) -> CheckResult:
    rng = make_generator(REPRODUCE_SEED, 3)
    worst = 0.0
    for _ in range(settings.variance_configs):
        r1, r2 = rng.uniform(0.2, 0.8, size=2)
        lo, hi = feasible_phi_range(r1, r2)
        phi_prime = float(rng.uniform(0.8 * lo, 0.8 * hi))
        r = predict_orr(r1, r2, phi_prime).value
        s1, s2 = rng.uniform(0.3, 0.7, size=2)
        phi = float(rng.uniform(-0.2, 0.2))
        sigma1, sigma2 = rng.uniform(0.002, 0.01, size=2)
        draws = _perturbed_prediction(
            r1, r2, r, phi,
            s1 + sigma1 * rng.standard_normal(settings.variance_replicates),
            s2 + sigma2 * rng.standard_normal(settings.variance_replicates),
        )
        formula = dor_variance(s1, s2, r1, r2, phi, sigma1, sigma2, phi_prime=phi_prime)
        worst = max(worst, abs(formula / np.var(draws) - 1.0))
    zero = dor_variance(0.5, 0.4, 0.4, 0.3, 0.2, 0.0, 0.0)
    ok = worst <= 0.10 and zero == 0.0
    return CheckResult(
        "dor_variance",
        "within 10% of simulated variance; 0 when sigmas are 0",
        f"max relative error {worst:.3f}; zero-sigma variance {zero:g}",
        _status(ok),
    )


def _exact_atoms(v1, w1, v2, w2, cutoff, rho):
    atoms = {}
    for a, pa in zip(v1, w1):
        for b, pb in zip(v2, w2):
            value = round(float(combine_pairs([a], [b], cutoff, rho)[0]), 9)
            atoms[value] = atoms.get(value, 0.0) + pa * pb
    return atoms


def _atom_z_scores(s1, s2, cfg: CopulaConfig):
    v1, c1 = np.unique(s1, return_counts=True)
    v2, c2 = np.unique(s2, return_counts=True)
    exact = _exact_atoms(v1, c1 / c1.sum(), v2, c2 / c2.sum(), cfg.cutoff, cfg.rho)
    predicted = np.round(predict_waterfall(s1, s2, cfg).predicted, 9)
    z = []
    for value, p in exact.items():
        freq = np.mean(predicted == value)
        z.append(abs(freq - p) / math.sqrt(p * (1.0 - p) / predicted.size))
    return np.array(z), exact


def check_waterfall_enumeration(settings: ReproduceSettings) -> CheckResult:
    cfg = CopulaConfig(rho=0.0, n_draws=20000, cutoff=-30, seed=REPRODUCE_SEED)
    z_two, exact_two = _atom_z_scores([-80, 0], [-80, 0], cfg)
    z_four, _ = _atom_z_scores(
        [-90, -90, -45, -10, -10, -10, 20, 20],
        [-60, -35, -35, 0, 0, 30],
        cfg,
    )
    has_atom = -96.0 in exact_two
    ok = has_atom and np.all(z_two <= 3.0) and np.all(z_four <= 3.0)
    return CheckResult(
        "waterfall_enumeration",
        "sampled atoms within 3 binomial SE of exact enumeration",
        f"two-point max {z_two.max():.2f} SE (atom -96 present: {has_atom}); "
        f"four-point max {z_four.max():.2f} SE",
        _status(ok),
    )


def check_waterfall_checkmate067(settings: ReproduceSettings) -> CheckResult:
    ipi = load_waterfall_csv(fixture_path("checkmate067_ipi_waterfall.csv"))
    nivo = load_waterfall_csv(fixture_path("checkmate067_nivo_waterfall.csv"))
    observed = load_waterfall_csv(fixture_path("checkmate067_combo_waterfall.csv"))
    cfg = CopulaConfig(rho=0.25, cutoff=-30, mode=WaterfallMode.proposed, seed=REPRODUCE_SEED)
    band = bootstrap_band(ipi, nivo, cfg, nboot=settings.nboot, workers=settings.workers)
    distance = waterfall_cdf_distance(band, observed)
    coverage = band_coverage(band, observed)
    orr_gap = abs(objective_response_rate(band).value - objective_response_rate(observed).value)
    return CheckResult(
        "waterfall_checkmate067",
        f"KS <= 0.15, |ORR gap| <= 0.08, observed inside {settings.nboot}-replicate band at >= 40% of indices",
        f"KS {distance:.3f}, ORR gap {orr_gap:.3f}, coverage {coverage:.1%}",
        _status(distance <= 0.15 and orr_gap <= 0.08 and coverage >= 0.40),
        note="observed combination runs deeper than predicted through the responder range",
    )


def check_waterfall_hodgkin(settings: ReproduceSettings) -> CheckResult:
    nivo = load_waterfall_csv(fixture_path("hodgkin_nivo_waterfall.csv"))
    bv = load_waterfall_csv(fixture_path("hodgkin_bv_waterfall.csv"))
    observed = load_waterfall_csv(fixture_path("hodgkin_combo_waterfall.csv")).values
    proposed_cfg = CopulaConfig(rho=0.0, cutoff=-50, mode=WaterfallMode.proposed, seed=REPRODUCE_SEED)
    palmer_cfg = proposed_cfg.model_copy(update={"mode": WaterfallMode.palmer})
    proposed = predict_waterfall(nivo, bv, proposed_cfg).predicted
    palmer = predict_waterfall(nivo, bv, palmer_cfg).predicted

    same_shallow = np.array_equal(proposed[proposed >= -50], palmer[palmer >= -50])
    deep_p, deep_q = proposed[proposed < -50], palmer[palmer < -50]
    deeper = (
        deep_p.size == deep_q.size
        and bool(np.all(deep_p <= deep_q))
        and float(deep_p.mean()) < float(deep_q.mean())
    )
    deep_obs = float(observed[observed < -50].mean())
    closer = abs(deep_p.mean() - deep_obs) < abs(deep_q.mean() - deep_obs)
    return CheckResult(
        "waterfall_hodgkin",
        "modes identical for changes >= -50%, proposed deeper below -50% and closer to observed",
        f"identical >= -50%: {same_shallow}; tail means {deep_p.mean():.1f} (proposed) "
        f"vs {deep_q.mean():.1f} (palmer) vs {deep_obs:.1f} (observed)",
        _status(same_shallow and deeper and closer),
    )


def check_inversion_round_trip(settings: ReproduceSettings) -> CheckResult:
    rng = make_generator(REPRODUCE_SEED, 4)
    worst = 0.0
    failures = 0
    for _ in range(settings.inversion_triples):
        r1, r2 = rng.uniform(0.05, 0.95, size=2)
        lo, hi = feasible_phi_range(r1, r2)
        phi = float(rng.uniform(0.9 * lo, 0.9 * hi))
        r = predict_orr(r1, r2, phi).value
        try:
            worst = max(worst, abs(reverse_engineer_r2(r, r1, phi).value - r2))
        except NonUnique as e:
            failures += 1
            logger.warning(f"non-unique inversion at r1={r1:.4f}, r2={r2:.4f}, phi'={phi:.4f}: {e.roots}")
    return CheckResult(
        "inversion_round_trip",
        f"|r2 - recovered| <= 1e-9 over {settings.inversion_triples} triples",
        f"max error {worst:.2e}, non-unique {failures}",
        _status(worst <= 1e-9 and failures == 0),
    )


def check_sample_size(settings: ReproduceSettings) -> CheckResult:
    orr_design = sample_size_two_proportions(DesignSpec(p_control=0.70, p_experimental=0.80))
    deep_design = sample_size_two_proportions(DesignSpec(p_control=0.40, p_experimental=0.60))
    ok = orr_design.n_total == 462 and 150 <= deep_design.n_total <= 230
    return CheckResult(
        "sample_size",
        "0.70 vs 0.80 -> 462 total; 0.40 vs 0.60 -> [150, 230]",
        f"{orr_design.n_total}; {deep_design.n_total}",
        _status(ok),
        note="published 'approximately 200' for 0.40 vs 0.60 uses an unstated method (method-ambiguous)",
    )


def check_deep_response_design(settings: ReproduceSettings) -> CheckResult:
    drug1 = load_waterfall_csv(fixture_path("hypothetical_drug1_waterfall.csv"))
    drug2 = load_waterfall_csv(fixture_path("hypothetical_drug2_waterfall.csv"))
    cfg = CopulaConfig(rho=0.0, cutoff=-30, seed=REPRODUCE_SEED)
    combo = predict_waterfall(drug1, drug2, cfg)

    mono_orr = objective_response_rate(drug1).value
    mono_deep = deep_response_rate(drug1, 75).value
    combo_orr = objective_response_rate(combo).value
    combo_deep = deep_response_rate(combo, 75).value
    n_orr = sample_size_two_proportions(DesignSpec(p_control=mono_orr, p_experimental=combo_orr))
    n_deep = sample_size_two_proportions(DesignSpec(p_control=mono_deep, p_experimental=combo_deep))
    ok = (
        abs(mono_deep - 0.40) <= 1e-12
        and abs(combo_orr - 0.80) <= 0.03
        and abs(combo_deep - 0.60) <= 0.05
        and n_deep.n_total < n_orr.n_total
    )
    return CheckResult(
        "deep_response_design",
        "drug 1 deep 0.40; combination ORR ~0.80, deep ~0.60; deep endpoint needs fewer patients",
        f"deep {mono_deep:.2f}; ORR {mono_orr:.2f}->{combo_orr:.3f} (n={n_orr.n_total}); "
        f"deep {mono_deep:.2f}->{combo_deep:.3f} (n={n_deep.n_total})",
        _status(ok),
    )


def check_determinism(settings: ReproduceSettings) -> CheckResult:
    ipi = load_waterfall_csv(fixture_path("checkmate067_ipi_waterfall.csv"))
    nivo = load_waterfall_csv(fixture_path("checkmate067_nivo_waterfall.csv"))
    cfg = CopulaConfig(n_draws=1000, seed=REPRODUCE_SEED)
    first = predict_waterfall(ipi, nivo, cfg).predicted
    second = predict_waterfall(ipi, nivo, cfg).predicted
    serial = bootstrap_band(ipi, nivo, cfg, nboot=100, workers=1)
    parallel = bootstrap_band(ipi, nivo, cfg, nboot=100, workers=4)
    ok = (
        np.array_equal(first, second)
        and np.array_equal(serial.lower, parallel.lower)
        and np.array_equal(serial.upper, parallel.upper)
        and np.array_equal(serial.mean, parallel.mean)
    )
    return CheckResult(
        "determinism",
        "repeat runs and serial vs parallel bootstrap bit-identical",
        "identical" if ok else "differs",
        _status(ok),
    )


CHECKS: List[Callable[[ReproduceSettings], CheckResult]] = [
    check_orr_keynote062,
    check_orr_checkmate067,
    check_median_ordering_keynote062,
    check_dor_median_keynote062,
    check_dor_observed_keynote062,
    check_dor_forms_agree,
    check_dor_monte_carlo,
    check_dor_variance,
    check_waterfall_enumeration,
    check_waterfall_checkmate067,
    check_waterfall_hodgkin,
    check_inversion_round_trip,
    check_sample_size,
    check_deep_response_design,
    check_determinism,
]


def run_checks(settings: Optional[ReproduceSettings] = None, only: Optional[List[str]] = None) -> List[CheckResult]:
    """Run every check (or those named in ``only``) and time each one"""
    settings = settings or ReproduceSettings()
    results = []
    for check in CHECKS:
        name = check.__name__.removeprefix("check_")
        if only and name not in only:
            continue
        start = time.perf_counter()
        result = check(settings)
        result.seconds = time.perf_counter() - start
        logger.info(f"{result.name}: {result.status} ({result.observed})")
        results.append(result)
    return results
