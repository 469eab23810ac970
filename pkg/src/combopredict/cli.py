import argparse
import sys
from typing import Dict, List, Optional, Tuple

import pandas as pd
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from .design import reverse_engineer_r2
from .exceptions import ComboPredictError, UsageError
from .main import Main
from .models.base import CorrelationSpec, Rate, WaterfallSample
from .models.dor import classify_median_ordering, compare_observed_dor, median_of_curve
from .models.waterfall import (
    band_coverage,
    deep_response_rate,
    objective_response_rate,
    predict_waterfall,
    predict_waterfall_sweep,
    waterfall_cdf_distance,
)
from .reproduce import CheckStatus, ReproduceSettings, run_checks
from .schemas import StudyInput
from .utils.csvio import key_value_frame, write_frame_csv
from .utils.log import setup_logging
from .utils.svg import write_waterfall_svg


console = Console()
err_console = Console(stderr=True)


def _one_line(message) -> str:
    return " ".join(str(message).split())


def _fail(category: str, message, exit_code: int) -> int:
    err_console.print(
        f"error category={category} message={_one_line(message)}",
        markup=False, highlight=False, soft_wrap=True,
    )
    return exit_code


def _emit_rows(rows: Dict[str, object], output: Optional[str] = None) -> None:
    """Print key,value rows on stdout and optionally write them as CSV"""
    frame = key_value_frame(rows)
    console.print("key,value", markup=False, highlight=False, soft_wrap=True)
    for key, value in zip(frame["key"], frame["value"]):
        console.print(f"{key},{value}", markup=False, highlight=False, soft_wrap=True)
    if output:
        write_frame_csv(frame, output)


def _study(main: Main, args) -> Optional[StudyInput]:
    return main.setup_study(args.study) if getattr(args, "study", None) else None


def _pick(value, fallback, name: str):
    if value is not None:
        return value
    if fallback is not None:
        return fallback
    raise UsageError(f"--{name} is required (or give --study)")


def _arm_rates(args, study: Optional[StudyInput]) -> Tuple[Rate, Rate]:
    arms = study.drugs if study else [None, None]
    r1 = _pick(args.r1, arms[0].orr if arms[0] else None, "r1")
    r2 = _pick(args.r2, arms[1].orr if arms[1] else None, "r2")
    n1 = args.n1 if args.n1 is not None else (arms[0].n if arms[0] else None)
    n2 = args.n2 if args.n2 is not None else (arms[1].n if arms[1] else None)
    return Rate(r1, n=n1), Rate(r2, n=n2)


def cmd_predict_orr(args, main: Main) -> int:
    """Predict the combination ORR"""
    study = _study(main, args)
    r1, r2 = _arm_rates(args, study)
    phi = args.phi if args.phi is not None else (study.correlation.phi_prime if study else 0.0)
    prediction = main.predict_orr(r1.value, r2.value, phi, n1=r1.n, n2=r2.n, level=args.level)
    _emit_rows(prediction.as_rows(), args.output)
    return 0


def cmd_predict_dor(args, main: Main) -> int:
    """Predict the combination DoR curve and write it with its variance"""
    study = _study(main, args)
    arms = study.drugs if study else [None, None]
    path1 = _pick(args.curve1, arms[0].dor_curve if arms[0] else None, "curve1")
    path2 = _pick(args.curve2, arms[1].dor_curve if arms[1] else None, "curve2")
    r1, r2 = _arm_rates(args, study)
    corr_defaults = study.correlation if study else None
    corr = CorrelationSpec(
        phi_prime=args.phi_prime if args.phi_prime is not None else (corr_defaults.phi_prime if corr_defaults else 0.0),
        phi_dprime=args.phi_dprime if args.phi_dprime is not None else (corr_defaults.phi_dprime if corr_defaults else 0.0),
    )

    curve1, curve2 = main.load_curve(path1), main.load_curve(path2)
    band = main.predict_dor(curve1, curve2, r1, r2, corr, level=args.level, printed_pairing=args.printed_pairing)
    header = {
        "phi_prime": corr.phi_prime,
        "phi_dprime": corr.phi_dprime,
        "variance_pairing": "printed" if args.printed_pairing else "derivative",
    }
    write_frame_csv(band.to_frame(), args.output, header=header)

    median1, median2 = median_of_curve(curve1), median_of_curve(curve2)
    combo_median = median_of_curve(band.curve)
    rows = {
        "median_drug1": "not reached" if median1 is None else median1,
        "median_drug2": "not reached" if median2 is None else median2,
        "median_combination": "not reached" if combo_median is None else combo_median,
        "monotone_adjustment": band.curve.metadata.monotone_adjustment,
    }
    if median1 is not None and median2 is not None:
        # the rule is stated for the drug with the longer median as Drug 2
        if median1 <= median2:
            shorter, longer_rate, u2 = curve1, r2, median2
        else:
            shorter, longer_rate, u2 = curve2, r1, median1
        ordering = classify_median_ordering(shorter, longer_rate, u2)
        rows.update({
            "median_threshold": ordering.threshold,
            "s1_at_u2": ordering.s1_at_u2,
            "median_ordering": ordering.ordering,
            "median_ordering_extrapolated": ordering.extrapolated,
        })

    observed = None
    if args.observed:
        observed = main.load_curve(args.observed)
    elif study is not None:
        observed = main.load_study(study.name).combination_curve
    if observed is not None:
        comparison = compare_observed_dor(band, observed)
        rows.update({
            "observed_median": "not reached" if comparison.observed_median is None else comparison.observed_median,
            "observed_coverage": "n/a" if comparison.coverage is None else comparison.coverage,
            "observed_max_abs_difference": comparison.max_abs_difference,
        })
    rows["output"] = args.output
    _emit_rows(rows)
    return 0


def _study_waterfalls(main: Main, args) -> Tuple[WaterfallSample, WaterfallSample, Optional[WaterfallSample], Optional[StudyInput]]:
    if getattr(args, "study", None):
        data = main.load_study(args.study)
        s1 = main.load_waterfall(args.s1) if args.s1 else data.waterfalls[0]
        s2 = main.load_waterfall(args.s2) if args.s2 else data.waterfalls[1]
        if s1 is None or s2 is None:
            raise UsageError(f"study '{args.study}' lacks monotherapy waterfalls")
        return s1, s2, data.combination_waterfall, data.study
    s1 = main.load_waterfall(_pick(args.s1, None, "s1"))
    s2 = main.load_waterfall(_pick(args.s2, None, "s2"))
    return s1, s2, None, None


def cmd_predict_waterfall(args, main: Main) -> int:
    """Predict the combination waterfall, optionally with a bootstrap band"""
    s1, s2, observed, study = _study_waterfalls(main, args)
    cutoff = args.cutoff if args.cutoff is not None else (study.cutoff if study else None)
    seed = args.seed if args.seed is not None else (study.seed if study else None)
    rhos = args.rho or [None]
    cfg = main.copula_config(
        rho=rhos[0], cutoff=cutoff, mode=args.mode, seed=seed,
        n_draws=args.n_draws, quantile_method=args.quantile_method,
    )
    header = {
        "seed": cfg.seed,
        "mode": cfg.mode,
        "cutoff": cfg.cutoff,
        "n_draws": cfg.n_draws,
        "quantile_method": cfg.quantile_method,
    }

    if len(rhos) > 1:
        if args.nboot:
            raise UsageError("--nboot cannot be combined with several --rho values")
        frame = predict_waterfall_sweep(s1, s2, rhos, cfg)
        write_frame_csv(frame, args.output, header={**header, "rho": " ".join(f"{r:g}" for r in rhos)})
        rows = {"seed": cfg.seed}
        for column in frame.columns[1:]:
            rows[f"{column}.orr"] = objective_response_rate(frame[column].to_numpy(), cfg.cutoff).value
        rows["output"] = args.output
        _emit_rows(rows)
        return 0

    band = main.predict_waterfall(s1, s2, cfg, nboot=args.nboot or 0, workers=args.workers)
    write_frame_csv(band.to_frame(), args.output, header={**header, "rho": cfg.rho, "nboot": band.nboot})
    if args.svg:
        curves = {f"observed {s.label}": s.values for s in (s1, s2) if s.label}
        if observed is not None:
            curves[f"observed {observed.label}"] = observed.values
        write_waterfall_svg(band, args.svg, observed=curves, cutoff=cfg.cutoff,
                            title=study.description if study else None)

    rows = {
        "seed": cfg.seed,
        "rho": cfg.rho,
        "predicted_orr": objective_response_rate(band, cfg.cutoff).value,
        "predicted_deep_response_rate": deep_response_rate(band, args.deep_threshold).value,
    }
    if observed is not None:
        rows["ks_distance_observed"] = waterfall_cdf_distance(band, observed)
        if band.lower is not None:
            rows["band_coverage_observed"] = band_coverage(band, observed)
    rows["output"] = args.output
    _emit_rows(rows)
    return 0


def cmd_reverse_orr(args, main: Main) -> int:
    """Recover the Drug 2 ORR from the combination and Drug 1 ORRs"""
    r2 = reverse_engineer_r2(args.r, args.r1, args.phi)
    _emit_rows({"r2": r2.value, "r": args.r, "r1": args.r1, "phi_prime": args.phi}, args.output)
    return 0


def cmd_sample_size(args, main: Main) -> int:
    """Two-arm sample size on a response endpoint"""
    spec = main.design_spec(
        args.p_control, args.p_experimental,
        alpha_one_sided=args.alpha, power=args.power,
        allocation_ratio=args.ratio, continuity_correction=args.continuity_correction,
    )
    rows = main.sample_size(spec)
    rows["method"] = "normal approximation, pooled null variance, one-sided"
    _emit_rows(rows, args.output)
    return 0


def cmd_deep_response(args, main: Main) -> int:
    """Deep response (and ORR) of waterfalls; with --study also the predicted combination"""
    samples: List[WaterfallSample] = [main.load_waterfall(path) for path in args.waterfall or []]
    study = None
    if args.study:
        data = main.load_study(args.study)
        study = data.study
        samples += [s for s in data.waterfalls if s is not None]
    if not samples:
        raise UsageError("give at least one --waterfall or a --study with waterfalls")
    cutoff = args.cutoff if args.cutoff is not None else (study.cutoff if study else -30.0)

    rows = {"threshold_reduction": args.threshold}
    for sample in samples:
        rows[f"{sample.label}.n"] = len(sample)
        rows[f"{sample.label}.orr"] = objective_response_rate(sample, cutoff).value
        rows[f"{sample.label}.deep_response_rate"] = deep_response_rate(sample, args.threshold).value

    if study is not None and len(data.waterfalls) == 2 and all(data.waterfalls):
        seed = args.seed if args.seed is not None else study.seed
        cfg = main.copula_config(rho=study.correlation.phi_tumor, cutoff=cutoff, seed=seed)
        combo = predict_waterfall(data.waterfalls[0], data.waterfalls[1], cfg)
        base = data.waterfalls[0]
        for endpoint, mono, pred in (
            ("orr", objective_response_rate(base, cutoff).value, objective_response_rate(combo, cutoff).value),
            ("deep_response_rate", deep_response_rate(base, args.threshold).value,
             deep_response_rate(combo, args.threshold).value),
        ):
            rows[f"combination.{endpoint}"] = pred
            if mono != pred:
                size = main.sample_size(main.design_spec(mono, pred))
                rows[f"design.{endpoint}.n_total"] = size["n_total"]
        rows["seed"] = cfg.seed
    _emit_rows(rows, args.output)
    return 0


def cmd_reproduce(args, main: Main) -> int:
    """Run the bundled worked-example checks"""
    settings = ReproduceSettings.fast(args.workers) if args.fast else ReproduceSettings(workers=args.workers)
    results = run_checks(settings, only=args.only)

    table = Table(title="combopredict reproduce")
    table.add_column("check", style="cyan")
    table.add_column("target")
    table.add_column("observed")
    table.add_column("status")
    table.add_column("s", justify="right")
    for result in results:
        colour = "green" if result.ok else "red"
        table.add_row(result.name, result.target, result.observed,
                      f"[{colour}]{result.status}[/{colour}]", f"{result.seconds:.1f}")
    console.print(table)
    for result in results:
        if result.note:
            console.print(f"[dim]{result.name}: {result.note}[/dim]")

    if args.output:
        frame = pd.DataFrame([
            {"check": r.name, "target": r.target, "observed": r.observed, "status": r.status, "note": r.note}
            for r in results
        ])
        write_frame_csv(frame, args.output)

    failed = [r.name for r in results if r.status == CheckStatus.failed]
    if failed:
        console.print(f"[bold red]{len(failed)} check(s) failed:[/bold red] {', '.join(failed)}")
        return 1
    console.print(f"[bold green]all {len(results)} checks passed[/bold green]")
    return 0


def cmd_list(args, main: Main) -> int:
    """List configured studies"""
    console.print("[bold cyan]Available Studies:[/bold cyan]")
    for name in main.list_studies():
        console.print(f"  - {name}")
    return 0


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_rates(parser):
    parser.add_argument('--r1', type=float, help='ORR of Drug 1')
    parser.add_argument('--r2', type=float, help='ORR of Drug 2')
    parser.add_argument('--n1', type=int, help='Arm size of Drug 1')
    parser.add_argument('--n2', type=int, help='Arm size of Drug 2')
    parser.add_argument('--study', help='Take missing values from this configured study')


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog='combopredict',
        description='Predict combination-therapy ORR, duration of response and waterfall from monotherapy data',
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument('-c', '--config', default=None,
                        help='Path to config file (default: configs/config.yaml, then the bundled config)')
    parser.add_argument('--log-level', default=None, help='Logging level (default: from config)')

    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    p = subparsers.add_parser('predict-orr', help='Predict the combination ORR')
    _add_rates(p)
    p.add_argument('--phi', type=float, default=None, help="Response correlation phi' (default 0)")
    p.add_argument('--level', type=float, default=0.95, help='Interval coverage (default 0.95)')
    p.add_argument('-o', '--output', help='Also write the key,value rows to this CSV')
    p.set_defaults(func=cmd_predict_orr)

    p = subparsers.add_parser('predict-dor', help='Predict the combination DoR curve')
    p.add_argument('--curve1', help='Drug 1 DoR curve CSV (time_months,survival_prob[,std_err])')
    p.add_argument('--curve2', help='Drug 2 DoR curve CSV')
    _add_rates(p)
    p.add_argument('--phi-prime', type=float, default=None, help="Response correlation phi'")
    p.add_argument('--phi-dprime', type=float, default=None, help="Duration correlation phi''")
    p.add_argument('--level', type=float, default=0.95, help='Band coverage (default 0.95)')
    p.add_argument('--printed-pairing', action='store_true',
                   help='Use the published A1/A2 arrangement in the variance')
    p.add_argument('--observed', help='Observed combination DoR CSV to set against the band (default: from --study)')
    p.add_argument('-o', '--output', default='predicted_dor.csv', help='Output CSV')
    p.set_defaults(func=cmd_predict_dor)

    p = subparsers.add_parser('predict-waterfall', help='Predict the combination waterfall')
    p.add_argument('--s1', help='Drug 1 waterfall CSV (pchg)')
    p.add_argument('--s2', help='Drug 2 waterfall CSV (pchg)')
    p.add_argument('--study', help='Use the waterfalls of this configured study')
    p.add_argument('--rho', type=float, action='append',
                   help='Copula correlation; repeat for a sensitivity sweep')
    p.add_argument('--cutoff', type=float, default=None, help='Response cutoff on %% change')
    p.add_argument('--mode', choices=['proposed', 'palmer'], default=None)
    p.add_argument('--n-draws', type=int, default=None)
    p.add_argument('--quantile-method', choices=['grid', 'exact'], default=None)
    p.add_argument('--nboot', type=int, default=0, help='Bootstrap replicates (0: no band)')
    p.add_argument('--workers', type=int, default=None, help='Threads for the bootstrap')
    p.add_argument('--seed', type=int, default=None)
    p.add_argument('--deep-threshold', type=float, default=75.0,
                   help='Reduction defining deep response (default 75)')
    p.add_argument('--svg', help='Also write an SVG chart')
    p.add_argument('-o', '--output', default='predicted_waterfall.csv', help='Output CSV')
    p.set_defaults(func=cmd_predict_waterfall)

    p = subparsers.add_parser('reverse-orr', help='Recover the Drug 2 ORR')
    p.add_argument('--r', type=float, required=True, help='Combination ORR')
    p.add_argument('--r1', type=float, required=True, help='ORR of Drug 1')
    p.add_argument('--phi', type=float, default=0.0, help="Response correlation phi'")
    p.add_argument('-o', '--output')
    p.set_defaults(func=cmd_reverse_orr)

    p = subparsers.add_parser('sample-size', help='Two-arm sample size on a response endpoint')
    p.add_argument('--p-control', type=float, required=True)
    p.add_argument('--p-experimental', type=float, required=True)
    p.add_argument('--alpha', type=float, default=None, help='One-sided alpha (default 0.05)')
    p.add_argument('--power', type=float, default=None, help='Power (default 0.80)')
    p.add_argument('--ratio', type=float, default=None, help='Experimental:control allocation (default 1)')
    p.add_argument('--continuity-correction', action='store_true', default=None)
    p.add_argument('-o', '--output')
    p.set_defaults(func=cmd_sample_size)

    p = subparsers.add_parser('deep-response', help='Deep response rates of waterfalls')
    p.add_argument('--waterfall', action='append', help='Waterfall CSV; repeatable')
    p.add_argument('--study', help='Configured study; also predicts the combination')
    p.add_argument('--threshold', type=float, default=75.0, help='Reduction in %% (default 75)')
    p.add_argument('--cutoff', type=float, default=None, help='Response cutoff for the ORR column')
    p.add_argument('--seed', type=int, default=None)
    p.add_argument('-o', '--output')
    p.set_defaults(func=cmd_deep_response)

    p = subparsers.add_parser('reproduce', help='Run the bundled worked-example checks')
    p.add_argument('--fast', action='store_true', help='Smaller Monte Carlo and bootstrap runs')
    p.add_argument('--workers', type=int, default=1, help='Threads for the bootstrap checks')
    p.add_argument('--only', action='append', help='Run only this check; repeatable')
    p.add_argument('-o', '--output', help='Also write the results as CSV')
    p.set_defaults(func=cmd_reproduce)

    p = subparsers.add_parser('list', help='List configured studies')
    p.set_defaults(func=cmd_list)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """CLI entry point"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, 'func', None):
            raise UsageError("a subcommand is required; see --help")
        setup_logging(args.log_level or 'WARNING')
        main_obj = Main(config_path=args.config)
        if args.log_level is None:
            setup_logging(main_obj.log_level())
        return args.func(args, main_obj)
    except SystemExit as e:
        return int(e.code or 0)
    except ComboPredictError as e:
        return _fail(e.category, e, e.exit_code)
    except ValidationError as e:
        details = "; ".join(f"{'.'.join(map(str, err['loc']))}: {err['msg']}" for err in e.errors())
        return _fail("invariant", details, 4)
    except FileNotFoundError as e:
        return _fail("usage", e, 2)
    except ValueError as e:
        return _fail("usage", e, 2)


if __name__ == '__main__':
    sys.exit(main())
