import logging
import pathlib
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Union

from config_morpher import ConfigMorpher

from .design import SampleSize, power_two_proportions, sample_size_two_proportions
from .models.base import CorrelationSpec, PredictedBand, Rate, SurvivalCurve, WaterfallSample
from .models.dor import DorBand, predict_dor_band
from .models.orr import orr_confidence_interval, orr_standard_error, predict_orr, responder_mix
from .models.waterfall import bootstrap_band, predict_waterfall
from .schemas import BootstrapConfig, CopulaConfig, DesignSpec, DrugArm, StudyInput
from .utils.csvio import load_survival_csv, load_waterfall_csv
from .utils.path import resolve_config_path, resolve_data_path

logger = logging.getLogger(__name__)

DEFAULT_LOG_LEVEL = 'WARNING'


@dataclass
class OrrPrediction:
    """Predicted combination ORR with responder mix and optional interval"""
    rate: float
    r12: float
    r10: float
    r02: float
    std_err: Optional[float] = None
    lower: Optional[float] = None
    upper: Optional[float] = None

    def as_rows(self) -> Dict[str, Any]:
        rows = {'r': self.rate, 'r12': self.r12, 'r10': self.r10, 'r02': self.r02}
        if self.std_err is not None:
            rows.update({'std_err': self.std_err, 'lower': self.lower, 'upper': self.upper})
        return rows


@dataclass
class StudyData:
    """A study from config with every referenced file loaded and validated"""
    study: StudyInput
    curves: List[Optional[SurvivalCurve]] = field(default_factory=list)
    waterfalls: List[Optional[WaterfallSample]] = field(default_factory=list)
    combination_curve: Optional[SurvivalCurve] = None
    combination_waterfall: Optional[WaterfallSample] = None

    def rates(self) -> List[Rate]:
        return [arm_rate(arm) for arm in self.study.drugs]


def arm_rate(arm: DrugArm) -> Rate:
    if arm.orr is None:
        raise ValueError(f"arm '{arm.label}' has no ORR")
    return Rate(arm.orr, n=arm.n)


class Main:
    """Core main class for combopredict"""

    def __init__(self, config_path: Optional[Union[str, pathlib.Path]] = None):
        """
        Initialize Main with configuration

        Args:
            config_path: Path to a config file. If None, the default locations
                are searched and the bundled config is the last resort.
        """
        self.config_path = resolve_config_path(config_path)
        self.config_dir = pathlib.Path(self.config_path).parent
        self.config_morpher = ConfigMorpher(self.config_path)

    def _section(self, name: str) -> Dict[str, Any]:
        section = self.config_morpher.fetch(name, None)
        return dict(section) if section else {}

    @staticmethod
    def _merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
        merged = dict(base)
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return merged

    def log_level(self) -> str:
        return str(self._section('logging').get('level', DEFAULT_LOG_LEVEL))

    def copula_config(self, **overrides) -> CopulaConfig:
        """CopulaConfig from the ``copula`` section; non-None overrides win"""
        return CopulaConfig(**self._merge(self._section('copula'), overrides))

    def bootstrap_config(self, **overrides) -> BootstrapConfig:
        return BootstrapConfig(**self._merge(self._section('bootstrap'), overrides))

    def design_spec(self, p_control: float, p_experimental: float, **overrides) -> DesignSpec:
        values = self._merge(self._section('design'), overrides)
        return DesignSpec(p_control=p_control, p_experimental=p_experimental, **values)

    def list_studies(self) -> List[str]:
        """List all configured study names"""
        studies = self.config_morpher.fetch('studies', []) or []
        return [s.get('name', 'unnamed') for s in studies]

    def _get_study_kwargs(self, name: str = None) -> Dict[str, Any]:
        if name:
            kwargs = self.config_morpher.fetch(f'studies[name={name}]', None)
            if not kwargs:
                raise ValueError(f"Study '{name}' not found in config")
        else:
            kwargs = self.config_morpher.fetch('studies[0]', None)
            if not kwargs:
                raise ValueError("No studies configured")
        return dict(kwargs)

    def setup_study(self, name: str = None) -> StudyInput:
        """Validated StudyInput for ``name`` (first study when None)"""
        return StudyInput(**self._get_study_kwargs(name))

    def data_path(self, path: Union[str, pathlib.Path]) -> pathlib.Path:
        return resolve_data_path(path, base_dir=self.config_dir)

    def load_curve(self, path: Union[str, pathlib.Path]) -> SurvivalCurve:
        return load_survival_csv(self.data_path(path))

    def load_waterfall(self, path: Union[str, pathlib.Path], label: str = None) -> WaterfallSample:
        return load_waterfall_csv(self.data_path(path), label=label)

    def load_study(self, name: str = None) -> StudyData:
        """Load a study and every file it references"""
        study = self.setup_study(name)
        data = StudyData(study=study)
        for arm in study.drugs:
            data.curves.append(self.load_curve(arm.dor_curve) if arm.dor_curve else None)
            data.waterfalls.append(
                self.load_waterfall(arm.waterfall, label=arm.label) if arm.waterfall else None
            )
        combo = study.combination
        if combo is not None:
            if combo.dor_curve:
                data.combination_curve = self.load_curve(combo.dor_curve)
            if combo.waterfall:
                data.combination_waterfall = self.load_waterfall(combo.waterfall, label=combo.label)
        logger.debug(f"loaded study '{study.name}' from {self.config_path}")
        return data

    def predict_orr(
        self,
        r1: float,
        r2: float,
        phi_prime: float = 0.0,
        n1: Optional[int] = None,
        n2: Optional[int] = None,
        level: float = 0.95,
    ) -> OrrPrediction:
        """
        Predict the combination ORR

        Args:
            r1, r2: monotherapy ORRs
            phi_prime: response correlation
            n1, n2: arm sizes; both are needed for the interval
            level: interval coverage

        Returns:
            OrrPrediction
        """
        rate1, rate2 = Rate(r1, n=n1), Rate(r2, n=n2)
        rate = predict_orr(rate1, rate2, phi_prime).value
        if rate > 0.0:
            mix = responder_mix(rate1, rate2, phi_prime)
            prediction = OrrPrediction(rate=rate, r12=mix.r12, r10=mix.r10, r02=mix.r02)
        else:
            prediction = OrrPrediction(rate=rate, r12=float("nan"), r10=float("nan"), r02=float("nan"))
        if n1 is not None and n2 is not None:
            _, lower, upper = orr_confidence_interval(rate1, rate2, phi_prime, level)
            prediction.std_err = orr_standard_error(rate1, rate2, phi_prime)
            prediction.lower, prediction.upper = lower, upper
        return prediction

    def predict_dor(
        self,
        curve1: Union[SurvivalCurve, str, pathlib.Path],
        curve2: Union[SurvivalCurve, str, pathlib.Path],
        r1: Union[Rate, float],
        r2: Union[Rate, float],
        corr: Optional[CorrelationSpec] = None,
        level: float = 0.95,
        printed_pairing: bool = False,
    ) -> DorBand:
        """Predicted combination DoR curve with variance band"""
        if not isinstance(curve1, SurvivalCurve):
            curve1 = self.load_curve(curve1)
        if not isinstance(curve2, SurvivalCurve):
            curve2 = self.load_curve(curve2)
        return predict_dor_band(curve1, curve2, r1, r2, corr, level=level, printed_pairing=printed_pairing)

    def predict_waterfall(
        self,
        s1: Union[WaterfallSample, str, pathlib.Path],
        s2: Union[WaterfallSample, str, pathlib.Path],
        cfg: Optional[CopulaConfig] = None,
        nboot: int = 0,
        workers: Optional[int] = None,
        resample_size: Optional[int] = None,
    ) -> PredictedBand:
        """
        Predicted combination waterfall, with a bootstrap band when nboot > 0
        """
        if not isinstance(s1, WaterfallSample):
            s1 = self.load_waterfall(s1)
        if not isinstance(s2, WaterfallSample):
            s2 = self.load_waterfall(s2)
        cfg = cfg or self.copula_config()
        if not nboot:
            return predict_waterfall(s1, s2, cfg)
        settings = self.bootstrap_config(nboot=nboot, workers=workers, resample_size=resample_size)
        return bootstrap_band(
            s1, s2, cfg,
            nboot=settings.nboot,
            resample_size=settings.resample_size,
            workers=settings.workers,
        )

    def sample_size(self, spec: DesignSpec) -> Dict[str, Any]:
        """Sample size with the power it achieves"""
        size: SampleSize = sample_size_two_proportions(spec)
        return {
            'n_per_arm': size.n_per_arm,
            'n_total': size.n_total,
            'achieved_power': power_two_proportions(spec, size.n_per_arm),
            'continuity_correction': spec.continuity_correction,
        }
