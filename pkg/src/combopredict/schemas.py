"""
Validated configuration records

These are the records that arrive from YAML config or CLI flags. Numerical
domain types live in ``combopredict.models.base``.
"""

import logging
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .models.base import TUMOR_CORRELATION_RANGE, CorrelationSpec

logger = logging.getLogger(__name__)


class CopulaConfig(BaseModel):
    """Settings for one copula prediction of the combination waterfall"""
    model_config = ConfigDict(frozen=True)

    rho: float = Field(0.25, ge=-1.0, le=1.0, description="Copula correlation, also the cell-kill correlation of dual responders")
    n_draws: int = Field(5000, ge=100, description="Number of simulated patients")
    cutoff: float = Field(-30.0, lt=0.0, description="Response threshold on % change (-30 RECIST, -50 lymphoma SPD)")
    grid_min: float = -120.0
    grid_max: float = 100.0
    grid_step: float = Field(1.0, gt=0.0)
    mode: Literal["proposed", "palmer"] = "proposed"
    seed: int = Field(20201, ge=0)
    quantile_method: Literal["grid", "exact"] = "grid"

    @model_validator(mode="after")
    def check_grid(self):
        if not (self.grid_min < self.cutoff < self.grid_max):
            raise ValueError(
                f"need grid_min < cutoff < grid_max, got {self.grid_min}, {self.cutoff}, {self.grid_max}"
            )
        lo, hi = TUMOR_CORRELATION_RANGE
        if not (lo <= self.rho <= hi):
            logger.warning(f"rho={self.rho} is outside the usual range [{lo}, {hi}]")
        return self

    def grid(self) -> np.ndarray:
        """Evaluation grid grid_min, grid_min + step, ..., <= grid_max"""
        count = int(np.floor((self.grid_max - self.grid_min) / self.grid_step + 1e-9)) + 1
        return self.grid_min + self.grid_step * np.arange(count)


class BootstrapConfig(BaseModel):
    """Bootstrap settings for confidence bands"""
    model_config = ConfigDict(frozen=True)

    nboot: int = Field(2000, ge=100)
    workers: int = Field(1, ge=1)
    resample_size: Optional[int] = Field(None, ge=1)


class DesignSpec(BaseModel):
    """Two-arm proof-of-concept design on a binary endpoint"""
    model_config = ConfigDict(frozen=True)

    p_control: float = Field(..., gt=0.0, lt=1.0)
    p_experimental: float = Field(..., gt=0.0, lt=1.0)
    alpha_one_sided: float = Field(0.05, gt=0.0, lt=0.5)
    power: float = Field(0.80, gt=0.5, lt=1.0)
    allocation_ratio: float = Field(1.0, gt=0.0, description="Experimental : control allocation")
    continuity_correction: bool = False

    @model_validator(mode="after")
    def check_effect(self):
        if self.p_control == self.p_experimental:
            raise ValueError("p_control and p_experimental must differ")
        return self


class DrugArm(BaseModel):
    """One arm of a study: label, ORR and the files holding its curves"""
    label: str
    orr: Optional[float] = Field(None, ge=0.0, le=1.0)
    n: Optional[int] = Field(None, ge=1)
    dor_curve: Optional[str] = Field(None, description="Survival CSV (time_months, survival_prob)")
    waterfall: Optional[str] = Field(None, description="Waterfall CSV (pchg)")

    @model_validator(mode="after")
    def check_endpoint(self):
        if self.orr is None and self.dor_curve is None and self.waterfall is None:
            raise ValueError(f"arm '{self.label}' has no endpoint data")
        return self


class CorrelationSettings(BaseModel):
    phi_prime: float = Field(0.0, ge=-1.0, le=1.0)
    phi_dprime: float = Field(0.0, ge=-1.0, le=1.0)
    phi_tumor: float = Field(0.0, ge=-1.0, le=1.0)

    def to_spec(self) -> CorrelationSpec:
        return CorrelationSpec(
            phi_prime=self.phi_prime,
            phi_dprime=self.phi_dprime,
            phi_tumor=self.phi_tumor,
        )


class StudyInput(BaseModel):
    """A two-drug study as described in the ``studies`` config section"""
    name: str
    description: Optional[str] = None
    drugs: List[DrugArm] = Field(..., min_length=2, max_length=2)
    combination: Optional[DrugArm] = None
    correlation: CorrelationSettings = Field(default_factory=CorrelationSettings)
    cutoff: float = Field(-30.0, lt=0.0)
    seed: Optional[int] = Field(None, ge=0)

    @field_validator("description", mode="before")
    @classmethod
    def empty_str_to_none(cls, v):
        if isinstance(v, str) and v.strip() == "":
            return None
        return v
