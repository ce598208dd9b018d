"""Request/response models for the what-if decision service."""
from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field


class DiscreteWhatIfRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    states: list[str] = Field(min_length=1)
    state_probs: list[float] = Field(min_length=1)
    actions: list[str] = Field(min_length=1)
    utility: list[list[float]]
    renormalize: bool = False


class DiscreteWhatIfResponse(BaseModel):
    actions: list[str]
    expected_utilities: list[float]
    optimal_action: str
    optimal_index: int


class WolfPreferencesModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    benefit: float
    cost: float
    risk_aversion: float = Field(ge=0)
    n_min: float = Field(gt=0)


class MuskratPreferencesModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    effort_cost: float = Field(ge=0)
    abundance_penalty: float = Field(ge=0)


class WhatIfRequest(BaseModel):
    model_config = ConfigDict(extra="forbid", protected_namespaces=())

    model: Literal["wolf", "muskrat"]
    posterior_id: str
    preferences: Union[WolfPreferencesModel, MuskratPreferencesModel]
    harvest_grid: Optional[list[int]] = None
    effort_grid: Optional[list[float]] = None
    budget: Optional[float] = Field(default=None, gt=0)
    n_reps: Optional[int] = Field(default=None, ge=1)
    draws_cap: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default=0, ge=0)


class ManifestEcho(BaseModel):
    """Provenance echoed with every computed response."""

    seed: int
    artifact_version: str
    posterior_id: str
    inputs: dict[str, str]
    config: dict[str, str]


class CurveResponse(BaseModel):
    model_config = ConfigDict(protected_namespaces=())

    kind: Literal["eu_curve"] = "eu_curve"
    model: str
    actions: list[float]
    means: list[float]
    std_errors: list[float]
    n_samples: int
    optimum_index: int
    optimum_action: float
    ambiguous: bool
    risk: Optional[list[float]] = None
    mean_abundance: Optional[list[float]] = None
    reduced_precision: bool
    manifest: ManifestEcho


class AllocationResponse(BaseModel):
    model_config = ConfigDict(protected_namespaces=())

    kind: Literal["allocation"] = "allocation"
    model: str
    provinces: list[str]
    efforts: list[float]
    shares: list[float]
    budget: float
    eu_mean: float
    eu_std_error: float
    ambiguous: bool
    candidates_evaluated: int
    reduced_precision: bool
    manifest: ManifestEcho


class PosteriorSummary(BaseModel):
    model_config = ConfigDict(protected_namespaces=())

    id: str
    model: str
    n_draws: int
    n_parameters: int
    max_rhat: Optional[float]
    min_ess: Optional[float]
    warnings: list[str]


class HealthResponse(BaseModel):
    status: str
    artifact_version: str
