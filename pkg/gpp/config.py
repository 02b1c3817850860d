"""
Configuration
Run configuration, experiment files and environment settings
"""
import json
import logging
import math
import os
from pathlib import Path
from typing import Any, Dict, Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import ConfigError

logger = logging.getLogger(__name__)

UINT64_MAX = 2**64 - 1


class LearningSchedule(BaseModel):
    """rho_k = rho0 * k^(-decay_power), k = 1, 2, ..."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    rho0: float = Field(ge=0)
    decay_power: float = Field(default=0.5, ge=0, le=1)

    def rate(self, k: int) -> float:
        if k < 1:
            raise ValueError(f"learning-rate index is 1-based, got k={k}")
        return self.rho0 * k ** (-self.decay_power)


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    problem_id: str
    mode: Optional[Literal["socp", "mfc"]] = None
    seed: int = Field(default=0, ge=0, le=UINT64_MAX)
    M: int = Field(ge=1)
    N: int = Field(ge=1)
    K: int = Field(ge=1)
    T: float = Field(gt=0)
    hidden_size: int = Field(ge=1)
    ridge_lambda: float = Field(default=1e-8, ge=0)
    schedule: LearningSchedule
    activation: Literal["tanh", "relu", "sigmoid"] = "tanh"
    clip_bound: Optional[float] = Field(default=None, gt=0)
    y_index: Literal["n", "n_plus_1"] = "n_plus_1"
    eval_M: Optional[int] = Field(default=None, ge=1)
    resample_features_each_epoch: bool = False
    standardize_inputs: bool = True
    case_id: Optional[str] = None
    problem_params: Dict[str, Any] = Field(default_factory=dict)

    @property
    def dt(self) -> float:
        return self.T / self.N

    @property
    def clip(self) -> float:
        return math.inf if self.clip_bound is None else self.clip_bound

    @property
    def evaluation_M(self) -> int:
        return self.M if self.eval_M is None else self.eval_M


class ProbeSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_outer: int = Field(default=100_000, ge=2)
    n_inner: int = Field(default=8, ge=2)
    n_roots: int = Field(default=2000, ge=2)
    policy: Literal["zero", "oracle"] = "zero"


# Experiment keys that map one-to-one onto RunConfig fields.
_RUN_KEYS = ("mode", "seed", "M", "N", "K", "T", "hidden_size", "ridge_lambda", "activation",
             "clip_bound", "y_index", "eval_M", "case_id", "resample_features_each_epoch",
             "standardize_inputs")


class ExperimentFile(BaseModel):
    """JSON experiment document; missing keys come from the problem's registered defaults"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    problem: str
    mode: Optional[Literal["socp", "mfc"]] = None
    seed: Optional[int] = Field(default=None, ge=0, le=UINT64_MAX)
    M: Optional[int] = Field(default=None, ge=1)
    N: Optional[int] = Field(default=None, ge=1)
    K: Optional[int] = Field(default=None, ge=1)
    T: Optional[float] = Field(default=None, gt=0)
    hidden_size: Optional[int] = Field(default=None, ge=1)
    ridge_lambda: Optional[float] = Field(default=None, ge=0)
    rho0: Optional[float] = Field(default=None, ge=0)
    decay_power: Optional[float] = Field(default=None, ge=0, le=1)
    clip_bound: Optional[float] = Field(default=None, gt=0)
    y_index: Optional[Literal["n", "n_plus_1"]] = None
    eval_M: Optional[int] = Field(default=None, ge=1)
    case_id: Optional[str] = None
    output_path: Optional[str] = None
    activation: Optional[Literal["tanh", "relu", "sigmoid"]] = None
    resample_features_each_epoch: Optional[bool] = None
    standardize_inputs: Optional[bool] = None
    threads: Optional[int] = Field(default=None, ge=0)
    problem_params: Optional[Dict[str, Any]] = None
    probe: Optional[ProbeSettings] = None

    @classmethod
    def load(cls, path) -> "ExperimentFile":
        path = Path(path)
        try:
            with open(path, "r") as f:
                data = json.load(f)
        except FileNotFoundError as e:
            raise ConfigError(f"experiment file not found: {path}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"experiment file {path} is not valid JSON: {e}") from e
        return cls.parse(data, source=str(path))

    @classmethod
    def parse(cls, data: Any, source: str = "<experiment>") -> "ExperimentFile":
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ConfigError(f"invalid experiment file {source}: {format_validation_error(e)}") from e

    def to_run_config(self, defaults: RunConfig, seed: Optional[int] = None) -> RunConfig:
        merged = defaults.model_dump()
        merged["problem_id"] = self.problem
        for key in _RUN_KEYS:
            value = getattr(self, key)
            if value is not None:
                merged[key] = value
        if self.rho0 is not None:
            merged["schedule"]["rho0"] = self.rho0
        if self.decay_power is not None:
            merged["schedule"]["decay_power"] = self.decay_power
        if self.problem_params is not None:
            merged["problem_params"] = {**merged["problem_params"], **self.problem_params}
        if seed is not None:
            merged["seed"] = seed
        try:
            return RunConfig.model_validate(merged)
        except ValidationError as e:
            raise ConfigError(f"invalid run configuration: {format_validation_error(e)}") from e


def format_validation_error(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        loc = ".".join(str(p) for p in item["loc"]) or "<root>"
        if item["type"] == "extra_forbidden":
            parts.append(f"unknown key '{loc}'")
        else:
            parts.append(f"{loc}: {item['msg']}")
    return "; ".join(parts)


class Settings(BaseModel):
    """Process-level settings read from the environment (.env via python-dotenv)"""
    model_config = ConfigDict(frozen=True)

    threads: Optional[int] = None
    log_level: str = "INFO"
    log_format: str = "json"
    output_dir: Path = Path("./data/runs")
    api_host: str = "localhost"
    api_port: int = 8000

    @classmethod
    def from_env(cls, dotenv: bool = True) -> "Settings":
        if dotenv:
            load_dotenv()
        threads = os.getenv("PGP_THREADS")
        try:
            return cls(
                threads=int(threads) if threads else None,
                log_level=os.getenv("PGP_LOG_LEVEL", "INFO"),
                log_format=os.getenv("PGP_LOG_FORMAT", "json"),
                output_dir=Path(os.getenv("PGP_OUTPUT_DIR", "./data/runs")),
                api_host=os.getenv("PGP_API_HOST", "localhost"),
                api_port=int(os.getenv("PGP_API_PORT", "8000")),
            )
        except (ValueError, ValidationError) as e:
            raise ConfigError(f"invalid environment setting: {e}") from e
