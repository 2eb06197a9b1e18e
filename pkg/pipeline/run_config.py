"""
Per-command run configurations for the CLI.

argparse collects raw values; these models validate them completely (numeric
ranges, input files present, option combinations) before any data is loaded
or any compute starts.
"""

from __future__ import annotations

from pathlib import Path
from typing import Annotated, Any, Literal

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from core.config import (
    DEFAULT_ALPHA,
    DEFAULT_BATCH_SIZE,
    DEFAULT_LAMBDA,
    DEFAULT_LEARNING_RATE,
    DEFAULT_RANKS,
    DEFAULT_SEED,
)
from core.errors import UsageError
from core.loss import LossConfig
from core.network import BUILTIN_NAMES, NetworkSpec, resolve_spec
from pipeline.trainer import TrainConfig
from tools.preprocess import photo_channels


def _split_ints(value: Any) -> Any:
    if isinstance(value, str):
        try:
            return [int(v) for v in value.split(",") if v.strip()]
        except ValueError as exc:
            raise ValueError(f"expected comma-separated integers, got {value!r}") from exc
    return value


def _existing_file(path: Path | None, what: str) -> Path | None:
    if path is not None and not path.is_file():
        raise ValueError(f"{what} not found: {path}")
    return path


class _Run(BaseModel):
    model_config = ConfigDict(frozen=True, extra="ignore", populate_by_name=True)


class SynthRun(_Run):
    seed: int = Field(DEFAULT_SEED, ge=0)
    count: int = Field(gt=0)
    out_dir: Path


class _TrainingOptions(_Run):
    manifest: Path
    arch: str = "medium"
    iters: int = Field(gt=0)
    lr: float = Field(DEFAULT_LEARNING_RATE, ge=0)
    alpha: float = Field(DEFAULT_ALPHA, ge=0)
    lambda_: float = Field(DEFAULT_LAMBDA, gt=0, alias="lambda")
    batch: int = Field(DEFAULT_BATCH_SIZE, gt=0)
    seed: int = Field(DEFAULT_SEED, ge=0)
    no_xy: bool = False
    crop: int | None = Field(None, gt=0)
    threads: int = Field(1, ge=1)
    pre_aligned: bool = False
    dtype: Literal["float32", "float64"] = "float32"

    @field_validator("manifest")
    @classmethod
    def _manifest_exists(cls, value: Path) -> Path:
        return _existing_file(value, "manifest")

    @model_validator(mode="after")
    def _arch_resolves(self) -> "_TrainingOptions":
        self.network_spec()
        return self

    def network_spec(self) -> NetworkSpec:
        return resolve_spec(self.arch, in_channels=photo_channels(not self.no_xy))

    def loss_config(self, alpha: float | None = None) -> LossConfig:
        return LossConfig(alpha=self.alpha if alpha is None else alpha, lambda_=self.lambda_)

    def train_config(self, checkpoint_every: int = 0) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.lr,
            iterations=self.iters,
            batch_size=self.batch,
            loss=self.loss_config(),
            seed=self.seed,
            checkpoint_every=checkpoint_every,
            crop_size=self.crop,
            xy_channels=not self.no_xy,
            threads=self.threads,
            dtype=self.dtype,
        )


class TrainRun(_TrainingOptions):
    out_model: Path
    log: Path | None = None
    checkpoint_every: int = Field(0, ge=0)
    summary: Path | None = None

    @property
    def log_path(self) -> Path:
        return self.log or self.out_model.with_name(f"{self.out_model.stem}.log.csv")


class GenerateRun(_Run):
    model: Path
    photo: Path
    out: Path
    eyes: tuple[float, float, float, float] | None = None
    timing: bool = False
    repeat: int = Field(5, ge=1)

    @field_validator("eyes", mode="before")
    @classmethod
    def _parse_eyes(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [float(v) for v in value.split(",")]
        return value

    @field_validator("model", "photo")
    @classmethod
    def _inputs_exist(cls, value: Path) -> Path:
        return _existing_file(value, "input file")


class EvaluateRun(_Run):
    model: Path | None = None
    manifest: Path
    ranks: Annotated[tuple[int, ...], BeforeValidator(_split_ints)] = DEFAULT_RANKS
    report: Path | None = None
    baseline_grayscale: bool = False
    identity_gallery: bool = False
    with_reported: bool = False
    save_sketches: Path | None = None
    crop: int | None = Field(None, gt=0)
    threads: int = Field(1, ge=1)
    pre_aligned: bool = False

    @field_validator("ranks")
    @classmethod
    def _positive_ranks(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if not value or min(value) < 1:
            raise ValueError("ranks must be positive integers")
        return value

    @field_validator("manifest")
    @classmethod
    def _manifest_exists(cls, value: Path) -> Path:
        return _existing_file(value, "manifest")

    @model_validator(mode="after")
    def _model_needed(self) -> "EvaluateRun":
        if self.baseline_grayscale and self.identity_gallery:
            raise ValueError("--baseline-grayscale and --identity-gallery are exclusive")
        if not (self.baseline_grayscale or self.identity_gallery):
            if self.model is None:
                raise ValueError("--model is required unless a baseline mode is selected")
            _existing_file(self.model, "model")
        return self


class AblateRun(_TrainingOptions):
    test_manifest: Path | None = None
    train_pairs: int | None = Field(None, ge=1)
    subset_sizes: Annotated[tuple[int, ...], BeforeValidator(_split_ints)]
    with_alpha: bool = False
    without_alpha: bool = False
    report: Path | None = None

    @field_validator("subset_sizes")
    @classmethod
    def _positive_sizes(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if not value or min(value) < 1:
            raise ValueError("subset sizes must be positive integers")
        return value

    @field_validator("test_manifest")
    @classmethod
    def _test_manifest_exists(cls, value: Path | None) -> Path | None:
        return _existing_file(value, "test manifest")

    @model_validator(mode="after")
    def _one_test_source(self) -> "AblateRun":
        if self.train_pairs is not None and self.test_manifest is not None:
            raise ValueError("--train-pairs and --test-manifest are exclusive")
        return self

    @property
    def alphas(self) -> list[float]:
        """Alpha settings to sweep; both when neither flag is given."""
        both = not (self.with_alpha or self.without_alpha)
        alphas = []
        if self.with_alpha or both:
            alphas.append(self.alpha if self.alpha > 0 else DEFAULT_ALPHA)
        if self.without_alpha or both:
            alphas.append(0.0)
        return alphas


class BenchmarkRun(_Run):
    archs: tuple[str, ...] = BUILTIN_NAMES
    repeat: int = Field(5, ge=1)
    seed: int = Field(DEFAULT_SEED, ge=0)
    report: Path | None = None

    @field_validator("archs", mode="before")
    @classmethod
    def _split_archs(cls, value: Any) -> Any:
        return [v.strip() for v in value.split(",") if v.strip()] if isinstance(value, str) else value

    @field_validator("archs")
    @classmethod
    def _known_archs(cls, value: tuple[str, ...]) -> tuple[str, ...]:
        unknown = [a for a in value if a not in BUILTIN_NAMES]
        if unknown or not value:
            raise ValueError(f"unknown architectures {unknown}; valid names are {', '.join(BUILTIN_NAMES)}")
        return value


def parse_run(model: type[_Run], values: dict[str, Any]) -> Any:
    """Validate raw CLI values into `model`, raising UsageError with every problem listed."""
    try:
        return model.model_validate({k: v for k, v in values.items() if v is not None})
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'arguments'}: {err['msg']}" for err in exc.errors()
        )
        raise UsageError(problems) from exc
