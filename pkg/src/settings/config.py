"""Run configuration loaded from ``stepwise.toml`` plus flag overrides."""

from __future__ import annotations

import tomllib
from pathlib import Path
from typing import TYPE_CHECKING, Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from dataset.export import DEFAULT_DPO_BETA
from dataset.pairs import DEFAULT_THETA, PairMode
from inference.engine import InferenceConfig
from mcts.tree import MctsConfig
from retrieval.bm25 import DEFAULT_TOP_K

if TYPE_CHECKING:
    from collections.abc import Mapping

CONFIG_FILENAME = "stepwise.toml"
TOKEN_ENV_VAR = "STEPWISE_API_TOKEN"


class ConfigError(Exception):
    """Raised when a config file exists but cannot be used."""


class BackendSection(BaseModel):
    """Policy backend. ``temperature`` and ``seed`` apply to inference runs."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["scripted", "http"] = "scripted"
    script_path: Path | None = None
    endpoint: str | None = None
    model: str | None = None
    temperature: float | None = Field(default=None, ge=0)
    seed: int | None = None
    timeout: float = Field(default=60.0, gt=0)
    max_retries: int = Field(default=3, ge=0)
    backoff_base: float = Field(default=1.0, ge=0)
    max_in_flight: int = Field(default=4, ge=1)

    @model_validator(mode="after")
    def check_kind(self) -> BackendSection:
        if self.kind == "http" and (not self.endpoint or not self.model):
            msg = "backend.kind = 'http' needs backend.endpoint and backend.model"
            raise ValueError(msg)
        return self


class RetrieverSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["local", "remote"] = "local"
    corpus_path: Path | None = None
    index_path: Path | None = None
    endpoint: str | None = None
    k: int = Field(default=DEFAULT_TOP_K, ge=1)
    timeout: float = Field(default=30.0, gt=0)
    max_retries: int = Field(default=2, ge=0)

    @model_validator(mode="after")
    def check_kind(self) -> RetrieverSection:
        if self.kind == "remote" and not self.endpoint:
            msg = "retriever.kind = 'remote' needs retriever.endpoint"
            raise ValueError(msg)
        return self


class DatasetSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    theta: float = Field(default=DEFAULT_THETA, gt=0)
    mode: PairMode = PairMode.BEST_WORST
    output_dir: Path = Path("out")
    source: str = ""
    dpo_beta: float = Field(default=DEFAULT_DPO_BETA, gt=0)


class EvalSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    gold_path: Path | None = None


class RunConfig(BaseModel):
    """Everything a command needs; one file drives a whole pipeline."""

    model_config = ConfigDict(extra="forbid")

    backend: BackendSection = Field(default_factory=BackendSection)
    retriever: RetrieverSection = Field(default_factory=RetrieverSection)
    mcts: MctsConfig = Field(default_factory=MctsConfig)
    inference: InferenceConfig = Field(default_factory=InferenceConfig)
    dataset: DatasetSection = Field(default_factory=DatasetSection)
    eval: EvalSection = Field(default_factory=EvalSection)
    parallelism: int = Field(default=1, ge=1)
    seed: int | None = None

    def inference_config(self) -> InferenceConfig:
        """Inference settings with the retriever's k and the shared seed applied."""
        update: dict[str, Any] = {"top_k": self.retriever.k}
        seed = self.backend.seed if self.backend.seed is not None else self.inference.seed
        update["seed"] = seed if seed is not None else self.seed
        if self.backend.temperature is not None:
            update["temperature"] = self.backend.temperature
        return self.inference.model_copy(update=update)

    def mcts_config(self) -> MctsConfig:
        seed = self.mcts.seed if self.mcts.seed is not None else self.seed
        return self.mcts.model_copy(update={"top_k": self.retriever.k, "seed": seed})


# Paths that must exist when set, and paths that are only written.
_INPUT_PATHS = (
    ("backend", "script_path"),
    ("retriever", "corpus_path"),
    ("eval", "gold_path"),
)
_OUTPUT_PATHS = (
    ("retriever", "index_path"),
    ("dataset", "output_dir"),
)


def _resolve_paths(config: RunConfig, base: Path) -> RunConfig:
    """Anchor relative paths at ``base`` (the config file's directory)."""
    for section_name, field_name in (*_INPUT_PATHS, *_OUTPUT_PATHS):
        section = getattr(config, section_name)
        value = getattr(section, field_name)
        if value is not None and not value.is_absolute():
            section = section.model_copy(update={field_name: base / value})
            config = config.model_copy(update={section_name: section})
    return config


def check_paths(config: RunConfig) -> None:
    """Raise :class:`ConfigError` for a referenced input file that is missing."""
    for section_name, field_name in _INPUT_PATHS:
        value = getattr(getattr(config, section_name), field_name)
        if value is not None and not value.is_file():
            msg = f"{section_name}.{field_name} does not exist: {value}"
            raise ConfigError(msg)


def load_config(path: Path | None = None) -> RunConfig:
    """Load ``path`` (default ``./stepwise.toml``).

    A missing default file yields the defaults; an explicitly named file
    must exist. Relative paths resolve against the file's directory.

    Raises:
        ConfigError: Invalid TOML, unknown keys, out-of-range values or a
            referenced input file that does not exist.
    """
    explicit = path is not None
    config_path = path if path is not None else Path.cwd() / CONFIG_FILENAME

    if not config_path.is_file():
        if explicit:
            msg = f"Config file not found: {config_path}"
            raise ConfigError(msg)
        return _resolve_paths(RunConfig(), Path.cwd())

    try:
        with config_path.open("rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        msg = f"Invalid TOML in {config_path}: {e}"
        raise ConfigError(msg) from e

    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        msg = f"Invalid config in {config_path}: {e}"
        raise ConfigError(msg) from e

    config = _resolve_paths(config, config_path.parent)
    check_paths(config)
    return config


# Flag name -> dotted config key.
OVERRIDE_KEYS: dict[str, str] = {
    "k": "retriever.k",
    "max_rounds": "inference.max_rounds",
    "alpha": "mcts.alpha",
    "c_uct": "mcts.c_uct",
    "theta": "dataset.theta",
    "iterations": "mcts.iterations",
    "parallelism": "parallelism",
    "seed": "seed",
}


def apply_overrides(config: RunConfig, overrides: Mapping[str, Any]) -> RunConfig:
    """Apply dotted-key overrides (``None`` values are skipped) and re-validate."""
    data = config.model_dump()
    for key, value in overrides.items():
        if value is None:
            continue
        *sections, leaf = key.split(".")
        target = data
        for section in sections:
            target = target[section]
        target[leaf] = value
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        msg = f"Invalid override: {e}"
        raise ConfigError(msg) from e


__all__ = [
    "CONFIG_FILENAME",
    "OVERRIDE_KEYS",
    "TOKEN_ENV_VAR",
    "BackendSection",
    "ConfigError",
    "DatasetSection",
    "EvalSection",
    "RetrieverSection",
    "RunConfig",
    "apply_overrides",
    "check_paths",
    "load_config",
]
