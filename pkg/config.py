"""Centralized configuration for cobweb-lab.

Two layers:

- :class:`Config` holds machine-level settings read from the environment
  (optionally via a ``.env`` file), exposed as the global ``config``.
- :class:`RunConfig` is the strict, serialisable description of one run:
  model, dataset, schedule and every hyperparameter. It is what config files
  contain and what run manifests embed.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from core.baseline import MLPConfig
from core.cobwebnn import CobwebNNConfig
from core.errors import UsageError
from core.prediction import PredictConfig
from core.stats import AttributeWeights
from core.tree import TreeConfig

try:
    from dotenv import load_dotenv

    load_dotenv()
except ImportError:
    pass


@dataclass
class Config:
    """Environment settings with sensible defaults.

    Attributes:
        data_dir: Directory holding one sub-directory per benchmark dataset.
        output_dir: Directory that receives run outputs.
        log_level: Logging level name for the command line.
    """

    data_dir: str = field(default_factory=lambda: os.getenv("COBWEB_LAB_DATA_DIR", "./data"))
    output_dir: str = field(default_factory=lambda: os.getenv("COBWEB_LAB_OUTPUT_DIR", "./runs"))
    log_level: str = field(default_factory=lambda: os.getenv("COBWEB_LAB_LOG_LEVEL", "INFO"))

    def dataset_dir(self, name: str) -> str:
        """Conventional location of dataset `name`."""
        return os.path.join(self.data_dir, name)


# Global singleton - can be replaced for testing
config = Config()


MODEL_NAMES = ("cobweb4v", "cobweb4v-fixed", "cobwebnn-sparse", "cobwebnn-dense", "mlp", "mlp-replay")
ModelName = Literal["cobweb4v", "cobweb4v-fixed", "cobwebnn-sparse", "cobwebnn-dense", "mlp", "mlp-replay"]

# Run manifests embed a RunConfig under "config"; loading one reuses it.
MANIFEST_SCHEMA = "cobweb-lab/run-manifest"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ScheduleSettings(_Section):
    chosen_class: int = Field(0, ge=0)
    per_class_d1: int = Field(30, ge=1)
    fraction: float = Field(0.1, gt=0, le=1)


class TreeSettings(_Section):
    utility: Literal["information", "probability"] = "information"
    fixed_depth: int = Field(4, ge=1)
    fixed_branching: int = Field(5, ge=2)
    acuity: float = Field(0.25, gt=0)
    pixel_weight: float = Field(1.0, ge=0)
    label_weight: float = Field(1.0, ge=0)


class PredictSettings(_Section):
    n_max: int = Field(30, ge=1)
    weight_sign: Literal["negative", "positive"] = "positive"
    mode: Literal["multi", "greedy-leaf"] = "multi"
    smoothing: float = Field(1.0, ge=0)


class CobwebNNSettings(_Section):
    depth: int = Field(3, ge=1)
    branching: int = Field(4, ge=1)
    tau: float = Field(1.0, gt=0)
    lr: float = Field(0.01, gt=0)
    batch_size: int = Field(64, ge=1)
    epochs: int = Field(5, ge=1)
    rate_mode: Literal["fixed", "evidence"] = "fixed"
    init_scale: float = Field(0.01, ge=0)


class MLPSettings(_Section):
    hidden: int = Field(128, ge=1)
    lr: float = Field(0.001, gt=0)
    batch_size: int = Field(64, ge=1)
    epochs: int = Field(5, ge=1)
    replay_capacity: int = Field(1000, ge=0)


class SynthSettings(_Section):
    n_classes: int = Field(10, ge=1)
    dim: int = Field(64, ge=1)
    per_class: int = Field(1000, ge=1)
    spread: float = Field(0.1, ge=0)
    test_per_class: Optional[int] = Field(None, ge=1)
    seed: int = 0


class RunConfig(_Section):
    """Everything that determines the outputs of one run.

    Unknown keys are rejected at every level.
    """

    model: ModelName = "cobweb4v"
    dataset: str = "synth"
    data_dir: Optional[str] = None
    output_dir: Optional[str] = None
    seeds: List[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4], min_length=1)
    workers: int = Field(1, ge=1)
    record_wall_clock: bool = False
    schedule: ScheduleSettings = ScheduleSettings()
    tree: TreeSettings = TreeSettings()
    predict: PredictSettings = PredictSettings()
    cobwebnn: CobwebNNSettings = CobwebNNSettings()
    mlp: MLPSettings = MLPSettings()
    synth: SynthSettings = SynthSettings()

    @field_validator("seeds")
    @classmethod
    def _distinct_seeds(cls, seeds: List[int]) -> List[int]:
        if len(set(seeds)) != len(seeds):
            raise ValueError("seeds must be distinct")
        if any(s < 0 for s in seeds):
            raise ValueError("seeds must be >= 0")
        return seeds

    # -- model settings ------------------------------------------------------

    def tree_config(self, seed: int, fixed: bool = False) -> TreeConfig:
        t = self.tree
        return TreeConfig(
            utility=t.utility,
            mode="fixed" if fixed else "adaptive",
            fixed_depth=t.fixed_depth,
            fixed_branching=t.fixed_branching,
            acuity=t.acuity,
            weights=AttributeWeights(pixel=t.pixel_weight, label=t.label_weight),
            seed=seed,
        )

    def predict_config(self) -> PredictConfig:
        return PredictConfig(**self.predict.model_dump())

    def cobwebnn_config(self, seed: int, mode: str) -> CobwebNNConfig:
        return CobwebNNConfig(mode=mode, seed=seed, **self.cobwebnn.model_dump())

    def mlp_config(self, seed: int) -> MLPConfig:
        return MLPConfig(seed=seed, **self.mlp.model_dump())

    @property
    def resolved_data_dir(self) -> str:
        return self.data_dir or config.data_dir

    @property
    def resolved_output_dir(self) -> str:
        return self.output_dir or config.output_dir

    # -- files and overrides ---------------------------------------------------

    def dumps(self) -> str:
        """Canonical JSON text (sorted keys)."""
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, indent=2)

    @classmethod
    def parse(cls, data: Dict[str, Any]) -> "RunConfig":
        """Validate a mapping.

        Raises:
            UsageError: Naming the first offending dotted key.
        """
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise usage_error_from(e) from e

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise UsageError(f"cannot read config file {path}: {e}") from e
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise UsageError(f"config file {path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise UsageError(f"config file {path} must hold a JSON object")
        if data.get("schema") == MANIFEST_SCHEMA:
            data = data.get("config", {})
        return cls.parse(data)

    def with_overrides(self, assignments: Sequence[str] = (), **fields: Any) -> "RunConfig":
        """A copy with ``section.key=value`` assignments and top-level fields applied.

        Values are parsed as JSON when possible, otherwise taken as strings.
        """
        data = self.model_dump(mode="json")
        for key, value in fields.items():
            if value is not None:
                data[key] = value
        for assignment in assignments:
            key, sep, raw = assignment.partition("=")
            if not sep or not key:
                raise UsageError(f"override {assignment!r} is not of the form key=value")
            try:
                value = json.loads(raw)
            except json.JSONDecodeError:
                value = raw
            target = data
            parts = key.split(".")
            for part in parts[:-1]:
                node = target.get(part)
                if not isinstance(node, dict):
                    raise UsageError(f"unknown config key: {key}")
                target = node
            target[parts[-1]] = value
        return RunConfig.parse(data)


def usage_error_from(error: ValidationError) -> UsageError:
    first = error.errors()[0]
    key = ".".join(str(p) for p in first["loc"]) or "<root>"
    if first["type"] == "extra_forbidden":
        return UsageError(f"unknown config key: {key}")
    return UsageError(f"invalid config value for {key}: {first['msg']}")
