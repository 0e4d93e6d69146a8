"""Train one model on a dataset's training half and write a checkpoint."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from typing import Any, Dict, Tuple

from config import RunConfig
from core.datasets import subsample
from core.errors import CheckpointError, UsageError
from core.metrics import predicted_labels
from learners import BaseLearner, create_learner, get_learner
from learners.shared import fmt_time

from .data_service import DataService
from .progress_service import progress_service

logger = logging.getLogger(__name__)

CHECKPOINT_SCHEMA = "cobweb-lab/checkpoint"
CHECKPOINT_VERSION = 1


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


class FitService:
    @staticmethod
    def checkpoint_text(learner: BaseLearner, run_config: RunConfig) -> str:
        return canonical_json(
            {
                "schema": CHECKPOINT_SCHEMA,
                "version": CHECKPOINT_VERSION,
                "model": learner.name,
                "seed": learner.seed,
                "run_config": json.loads(run_config.dumps()),
                "state": learner.state(),
            }
        )

    @staticmethod
    def load_checkpoint(path: str) -> Tuple[BaseLearner, RunConfig]:
        """Rebuild the learner stored at `path`.

        Raises:
            CheckpointError: Unreadable file, foreign schema or unsupported
                version (both versions named).
        """
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
        if data.get("schema") != CHECKPOINT_SCHEMA:
            raise CheckpointError(f"{path} is not a checkpoint (schema {data.get('schema')!r})")
        if data.get("version") != CHECKPOINT_VERSION:
            raise CheckpointError(
                f"checkpoint version {data.get('version')} is not supported "
                f"(this build reads version {CHECKPOINT_VERSION})"
            )
        run_config = RunConfig.parse(data["run_config"])
        cls = get_learner(data["model"])
        if cls is None:
            raise CheckpointError(f"checkpoint names unknown model {data['model']!r}")
        return cls.from_state(data["state"], run_config, int(data["seed"])), run_config

    @staticmethod
    def dry_run(run_config: RunConfig) -> Dict[str, Any]:
        """Validate model name and dataset headers without training."""
        if get_learner(run_config.model) is None:
            raise UsageError(f"unknown model {run_config.model!r}")
        return {"model": run_config.model, "dataset": DataService.probe(run_config)}

    @staticmethod
    def run_fit(job_id: str, run_config: RunConfig, output_dir: str) -> Dict[str, Any]:
        """Fit ``run_config.model`` with the first configured seed.

        Writes ``checkpoint.json`` and ``summary.json`` into `output_dir` and
        returns the summary.
        """
        progress_service.create_job(job_id)
        try:
            seed = run_config.seeds[0]
            progress_service.send_event(job_id, "log", {"message": f"Loading dataset {run_config.dataset}..."})
            dataset = subsample(DataService.load(run_config), run_config.schedule.fraction, seed)

            progress_service.send_event(
                job_id,
                "progress",
                {"step": "[1/2] Training", "message": f"{run_config.model} on {len(dataset.train)} instances"},
            )
            learner = create_learner(run_config.model, dataset.dim, dataset.n_classes, run_config, seed)
            start = time.perf_counter()
            learner.partial_fit(dataset.train.features, dataset.train.labels)
            elapsed = time.perf_counter() - start

            progress_service.send_event(job_id, "progress", {"step": "[2/2] Evaluating", "message": ""})
            proba = learner.predict_proba(dataset.test.features)
            predicted = predicted_labels(proba)
            accuracy = float((predicted == dataset.test.labels).mean()) if len(dataset.test) else None

            os.makedirs(output_dir, exist_ok=True)
            text = FitService.checkpoint_text(learner, run_config)
            checkpoint_path = os.path.join(output_dir, "checkpoint.json")
            with open(checkpoint_path, "w", encoding="utf-8") as f:
                f.write(text)

            summary = {
                "model": run_config.model,
                "dataset": dataset.describe(),
                "seed": seed,
                "size": learner.summary(),
                "train_seconds": elapsed if run_config.record_wall_clock else 0.0,
                "test_accuracy": accuracy,
                "checkpoint": "checkpoint.json",
                "checkpoint_sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
            }
            with open(os.path.join(output_dir, "summary.json"), "w", encoding="utf-8") as f:
                f.write(json.dumps(summary, sort_keys=True, indent=2) + "\n")

            progress_service.send_event(
                job_id,
                "complete",
                {
                    "message": f"Fit done in {fmt_time(elapsed)}: test accuracy {accuracy}",
                    "summary": summary,
                },
            )
            return summary

        except Exception as e:
            progress_service.send_event(job_id, "error", {"message": str(e)})
            raise
        finally:
            progress_service.close(job_id)
