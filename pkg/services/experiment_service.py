"""Experiment jobs: run an arm, then write the metrics table, manifest and curves."""

from __future__ import annotations

import json
import logging
import os
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from config import MANIFEST_SCHEMA, RunConfig
from core.datasets import subsample
from protocol import N_SPLITS, RunRecord, SplitMetrics, make_schedule, resolve_arm, run_experiment

from .data_service import DataService
from .progress_service import progress_service

logger = logging.getLogger(__name__)

MANIFEST_VERSION = 1
METRIC_COLUMNS = ["model", "dataset", "split", "chosen_acc", "nonchosen_acc", "overall_acc", "seconds"]
CLASS_GROUPS = {"chosen": "chosen_acc", "nonchosen": "nonchosen_acc", "overall": "overall_acc"}
FLOAT_FORMAT = "%.6f"


def metrics_frame(records: Sequence[RunRecord]) -> pd.DataFrame:
    """Seed means: one row per (model, dataset, split)."""
    rows = [
        {
            "model": r.model,
            "dataset": r.dataset,
            "split": s.split,
            "chosen_acc": s.chosen_acc,
            "nonchosen_acc": s.nonchosen_acc,
            "overall_acc": s.overall_acc,
            "seconds": s.seconds,
        }
        for r in records
        for s in r.splits
    ]
    frame = pd.DataFrame(rows, columns=METRIC_COLUMNS)
    means = frame.groupby(["model", "dataset", "split"], sort=True).mean().reset_index()
    return means[METRIC_COLUMNS]


def curves_frame(metrics: pd.DataFrame) -> pd.DataFrame:
    """Long format: one row per model, class group and split."""
    parts = []
    for group, column in CLASS_GROUPS.items():
        part = metrics[["model", "split", column]].rename(columns={column: "accuracy"})
        part.insert(1, "class_group", group)
        part.insert(2, "series", part["model"] + "/" + group)
        parts.append(part)
    curves = pd.concat(parts, ignore_index=True)
    return curves.sort_values(["model", "class_group", "split"], kind="mergesort").reset_index(drop=True)


def manifest(exp_id: str, models: Sequence[str], dataset: Dict[str, Any], run_config: RunConfig,
             records: Sequence[RunRecord]) -> Dict[str, Any]:
    return {
        "schema": MANIFEST_SCHEMA,
        "version": MANIFEST_VERSION,
        "experiment": str(exp_id),
        "models": list(models),
        "dataset": dataset,
        "config": json.loads(run_config.dumps()),
        "records": [r.to_dict() for r in records],
    }


def _write_csv(frame: pd.DataFrame, path: str) -> None:
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")


class ExperimentService:
    @staticmethod
    def dry_run(exp_id: str, run_config: RunConfig) -> Dict[str, Any]:
        return {"experiment": str(exp_id), "models": list(resolve_arm(exp_id)), "dataset": DataService.probe(run_config)}

    @staticmethod
    def run_experiment_job(
        job_id: str,
        exp_id: str,
        run_config: RunConfig,
        output_dir: str,
        curves: bool = True,
        models: Optional[Sequence[str]] = None,
    ) -> Dict[str, str]:
        """Run experiment `exp_id` and write its outputs into `output_dir`.

        Returns:
            Mapping of output kind to file path.
        """
        progress_service.create_job(job_id)
        try:
            models = tuple(models) if models else resolve_arm(exp_id)
            progress_service.send_event(job_id, "log", {"message": f"Loading dataset {run_config.dataset}..."})
            dataset = DataService.load(run_config)
            total = len(models) * len(run_config.seeds) * N_SPLITS
            done: List[int] = []

            def on_split(model: str, seed: int, split: int, metrics: SplitMetrics) -> None:
                done.append(1)
                progress_service.send_event(
                    job_id,
                    "progress",
                    {
                        "step": f"{model} seed {seed}",
                        "current": len(done),
                        "total": total,
                        "percent": round(len(done) / total * 100, 2),
                        "message": f"D{split}: chosen {metrics.chosen_acc:.3f}, overall {metrics.overall_acc:.3f}",
                    },
                )

            records = run_experiment(exp_id, dataset, run_config, models=models, on_split=on_split)

            os.makedirs(output_dir, exist_ok=True)
            outputs = {
                "metrics": os.path.join(output_dir, "metrics.csv"),
                "manifest": os.path.join(output_dir, "manifest.json"),
            }
            metrics = metrics_frame(records)
            _write_csv(metrics, outputs["metrics"])
            with open(outputs["manifest"], "w", encoding="utf-8") as f:
                doc = manifest(exp_id, models, dataset.describe(), run_config, records)
                f.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
            if curves:
                outputs["curves"] = os.path.join(output_dir, "curves.csv")
                _write_csv(curves_frame(metrics), outputs["curves"])

            progress_service.send_event(
                job_id,
                "complete",
                {"message": f"Experiment {exp_id} done: {len(metrics)} metric rows", "outputs": outputs},
            )
            return outputs

        except Exception as e:
            progress_service.send_event(job_id, "error", {"message": str(e)})
            raise
        finally:
            progress_service.close(job_id)

    @staticmethod
    def make_splits(job_id: str, run_config: RunConfig, output: str) -> Dict[str, Any]:
        """Write the schedule of every configured seed as JSON."""
        progress_service.create_job(job_id)
        try:
            dataset = DataService.load(run_config)
            schedules = []
            for seed in run_config.seeds:
                data = subsample(dataset, run_config.schedule.fraction, seed)
                schedule = make_schedule(
                    data.train,
                    data.n_classes,
                    run_config.schedule.chosen_class,
                    run_config.schedule.per_class_d1,
                    seed,
                )
                schedule.check(data.train.labels)
                schedules.append({**schedule.to_dict(), "sizes": schedule.sizes()})
            doc = {"dataset": dataset.describe(), "fraction": run_config.schedule.fraction, "schedules": schedules}
            parent = os.path.dirname(os.path.abspath(output))
            os.makedirs(parent, exist_ok=True)
            with open(output, "w", encoding="utf-8") as f:
                f.write(json.dumps(doc, sort_keys=True) + "\n")
            progress_service.send_event(
                job_id, "complete", {"message": f"Wrote {len(schedules)} schedules to {output}"}
            )
            return doc

        except Exception as e:
            progress_service.send_event(job_id, "error", {"message": str(e)})
            raise
        finally:
            progress_service.close(job_id)
