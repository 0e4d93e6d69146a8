"""Label distributions for a file of instances, from a saved checkpoint."""

from __future__ import annotations

import logging
import os
from typing import Any, Dict

import pandas as pd

from core.datasets import load_instances, read_canonical_header
from core.errors import DimensionError
from core.metrics import predicted_labels

from .fit_service import FitService
from .progress_service import progress_service

logger = logging.getLogger(__name__)


class PredictService:
    @staticmethod
    def dry_run(checkpoint: str, instances: str) -> Dict[str, Any]:
        learner, _ = FitService.load_checkpoint(checkpoint)
        header = read_canonical_header(instances)
        if header["dim"] != learner.dim:
            raise DimensionError(learner.dim, int(header["dim"]))  # type: ignore[arg-type]
        return {"model": learner.name, "instances": header}

    @staticmethod
    def run_predict(job_id: str, checkpoint: str, instances: str, output: str) -> Dict[str, Any]:
        """Write one row per instance: index, p_0..p_{K-1}, argmax label.

        Raises:
            CheckpointError: Unreadable or incompatible checkpoint.
            DimensionError: Instance D differs from the model's.
        """
        progress_service.create_job(job_id)
        try:
            learner, _ = FitService.load_checkpoint(checkpoint)
            rows = load_instances(instances, learner.dim)
            progress_service.send_event(
                job_id, "log", {"message": f"Predicting {len(rows)} instances with {learner.name}"}
            )
            proba = learner.predict_proba(rows.features)
            frame = pd.DataFrame(proba, columns=[f"p_{k}" for k in range(learner.n_classes)])
            frame.insert(0, "index", range(len(rows)))
            frame["label"] = predicted_labels(proba) if len(rows) else []

            parent = os.path.dirname(os.path.abspath(output))
            os.makedirs(parent, exist_ok=True)
            frame.to_csv(output, index=False, lineterminator="\n")

            result = {"instances": len(rows), "output": output}
            progress_service.send_event(
                job_id, "complete", {"message": f"Wrote {len(rows)} predictions to {output}", **result}
            )
            return result

        except Exception as e:
            progress_service.send_event(job_id, "error", {"message": str(e)})
            raise
        finally:
            progress_service.close(job_id)
