"""Per-job progress events: log, progress, complete, error."""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from typing import Any, Callable, Dict, List

logger = logging.getLogger(__name__)

Subscriber = Callable[["Event"], None]


@dataclass(frozen=True)
class Event:
    job_id: str
    event: str
    data: Dict[str, Any]


class ProgressService:
    def __init__(self) -> None:
        self.jobs: Dict[str, List[Event]] = {}
        self.subscribers: Dict[str, List[Subscriber]] = {}
        self._lock = threading.Lock()

    def create_job(self, job_id: str) -> None:
        """Create a new job and its event history."""
        with self._lock:
            self.jobs[job_id] = []

    def subscribe(self, job_id: str, callback: Subscriber) -> None:
        """Call `callback` for every later event of `job_id`."""
        with self._lock:
            self.subscribers.setdefault(job_id, []).append(callback)

    def send_event(self, job_id: str, event_type: str, data: Dict[str, Any]) -> None:
        """Record an event, forward it to the logger and to subscribers."""
        event = Event(job_id, event_type, data)
        with self._lock:
            if job_id in self.jobs:
                self.jobs[job_id].append(event)
            callbacks = list(self.subscribers.get(job_id, ()))

        message = data.get("message", "")
        if event_type == "error":
            logger.debug("Job %s failed: %s", job_id, message)
        elif event_type == "progress":
            logger.debug("[%s] %s", data.get("step", ""), message)
        elif message:
            logger.info("%s", message)

        for callback in callbacks:
            try:
                callback(event)
            except Exception as e:
                logger.warning("Progress subscriber failed: %s", e)

    def history(self, job_id: str) -> List[Event]:
        with self._lock:
            return list(self.jobs.get(job_id, ()))

    def close(self, job_id: str) -> None:
        """Forget a job's history and subscribers."""
        with self._lock:
            self.jobs.pop(job_id, None)
            self.subscribers.pop(job_id, None)


progress_service = ProgressService()
