"""Asynchronous job lifecycle: submit/poll with latest-wins cancellation.

At most one job runs per runner (one runner per session). Submitting while
a job is queued or running cancels it; the cancelled job's result, if the
backend still produces one, is dropped. Callers receive a job id and poll,
wait, or pass a terminal callback.
"""

from __future__ import annotations

import threading
from typing import Callable, Optional

import numpy as np

from ..errors import Cancelled
from .backends import GenerationBackend
from .jobs import GenerationJob, JobStatus

TerminalCallback = Callable[[GenerationJob], None]


class JobRunner:
    def __init__(self, backend: GenerationBackend):
        self.backend = backend
        self._jobs: dict[str, GenerationJob] = {}
        self._events: dict[str, threading.Event] = {}
        self._active: Optional[str] = None
        self._lock = threading.Lock()

    @property
    def active_job_id(self) -> Optional[str]:
        with self._lock:
            return self._active

    def get(self, job_id: str) -> GenerationJob:
        with self._lock:
            return self._jobs[job_id]

    def submit(self, job: GenerationJob, on_terminal: Optional[TerminalCallback] = None) -> str:
        with self._lock:
            if self._active is not None:
                prev = self._jobs[self._active]
                if not prev.status.terminal:
                    prev.status = JobStatus.CANCELLED
                    prev.error = f"superseded by job {job.job_id}"
                    self._events[prev.job_id].set()
            job.status = JobStatus.QUEUED
            self._jobs[job.job_id] = job
            self._events[job.job_id] = threading.Event()
            self._active = job.job_id
        worker = threading.Thread(
            target=self._run, args=(job, on_terminal), name=f"genjob-{job.job_id[:8]}", daemon=True
        )
        worker.start()
        return job.job_id

    def _run(self, job: GenerationJob, on_terminal: Optional[TerminalCallback]):
        with self._lock:
            started = not job.status.terminal  # may have been cancelled before starting
            if started:
                job.status = JobStatus.RUNNING
        if started:
            try:
                result = self.backend.generate(job)
            except Exception as exc:
                with self._lock:
                    if not job.status.terminal:
                        job.status = JobStatus.FAILED
                        job.error = str(exc)
            else:
                with self._lock:
                    if not job.status.terminal:
                        job.result = result
                        job.status = JobStatus.DONE
        # callback runs before the event fires, so wait() callers observe
        # the callback's effects
        self._notify(job, on_terminal)
        with self._lock:
            self._events[job.job_id].set()
            if self._active == job.job_id:
                self._active = None

    def _notify(self, job: GenerationJob, on_terminal: Optional[TerminalCallback]):
        if on_terminal is not None:
            on_terminal(job)

    def poll(self, job_id: str) -> tuple[JobStatus, Optional[np.ndarray]]:
        job = self.get(job_id)
        return job.status, job.result

    def wait(self, job_id: str, timeout: float = 60.0) -> GenerationJob:
        event = self._events[job_id]
        if not event.wait(timeout):
            raise TimeoutError(f"job {job_id} did not reach a terminal state in {timeout}s")
        return self.get(job_id)

    def cancel(self, job_id: str):
        with self._lock:
            job = self._jobs[job_id]
            if not job.status.terminal:
                job.status = JobStatus.CANCELLED
                job.error = "cancelled by caller"
                self._events[job_id].set()
                if self._active == job_id:
                    self._active = None

    def require_done(self, job_id: str) -> np.ndarray:
        job = self.get(job_id)
        if job.status is JobStatus.CANCELLED:
            raise Cancelled(job_id)
        if job.status is not JobStatus.DONE or job.result is None:
            raise RuntimeError(f"job {job_id} is {job.status.value}: {job.error}")
        return job.result
