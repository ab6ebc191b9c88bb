"""Generation backends: in-process mock and the HTTP adapter client.

Transport failures are retried up to the profile's max_retries; a
completed generation is never retried. HTTP errors other than transport
failures surface as BackendRejected with the response detail.
"""

from __future__ import annotations

import base64
from typing import Protocol

import numpy as np

from .. import rasters
from ..errors import BackendRejected, BackendUnreachable
from .jobs import IMG2IMG_PATH, BackendProfile, GenerationJob, job_to_payload
from .mock import mock_generate


class GenerationBackend(Protocol):
    def generate(self, job: GenerationJob) -> np.ndarray: ...


class MockBackend:
    """Deterministic in-process backend; see mock.mock_generate."""

    def generate(self, job: GenerationJob) -> np.ndarray:
        return mock_generate(job)


class HttpBackend:
    """Client for a Stable-Diffusion-WebUI-compatible HTTP surface."""

    def __init__(self, profile: BackendProfile):
        self.profile = profile

    def generate(self, job: GenerationJob) -> np.ndarray:
        import httpx

        url = self.profile.base_url.rstrip("/") + IMG2IMG_PATH
        payload = job_to_payload(job, self.profile)
        attempts = self.profile.max_retries + 1
        last_error = ""
        for _ in range(attempts):
            try:
                resp = httpx.post(url, json=payload, timeout=self.profile.timeout_s)
            except httpx.TransportError as exc:
                last_error = str(exc)
                continue
            if resp.status_code != 200:
                raise BackendRejected(resp.text, resp.status_code)
            body = resp.json()
            if not body.get("images"):
                raise BackendRejected("response carries no images")
            return rasters.ensure_rgb(
                rasters.decode_image(base64.b64decode(body["images"][0]))
            )
        raise BackendUnreachable(url, attempts, last_error)
