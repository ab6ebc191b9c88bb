from .backends import GenerationBackend, HttpBackend, MockBackend
from .jobs import (
    BackendProfile,
    ControlKind,
    ControlUnit,
    EditKind,
    GenerationJob,
    JobMode,
    JobStatus,
    RegionSpec,
    denoising_for_strength,
    job_to_payload,
    plan_img2img_job,
    plan_inpaint_job,
    plan_region_edit,
)
from .mock import ADAPTER_SCHEMA, create_mock_backend_app, mock_generate
from .runner import JobRunner

__all__ = [
    "ADAPTER_SCHEMA",
    "BackendProfile",
    "ControlKind",
    "ControlUnit",
    "EditKind",
    "GenerationBackend",
    "GenerationJob",
    "HttpBackend",
    "JobMode",
    "JobRunner",
    "JobStatus",
    "MockBackend",
    "RegionSpec",
    "create_mock_backend_app",
    "denoising_for_strength",
    "job_to_payload",
    "mock_generate",
    "plan_img2img_job",
    "plan_inpaint_job",
    "plan_region_edit",
]
