"""Engine configuration: backend profiles, LLM profile, matting method,
segmentation allowlist, slider mappings. Loaded from a YAML/JSON file with
environment-variable overrides for endpoints and secrets."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import yaml

from ..generation.jobs import (
    DEFAULT_NEGATIVE_PROMPT,
    DENOISE_MIN,
    DENOISE_SPAN,
    BackendProfile,
)
from ..prompting import LlmProfile
from ..scene import Canvas
from ..segmentation import DEFAULT_ALLOWLIST

ENV_BACKEND_URL = "SCENEMELD_BACKEND_URL"
ENV_LLM_ENDPOINT = "SCENEMELD_LLM_ENDPOINT"
ENV_LLM_API_KEY = "SCENEMELD_LLM_API_KEY"
ENV_SESSION_TOKEN = "SCENEMELD_SESSION_TOKEN"
ENV_VISION_URL = "SCENEMELD_VISION_URL"


@dataclass(frozen=True)
class MattingConfig:
    method: str = "alpha"  # alpha | chroma | external
    key_color: tuple[int, int, int] = (0, 255, 0)
    tolerance: float = 80.0
    service_url: str = ""


@dataclass(frozen=True)
class EngineConfig:
    canvas: Canvas = field(default_factory=Canvas)
    backend: BackendProfile = field(default_factory=BackendProfile)
    mock_backends: bool = True
    llm: Optional[LlmProfile] = None
    matting: MattingConfig = field(default_factory=MattingConfig)
    allowlist: frozenset[str] = DEFAULT_ALLOWLIST
    synthesize_segments: bool = False
    denoise_min: float = DENOISE_MIN
    denoise_span: float = DENOISE_SPAN
    negative_prompt: str = DEFAULT_NEGATIVE_PROMPT
    default_preservation: float = 0.5
    autosave_dir: Optional[str] = None
    session_token: Optional[str] = None


def _apply_env(config: EngineConfig) -> EngineConfig:
    if os.environ.get(ENV_BACKEND_URL):
        config = replace(
            config, backend=replace(config.backend, base_url=os.environ[ENV_BACKEND_URL])
        )
    if os.environ.get(ENV_LLM_ENDPOINT):
        llm = config.llm or LlmProfile(endpoint="")
        config = replace(config, llm=replace(llm, endpoint=os.environ[ENV_LLM_ENDPOINT]))
    if os.environ.get(ENV_LLM_API_KEY) and config.llm is not None:
        config = replace(config, llm=replace(config.llm, api_key=os.environ[ENV_LLM_API_KEY]))
    if os.environ.get(ENV_SESSION_TOKEN):
        config = replace(config, session_token=os.environ[ENV_SESSION_TOKEN])
    if os.environ.get(ENV_VISION_URL):
        config = replace(
            config, matting=replace(config.matting, service_url=os.environ[ENV_VISION_URL])
        )
    return config


def load_config(path: str | Path | None = None) -> EngineConfig:
    config = EngineConfig()
    if path is not None:
        doc = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        if "canvas" in doc:
            config = replace(config, canvas=Canvas(**doc["canvas"]))
        if "backend" in doc:
            config = replace(config, backend=BackendProfile(**doc["backend"]))
        if "llm" in doc:
            config = replace(config, llm=LlmProfile(**doc["llm"]))
        if "matting" in doc:
            m = dict(doc["matting"])
            if "key_color" in m:
                m["key_color"] = tuple(m["key_color"])
            config = replace(config, matting=MattingConfig(**m))
        if "allowlist" in doc:
            config = replace(config, allowlist=frozenset(doc["allowlist"]))
        for key in (
            "mock_backends",
            "synthesize_segments",
            "denoise_min",
            "denoise_span",
            "negative_prompt",
            "default_preservation",
            "autosave_dir",
            "session_token",
        ):
            if key in doc:
                config = replace(config, **{key: doc[key]})
    return _apply_env(config)
