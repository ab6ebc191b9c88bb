"""Deterministic mock generation backend.

The mock is a pure function of (assembled prompt text, seed, mask, init):
preserved pixels are copied verbatim from the init image; generate pixels
get a seeded pseudo-random pattern keyed by the prompt digest. When depth
or canny conditioning is present, the pattern is modulated by the init
image's luminance, making "structure preservation" mechanically checkable
(a black init region stays black, a bright region carries the pattern).

The same core serves in-process calls and the loopback HTTP app, which
speaks the adapter surface defined in adapter_schema.json.
"""

from __future__ import annotations

import hashlib
import importlib.resources
import json
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Request

from .. import rasters
from .jobs import (
    ControlKind,
    GenerationJob,
    decode_payload_images,
    payload_control_kinds,
)


def _load_adapter_schema() -> dict:
    text = importlib.resources.files("scenemeld.generation").joinpath(
        "adapter_schema.json"
    ).read_text("utf-8")
    return json.loads(text)


ADAPTER_SCHEMA = _load_adapter_schema()


def mock_generate_raw(
    init: np.ndarray,
    mask: Optional[np.ndarray],
    prompt_text: str,
    seed: int,
    structure_guided: bool,
) -> np.ndarray:
    init = rasters.ensure_rgb(init)
    h, w = init.shape[:2]
    prompt_key = int.from_bytes(
        hashlib.sha256(prompt_text.encode("utf-8")).digest()[:8], "big"
    )
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, prompt_key])))
    pattern = rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
    if structure_guided:
        luma = rasters.luminance_u8(init).astype(np.uint16)
        pattern = ((pattern.astype(np.uint16) * luma[:, :, None]) // 255).astype(np.uint8)
    out = pattern
    if mask is not None:
        keep = mask == 0
        out = out.copy()
        out[keep] = init[keep]
    return out


def mock_generate(job: GenerationJob) -> np.ndarray:
    guided = any(
        unit.kind in (ControlKind.DEPTH, ControlKind.CANNY) for unit in job.control_units
    )
    return mock_generate_raw(
        init=job.init_image,
        mask=job.mask,
        prompt_text=job.prompt.assembled,
        seed=job.seed,
        structure_guided=guided,
    )


def mock_generate_payload(payload: dict) -> np.ndarray:
    """HTTP-side twin of mock_generate, reconstructed from the request doc."""
    init, mask = decode_payload_images(payload)
    kinds = payload_control_kinds(payload)
    guided = ControlKind.DEPTH in kinds or ControlKind.CANNY in kinds
    return mock_generate_raw(
        init=init,
        mask=mask,
        prompt_text=payload["prompt"],
        seed=payload["seed"],
        structure_guided=guided,
    )


def create_mock_backend_app() -> FastAPI:
    """Loopback FastAPI app implementing the adapter surface."""
    import base64

    import jsonschema

    app = FastAPI(title="scenemeld mock generation backend")

    @app.post("/sdapi/v1/img2img")
    async def img2img(request: Request):
        payload = await request.json()
        try:
            jsonschema.validate(payload, ADAPTER_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise HTTPException(status_code=422, detail=exc.message)
        image = mock_generate_payload(payload)
        encoded = base64.b64encode(rasters.encode_png(image)).decode("ascii")
        return {"images": [encoded], "parameters": {}, "info": "{}"}

    return app
