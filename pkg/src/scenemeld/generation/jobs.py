"""Generation job planning: scene + prompt -> fully-resolved backend requests.

Planners are pure; they never mutate the scene. Results re-enter the scene
only through compositor.apply_generation_result.

Mode/control pairing is fixed: inpaint jobs carry exactly one inpaint
control unit, image-to-image jobs exactly depth + canny (both weight 1.0),
region edits carry none (grounding travels in the region block).
"""

from __future__ import annotations

import base64
import enum
import hashlib
import random
import uuid
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .. import rasters
from ..errors import DegenerateOutline, DimensionMismatch, NothingToGenerate
from ..prompting import ExpandedPrompt
from ..scene import RANDOM_SEED, NormRect, Scene, to_pixels_wh

IMG2IMG_PATH = "/sdapi/v1/img2img"

DEFAULT_NEGATIVE_PROMPT = "people, humans, faces, text, watermark"
DEFAULT_CFG_SCALE = 7.0

# Affine map from the prompt-strength slider to denoising strength.
DENOISE_MIN = 0.3
DENOISE_SPAN = 0.6

# Region outlines whose bbox covers less than this canvas fraction are
# rejected as degenerate.
MIN_REGION_AREA = 0.01

MAX_SEED = 2**63 - 1


class JobMode(str, enum.Enum):
    INPAINT = "inpaint"
    IMG2IMG = "img2img"
    REGION_EDIT = "region_edit"


class ControlKind(str, enum.Enum):
    INPAINT_CONTROL = "inpaint"
    DEPTH = "depth"
    CANNY = "canny"


class JobStatus(str, enum.Enum):
    QUEUED = "queued"
    RUNNING = "running"
    DONE = "done"
    FAILED = "failed"
    CANCELLED = "cancelled"

    @property
    def terminal(self) -> bool:
        return self in (JobStatus.DONE, JobStatus.FAILED, JobStatus.CANCELLED)


class EditKind(str, enum.Enum):
    ADD = "add"
    REMOVE = "remove"


@dataclass(frozen=True)
class ControlUnit:
    kind: ControlKind
    weight: float = 1.0
    input: str = "init_image"


# ControlNet model names per unit kind; configuration, not behavior.
CONTROL_MODELS = {
    ControlKind.INPAINT_CONTROL: "control_v11p_sd15_inpaint",
    ControlKind.DEPTH: "control_v11f1p_sd15_depth",
    ControlKind.CANNY: "control_v11p_sd15_canny",
}


@dataclass(frozen=True)
class BackendProfile:
    base_url: str = "http://127.0.0.1:7860"
    model_checkpoint_inpaint: str = "realistic_vision_v2.0-inpainting"
    model_checkpoint_base: str = "realistic_vision_v2.0"
    timeout_s: float = 120.0
    max_retries: int = 2


@dataclass(frozen=True)
class RegionSpec:
    phrase: str
    bbox: NormRect
    kind: EditKind


@dataclass
class GenerationJob:
    mode: JobMode
    init_image: np.ndarray
    prompt: ExpandedPrompt
    seed: int
    denoising_strength: float
    mask: Optional[np.ndarray] = None
    negative_prompt: str = DEFAULT_NEGATIVE_PROMPT
    cfg_scale: float = DEFAULT_CFG_SCALE
    control_units: tuple[ControlUnit, ...] = ()
    region: Optional[RegionSpec] = None
    job_id: str = field(default_factory=lambda: uuid.uuid4().hex)
    status: JobStatus = JobStatus.QUEUED
    result: Optional[np.ndarray] = None
    error: Optional[str] = None


def denoising_for_strength(prompt_strength: float) -> float:
    """Affine, monotone map: 0 -> 0.3, 0.5 -> 0.6, 1 -> 0.9."""
    return DENOISE_MIN + DENOISE_SPAN * prompt_strength


def resolve_seed(seed) -> int:
    if seed == RANDOM_SEED:
        return random.SystemRandom().randint(0, MAX_SEED)
    return int(seed)


def plan_inpaint_job(
    scene: Scene, init_and_mask: tuple[np.ndarray, np.ndarray], prompt: ExpandedPrompt
) -> GenerationJob:
    """Blend feed backgrounds: full-strength inpainting over the masked area."""
    init, mask = init_and_mask
    if not (mask == 255).any():
        raise NothingToGenerate("mask preserves every pixel")
    return GenerationJob(
        mode=JobMode.INPAINT,
        init_image=init,
        mask=mask,
        prompt=prompt,
        denoising_strength=1.0,
        seed=resolve_seed(scene.seed),
        control_units=(ControlUnit(ControlKind.INPAINT_CONTROL),),
    )


def plan_img2img_job(scene: Scene, prior: np.ndarray, prompt: ExpandedPrompt) -> GenerationJob:
    """Restyle a prior, structure-guided by depth + canny conditioning."""
    gh, gw = scene.canvas.gen_height_px, scene.canvas.gen_width_px
    if prior.shape[:2] != (gh, gw):
        raise DimensionMismatch((gh, gw), prior.shape[:2])
    return GenerationJob(
        mode=JobMode.IMG2IMG,
        init_image=prior,
        prompt=prompt,
        denoising_strength=denoising_for_strength(scene.prompt_strength),
        seed=resolve_seed(scene.seed),
        control_units=(ControlUnit(ControlKind.DEPTH), ControlUnit(ControlKind.CANNY)),
    )


def plan_region_edit(
    scene: Scene,
    region_outline: Sequence[tuple[float, float]],
    phrase: str,
    kind: EditKind,
) -> GenerationJob:
    """Regenerate one outlined region of the environment.

    Add grounds the phrase at the outline's bounding box; Remove sends an
    empty phrase so the surrounding context dominates.
    """
    if scene.environment is None:
        raise DegenerateOutline("region edits need an environment image")
    if len(region_outline) < 3:
        raise DegenerateOutline(f"outline has {len(region_outline)} points, need at least 3")
    xs = [p[0] for p in region_outline]
    ys = [p[1] for p in region_outline]
    w, h = max(xs) - min(xs), max(ys) - min(ys)
    if w * h < MIN_REGION_AREA:
        raise DegenerateOutline(f"outline bbox covers {w * h:.4f} of the canvas, below 1%")
    bbox = NormRect(cx=min(xs) + w / 2, cy=min(ys) + h / 2, w=w, h=h)

    gw, gh = scene.canvas.gen_width_px, scene.canvas.gen_height_px
    mask = np.zeros((gh, gw), dtype=np.uint8)
    bx, by, bw, bh = to_pixels_wh(bbox, gw, gh)
    x0, y0 = max(bx, 0), max(by, 0)
    x1, y1 = min(bx + bw, gw), min(by + bh, gh)
    if x1 > x0 and y1 > y0:
        mask[y0:y1, x0:x1] = 255

    init = rasters.resize_bilinear(rasters.ensure_rgb(scene.environment), gw, gh)
    text = phrase if kind is EditKind.ADD else ""
    return GenerationJob(
        mode=JobMode.REGION_EDIT,
        init_image=init,
        mask=mask,
        prompt=ExpandedPrompt.plain(text),
        denoising_strength=1.0,
        seed=resolve_seed(scene.seed),
        region=RegionSpec(phrase=text, bbox=bbox, kind=kind),
    )


def inpaint_job_for_raster(color: np.ndarray, mask: np.ndarray, prompt_text: str) -> GenerationJob:
    """Standalone inpaint job over an arbitrary raster (occlusion fill).

    The seed derives from the raster content, so filling the same frame is
    reproducible.
    """
    material = hashlib.sha256(rasters.raster_digest(color).encode()).hexdigest()
    return GenerationJob(
        mode=JobMode.INPAINT,
        init_image=color,
        mask=mask,
        prompt=ExpandedPrompt.plain(prompt_text),
        denoising_strength=1.0,
        seed=int(material[:15], 16),
        control_units=(ControlUnit(ControlKind.INPAINT_CONTROL),),
    )


# ---------------------------------------------------------------------------
# request adapter (see adapter_schema.json, version 1)


def _b64_png(arr: np.ndarray) -> str:
    return base64.b64encode(rasters.encode_png(arr)).decode("ascii")


def job_to_payload(job: GenerationJob, profile: BackendProfile) -> dict:
    """Serialize a job to the img2img request document."""
    height, width = job.init_image.shape[:2]
    checkpoint = (
        profile.model_checkpoint_inpaint
        if job.mode is JobMode.INPAINT
        else profile.model_checkpoint_base
    )
    payload = {
        "prompt": job.prompt.assembled,
        "negative_prompt": job.negative_prompt,
        "seed": job.seed,
        "width": width,
        "height": height,
        "denoising_strength": job.denoising_strength,
        "cfg_scale": job.cfg_scale,
        "init_images": [_b64_png(rasters.ensure_rgb(job.init_image))],
        "mask": _b64_png(job.mask) if job.mask is not None else None,
        "inpainting_fill": 1,
        "inpaint_full_res": False,
        "sampler_name": "DPM++ 2M",
        "steps": 30,
        "override_settings": {"sd_model_checkpoint": checkpoint},
        "alwayson_scripts": {
            "controlnet": {
                "args": [
                    {
                        "module": unit.kind.value,
                        "model": CONTROL_MODELS[unit.kind],
                        "weight": unit.weight,
                        "input": unit.input,
                    }
                    for unit in job.control_units
                ]
            }
        },
    }
    if job.region is not None:
        b = job.region.bbox
        payload["alwayson_scripts"]["region_edit"] = {
            "phrase": job.region.phrase,
            "bbox": [b.cx - b.w / 2, b.cy - b.h / 2, b.cx + b.w / 2, b.cy + b.h / 2],
            "kind": job.region.kind.value,
        }
    return payload


def payload_control_kinds(payload: dict) -> list[ControlKind]:
    units = payload.get("alwayson_scripts", {}).get("controlnet", {}).get("args", [])
    return [ControlKind(u["module"]) for u in units]


def decode_payload_images(payload: dict) -> tuple[np.ndarray, Optional[np.ndarray]]:
    init = rasters.decode_image(base64.b64decode(payload["init_images"][0]))
    mask = None
    if payload.get("mask"):
        mask = rasters.decode_image(base64.b64decode(payload["mask"]))
        if mask.ndim == 3:
            mask = mask[:, :, 0]
    return init, mask
