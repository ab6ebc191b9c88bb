"""Person/background splitting and salient-object extraction.

Matting is pluggable: an alpha channel supplied with the frame (the
deterministic test path), chroma keying (zero-dependency live path), or an
external HTTP matting service. Whatever the method, the person-occluded
hole in the background is filled so downstream blending never sees person
pixels.

Object segmentation of generated environments is likewise a backend: an
external HTTP service in production, a digest-keyed mock for tests and
offline runs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from . import rasters
from .errors import NoAlphaChannel, ServiceUnavailable
from .scene import ForegroundObject, NormRect, from_pixels

DEFAULT_ALLOWLIST = frozenset(
    {"chair", "couch", "table", "desk", "bench", "potted plant", "bed"}
)
CONFIDENCE_THRESHOLD = 0.5

# Occlusion-fill fallback loop bounds
FILL_MAX_ITERATIONS = 500
FILL_TOLERANCE = 1.0


@dataclass(frozen=True)
class MattedFrame:
    """A feed frame split into person and background layers.

    `person_alpha` is single-channel (255 = person). `background` is the
    frame with the person hole replaced by filled content; it never
    contains source pixels from person regions. `fill_low_confidence` is
    set when the fallback fill had no background pixels to extend from.
    """

    color: np.ndarray
    person_alpha: np.ndarray
    background: np.ndarray
    fill_low_confidence: bool = False


@dataclass(frozen=True)
class SegmentationResult:
    instances: tuple[tuple[str, np.ndarray, float], ...]  # (class_label, mask, confidence)


# ---------------------------------------------------------------------------
# matting methods


@dataclass(frozen=True)
class AlphaChannel:
    """Use the frame's own alpha channel as the person matte."""


@dataclass(frozen=True)
class ChromaKey:
    """Pixels within `tolerance` (euclidean RGB distance) of `color` are
    background; everything else is person."""

    color: tuple[int, int, int] = (0, 255, 0)
    tolerance: float = 80.0


@dataclass(frozen=True)
class VisionServiceProfile:
    base_url: str
    timeout_s: float = 10.0


@dataclass(frozen=True)
class ExternalService:
    profile: VisionServiceProfile


MatteMethod = Union[AlphaChannel, ChromaKey, ExternalService]


# ---------------------------------------------------------------------------
# occlusion fill strategies


@dataclass(frozen=True)
class BlurExtend:
    """Diffusion-free fallback: iterative boundary-color diffusion."""

    max_iterations: int = FILL_MAX_ITERATIONS
    tolerance: float = FILL_TOLERANCE


@dataclass(frozen=True)
class BackendInpaint:
    """Fill the hole with a generation backend inpaint job.

    `generate` receives the job and returns the result image; the session
    service wires it to its configured backend.
    """

    generate: Callable  # GenerationJob -> np.ndarray
    prompt: str = "seamless continuation of the background"


FillStrategy = Union[BlurExtend, BackendInpaint]


def _blur_extend(color: np.ndarray, hole: np.ndarray, strategy: BlurExtend) -> tuple[np.ndarray, bool]:
    out = rasters.ensure_rgb(color).astype(np.float64).copy()
    if hole.all():
        # no background visible at all: nothing to extend from
        gray = np.full_like(out, rasters.NEUTRAL_GRAY)
        return gray.astype(np.uint8), True
    if not hole.any():
        return out.astype(np.uint8), False

    seed = out[~hole].mean(axis=0)
    out[hole] = seed
    for _ in range(strategy.max_iterations):
        padded = np.pad(out, ((1, 1), (1, 1), (0, 0)), mode="edge")
        neighbors = (
            padded[:-2, 1:-1] + padded[2:, 1:-1] + padded[1:-1, :-2] + padded[1:-1, 2:]
        ) / 4.0
        delta = np.abs(neighbors[hole] - out[hole]).max()
        out[hole] = neighbors[hole]
        if delta < strategy.tolerance:
            break
    filled = rasters.ensure_rgb(color).copy()
    filled[hole] = np.clip(np.rint(out[hole]), 0, 255).astype(np.uint8)
    return filled, False


def fill_occlusion(
    color: np.ndarray, person_alpha: np.ndarray, strategy: FillStrategy
) -> tuple[np.ndarray, bool]:
    """Fill the person-occluded background hole.

    Returns (background RGB, low_confidence). Pixels outside the hole are
    never altered. The fallback flags low confidence when the whole frame
    is person (nothing to extend from).
    """
    hole = person_alpha > 0
    if isinstance(strategy, BlurExtend):
        return _blur_extend(color, hole, strategy)

    from .generation.jobs import inpaint_job_for_raster

    mask = np.where(hole, 255, 0).astype(np.uint8)
    job = inpaint_job_for_raster(rasters.ensure_rgb(color), mask, strategy.prompt)
    result = strategy.generate(job)
    filled = rasters.ensure_rgb(color).copy()
    filled[hole] = rasters.ensure_rgb(result)[hole]
    return filled, False


def matte_person(
    frame: np.ndarray,
    method: MatteMethod,
    fill: FillStrategy | None = None,
) -> MattedFrame:
    """Split a frame into person and hole-filled background layers."""
    fill = fill or BlurExtend()
    if isinstance(method, AlphaChannel):
        if frame.ndim != 3 or frame.shape[2] != 4:
            raise NoAlphaChannel("frame has no alpha channel")
        color = frame[:, :, :3].copy()
        alpha = frame[:, :, 3].copy()
    elif isinstance(method, ChromaKey):
        color = rasters.ensure_rgb(frame)
        key = np.array(method.color, dtype=np.float64)
        dist = np.sqrt(((color.astype(np.float64) - key) ** 2).sum(axis=2))
        alpha = np.where(dist <= method.tolerance, 0, 255).astype(np.uint8)
    elif isinstance(method, ExternalService):
        color = rasters.ensure_rgb(frame)
        alpha = _external_matte(color, method.profile)
    else:
        raise TypeError(f"unknown matting method {method!r}")

    background, low_conf = fill_occlusion(color, alpha, fill)
    return MattedFrame(
        color=color, person_alpha=alpha, background=background, fill_low_confidence=low_conf
    )


def _external_matte(color: np.ndarray, profile: VisionServiceProfile) -> np.ndarray:
    import base64

    import httpx

    payload = {"image": base64.b64encode(rasters.encode_png(color)).decode("ascii")}
    try:
        resp = httpx.post(
            profile.base_url.rstrip("/") + "/v1/matte", json=payload, timeout=profile.timeout_s
        )
    except httpx.HTTPError as exc:
        raise ServiceUnavailable(profile.base_url, str(exc)) from exc
    if resp.status_code != 200:
        raise ServiceUnavailable(profile.base_url, f"status {resp.status_code}")
    alpha = rasters.decode_image(base64.b64decode(resp.json()["alpha"]))
    if alpha.ndim == 3:
        alpha = alpha[:, :, 0]
    return alpha


# ---------------------------------------------------------------------------
# object segmentation


class MockSegmenter:
    """Digest-keyed fixture segmenter.

    Fixtures registered for an image digest are returned verbatim. With
    `synthesize=True`, unknown digests get a deterministic set of furniture
    instances derived from the digest, so offline pipelines always have
    occluders to lay users out behind.
    """

    def __init__(self, synthesize: bool = False):
        self.synthesize = synthesize
        self._fixtures: dict[str, list[tuple[str, np.ndarray, float]]] = {}

    def register(self, image: np.ndarray, instances: Sequence[tuple[str, np.ndarray, float]]):
        self._fixtures[rasters.raster_digest(image)] = list(instances)

    def segment(self, image: np.ndarray) -> list[tuple[str, np.ndarray, float]]:
        digest = rasters.raster_digest(image)
        if digest in self._fixtures:
            return list(self._fixtures[digest])
        if not self.synthesize:
            return []
        return self._synthesize(image, digest)

    def _synthesize(self, image: np.ndarray, digest: str) -> list[tuple[str, np.ndarray, float]]:
        h, w = image.shape[:2]
        rng = np.random.Generator(np.random.PCG64(int(digest[:12], 16)))
        count = int(rng.integers(2, 4))
        labels = ["chair", "table", "chair", "couch"]
        out = []
        for i in range(count):
            ow = int(w * (0.12 + 0.06 * rng.random()))
            oh = int(h * (0.18 + 0.08 * rng.random()))
            x0 = int((w - ow) * (0.1 + 0.8 * (i + rng.random() * 0.5) / count))
            y0 = int(h * (0.55 + 0.15 * rng.random()))
            mask = np.zeros((h, w), dtype=np.uint8)
            mask[y0 : min(y0 + oh, h), x0 : min(x0 + ow, w)] = 255
            if mask.any():
                out.append((labels[i % len(labels)], mask, 0.9))
        return out


class ExternalSegmenter:
    """HTTP adapter for an object-segmentation service (80-class everyday
    vocabulary; see vision_adapter_schema.json for the wire format)."""

    def __init__(self, profile: VisionServiceProfile):
        self.profile = profile

    def segment(self, image: np.ndarray) -> list[tuple[str, np.ndarray, float]]:
        import base64

        import httpx

        payload = {"image": base64.b64encode(rasters.encode_png(image)).decode("ascii")}
        try:
            resp = httpx.post(
                self.profile.base_url.rstrip("/") + "/v1/segment",
                json=payload,
                timeout=self.profile.timeout_s,
            )
        except httpx.HTTPError as exc:
            raise ServiceUnavailable(self.profile.base_url, str(exc)) from exc
        if resp.status_code != 200:
            raise ServiceUnavailable(self.profile.base_url, f"status {resp.status_code}")
        out = []
        for inst in resp.json()["instances"]:
            mask = rasters.decode_image(base64.b64decode(inst["mask"]))
            if mask.ndim == 3:
                mask = mask[:, :, 0]
            out.append((inst["label"], mask, float(inst["confidence"])))
        return out


def segment_objects(
    environment: np.ndarray,
    allowlist: Iterable[str] = DEFAULT_ALLOWLIST,
    backend: MockSegmenter | ExternalSegmenter | None = None,
) -> SegmentationResult:
    """Detect allowlisted salient objects in a generated environment.

    Instances outside the allowlist or below the confidence threshold are
    dropped.
    """
    backend = backend or MockSegmenter()
    allowed = set(allowlist)
    kept = tuple(
        (label, mask, conf)
        for label, mask, conf in backend.segment(rasters.ensure_rgb(environment))
        if label in allowed and conf >= CONFIDENCE_THRESHOLD
    )
    return SegmentationResult(instances=kept)


def extract_foreground(
    environment: np.ndarray, seg: SegmentationResult
) -> list[ForegroundObject]:
    """Turn segmentation instances into foreground-layer objects.

    bbox is the tight box of the mask; the anchor sits at the horizontal
    center, one third down from the bbox top - the seat line where a feed
    placed behind the object appears seated.
    """
    h, w = environment.shape[:2]
    out = []
    for i, (label, mask, _conf) in enumerate(seg.instances):
        ys, xs = np.nonzero(mask)
        if not len(xs):
            continue
        x0, x1 = int(xs.min()), int(xs.max()) + 1
        y0, y1 = int(ys.min()), int(ys.max()) + 1
        bbox = from_pixels((x0, y0, x1 - x0, y1 - y0), w, h)
        anchor = (bbox.cx, bbox.cy - bbox.h / 2 + 0.33 * bbox.h)
        out.append(
            ForegroundObject(
                object_id=f"{label}-{i}",
                class_label=label,
                mask=mask.copy(),
                bbox=bbox,
                anchor=anchor,
            )
        )
    return out


def object_ids(objects: Sequence[ForegroundObject]) -> list[str]:
    return [o.object_id for o in objects]
