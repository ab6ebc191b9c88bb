"""Canonical 2.5D scene model: canvas, feeds, placements, prompts, layers.

A Scene is a value. Mutating operations elsewhere in the engine return new
snapshots via `dataclasses.replace`; nothing here mutates in place. The
session service is the single writer; all other modules only read
snapshots, so every function in this module is safe under concurrent
readers.

Scenes serialize to a versioned JSON document in which raster fields are
references (`sha256:<hex>` in-memory, relative PNG paths on disk). The
digest of a scene is the sha256 of its canonical document, so two scenes
with identical content always share a digest.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Optional, Union

import numpy as np

from . import rasters

SCENE_SCHEMA = "scenemeld/scene@1"

# Latent-space constraint of diffusion backends: generation dims must be
# divisible by this.
GEN_DIM_MULTIPLE = 8

# Layout clamp bounds for feed extents (normalized units). Scaled feeds may
# legitimately exceed the canvas, up to 2x its extent.
MIN_FEED_EXTENT = 0.02
MAX_FEED_EXTENT = 2.0


def half_up(x: float) -> int:
    """Round half away from zero toward +inf (0.5 -> 1, -0.5 -> 0)."""
    return math.floor(x + 0.5)


class SceneMode(str, enum.Enum):
    WEBCAM_INPAINT = "webcam_inpaint"
    CANVAS_IMG2IMG = "canvas_img2img"


class LayerRole(enum.Enum):
    """The five scene layers, staggered back to front at fixed depths.

    Depth never changes on-screen scale (orthographic contract): a layer's
    role only selects which render pass includes it and in what order.
    """

    FOREGROUND_OBJECTS = "foreground_objects"
    PERSON_VIDEOS = "person_videos"
    VIDEO_BACKGROUNDS = "video_backgrounds"
    BACKGROUND_MASKS = "background_masks"
    ENVIRONMENT = "environment"


# Back-to-front layer order per pass. The generation-input pass never sees
# persons or foreground objects; the live pass never sees the mask layer.
GENERATION_INPUT_LAYERS = (LayerRole.ENVIRONMENT, LayerRole.VIDEO_BACKGROUNDS)
LIVE_RENDER_LAYERS = (
    LayerRole.ENVIRONMENT,
    LayerRole.PERSON_VIDEOS,
    LayerRole.FOREGROUND_OBJECTS,
)


@dataclass(frozen=True)
class Canvas:
    """Render canvas plus the (smaller) resolution generation runs at."""

    width_px: int = 1280
    height_px: int = 720
    gen_width_px: int = 1024
    gen_height_px: int = 576

    def violations(self) -> list[str]:
        out = []
        for name in ("width_px", "height_px", "gen_width_px", "gen_height_px"):
            if getattr(self, name) <= 0:
                out.append(f"canvas.{name}: must be a positive integer")
        if self.gen_width_px % GEN_DIM_MULTIPLE or self.gen_height_px % GEN_DIM_MULTIPLE:
            out.append(
                f"canvas.gen dims: {self.gen_width_px}x{self.gen_height_px} "
                f"must each be divisible by {GEN_DIM_MULTIPLE}"
            )
        if min(self.height_px, self.gen_height_px) > 0 and min(self.width_px, self.gen_width_px) > 0:
            canvas_ar = self.width_px / self.height_px
            gen_ar = self.gen_width_px / self.gen_height_px
            if abs(gen_ar - canvas_ar) > 0.005 * canvas_ar:
                out.append(
                    f"canvas.aspect: generation aspect {gen_ar:.4f} deviates from "
                    f"canvas aspect {canvas_ar:.4f} by more than 0.5%"
                )
        return out


@dataclass(frozen=True)
class NormRect:
    """Axis-aligned rectangle in normalized canvas coordinates.

    Origin top-left, x right, y down; (cx, cy) is the center. Rects may
    extend past the canvas; rendering clips.
    """

    cx: float
    cy: float
    w: float
    h: float

    def scaled_about_center(self, factor: float) -> "NormRect":
        return NormRect(self.cx, self.cy, self.w * factor, self.h * factor)

    def intersects(self, other: "NormRect") -> bool:
        return (
            abs(self.cx - other.cx) * 2 < self.w + other.w
            and abs(self.cy - other.cy) * 2 < self.h + other.h
        )


PixelRect = tuple[int, int, int, int]


def to_pixels_wh(rect: NormRect, width_px: int, height_px: int) -> PixelRect:
    """Convert a NormRect to an integer pixel rect (x, y, w, h).

    Rounds half-up, performs no clipping (coordinates may be out of
    bounds), and keeps w/h >= 1 whenever the normalized extent is > 0.
    Monotone in each of cx, cy, w, h.
    """
    x = half_up((rect.cx - rect.w / 2.0) * width_px)
    y = half_up((rect.cy - rect.h / 2.0) * height_px)
    w = half_up(rect.w * width_px)
    h = half_up(rect.h * height_px)
    if rect.w > 0:
        w = max(w, 1)
    if rect.h > 0:
        h = max(h, 1)
    return (x, y, w, h)


def to_pixels(rect: NormRect, canvas: Canvas) -> PixelRect:
    return to_pixels_wh(rect, canvas.width_px, canvas.height_px)


def from_pixels(px: PixelRect, width_px: int, height_px: int) -> NormRect:
    x, y, w, h = px
    return NormRect(
        cx=(x + w / 2.0) / width_px,
        cy=(y + h / 2.0) / height_px,
        w=w / width_px,
        h=h / height_px,
    )


def clip_rect(px: PixelRect, width_px: int, height_px: int) -> Optional[PixelRect]:
    """Intersect a pixel rect with the canvas; None when empty."""
    x, y, w, h = px
    x0, y0 = max(x, 0), max(y, 0)
    x1, y1 = min(x + w, width_px), min(y + h, height_px)
    if x1 <= x0 or y1 <= y0:
        return None
    return (x0, y0, x1 - x0, y1 - y0)


@dataclass(frozen=True)
class FeedPlacement:
    """One participant's video rectangle on the canvas.

    `preservation` is the per-user background slider: 0 preserves no
    background pixels, 1 preserves the full feed rect. `live` selects live
    frames vs the frozen first frame in the live render; generation always
    uses the frozen first frame.
    """

    feed_id: str
    rect: NormRect
    z_rank: int
    preservation: float = 0.5
    live: bool = True


@dataclass(frozen=True)
class ForegroundObject:
    """A salient-object cutout extracted from the environment raster.

    The mask is canvas-aligned single-channel uint8; nonzero pixels must lie
    within bbox (1 px dilation slack). `anchor` is the normalized placement
    point automatic layout seats feeds at; it always lies inside bbox.
    """

    object_id: str
    class_label: str
    mask: np.ndarray
    bbox: NormRect
    anchor: tuple[float, float]
    occupied_by: Optional[str] = None


Seed = Union[int, str]  # 64-bit integer or the literal "random"

RANDOM_SEED = "random"


@dataclass(frozen=True)
class Scene:
    """Authoritative 2.5D composition state.

    In WEBCAM_INPAINT mode the generation input ignores any environment
    image; in CANVAS_IMG2IMG mode the environment (or uploaded prior) is the
    generation input. `environment` is RGBA at canvas size, or None.
    """

    canvas: Canvas = field(default_factory=Canvas)
    feeds: tuple[FeedPlacement, ...] = ()
    environment: Optional[np.ndarray] = None
    foreground: tuple[ForegroundObject, ...] = ()
    mode: SceneMode = SceneMode.WEBCAM_INPAINT
    activity_prompt: str = ""
    theme_prompt: str = ""
    prompt_strength: float = 0.5
    seed: Seed = RANDOM_SEED

    def feed(self, feed_id: str) -> Optional[FeedPlacement]:
        for f in self.feeds:
            if f.feed_id == feed_id:
                return f
        return None

    def with_feed(self, placement: FeedPlacement) -> "Scene":
        """Replace (or append) the placement with the same feed_id."""
        out = []
        found = False
        for f in self.feeds:
            if f.feed_id == placement.feed_id:
                out.append(placement)
                found = True
            else:
                out.append(f)
        if not found:
            out.append(placement)
        return replace(self, feeds=tuple(out))


def empty_scene(canvas: Canvas | None = None) -> Scene:
    return Scene(canvas=canvas or Canvas())


# ---------------------------------------------------------------------------
# validation


def validate_scene(scene: Scene) -> list[str]:
    """Check every type invariant; violations are data, not failures."""
    out = list(scene.canvas.violations())

    seen_ranks: dict[int, str] = {}
    for f in scene.feeds:
        prefix = f"feeds[{f.feed_id}]"
        r = f.rect
        if not (0.0 <= r.cx <= 1.0 and 0.0 <= r.cy <= 1.0):
            out.append(f"{prefix}.rect: center ({r.cx}, {r.cy}) outside [0,1]")
        if not (0.0 < r.w <= MAX_FEED_EXTENT and 0.0 < r.h <= MAX_FEED_EXTENT):
            out.append(f"{prefix}.rect: extent ({r.w}, {r.h}) outside (0, {MAX_FEED_EXTENT}]")
        if not (0.0 <= f.preservation <= 1.0):
            out.append(f"{prefix}.preservation: {f.preservation} outside range [0,1]")
        if f.z_rank in seen_ranks:
            out.append(
                f"{prefix}.z_rank: {f.z_rank} duplicates feed {seen_ranks[f.z_rank]!r} "
                "(z_rank must be unique per feed)"
            )
        else:
            seen_ranks[f.z_rank] = f.feed_id

    if scene.environment is not None:
        eh, ew = scene.environment.shape[:2]
        if (ew, eh) != (scene.canvas.width_px, scene.canvas.height_px):
            out.append(
                f"environment: {ew}x{eh} does not match canvas "
                f"{scene.canvas.width_px}x{scene.canvas.height_px}"
            )
        if scene.environment.ndim != 3 or scene.environment.shape[2] != 4:
            out.append("environment: must be RGBA")

    for obj in scene.foreground:
        prefix = f"foreground[{obj.object_id}]"
        if scene.environment is None:
            out.append(f"{prefix}: foreground objects require an environment image")
            break
        mh, mw = obj.mask.shape[:2]
        if (mw, mh) != (scene.canvas.width_px, scene.canvas.height_px):
            out.append(f"{prefix}.mask: {mw}x{mh} not canvas-aligned")
            continue
        bx, by, bw, bh = to_pixels(obj.bbox, scene.canvas)
        ys, xs = np.nonzero(obj.mask)
        if len(xs):
            # 1 px dilation slack around the bbox
            if (
                xs.min() < bx - 1
                or ys.min() < by - 1
                or xs.max() > bx + bw
                or ys.max() > by + bh
            ):
                out.append(f"{prefix}.mask: nonzero pixels escape bbox (+1px slack)")
        ax, ay = obj.anchor
        if not (
            obj.bbox.cx - obj.bbox.w / 2 <= ax <= obj.bbox.cx + obj.bbox.w / 2
            and obj.bbox.cy - obj.bbox.h / 2 <= ay <= obj.bbox.cy + obj.bbox.h / 2
        ):
            out.append(f"{prefix}.anchor: ({ax}, {ay}) lies outside bbox")

    if not (0.0 <= scene.prompt_strength <= 1.0):
        out.append(f"prompt_strength: {scene.prompt_strength} outside range [0,1]")
    if scene.seed != RANDOM_SEED and not isinstance(scene.seed, int):
        out.append(f"seed: {scene.seed!r} is neither an integer nor 'random'")

    return out


# ---------------------------------------------------------------------------
# serialization

RasterRef = Callable[[np.ndarray], str]
RasterGet = Callable[[str], np.ndarray]


def _rect_doc(r: NormRect) -> dict:
    return {"cx": r.cx, "cy": r.cy, "w": r.w, "h": r.h}


def _rect_from(d: dict) -> NormRect:
    return NormRect(d["cx"], d["cy"], d["w"], d["h"])


def scene_to_doc(scene: Scene, raster_ref: RasterRef) -> dict:
    """Serialize to a JSON-able document; rasters handed to `raster_ref`."""
    return {
        "schema": SCENE_SCHEMA,
        "canvas": {
            "width_px": scene.canvas.width_px,
            "height_px": scene.canvas.height_px,
            "gen_width_px": scene.canvas.gen_width_px,
            "gen_height_px": scene.canvas.gen_height_px,
        },
        "mode": scene.mode.value,
        "activity_prompt": scene.activity_prompt,
        "theme_prompt": scene.theme_prompt,
        "prompt_strength": scene.prompt_strength,
        "seed": scene.seed,
        "feeds": [
            {
                "feed_id": f.feed_id,
                "rect": _rect_doc(f.rect),
                "z_rank": f.z_rank,
                "preservation": f.preservation,
                "live": f.live,
            }
            for f in scene.feeds
        ],
        "environment": raster_ref(scene.environment) if scene.environment is not None else None,
        "foreground": [
            {
                "object_id": o.object_id,
                "class_label": o.class_label,
                "mask": raster_ref(o.mask),
                "bbox": _rect_doc(o.bbox),
                "anchor": [o.anchor[0], o.anchor[1]],
                "occupied_by": o.occupied_by,
            }
            for o in scene.foreground
        ],
    }


def scene_from_doc(doc: dict, raster_get: RasterGet) -> Scene:
    if doc.get("schema") != SCENE_SCHEMA:
        from .errors import SchemaVersionMismatch

        raise SchemaVersionMismatch(str(doc.get("schema")), SCENE_SCHEMA)
    c = doc["canvas"]
    canvas = Canvas(c["width_px"], c["height_px"], c["gen_width_px"], c["gen_height_px"])
    feeds = tuple(
        FeedPlacement(
            feed_id=f["feed_id"],
            rect=_rect_from(f["rect"]),
            z_rank=f["z_rank"],
            preservation=f["preservation"],
            live=f["live"],
        )
        for f in doc["feeds"]
    )
    env = raster_get(doc["environment"]) if doc["environment"] is not None else None
    foreground = tuple(
        ForegroundObject(
            object_id=o["object_id"],
            class_label=o["class_label"],
            mask=raster_get(o["mask"]),
            bbox=_rect_from(o["bbox"]),
            anchor=(o["anchor"][0], o["anchor"][1]),
            occupied_by=o["occupied_by"],
        )
        for o in doc["foreground"]
    )
    return Scene(
        canvas=canvas,
        feeds=feeds,
        environment=env,
        foreground=foreground,
        mode=SceneMode(doc["mode"]),
        activity_prompt=doc["activity_prompt"],
        theme_prompt=doc["theme_prompt"],
        prompt_strength=doc["prompt_strength"],
        seed=doc["seed"],
    )


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def scene_digest(scene: Scene) -> str:
    """Content digest: canonical document with rasters as sha256 refs."""
    doc = scene_to_doc(scene, lambda arr: "sha256:" + rasters.raster_digest(arr))
    return hashlib.sha256(canonical_json(doc).encode("utf-8")).hexdigest()


def scene_equal(a: Scene, b: Scene) -> bool:
    return scene_digest(a) == scene_digest(b)


# ---------------------------------------------------------------------------
# scene file format: <name>.json plus a rasters/ directory of PNGs


def save_scene(scene: Scene, path: str | Path) -> Path:
    """Write `<path>` (JSON) with rasters as relative PNG references."""
    path = Path(path)
    raster_dir = path.parent / "rasters"
    written: dict[str, str] = {}

    def ref(arr: np.ndarray) -> str:
        digest = rasters.raster_digest(arr)
        if digest not in written:
            raster_dir.mkdir(parents=True, exist_ok=True)
            rel = f"rasters/{digest}.png"
            (path.parent / rel).write_bytes(rasters.encode_png(arr))
            written[digest] = rel
        return written[digest]

    doc = scene_to_doc(scene, ref)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_scene(path: str | Path) -> Scene:
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))

    def get(ref: str) -> np.ndarray:
        return rasters.decode_image((path.parent / ref).read_bytes())

    return scene_from_doc(doc, get)


def sorted_by_z(feeds: Iterable[FeedPlacement]) -> list[FeedPlacement]:
    return sorted(feeds, key=lambda f: f.z_rank)
