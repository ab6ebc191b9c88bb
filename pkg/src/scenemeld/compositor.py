"""Raster pipelines over scene snapshots.

Two passes exist, mirroring the layer roles:

* generation-input pass: environment (or a blank) -> video backgrounds,
  plus a single-channel binary mask built from the per-feed preservation
  rectangles. Persons and foreground objects never appear here.
* live-render pass: environment -> person layers (alpha from matting,
  ascending z_rank) -> foreground object cutouts. The mask layer never
  appears here.

All functions are pure over immutable inputs and deterministic: identical
scene + frames produce bit-identical rasters.
"""

from __future__ import annotations

import enum
import math
from dataclasses import replace
from typing import Mapping

import numpy as np

from . import rasters
from .errors import DimensionMismatch, EmptyScene, MissingFrame
from .scene import (
    GENERATION_INPUT_LAYERS,
    LIVE_RENDER_LAYERS,
    Canvas,
    FeedPlacement,
    LayerRole,
    NormRect,
    Scene,
    SceneMode,
    clip_rect,
    sorted_by_z,
    to_pixels_wh,
)
from .segmentation import MattedFrame

MASK_GENERATE = 255
MASK_PRESERVE = 0


class RenderPass(enum.Enum):
    GENERATION_INPUT = "generation_input"
    LIVE_RENDER = "live_render"


# Ordered (back-to-front) layer list per pass. The generation-input pass
# additionally consumes the mask layer as a single alpha channel, never as
# color pixels.
LAYER_ORDER: dict[RenderPass, tuple[LayerRole, ...]] = {
    RenderPass.GENERATION_INPUT: GENERATION_INPUT_LAYERS,
    RenderPass.LIVE_RENDER: LIVE_RENDER_LAYERS,
}


def mask_violations(mask: np.ndarray) -> list[str]:
    """Binary-mask contract: single-channel uint8, values in {0, 255}."""
    out = []
    if mask.ndim != 2:
        out.append("mask: must be single-channel")
    if mask.dtype != np.uint8:
        out.append(f"mask: dtype {mask.dtype} is not uint8")
    values = np.unique(mask)
    bad = [int(v) for v in values if v not in (MASK_PRESERVE, MASK_GENERATE)]
    if bad:
        out.append(f"mask: values {bad} outside {{0, 255}}")
    return out


def preservation_rect(placement: FeedPlacement) -> NormRect:
    """The preserved sub-rectangle of a feed.

    The feed rect scaled about its own center by sqrt(preservation) per
    axis, so preserved area / feed area equals the slider exactly.
    """
    factor = math.sqrt(placement.preservation)
    return placement.rect.scaled_about_center(factor)


def _paste_opaque(dst: np.ndarray, src: np.ndarray, px: tuple[int, int, int, int]) -> None:
    """Draw `src` nearest-resampled into pixel rect `px`, clipped to dst."""
    height, width = dst.shape[:2]
    clipped = clip_rect(px, width, height)
    if clipped is None:
        return
    x0, y0, cw, ch = clipped
    rx, ry, rw, rh = px
    yi = rasters.nearest_indices(rh, src.shape[0])[y0 - ry : y0 - ry + ch]
    xi = rasters.nearest_indices(rw, src.shape[1])[x0 - rx : x0 - rx + cw]
    dst[y0 : y0 + ch, x0 : x0 + cw] = src[yi][:, xi]


def build_generation_input(
    scene: Scene, frames: Mapping[str, MattedFrame]
) -> tuple[np.ndarray, np.ndarray]:
    """Assemble (init image RGB, inpainting mask) at generation resolution.

    Init starts from neutral gray (webcam mode) or the current environment
    (canvas mode), then each feed's background-only pixels are drawn into
    its placement rect in z_rank order. The mask preserves (0) the union of
    the feeds' preservation rectangles and generates (255) everywhere else.
    Person pixels never reach the init image: only the hole-filled
    background layer of each matted frame is used.
    """
    gw, gh = scene.canvas.gen_width_px, scene.canvas.gen_height_px

    if scene.mode is SceneMode.WEBCAM_INPAINT:
        if not scene.feeds:
            raise EmptyScene("webcam mode needs at least one feed to blend")
        init = np.full((gh, gw, 3), rasters.NEUTRAL_GRAY, dtype=np.uint8)
    else:
        if not scene.feeds and scene.environment is None:
            raise EmptyScene("canvas mode needs feeds or an environment prior")
        if scene.environment is not None:
            init = rasters.resize_bilinear(rasters.ensure_rgb(scene.environment), gw, gh)
        else:
            init = np.full((gh, gw, 3), rasters.NEUTRAL_GRAY, dtype=np.uint8)

    for feed in sorted_by_z(scene.feeds):
        matte = frames.get(feed.feed_id)
        if matte is None:
            raise MissingFrame(feed.feed_id)
        _paste_opaque(init, matte.background, to_pixels_wh(feed.rect, gw, gh))

    mask = np.full((gh, gw), MASK_GENERATE, dtype=np.uint8)
    for feed in scene.feeds:
        keep = preservation_rect(feed)
        clipped = clip_rect(to_pixels_wh(keep, gw, gh), gw, gh)
        if clipped is None:
            continue
        x0, y0, cw, ch = clipped
        mask[y0 : y0 + ch, x0 : x0 + cw] = MASK_PRESERVE

    return init, mask


def render_live(scene: Scene, frames: Mapping[str, MattedFrame]) -> np.ndarray:
    """Composite the final RGBA frame at canvas resolution.

    Source-over back to front: opaque environment, then person layers in
    ascending z_rank (color under the matting alpha, nearest-resampled to
    the placement rect), then foreground object pixels cut from the
    environment raster. Pixels outside the canvas are clipped.
    """
    width, height = scene.canvas.width_px, scene.canvas.height_px
    if scene.environment is not None:
        out = rasters.ensure_rgb(scene.environment).copy()
    else:
        out = np.full((height, width, 3), rasters.NEUTRAL_GRAY, dtype=np.uint8)

    for feed in sorted_by_z(scene.feeds):
        matte = frames.get(feed.feed_id)
        if matte is None:
            raise MissingFrame(feed.feed_id)
        px = to_pixels_wh(feed.rect, width, height)
        clipped = clip_rect(px, width, height)
        if clipped is None:
            continue
        x0, y0, cw, ch = clipped
        rx, ry, rw, rh = px
        yi = rasters.nearest_indices(rh, matte.color.shape[0])[y0 - ry : y0 - ry + ch]
        xi = rasters.nearest_indices(rw, matte.color.shape[1])[x0 - rx : x0 - rx + cw]
        src = matte.color[yi][:, xi]
        alpha = matte.person_alpha[yi][:, xi]
        region = out[y0 : y0 + ch, x0 : x0 + cw]
        out[y0 : y0 + ch, x0 : x0 + cw] = rasters.over_u8(src, alpha, region)

    if scene.environment is not None:
        env_rgb = rasters.ensure_rgb(scene.environment)
        for obj in scene.foreground:
            cut = obj.mask > 0
            out[cut] = env_rgb[cut]

    return rasters.ensure_rgba(out)


def apply_generation_result(scene: Scene, result: np.ndarray) -> Scene:
    """Install a generated image as the new environment.

    The result (RGB at generation resolution) is up-scaled bilinearly to
    canvas size. Foreground objects are cleared: their masks no longer
    align with the new raster and must be re-segmented.
    """
    gw, gh = scene.canvas.gen_width_px, scene.canvas.gen_height_px
    if result.shape[:2] != (gh, gw):
        raise DimensionMismatch((gh, gw), result.shape[:2])
    env = rasters.resize_bilinear(
        rasters.ensure_rgb(result), scene.canvas.width_px, scene.canvas.height_px
    )
    return replace(
        scene,
        environment=rasters.ensure_rgba(env),
        foreground=(),
    )
