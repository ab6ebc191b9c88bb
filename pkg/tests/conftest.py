import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from scenemeld.scene import Canvas, FeedPlacement, ForegroundObject, NormRect, Scene, from_pixels
from scenemeld.segmentation import MattedFrame


def small_canvas(width: int, height: int) -> Canvas:
    """Tiny canvas for pixel tests; gen dims = 8x canvas so both the
    divisible-by-8 and exact-aspect constraints hold."""
    return Canvas(width_px=width, height_px=height,
                  gen_width_px=width * 8, gen_height_px=height * 8)


def random_matte(rng: np.random.Generator, width: int, height: int) -> MattedFrame:
    color = rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)
    # mix of transparent, opaque, and fractional alpha
    alpha = rng.choice(
        np.array([0, 64, 128, 255], dtype=np.uint8), size=(height, width)
    )
    background = rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)
    return MattedFrame(color=color, person_alpha=alpha, background=background)


def random_fg_object(rng: np.random.Generator, canvas: Canvas, index: int) -> ForegroundObject:
    w = int(rng.integers(2, max(3, canvas.width_px // 3)))
    h = int(rng.integers(2, max(3, canvas.height_px // 3)))
    x0 = int(rng.integers(0, canvas.width_px - w))
    y0 = int(rng.integers(0, canvas.height_px - h))
    mask = np.zeros((canvas.height_px, canvas.width_px), dtype=np.uint8)
    mask[y0:y0 + h, x0:x0 + w] = 255
    bbox = from_pixels((x0, y0, w, h), canvas.width_px, canvas.height_px)
    anchor = (bbox.cx, bbox.cy - bbox.h / 2 + 0.33 * bbox.h)
    return ForegroundObject(
        object_id=f"obj-{index}", class_label="chair", mask=mask, bbox=bbox, anchor=anchor
    )


def random_scene(
    rng: np.random.Generator,
    max_side: int = 64,
    max_feeds: int = 4,
    max_objects: int = 3,
    with_environment: bool | None = None,
) -> tuple[Scene, dict[str, MattedFrame]]:
    width = int(rng.integers(16, max_side + 1))
    height = int(rng.integers(16, max_side + 1))
    canvas = small_canvas(width, height)

    feeds = []
    frames = {}
    ranks = rng.permutation(16)
    for i in range(int(rng.integers(0, max_feeds + 1))):
        rect = NormRect(
            cx=float(rng.uniform(0.1, 0.9)),
            cy=float(rng.uniform(0.1, 0.9)),
            w=float(rng.uniform(0.1, 0.7)),
            h=float(rng.uniform(0.1, 0.7)),
        )
        feed_id = f"feed-{i}"
        feeds.append(
            FeedPlacement(
                feed_id=feed_id,
                rect=rect,
                z_rank=int(ranks[i]),
                preservation=float(rng.uniform(0, 1)),
                live=bool(rng.integers(0, 2)),
            )
        )
        fw = int(rng.integers(4, 48))
        fh = int(rng.integers(4, 48))
        frames[feed_id] = random_matte(rng, fw, fh)

    if with_environment is None:
        with_environment = bool(rng.integers(0, 2))
    environment = None
    foreground = ()
    if with_environment:
        environment = np.dstack(
            [
                rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8),
                np.full((height, width), 255, dtype=np.uint8),
            ]
        )
        foreground = tuple(
            random_fg_object(rng, canvas, i)
            for i in range(int(rng.integers(0, max_objects + 1)))
        )

    scene = Scene(canvas=canvas, feeds=tuple(feeds), environment=environment,
                  foreground=foreground)
    return scene, frames


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
