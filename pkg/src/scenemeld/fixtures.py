"""Deterministic synthetic rasters for tests, scenarios, and offline demos.

Nothing here touches the network or the clock; every function is a pure
function of its arguments, so digests derived from these images are stable
across runs.
"""

from __future__ import annotations

import numpy as np


def gradient_background(width: int, height: int, start=(40, 60, 90), end=(180, 200, 220)) -> np.ndarray:
    """Horizontal linear gradient RGB."""
    t = np.linspace(0.0, 1.0, width)[None, :, None]
    start_arr = np.array(start, dtype=np.float64)[None, None, :]
    end_arr = np.array(end, dtype=np.float64)[None, None, :]
    row = start_arr + (end_arr - start_arr) * t
    return np.clip(np.rint(np.repeat(row, height, axis=0)), 0, 255).astype(np.uint8)


def solid(width: int, height: int, color) -> np.ndarray:
    out = np.zeros((height, width, len(color)), dtype=np.uint8)
    out[:, :] = color
    return out


def ellipse_mask(width: int, height: int, cx: float, cy: float, rx: float, ry: float) -> np.ndarray:
    """Single-channel mask, 255 inside the (normalized) ellipse."""
    ys, xs = np.mgrid[0:height, 0:width]
    nx = (xs + 0.5) / width
    ny = (ys + 0.5) / height
    inside = ((nx - cx) / rx) ** 2 + ((ny - cy) / ry) ** 2 <= 1.0
    return np.where(inside, 255, 0).astype(np.uint8)


def person_frame(
    width: int = 320,
    height: int = 180,
    person_color=(200, 80, 60),
    bg_start=(40, 60, 90),
    bg_end=(180, 200, 220),
) -> np.ndarray:
    """RGBA webcam-style frame: gradient background, elliptical person
    blob with alpha 255, shoulders cut off at the bottom edge."""
    rgb = gradient_background(width, height, bg_start, bg_end)
    alpha = ellipse_mask(width, height, cx=0.5, cy=0.78, rx=0.28, ry=0.55)
    frame = np.dstack([rgb, alpha])
    frame[alpha > 0, 0] = person_color[0]
    frame[alpha > 0, 1] = person_color[1]
    frame[alpha > 0, 2] = person_color[2]
    return frame


def plain_frame(width: int = 320, height: int = 180, color=(120, 110, 90)) -> np.ndarray:
    """RGB frame with no alpha channel (a task-space camera, nobody in it)."""
    rgb = gradient_background(width, height, color, tuple(min(c + 60, 255) for c in color))
    return rgb


def furniture_room(width: int, height: int) -> np.ndarray:
    """Flat-color room with a floor line, one table and two chairs."""
    img = solid(width, height, (212, 208, 200))
    floor_y = int(height * 0.62)
    img[floor_y:, :] = (150, 130, 105)
    # table: wide slab center-bottom
    tx0, tx1 = int(width * 0.38), int(width * 0.62)
    ty0, ty1 = int(height * 0.66), int(height * 0.80)
    img[ty0:ty1, tx0:tx1] = (96, 68, 44)
    # chairs flanking the table
    for cx0, cx1 in ((int(width * 0.16), int(width * 0.30)), (int(width * 0.70), int(width * 0.84))):
        cy0, cy1 = int(height * 0.60), int(height * 0.86)
        img[cy0:cy1, cx0:cx1] = (70, 80, 120)
    return img


def furniture_instances(width: int, height: int) -> list[tuple[str, np.ndarray, float]]:
    """Hand-authored segmentation fixture matching furniture_room."""
    def rect_mask(x0, x1, y0, y1):
        mask = np.zeros((height, width), dtype=np.uint8)
        mask[int(y0 * height) : int(y1 * height), int(x0 * width) : int(x1 * width)] = 255
        return mask

    return [
        ("chair", rect_mask(0.16, 0.30, 0.60, 0.86), 0.93),
        ("chair", rect_mask(0.70, 0.84, 0.60, 0.86), 0.91),
        ("table", rect_mask(0.38, 0.62, 0.66, 0.80), 0.88),
    ]


def conference_room(width: int, height: int) -> np.ndarray:
    """Long conference table, three chairs along the far side."""
    img = solid(width, height, (225, 222, 214))
    img[int(height * 0.58) :, :] = (165, 150, 128)
    img[int(height * 0.64) : int(height * 0.82), int(width * 0.2) : int(width * 0.8)] = (88, 60, 40)
    for i in range(3):
        x0 = 0.24 + 0.22 * i
        img[
            int(height * 0.52) : int(height * 0.70),
            int(x0 * width) : int((x0 + 0.10) * width),
        ] = (60, 72, 104)
    return img
