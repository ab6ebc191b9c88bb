"""Raster primitives: PNG io, content digests, deterministic resampling.

All rasters are numpy uint8 arrays: RGB (H,W,3), RGBA (H,W,4), or
single-channel masks (H,W). Digests are computed over raw pixel bytes plus
shape, never over encoded PNG bytes, so content addressing is independent
of encoder details.
"""

from __future__ import annotations

import hashlib
import io

import numpy as np
from PIL import Image

from .errors import DecodeError

NEUTRAL_GRAY = 128


def raster_digest(arr: np.ndarray) -> str:
    a = np.ascontiguousarray(arr)
    h = hashlib.sha256()
    h.update(repr((a.shape, str(a.dtype))).encode())
    h.update(a.tobytes())
    return h.hexdigest()


def encode_png(arr: np.ndarray) -> bytes:
    if arr.ndim == 2:
        img = Image.fromarray(arr, mode="L")
    elif arr.shape[2] == 3:
        img = Image.fromarray(arr, mode="RGB")
    else:
        img = Image.fromarray(arr, mode="RGBA")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def decode_image(data: bytes, min_side: int = 1) -> np.ndarray:
    """Decode PNG/JPEG bytes to RGB or RGBA (or L for masks) uint8."""
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except Exception as exc:
        raise DecodeError(f"undecodable image bytes: {exc}") from exc
    if img.width < min_side or img.height < min_side:
        raise DecodeError(f"image {img.width}x{img.height} below minimum {min_side}x{min_side}")
    if img.mode in ("L", "RGB", "RGBA"):
        return np.array(img)
    if img.mode in ("LA", "P", "PA"):
        return np.array(img.convert("RGBA"))
    return np.array(img.convert("RGB"))


def ensure_rgb(arr: np.ndarray) -> np.ndarray:
    if arr.ndim == 2:
        return np.repeat(arr[:, :, None], 3, axis=2)
    if arr.shape[2] == 4:
        return arr[:, :, :3].copy()
    return arr


def ensure_rgba(arr: np.ndarray, alpha: int = 255) -> np.ndarray:
    if arr.ndim == 3 and arr.shape[2] == 4:
        return arr
    rgb = ensure_rgb(arr)
    a = np.full(rgb.shape[:2] + (1,), alpha, dtype=np.uint8)
    return np.concatenate([rgb, a], axis=2)


def nearest_indices(dst: int, src: int) -> np.ndarray:
    """Center-sampled nearest-neighbor source indices for a 1D resize.

    Destination pixel i samples source index floor((i + 0.5) * src / dst),
    clamped to [0, src-1], evaluated left to right (multiply before divide)
    so scalar and vectorized computations agree bit-for-bit.
    """
    idx = np.floor((np.arange(dst) + 0.5) * src / dst).astype(np.int64)
    return np.clip(idx, 0, src - 1)


def resize_nearest(arr: np.ndarray, width: int, height: int) -> np.ndarray:
    sh, sw = arr.shape[:2]
    yi = nearest_indices(height, sh)
    xi = nearest_indices(width, sw)
    return arr[yi][:, xi]


def resize_bilinear(arr: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear resample via Pillow (deterministic for fixed input)."""
    if arr.shape[:2] == (height, width):
        return arr.copy()
    if arr.ndim == 2:
        mode = "L"
    elif arr.shape[2] == 3:
        mode = "RGB"
    else:
        mode = "RGBA"
    img = Image.fromarray(arr, mode=mode)
    out = img.resize((width, height), Image.Resampling.BILINEAR)
    return np.array(out)


def letterbox(arr: np.ndarray, width: int, height: int, fill: int = 0) -> np.ndarray:
    """Fit `arr` inside width x height preserving aspect, padding with `fill`."""
    sh, sw = arr.shape[:2]
    scale = min(width / sw, height / sh)
    nw = max(1, int(round(sw * scale)))
    nh = max(1, int(round(sh * scale)))
    resized = resize_bilinear(arr, nw, nh)
    channels = 1 if arr.ndim == 2 else arr.shape[2]
    if channels == 1:
        out = np.full((height, width), fill, dtype=np.uint8)
    else:
        out = np.full((height, width, channels), fill, dtype=np.uint8)
        if channels == 4:
            out[:, :, 3] = 255
    y0 = (height - nh) // 2
    x0 = (width - nw) // 2
    out[y0:y0 + nh, x0:x0 + nw] = resized
    return out


def over_u8(src_rgb: np.ndarray, src_a: np.ndarray, dst_rgb: np.ndarray) -> np.ndarray:
    """Source-over on uint8: round-half-up of (src*a + dst*(255-a)) / 255.

    `src_a` broadcasts against the color channels. Exact integer arithmetic
    so the vectorized compositor and the scalar oracle agree bit-for-bit.
    """
    a = src_a.astype(np.uint32)
    if a.ndim == src_rgb.ndim - 1:
        a = a[..., None]
    num = src_rgb.astype(np.uint32) * a + dst_rgb.astype(np.uint32) * (255 - a) + 127
    return (num // 255).astype(np.uint8)


def over_scalar(src: int, a: int, dst: int) -> int:
    """Scalar twin of over_u8 for per-pixel oracles."""
    return (src * a + dst * (255 - a) + 127) // 255


def luminance_u8(rgb: np.ndarray) -> np.ndarray:
    """Integer Rec.601 luma: (77 R + 150 G + 29 B) >> 8."""
    r = rgb[:, :, 0].astype(np.uint32)
    g = rgb[:, :, 1].astype(np.uint32)
    b = rgb[:, :, 2].astype(np.uint32)
    return ((77 * r + 150 * g + 29 * b) >> 8).astype(np.uint8)
