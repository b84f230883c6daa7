"""8-bit PNG and 32-bit float PFM image files.

PNGs hold display images ([0, 1] data rounded to 8 bits); PFMs hold exact
float32 buffers such as depth maps. PFM follows the usual convention:
text header (``PF`` color / ``Pf`` grayscale, width height, negative scale
for little-endian), rows stored bottom-up.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image


def _check_image(image: np.ndarray, what: str) -> np.ndarray:
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 3 and image.shape[2] == 1:
        image = image[..., 0]
    if image.ndim not in (2, 3) or (image.ndim == 3 and image.shape[2] != 3):
        raise ValueError(f"{what} must be (H, W) or (H, W, 3), got {image.shape}")
    if not np.isfinite(image).all():
        raise ValueError(f"{what} contains non-finite values")
    return image


def write_png(path: str | Path, image: np.ndarray) -> None:
    """Saves a [0, 1] image (grayscale or RGB) as an 8-bit PNG."""

    image = _check_image(image, "png image")
    if image.min() < 0.0 or image.max() > 1.0:
        raise ValueError("png image values must lie in [0, 1]")
    as_u8 = np.round(image * 255.0).astype(np.uint8)
    Image.fromarray(as_u8, mode="RGB" if as_u8.ndim == 3 else "L").save(
        Path(path), format="PNG"
    )


def read_png(path: str | Path) -> np.ndarray:
    """Loads an 8-bit PNG back to [0, 1] floats ((H, W) or (H, W, 3))."""

    with Image.open(Path(path)) as img:
        if img.mode not in ("L", "RGB"):
            img = img.convert("RGB")
        data = np.asarray(img, dtype=np.float64)
    return data / 255.0


def write_pfm(path: str | Path, image: np.ndarray) -> None:
    """Saves a float buffer as a little-endian PFM (rows bottom-up)."""

    image = _check_image(image, "pfm image")
    color = image.ndim == 3
    header = (
        f"{'PF' if color else 'Pf'}\n{image.shape[1]} {image.shape[0]}\n-1.0\n"
    ).encode("ascii")
    payload = image[::-1].astype("<f4").tobytes()
    Path(path).write_bytes(header + payload)


def read_pfm(path: str | Path) -> np.ndarray:
    """Loads a PFM file as float64 ((H, W) or (H, W, 3))."""

    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if len(parts) < 4 or parts[0] not in (b"PF", b"Pf"):
        raise ValueError("not a PFM file")
    color = parts[0] == b"PF"
    try:
        width, height = (int(tok) for tok in parts[1].split())
        scale = float(parts[2])
    except ValueError as exc:
        raise ValueError(f"bad PFM header: {exc}") from None
    dtype = "<f4" if scale < 0 else ">f4"
    channels = 3 if color else 1
    count = width * height * channels
    payload = parts[3]
    if len(payload) < count * 4:
        raise ValueError("truncated PFM payload")
    flat = np.frombuffer(payload, dtype=dtype, count=count).astype(np.float64)
    shape = (height, width, 3) if color else (height, width)
    return flat.reshape(shape)[::-1].copy()
