"""8-bit grayscale image files: binary PGM (P5) and PNG.

Reads map losslessly onto float64 grids; writes clamp to [0, 255] and round
half-to-even.  Masks travel as 0/255 images (anything >= 128 reads back as
observed).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageIOError
from .grids import as_grid, as_mask


def _read_pgm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    if not data.startswith(b"P5"):
        raise ImageIOError(f"{path}: not a binary PGM (P5) file")

    # header: magic, width, height, maxval; '#' comments allowed between tokens
    pos = 2
    tokens = []
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ImageIOError(f"{path}: truncated PGM header")
        tokens.append(data[start:pos])
    pos += 1  # single whitespace after maxval

    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise ImageIOError(f"{path}: malformed PGM header") from exc
    if maxval > 255:
        raise ImageIOError(f"{path}: {maxval+1}-level PGM unsupported (8-bit only)")
    if maxval <= 0 or width <= 0 or height <= 0:
        raise ImageIOError(f"{path}: malformed PGM header values")
    pixels = data[pos : pos + width * height]
    if len(pixels) < width * height:
        raise ImageIOError(f"{path}: truncated PGM pixel data")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width).astype(np.float64)


def _read_png(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            if img.mode == "L":
                return np.asarray(img, dtype=np.float64)
            if img.mode == "1":
                return np.asarray(img.convert("L"), dtype=np.float64)
            raise ImageIOError(
                f"{path}: PNG mode {img.mode!r} unsupported (8-bit grayscale only)"
            )
    except UnidentifiedImageError as exc:
        raise ImageIOError(f"{path}: not a readable PNG file") from exc


def read_image(path) -> np.ndarray:
    """Read an 8-bit grayscale PGM or PNG into a float64 grid."""
    p = Path(path)
    if not p.exists():
        raise ImageIOError(f"{p}: no such file")
    suffix = p.suffix.lower()
    if suffix == ".pgm":
        return _read_pgm(p)
    if suffix == ".png":
        return _read_png(p)
    raise ImageIOError(f"{p}: unsupported format {suffix!r} (expected .pgm or .png)")


def write_image(path, grid) -> None:
    """Write a grid as 8-bit grayscale, clamping to [0, 255] and rounding
    half-to-even."""
    g = as_grid(grid, "grid")
    quantized = np.rint(np.clip(g, 0.0, 255.0)).astype(np.uint8)
    p = Path(path)
    suffix = p.suffix.lower()
    if suffix == ".pgm":
        header = f"P5\n{quantized.shape[1]} {quantized.shape[0]}\n255\n".encode("ascii")
        p.write_bytes(header + quantized.tobytes())
    elif suffix == ".png":
        Image.fromarray(quantized, mode="L").save(p)
    else:
        raise ImageIOError(f"{p}: unsupported format {suffix!r} (expected .pgm or .png)")


def read_mask(path) -> np.ndarray:
    """Read a 0/255 mask image as a boolean grid (>=128 means observed)."""
    return as_mask(read_image(path) >= 128.0)


def write_mask(path, mask) -> None:
    """Write a boolean mask as a 0/255 grayscale image."""
    m = as_mask(mask)
    write_image(path, np.where(m, 255.0, 0.0))
