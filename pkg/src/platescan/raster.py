"""Raster file I/O: PNG/JPEG decoding for inputs, PGM (P5) for debug dumps.

Decoding goes through Pillow; PGM is written and parsed directly because the
debug-dump format must stay byte-deterministic across library versions.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError


class DecodeError(ValueError):
    """Input bytes could not be decoded as a supported raster image."""


def load_color_bytes(data: bytes) -> np.ndarray:
    """Decode PNG/JPEG bytes into an ``(H, W, 3) uint8`` RGB array."""
    try:
        with Image.open(io.BytesIO(data)) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DecodeError(f"undecodable image: {exc}") from exc


def load_color_image(path: str | Path) -> np.ndarray:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise DecodeError(f"cannot read {path}: {exc}") from exc
    return load_color_bytes(data)


def save_png(path: str | Path, img: np.ndarray) -> None:
    """Write a gray ``(H, W)`` or RGB ``(H, W, 3)`` uint8 array as PNG."""
    mode = "L" if img.ndim == 2 else "RGB"
    Image.fromarray(np.ascontiguousarray(img, dtype=np.uint8), mode).save(str(path), format="PNG")


def write_pgm(path: str | Path, img: np.ndarray) -> None:
    """Write a 2-D uint8 array as binary PGM (P5, maxval 255)."""
    if img.ndim != 2:
        raise ValueError("PGM holds single-channel images only")
    arr = np.ascontiguousarray(img, dtype=np.uint8)
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + arr.tobytes())


def read_pgm(path: str | Path) -> np.ndarray:
    """Read a binary PGM (P5) file into a 2-D uint8 array."""
    return parse_pgm(Path(path).read_bytes(), str(path))


def parse_pgm(data: bytes, path: str = "<bytes>") -> np.ndarray:
    """Parse in-memory binary PGM (P5) content into a 2-D uint8 array."""
    if not data.startswith(b"P5"):
        raise DecodeError(f"{path}: not a P5 PGM file")
    # Header: magic, width, height, maxval as whitespace-separated tokens,
    # with '#' comments running to end of line.
    tokens: list[int] = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            eol = data.find(b"\n", pos)
            pos = len(data) if eol < 0 else eol + 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise DecodeError(f"{path}: truncated PGM header")
        try:
            tokens.append(int(data[start:pos]))
        except ValueError as exc:
            raise DecodeError(f"{path}: bad PGM header token") from exc
    pos += 1  # single whitespace byte after maxval
    width, height, maxval = tokens
    if maxval != 255 or width < 1 or height < 1:
        raise DecodeError(f"{path}: unsupported PGM geometry {width}x{height} maxval {maxval}")
    pixels = data[pos:pos + width * height]
    if len(pixels) != width * height:
        raise DecodeError(f"{path}: truncated PGM data")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width).copy()
