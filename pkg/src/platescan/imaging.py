"""Pixel-level primitives: grayscale conversion, Otsu thresholding, vertical
Sobel edges, dilation, geometric normalization and skew/slant correction.

Images are plain numpy arrays throughout:

* color image  -- ``(H, W, 3) uint8`` RGB
* gray image   -- ``(H, W) uint8``
* edge map     -- ``(H, W) float64``, all values finite and >= 0
* binary image -- ``(H, W) uint8`` with values in {0, 1}, 1 = foreground

Every function is pure: inputs are never mutated and no state is kept, so all
of them are safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Rect

# ITU-R BT.601 luma weights.
GRAY_WEIGHTS = (0.299, 0.587, 0.114)

# Largest side accepted without downscaling (mobile capture regime).
MAX_INPUT_SIDE = 640

GLYPH_SIZE = 32


class ImageTooSmall(ValueError):
    """Operation needs a larger image than was supplied."""


class EmptyBox(ValueError):
    """Glyph normalization was asked to crop a box with no foreground."""


@dataclass(frozen=True)
class IntensityThreshold:
    """Global intensity split point.

    ``degenerate`` is set when the histogram has a single occupied bin, in
    which case ``value`` is that bin and downstream stages should expect a
    featureless region rather than an error.
    """

    value: int
    degenerate: bool = False

    def __post_init__(self):
        if not 0 <= self.value <= 255:
            raise ValueError(f"threshold {self.value} outside [0, 255]")


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """Convert an RGB image to 8-bit grayscale using BT.601 luma weights.

    Rounding is half-up so results are platform independent.
    """
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) RGB array, got shape {img.shape}")
    r, g, b = GRAY_WEIGHTS
    luma = r * img[:, :, 0] + g * img[:, :, 1] + b * img[:, :, 2]
    return np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8)


def otsu_threshold(gray: np.ndarray) -> IntensityThreshold:
    """Pick the threshold maximizing between-class variance of the histogram.

    Pixels <= t form class 0 and pixels > t class 1.  Ties resolve to the
    smallest threshold.  A single-bin histogram is flagged degenerate instead
    of raising, so callers can reject the region downstream.
    """
    if gray.size == 0:
        raise ValueError("empty image")
    hist = np.bincount(gray.ravel(), minlength=256).astype(np.float64)
    occupied = np.flatnonzero(hist)
    if occupied.size == 1:
        return IntensityThreshold(int(occupied[0]), degenerate=True)

    total = hist.sum()
    levels = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(hist)
    w1 = total - w0
    mass0 = np.cumsum(hist * levels)
    mu0 = np.divide(mass0, w0, out=np.zeros(256), where=w0 > 0)
    mu1 = np.divide(mass0[-1] - mass0, w1, out=np.zeros(256), where=w1 > 0)
    sigma_b = (w0 / total) * (w1 / total) * (mu0 - mu1) ** 2
    sigma_b[(w0 == 0) | (w1 == 0)] = 0.0
    return IntensityThreshold(int(np.argmax(sigma_b)))


def binarize(gray: np.ndarray, threshold: IntensityThreshold) -> np.ndarray:
    """Split at the threshold and make the minority class the foreground.

    Characters are the minority class on a plate, so whichever side of the
    threshold holds fewer pixels becomes 1.  An exact tie keeps the brighter
    class as foreground.
    """
    above = gray > threshold.value
    if above.mean() <= 0.5:
        return above.astype(np.uint8)
    return (~above).astype(np.uint8)


def sobel_vertical(gray: np.ndarray) -> np.ndarray:
    """Absolute response of the horizontal-derivative Sobel kernel.

    The kernel [[-1,0,1],[-2,0,2],[-1,0,1]] responds to vertical edges, the
    dominant orientation of character strokes.  Borders are handled by edge
    replication.
    """
    h, w = gray.shape
    if h < 3 or w < 3:
        raise ImageTooSmall(f"sobel needs at least 3x3, got {h}x{w}")
    p = np.pad(gray.astype(np.float64), 1, mode="edge")
    right = p[:-2, 2:] + 2.0 * p[1:-1, 2:] + p[2:, 2:]
    left = p[:-2, :-2] + 2.0 * p[1:-1, :-2] + p[2:, :-2]
    return np.abs(right - left)


def dilate(bits: np.ndarray, radius: int) -> np.ndarray:
    """Morphological dilation by a (2r+1) x (2r+1) square structuring element."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0:
        return bits.copy()
    h, w = bits.shape
    p = np.pad(bits, radius, mode="constant")
    out = np.zeros_like(bits)
    for dy in range(2 * radius + 1):
        for dx in range(2 * radius + 1):
            np.maximum(out, p[dy:dy + h, dx:dx + w], out=out)
    return out


def rotate_bilinear(img: np.ndarray, degrees: float) -> np.ndarray:
    """Rotate a 2-D array about its center, bilinear, replicating the border.

    Output has the same shape and dtype as the input.
    """
    if img.ndim != 2:
        raise ValueError("rotate_bilinear handles single-plane images")
    if degrees == 0.0:
        return img.copy()
    h, w = img.shape
    values = img.astype(np.float64)
    a = np.radians(degrees)
    ca, sa = np.cos(a), np.sin(a)
    cr, cc = (h - 1) / 2.0, (w - 1) / 2.0
    rr, cc_grid = np.meshgrid(np.arange(h, dtype=np.float64),
                              np.arange(w, dtype=np.float64), indexing="ij")
    dr = rr - cr
    dc = cc_grid - cc
    sr = np.clip(ca * dr + sa * dc + cr, 0.0, h - 1.0)
    sc = np.clip(-sa * dr + ca * dc + cc, 0.0, w - 1.0)
    out = _bilinear_gather(values, sr, sc)
    if np.issubdtype(img.dtype, np.integer):
        return np.clip(np.floor(out + 0.5), 0, 255).astype(img.dtype)
    return out


def map_point_from_rotated(point: tuple[float, float], shape: tuple[int, int],
                           degrees: float) -> tuple[float, float]:
    """Map a (row, col) point in a rotated frame back to the source frame.

    Inverse of the coordinate transform used by :func:`rotate_bilinear`.
    """
    h, w = shape
    a = np.radians(degrees)
    ca, sa = np.cos(a), np.sin(a)
    cr, cc = (h - 1) / 2.0, (w - 1) / 2.0
    dr = point[0] - cr
    dc = point[1] - cc
    return (ca * dr + sa * dc + cr, -sa * dr + ca * dc + cc)


def _bilinear_gather(values: np.ndarray, sr: np.ndarray, sc: np.ndarray) -> np.ndarray:
    h, w = values.shape
    r0 = sr.astype(np.int64)
    c0 = sc.astype(np.int64)
    fr = sr - r0
    fc = sc - c0
    r1 = np.minimum(r0 + 1, h - 1)
    c1 = np.minimum(c0 + 1, w - 1)
    return (values[r0, c0] * (1 - fr) * (1 - fc)
            + values[r1, c0] * fr * (1 - fc)
            + values[r0, c1] * (1 - fr) * fc
            + values[r1, c1] * fr * fc)


def _angle_grid(limit: float, step: float) -> list[float]:
    steps = int(round(limit / step))
    angles = [i * step for i in range(-steps, steps + 1)]
    # Ties prefer the smallest magnitude, then the negative angle.
    return sorted(angles, key=lambda t: (abs(t), t))


_SKEW_SCORE_MAX_SIDE = 320


def deskew(gray: np.ndarray, max_degrees: float = 5.0,
           step_degrees: float = 0.5) -> tuple[np.ndarray, float]:
    """Straighten a skewed frame by maximizing row-projection variance.

    The vertical-edge map is rotated through the search grid and each angle
    is scored by the variance of its row sums; text bands concentrate edge
    mass into few rows exactly when the frame is level.  Scoring runs on a
    copy of the edge map downscaled to <= 320 px; the returned image is the
    input rotated (bilinear, full resolution) by the winning angle.
    """
    edges = sobel_vertical(gray)
    score_map = edges
    side = max(edges.shape)
    if side > _SKEW_SCORE_MAX_SIDE:
        scale = _SKEW_SCORE_MAX_SIDE / side
        score_map = resize_bilinear(edges,
                                    max(3, int(round(edges.shape[0] * scale))),
                                    max(3, int(round(edges.shape[1] * scale))))
    h, w = score_map.shape
    cr, cc = (h - 1) / 2.0, (w - 1) / 2.0
    rr, cc_grid = np.meshgrid(np.arange(h, dtype=np.float64),
                              np.arange(w, dtype=np.float64), indexing="ij")
    dr = (rr - cr).ravel()
    dc = (cc_grid - cc).ravel()

    best_angle = 0.0
    best_score = -1.0
    for angle in _angle_grid(max_degrees, step_degrees):
        a = np.radians(angle)
        ca, sa = np.cos(a), np.sin(a)
        sr = np.clip(ca * dr + sa * dc + cr, 0.0, h - 1.0)
        sc = np.clip(-sa * dr + ca * dc + cc, 0.0, w - 1.0)
        rotated = _bilinear_gather(score_map, sr, sc).reshape(h, w)
        score = float(rotated.sum(axis=1).var())
        if score > best_score:
            best_score = score
            best_angle = angle
    return rotate_bilinear(gray, best_angle), best_angle


def estimate_slant(bits: np.ndarray, max_degrees: float = 15.0,
                   step_degrees: float = 1.0) -> float:
    """Find the shear angle maximizing column-projection variance.

    Upright strokes stack foreground into few columns, so the variance of the
    column-sum profile peaks when the slant is removed.  Returns 0 for an
    empty image.
    """
    ys, xs = np.nonzero(bits)
    if ys.size == 0:
        return 0.0
    h, w = bits.shape
    reach = int(np.ceil((h - 1) * np.tan(np.radians(max_degrees))))
    width = w + 2 * reach
    best_angle = 0.0
    best_score = -1.0
    for angle in _angle_grid(max_degrees, step_degrees):
        shift = np.floor(-ys * np.tan(np.radians(angle)) + 0.5).astype(np.int64)
        profile = np.bincount(xs + shift + reach, minlength=width).astype(np.float64)
        score = float(profile.var())
        if score > best_score:
            best_score = score
            best_angle = angle
    return best_angle


def shear_horizontal(bits: np.ndarray, degrees: float) -> np.ndarray:
    """Apply x' = x - y*tan(angle) with per-row integer shifts.

    The canvas widens just enough that no foreground is clipped.
    """
    if degrees == 0.0:
        return bits.copy()
    h, w = bits.shape
    shifts = np.floor(-np.arange(h) * np.tan(np.radians(degrees)) + 0.5).astype(np.int64)
    offset = -int(shifts.min())
    out = np.zeros((h, w + int(shifts.max()) + offset), dtype=np.uint8)
    for y in range(h):
        s = int(shifts[y]) + offset
        out[y, s:s + w] = bits[y]
    return out


def deslant(bits: np.ndarray, max_degrees: float = 15.0,
            step_degrees: float = 1.0) -> np.ndarray:
    """Remove italic-like character slant from a binary image."""
    angle = estimate_slant(bits, max_degrees, step_degrees)
    return shear_horizontal(bits, angle)


def resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Resample to (out_h, out_w) with bilinear interpolation, pixel-center aligned.

    Accepts 2-D planes and (H, W, C) stacks; dtype is preserved.
    """
    if out_h < 1 or out_w < 1:
        raise ValueError("output dims must be >= 1")
    if img.ndim == 3:
        planes = [resize_bilinear(img[:, :, i], out_h, out_w) for i in range(img.shape[2])]
        return np.stack(planes, axis=2)
    h, w = img.shape
    values = img.astype(np.float64)
    sr = np.clip((np.arange(out_h, dtype=np.float64) + 0.5) * (h / out_h) - 0.5, 0.0, h - 1.0)
    sc = np.clip((np.arange(out_w, dtype=np.float64) + 0.5) * (w / out_w) - 0.5, 0.0, w - 1.0)
    grid_r, grid_c = np.meshgrid(sr, sc, indexing="ij")
    out = _bilinear_gather(values, grid_r, grid_c)
    if np.issubdtype(img.dtype, np.integer):
        return np.clip(np.floor(out + 0.5), 0, 255).astype(img.dtype)
    return out


def fit_within(img: np.ndarray, max_side: int = MAX_INPUT_SIDE) -> tuple[np.ndarray, float]:
    """Downscale so neither side exceeds ``max_side``, preserving aspect ratio.

    Returns the (possibly unchanged) image and the applied scale factor
    (1.0 when no downscaling was needed).
    """
    h, w = img.shape[:2]
    side = max(h, w)
    if side <= max_side:
        return img, 1.0
    scale = max_side / side
    out_h = max(1, int(round(h * scale)))
    out_w = max(1, int(round(w * scale)))
    return resize_bilinear(img, out_h, out_w), scale


def normalize_glyph(bits: np.ndarray, box: Rect, size: int = GLYPH_SIZE) -> np.ndarray:
    """Stretch the boxed region onto the canonical ``size x size`` binary grid.

    The stretch is anisotropic by design: narrow characters fill the frame
    the same way their reference templates do, which keeps correlation
    comparable across widths.  Raises :class:`EmptyBox` when the box holds no
    foreground.
    """
    h, w = bits.shape
    if not (0 <= box.r0 < box.r1 <= h and 0 <= box.c0 < box.c1 <= w):
        raise ValueError(f"box {box} outside image {h}x{w}")
    crop = bits[box.r0:box.r1, box.c0:box.c1]
    if not crop.any():
        raise EmptyBox(f"no foreground inside {box}")
    resampled = resize_bilinear(crop.astype(np.float64), size, size)
    return (resampled >= 0.5).astype(np.uint8)
