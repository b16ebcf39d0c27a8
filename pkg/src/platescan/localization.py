"""Candidate plate localization via edge density and row-variance banding.

The chain is: vertical Sobel edges -> keep only the strongest few percent ->
per-row variance of the reduced map -> contiguous high-variance row bands ->
column cropping by smoothed edge strength.  Characters pack vertical edges
into a narrow horizontal band, which is what the row variance picks up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Rect
from .imaging import sobel_vertical

DEFAULT_EDGE_PERCENTILE = 0.97
DEFAULT_BAND_VARIANCE_RATIO = 0.5
DEFAULT_COLUMN_STRENGTH_RATIO = 0.5
DEFAULT_GAP_TOLERANCE_ROWS = 2
DEFAULT_MIN_BAND_HEIGHT = 8
DEFAULT_MAX_CANDIDATES = 5
DEFAULT_CROP_PADDING = 2

# Too few surviving edge pixels means noise, not structure.
MIN_POSITIVE_EDGES = 10


class NoBands(ValueError):
    """No row band passed the variance threshold; the scene has no plate."""


class EmptyBand(ValueError):
    """A row band contains no foreground to crop columns from."""


class NoPlateFound(ValueError):
    """Localization produced no candidate regions."""


@dataclass(frozen=True)
class RowVarianceProfile:
    """Per-row variance of a binary edge map plus its maximum."""

    per_row: np.ndarray
    max_variance: float


@dataclass(frozen=True)
class CandidateRegion:
    """One rectangular plate hypothesis, ranked by edge density (0 = strongest)."""

    bounds: Rect
    crop: np.ndarray
    rank: int
    edge_density: float


def reduce_edge_map(edges: np.ndarray, percentile: float = DEFAULT_EDGE_PERCENTILE) -> np.ndarray:
    """Binary mask keeping only the top (1 - percentile) share of positive edges.

    The cut is by nearest rank over strictly positive values, ties included,
    so exactly ceil((1-p) * N) pixels survive when all values are distinct.
    Fewer than MIN_POSITIVE_EDGES positive values yields an all-zero mask.
    """
    if edges.size == 0:
        raise ValueError("empty edge map")
    positive = edges[edges > 0]
    if positive.size < MIN_POSITIVE_EDGES:
        return np.zeros(edges.shape, dtype=np.uint8)
    # The epsilon guards the ceil against float dust: (1 - 0.97) * 100 is
    # 3.0000000000000027, which must keep 3 pixels, not 4.
    keep = max(1, math.ceil((1.0 - percentile) * positive.size - 1e-9))
    threshold = np.partition(positive, positive.size - keep)[positive.size - keep]
    return (edges >= threshold).astype(np.uint8)


def row_variance_profile(reduced: np.ndarray) -> RowVarianceProfile:
    """Variance of each row of a binary map: p(1-p) with p the foreground share."""
    if reduced.size == 0:
        raise ValueError("empty image")
    p = reduced.mean(axis=1)
    per_row = p * (1.0 - p)
    return RowVarianceProfile(per_row, float(per_row.max()))


def select_horizontal_bands(profile: RowVarianceProfile,
                            variance_ratio: float = DEFAULT_BAND_VARIANCE_RATIO,
                            gap_tolerance: int = DEFAULT_GAP_TOLERANCE_ROWS,
                            min_height: int = DEFAULT_MIN_BAND_HEIGHT) -> list[tuple[int, int]]:
    """Group rows above the variance threshold into half-open (r0, r1) spans.

    Runs may bridge up to ``gap_tolerance`` sub-threshold rows; spans shorter
    than ``min_height`` are dropped.  Raises :class:`NoBands` when nothing
    survives.
    """
    if profile.max_variance <= 0.0:
        raise NoBands("row variance profile is identically zero")
    rows = np.flatnonzero(profile.per_row >= variance_ratio * profile.max_variance)
    spans: list[tuple[int, int]] = []
    start = prev = int(rows[0])
    for r in rows[1:]:
        r = int(r)
        if r - prev - 1 > gap_tolerance:
            spans.append((start, prev + 1))
            start = r
        prev = r
    spans.append((start, prev + 1))
    spans = [(a, b) for a, b in spans if b - a >= min_height]
    if not spans:
        raise NoBands("no run met the minimum band height")
    return spans


def crop_vertical(reduced: np.ndarray, band: tuple[int, int],
                  strength_ratio: float = DEFAULT_COLUMN_STRENGTH_RATIO) -> Rect:
    """Crop a row band to the strongest contiguous column run.

    Column counts inside the band are smoothed with a moving average before
    the strength test; the raw 50% rule keeps isolated strong columns and
    fragments the window.  The leftmost longest marked run wins ties.
    """
    r0, r1 = band
    h, w = reduced.shape
    if not (0 <= r0 < r1 <= h):
        raise ValueError(f"band {band} outside image of height {h}")
    counts = reduced[r0:r1].sum(axis=0).astype(np.float64)
    if counts.sum() == 0:
        raise EmptyBand(f"band {band} has no foreground")
    window = max(3, int(round(w / 20)))
    if window % 2 == 0:
        window += 1
    smoothed = np.convolve(counts, np.ones(window) / window, mode="same")
    marked = smoothed >= strength_ratio * smoothed.max()

    best: tuple[int, int] | None = None
    start = None
    for c, m in enumerate(np.append(marked, False)):
        if m and start is None:
            start = c
        elif not m and start is not None:
            if best is None or c - start > best[1] - best[0]:
                best = (start, c)
            start = None
    assert best is not None
    return Rect(r0, best[0], r1, best[1])


def localize_plate(gray: np.ndarray,
                   edge_percentile: float = DEFAULT_EDGE_PERCENTILE,
                   variance_ratio: float = DEFAULT_BAND_VARIANCE_RATIO,
                   strength_ratio: float = DEFAULT_COLUMN_STRENGTH_RATIO,
                   gap_tolerance: int = DEFAULT_GAP_TOLERANCE_ROWS,
                   min_band_height: int = DEFAULT_MIN_BAND_HEIGHT,
                   max_candidates: int = DEFAULT_MAX_CANDIDATES,
                   padding: int = DEFAULT_CROP_PADDING) -> list[CandidateRegion]:
    """Find up to ``max_candidates`` plate hypotheses, strongest first.

    Raises :class:`NoPlateFound` when no band survives selection.
    """
    candidates, _ = localize_plate_detailed(
        gray, edge_percentile, variance_ratio, strength_ratio,
        gap_tolerance, min_band_height, max_candidates, padding)
    return candidates


@dataclass(frozen=True)
class LocalizationTrace:
    """Intermediate stages kept for diagnostics dumps."""

    edges: np.ndarray
    reduced: np.ndarray
    bands: list[tuple[int, int]]


def localize_plate_detailed(gray: np.ndarray,
                            edge_percentile: float = DEFAULT_EDGE_PERCENTILE,
                            variance_ratio: float = DEFAULT_BAND_VARIANCE_RATIO,
                            strength_ratio: float = DEFAULT_COLUMN_STRENGTH_RATIO,
                            gap_tolerance: int = DEFAULT_GAP_TOLERANCE_ROWS,
                            min_band_height: int = DEFAULT_MIN_BAND_HEIGHT,
                            max_candidates: int = DEFAULT_MAX_CANDIDATES,
                            padding: int = DEFAULT_CROP_PADDING,
                            ) -> tuple[list[CandidateRegion], LocalizationTrace]:
    """Like :func:`localize_plate` but also returns the intermediate stages."""
    h, w = gray.shape
    edges = sobel_vertical(gray)
    reduced = reduce_edge_map(edges, edge_percentile)
    profile = row_variance_profile(reduced)
    try:
        bands = select_horizontal_bands(profile, variance_ratio, gap_tolerance, min_band_height)
    except NoBands as exc:
        raise NoPlateFound(str(exc)) from exc

    scored: list[tuple[Rect, float]] = []
    for band in bands:
        try:
            rect = crop_vertical(reduced, band, strength_ratio)
        except EmptyBand:
            continue
        rect = rect.pad(padding).clamp(h, w)
        density = float(reduced[rect.r0:rect.r1, rect.c0:rect.c1].mean())
        scored.append((rect, density))
    if not scored:
        raise NoPlateFound("every band was empty after column cropping")

    scored.sort(key=lambda item: -item[1])  # stable: band order breaks ties
    candidates = [
        CandidateRegion(rect, gray[rect.r0:rect.r1, rect.c0:rect.c1].copy(), rank, density)
        for rank, (rect, density) in enumerate(scored[:max_candidates])
    ]
    return candidates, LocalizationTrace(edges, reduced, bands)
