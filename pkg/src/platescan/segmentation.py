"""Character isolation inside a binarized plate crop.

Connected-component labeling runs on a dilated copy of the binary so broken
strokes merge into one component, but glyph pixels are always taken from the
undilated map: fattened strokes would distort correlation scores downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Rect
from .imaging import binarize, deslant, dilate, otsu_threshold

# Filter rule defaults; all are exposed through the pipeline configuration.
DEFAULT_MIN_AREA_FRAC = 0.005
DEFAULT_MAX_AREA_FRAC = 0.30
DEFAULT_MIN_ASPECT = 0.1
DEFAULT_MAX_ASPECT = 1.0
DEFAULT_MIN_EXISTENCE = 0.2
DEFAULT_MAX_EXISTENCE = 0.9
DEFAULT_MIN_HEIGHT_RATIO = 0.33
DEFAULT_MAX_HEIGHT_RATIO = 1.0
DEFAULT_HEIGHT_SLACK_PX = 1
DEFAULT_MAX_CHARACTERS = 12
DEFAULT_DILATION_RADIUS = 1

LINE_GAP_FACTOR = 0.5
MIN_TWO_LINE_SHARE = 0.7
MIN_CROP_SIDE = 8


class NoCharacters(ValueError):
    """Filtering left no character-like components in the crop."""


class TooManyLines(ValueError):
    """Row clustering found more than two lines and no dominant pair."""


@dataclass(frozen=True)
class ComponentBox:
    """One 8-connected foreground blob."""

    bounds: Rect
    pixel_count: int
    centroid: tuple[float, float]


@dataclass(frozen=True)
class CharacterBox:
    """A kept component placed into reading order."""

    component: ComponentBox
    line_index: int
    position_in_line: int


def label_image(bits: np.ndarray) -> tuple[np.ndarray, int]:
    """8-connected labeling; returns (labels, count) with 0 as background.

    Uses run-based union-find: foreground runs are extracted per row and
    merged with overlapping runs of the previous row.  Surviving labels are
    renumbered 1..count in (top row, left column) order of first appearance.
    """
    if bits.size == 0:
        raise ValueError("empty image")
    h, w = bits.shape
    parent: list[int] = []

    def find(i: int) -> int:
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    runs: list[tuple[int, int, int, int]] = []  # (row, c0, c1 inclusive, run id)
    prev: list[tuple[int, int, int]] = []  # (c0, c1, run id) of the row above
    for r in range(h):
        cols = np.flatnonzero(bits[r])
        if cols.size == 0:
            prev = []
            continue
        breaks = np.flatnonzero(np.diff(cols) > 1)
        starts = np.concatenate(([0], breaks + 1))
        ends = np.concatenate((breaks, [cols.size - 1]))
        cur: list[tuple[int, int, int]] = []
        k = 0
        for s, e in zip(starts, ends):
            c0, c1 = int(cols[s]), int(cols[e])
            rid = len(parent)
            parent.append(rid)
            runs.append((r, c0, c1, rid))
            # 8-connectivity: a previous-row run touches if it overlaps
            # [c0-1, c1+1].  Runs ending left of that stay irrelevant for
            # every later run in this row, so the skip pointer is monotone.
            while k < len(prev) and prev[k][1] < c0 - 1:
                k += 1
            t = k
            while t < len(prev) and prev[t][0] <= c1 + 1:
                union(rid, prev[t][2])
                t += 1
            cur.append((c0, c1, rid))
        prev = cur

    labels = np.zeros((h, w), dtype=np.int32)
    renumber: dict[int, int] = {}
    for r, c0, c1, rid in runs:
        root = find(rid)
        if root not in renumber:
            renumber[root] = len(renumber) + 1
        labels[r, c0:c1 + 1] = renumber[root]
    return labels, len(renumber)


def _component_stats(labels: np.ndarray, count: int,
                     pixels: np.ndarray) -> list[ComponentBox]:
    """Per-label boxes measured over the foreground of ``pixels``.

    ``pixels`` may be a subset of the labeled foreground (the undilated
    binary under dilated labels); labels whose pixel set is empty are
    dropped.
    """
    ys, xs = np.nonzero(pixels)
    ls = labels[ys, xs]
    keep = ls > 0
    ys, xs, ls = ys[keep], xs[keep], ls[keep]
    if ys.size == 0:
        return []
    n = count + 1
    sizes = np.bincount(ls, minlength=n)
    row_sum = np.bincount(ls, weights=ys, minlength=n)
    col_sum = np.bincount(ls, weights=xs, minlength=n)
    r_min = np.full(n, np.iinfo(np.int32).max)
    r_max = np.full(n, -1)
    c_min = np.full(n, np.iinfo(np.int32).max)
    c_max = np.full(n, -1)
    np.minimum.at(r_min, ls, ys)
    np.maximum.at(r_max, ls, ys)
    np.minimum.at(c_min, ls, xs)
    np.maximum.at(c_max, ls, xs)

    boxes = []
    for label in range(1, n):
        size = int(sizes[label])
        if size == 0:
            continue
        boxes.append(ComponentBox(
            Rect(int(r_min[label]), int(c_min[label]),
                 int(r_max[label]) + 1, int(c_max[label]) + 1),
            size,
            (row_sum[label] / size, col_sum[label] / size)))
    boxes.sort(key=lambda b: (b.bounds.r0, b.bounds.c0))
    return boxes


def connected_components(bits: np.ndarray) -> list[ComponentBox]:
    """One ComponentBox per 8-connected foreground blob.

    Output is sorted by (top row, left column) for determinism, though
    callers re-sort anyway.
    """
    labels, count = label_image(bits)
    return _component_stats(labels, count, bits)


def filter_components(components: list[ComponentBox],
                      crop_dims: tuple[int, int],
                      **rules) -> list[ComponentBox]:
    """Drop non-character components by area, aspect, existence and height rules.

    ``crop_dims`` is (width, height) of the crop the components came from.
    The existence ratio is the foreground density of the bounding box: plate
    borders are hollow (low), solid logos are dense (high), characters sit in
    between.  The height band is relative to the median height of components
    passing the first three rules; the upper bound carries a one-pixel
    measurement allowance because binarized box heights jitter under noise,
    and near-equal characters must all survive.
    """
    return [comp for comp, reason in filter_verdicts(components, crop_dims, **rules)
            if reason is None]


def filter_verdicts(components: list[ComponentBox],
                    crop_dims: tuple[int, int],
                    min_area_frac: float = DEFAULT_MIN_AREA_FRAC,
                    max_area_frac: float = DEFAULT_MAX_AREA_FRAC,
                    min_aspect: float = DEFAULT_MIN_ASPECT,
                    max_aspect: float = DEFAULT_MAX_ASPECT,
                    min_existence: float = DEFAULT_MIN_EXISTENCE,
                    max_existence: float = DEFAULT_MAX_EXISTENCE,
                    min_height_ratio: float = DEFAULT_MIN_HEIGHT_RATIO,
                    max_height_ratio: float = DEFAULT_MAX_HEIGHT_RATIO,
                    height_slack_px: int = DEFAULT_HEIGHT_SLACK_PX,
                    max_count: int = DEFAULT_MAX_CHARACTERS,
                    ) -> list[tuple[ComponentBox, str | None]]:
    """Like :func:`filter_components` but keeps every component with its
    verdict: None for kept, otherwise the rejecting rule."""
    w, h = crop_dims
    if w <= 0 or h <= 0:
        raise ValueError("crop dims must be positive")
    crop_area = float(w * h)

    verdicts: dict[int, str | None] = {}
    prelim = []
    for index, comp in enumerate(components):
        area_frac = comp.bounds.area / crop_area
        aspect = comp.bounds.width / comp.bounds.height
        existence = comp.pixel_count / comp.bounds.area
        if not min_area_frac <= area_frac <= max_area_frac:
            verdicts[index] = f"area fraction {area_frac:.4f} outside " \
                              f"[{min_area_frac}, {max_area_frac}]"
        elif not min_aspect <= aspect <= max_aspect:
            verdicts[index] = f"aspect {aspect:.2f} outside [{min_aspect}, {max_aspect}]"
        elif not min_existence <= existence <= max_existence:
            verdicts[index] = f"existence {existence:.2f} outside " \
                              f"[{min_existence}, {max_existence}]"
        else:
            prelim.append((index, comp))

    if prelim:
        median_h = float(np.median([c.bounds.height for _, c in prelim]))
        survivors = []
        for index, comp in prelim:
            height = comp.bounds.height
            if not (min_height_ratio * median_h <= height
                    <= max_height_ratio * median_h + height_slack_px):
                verdicts[index] = f"height {height} outside " \
                                  f"[{min_height_ratio}, {max_height_ratio}] x median {median_h}"
            else:
                survivors.append((index, comp))
        if len(survivors) > max_count:
            ranked = sorted(survivors, key=lambda item: -item[1].bounds.area)
            for index, _ in ranked[max_count:]:
                verdicts[index] = f"beyond the {max_count} largest by area"
            keep_indices = {index for index, _ in ranked[:max_count]}
            survivors = [(i, c) for i, c in survivors if i in keep_indices]
        for index, _ in survivors:
            verdicts[index] = None

    return [(comp, verdicts[index]) for index, comp in enumerate(components)]


def order_characters(kept: list[ComponentBox]) -> list[CharacterBox]:
    """Arrange components into reading order over at most two lines.

    Components are clustered into lines by centroid row: a new line starts
    when the row gap between consecutive centroids exceeds half the median
    component height.  With more than two clusters the two most populous are
    kept if they hold at least 70% of the components; otherwise the crop is
    declared mis-segmented.
    """
    if not kept:
        raise ValueError("no components to order")
    by_row = sorted(kept, key=lambda c: (c.centroid[0], c.centroid[1]))
    median_h = float(np.median([c.bounds.height for c in kept]))
    gap_limit = LINE_GAP_FACTOR * median_h

    clusters: list[list[ComponentBox]] = [[by_row[0]]]
    for comp in by_row[1:]:
        if comp.centroid[0] - clusters[-1][-1].centroid[0] > gap_limit:
            clusters.append([comp])
        else:
            clusters[-1].append(comp)

    if len(clusters) > 2:
        ranked = sorted(range(len(clusters)),
                        key=lambda i: (-len(clusters[i]), i))
        top_two = sorted(ranked[:2])
        share = sum(len(clusters[i]) for i in top_two) / len(kept)
        if share < MIN_TWO_LINE_SHARE:
            raise TooManyLines(
                f"{len(clusters)} row clusters and the two largest hold only {share:.0%}")
        clusters = [clusters[i] for i in top_two]

    ordered = []
    for line_index, line in enumerate(clusters):
        for pos, comp in enumerate(sorted(line, key=lambda c: c.centroid[1])):
            ordered.append(CharacterBox(comp, line_index, pos))
    return ordered


@dataclass(frozen=True)
class SegmentationTrace:
    """Intermediate stages kept for diagnostics dumps."""

    binary: np.ndarray
    verdicts: list[tuple[ComponentBox, str | None]]


def segment_plate(crop: np.ndarray,
                  dilation_radius: int = DEFAULT_DILATION_RADIUS,
                  slant_range: float = 15.0,
                  slant_step: float = 1.0,
                  **filter_rules) -> list[tuple[CharacterBox, np.ndarray]]:
    """Isolate ordered character sub-images from a grayscale plate crop.

    Chain: Otsu binarize -> deslant -> dilate -> connected components ->
    rule filtering -> reading order.  Dilation bridges broken strokes for
    labeling only: every measurement (pixel counts, boxes, centroids) and
    every returned sub-image comes from the undilated binary.
    Raises :class:`NoCharacters` when nothing character-like remains.
    """
    segments, _ = segment_plate_detailed(crop, dilation_radius, slant_range,
                                         slant_step, **filter_rules)
    return segments


def segment_plate_detailed(crop: np.ndarray,
                           dilation_radius: int = DEFAULT_DILATION_RADIUS,
                           slant_range: float = 15.0,
                           slant_step: float = 1.0,
                           **filter_rules,
                           ) -> tuple[list[tuple[CharacterBox, np.ndarray]],
                                      SegmentationTrace]:
    """Like :func:`segment_plate` but also returns the intermediate stages."""
    h, w = crop.shape
    if h < MIN_CROP_SIDE or w < MIN_CROP_SIDE:
        raise NoCharacters(f"crop {h}x{w} below minimum {MIN_CROP_SIDE}")
    threshold = otsu_threshold(crop)
    if threshold.degenerate:
        raise NoCharacters("crop is featureless (single-bin histogram)")
    binary = deslant(binarize(crop, threshold), slant_range, slant_step)
    labels, count = label_image(dilate(binary, dilation_radius))
    components = _component_stats(labels, count, binary)
    verdicts = filter_verdicts(components, (binary.shape[1], binary.shape[0]),
                               **filter_rules)
    kept = [comp for comp, reason in verdicts if reason is None]
    if not kept:
        raise NoCharacters("no component passed the character rules")
    ordered = order_characters(kept)
    segments = [(cb, binary[cb.component.bounds.r0:cb.component.bounds.r1,
                            cb.component.bounds.c0:cb.component.bounds.c1].copy())
                for cb in ordered]
    return segments, SegmentationTrace(binary, verdicts)
