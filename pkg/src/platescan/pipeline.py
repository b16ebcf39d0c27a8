"""End-to-end recognition: one call from a decoded color image to a reading.

The stages follow the engine block diagram: grayscale, whole-frame deskew,
localization, then per-candidate segmentation and template matching, trying
candidates in rank order until one produces an acceptable reading.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import localization, segmentation
from .geometry import Rect
from .imaging import deskew, fit_within, map_point_from_rotated, normalize_glyph, to_grayscale
from .localization import CandidateRegion, NoPlateFound
from .raster import write_pgm
from .recognition import PlateReading, TemplateSet, read_plate
from .segmentation import NoCharacters, TooManyLines

FAILURE_NO_PLATE = "no-plate"
FAILURE_NO_CHARACTERS = "no-characters"
FAILURE_LOW_CONFIDENCE = "low-confidence"


class ConfigError(ValueError):
    """Pipeline configuration failed to parse or validate."""


class DumpIoError(OSError):
    """A diagnostics dump could not be written."""


@dataclass(frozen=True)
class PipelineConfig:
    """Every tunable constant of the pipeline, with its published default.

    Serializes to a flat key=value text file; unknown keys are rejected so a
    typo cannot silently fall back to a default.
    """

    edge_percentile: float = 0.97
    band_variance_ratio: float = 0.5
    column_strength_ratio: float = 0.5
    gap_tolerance_rows: int = 2
    min_band_height: int = 8
    max_candidates: int = 5
    crop_padding: int = 2
    min_area_frac: float = 0.005
    max_area_frac: float = 0.30
    min_aspect: float = 0.1
    max_aspect: float = 1.0
    min_existence: float = 0.2
    max_existence: float = 0.9
    min_height_ratio: float = 0.33
    max_height_ratio: float = 1.0
    height_slack_px: int = 1
    max_characters: int = 12
    dilation_radius: int = 1
    skew_range_deg: float = 5.0
    skew_step_deg: float = 0.5
    slant_range_deg: float = 15.0
    slant_step_deg: float = 1.0
    glyph_size: int = 32
    min_chars_accept: int = 4
    min_confidence_accept: float = 0.45
    max_input_side: int = 640

    def __post_init__(self):
        for name in ("edge_percentile", "band_variance_ratio", "column_strength_ratio"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ConfigError(f"{name}={value} outside (0, 1]")
        for name in ("min_band_height", "max_candidates", "max_characters",
                     "glyph_size", "min_chars_accept", "max_input_side"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.gap_tolerance_rows < 0 or self.crop_padding < 0 or self.dilation_radius < 0:
            raise ConfigError("gap tolerance, padding and dilation radius must be >= 0")
        if self.skew_step_deg <= 0 or self.slant_step_deg <= 0:
            raise ConfigError("search steps must be positive")

    def to_text(self) -> str:
        lines = [f"{f.name}={getattr(self, f.name)}" for f in dataclasses.fields(self)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PipelineConfig":
        known = {f.name: f.type for f in dataclasses.fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep:
                raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
            if key not in known:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            caster = int if known[key] == "int" else float
            try:
                values[key] = caster(value.strip())
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad value for {key!r}") from exc
        return cls(**values)

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_text(text)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")


@dataclass
class RecognitionResult:
    """Outcome of one recognition run.

    Exactly one of ``plate`` and ``failure`` is set.  ``plate_bounds`` is the
    chosen candidate rectangle mapped back to input-image coordinates, which
    is what evaluation tooling compares against ground truth.
    """

    plate: PlateReading | None = None
    candidate_used: int | None = None
    failure: str | None = None
    stage_timings: dict[str, float] = field(default_factory=dict)
    plate_bounds: Rect | None = None
    diagnostics: list[str] | None = None

    @property
    def ok(self) -> bool:
        return self.plate is not None


class _StageClock:
    def __init__(self):
        self.timings: dict[str, float] = {}
        self._t0 = time.perf_counter()

    def lap(self, stage: str) -> None:
        now = time.perf_counter()
        self.timings[stage] = round((now - self._t0) * 1000.0, 3)
        self._t0 = now


def recognize(img: np.ndarray, config: PipelineConfig,
              templates: TemplateSet) -> RecognitionResult:
    """Run the full pipeline on a decoded RGB image.

    Recognition failures are encoded in ``result.failure``, never raised;
    only undecodable input (handled by the callers that decode) is an error.
    """
    return _recognize(img, config, templates, dump=None)


def recognize_with_diagnostics(img: np.ndarray, config: PipelineConfig,
                               templates: TemplateSet,
                               dump_dir: str | Path) -> RecognitionResult:
    """Like :func:`recognize`, additionally writing numbered PGM stage dumps."""
    dump_dir = Path(dump_dir)
    try:
        dump_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DumpIoError(f"cannot create dump dir {dump_dir}: {exc}") from exc
    dump = _Dumper(dump_dir)
    result = _recognize(img, config, templates, dump=dump)
    result.diagnostics = dump.written
    return result


class _Dumper:
    def __init__(self, directory: Path):
        self.directory = directory
        self.written: list[str] = []

    def write(self, name: str, img: np.ndarray) -> None:
        path = self.directory / name
        try:
            write_pgm(path, img)
        except OSError as exc:
            raise DumpIoError(f"cannot write {path}: {exc}") from exc
        self.written.append(str(path))

    def write_text(self, name: str, text: str) -> None:
        path = self.directory / name
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise DumpIoError(f"cannot write {path}: {exc}") from exc
        self.written.append(str(path))


def _edge_to_u8(edges: np.ndarray) -> np.ndarray:
    peak = edges.max()
    if peak <= 0:
        return np.zeros(edges.shape, dtype=np.uint8)
    return np.floor(edges * (255.0 / peak) + 0.5).astype(np.uint8)


def _recognize(img: np.ndarray, config: PipelineConfig, templates: TemplateSet,
               dump: _Dumper | None) -> RecognitionResult:
    clock = _StageClock()
    working, scale = fit_within(img, config.max_input_side)
    gray = to_grayscale(working)
    clock.lap("grayscale")
    if dump:
        dump.write("01_gray.pgm", gray)

    deskewed, skew_angle = deskew(gray, config.skew_range_deg, config.skew_step_deg)
    clock.lap("deskew")
    if dump:
        dump.write("02_deskewed.pgm", deskewed)

    try:
        candidates, trace = localization.localize_plate_detailed(
            deskewed,
            edge_percentile=config.edge_percentile,
            variance_ratio=config.band_variance_ratio,
            strength_ratio=config.column_strength_ratio,
            gap_tolerance=config.gap_tolerance_rows,
            min_band_height=config.min_band_height,
            max_candidates=config.max_candidates,
            padding=config.crop_padding,
        )
    except NoPlateFound:
        clock.lap("localize")
        if dump:
            edges = localization.sobel_vertical(deskewed)
            dump.write("03_edges.pgm", _edge_to_u8(edges))
            dump.write("04_reduced.pgm",
                       localization.reduce_edge_map(edges, config.edge_percentile) * np.uint8(255))
        return RecognitionResult(failure=FAILURE_NO_PLATE, stage_timings=clock.timings)
    clock.lap("localize")
    if dump:
        dump.write("03_edges.pgm", _edge_to_u8(trace.edges))
        dump.write("04_reduced.pgm", trace.reduced * np.uint8(255))
        band_mask = np.zeros(deskewed.shape, dtype=np.uint8)
        for r0, r1 in trace.bands:
            band_mask[r0:r1] = 255
        dump.write("05_bands.pgm", band_mask)
        dump.write("05_candidates.pgm", _rectangles_overlay(deskewed, candidates))

    filter_rules = dict(
        min_area_frac=config.min_area_frac,
        max_area_frac=config.max_area_frac,
        min_aspect=config.min_aspect,
        max_aspect=config.max_aspect,
        min_existence=config.min_existence,
        max_existence=config.max_existence,
        min_height_ratio=config.min_height_ratio,
        max_height_ratio=config.max_height_ratio,
        height_slack_px=config.height_slack_px,
        max_count=config.max_characters,
    )

    readings: list[tuple[CandidateRegion, PlateReading]] = []
    saw_reading = False
    for cand in candidates:
        try:
            segments, seg_trace = segmentation.segment_plate_detailed(
                cand.crop,
                dilation_radius=config.dilation_radius,
                slant_range=config.slant_range_deg,
                slant_step=config.slant_step_deg,
                **filter_rules,
            )
        except (NoCharacters, TooManyLines):
            clock.lap(f"candidate_{cand.rank}")
            continue
        if dump:
            dump.write(f"06_components_{cand.rank}.pgm", _component_image(segments))
            dump.write_text(f"06_rejections_{cand.rank}.txt",
                            _rejection_report(seg_trace))
        glyphs = []
        for index, (_, sub) in enumerate(segments):
            glyph = normalize_glyph(sub, _tight_box(sub), config.glyph_size)
            glyphs.append(glyph)
            if dump:
                dump.write(f"07_glyph_{cand.rank}_{index}.pgm", glyph * np.uint8(255))
        reading = read_plate(glyphs, templates)
        clock.lap(f"candidate_{cand.rank}")
        saw_reading = True
        if (len(reading.text) >= config.min_chars_accept
                and reading.confidence >= config.min_confidence_accept):
            return _success(cand, reading, clock, skew_angle, scale, img, working, dump)
        readings.append((cand, reading))

    eligible = [(c, r) for c, r in readings if len(r.text) >= config.min_chars_accept]
    if eligible:
        cand, reading = max(eligible, key=lambda item: (item[1].confidence, -item[0].rank))
        return _success(cand, reading, clock, skew_angle, scale, img, working, dump)
    failure = FAILURE_LOW_CONFIDENCE if saw_reading else FAILURE_NO_CHARACTERS
    return RecognitionResult(failure=failure, stage_timings=clock.timings)


def _success(cand: CandidateRegion, reading: PlateReading, clock: _StageClock,
             skew_angle: float, scale: float, original: np.ndarray,
             working: np.ndarray, dump: _Dumper | None) -> RecognitionResult:
    bounds = _bounds_in_input(cand.bounds, working.shape[:2], skew_angle,
                              scale, original.shape[:2])
    return RecognitionResult(plate=reading, candidate_used=cand.rank,
                             stage_timings=clock.timings, plate_bounds=bounds)


def _tight_box(bits: np.ndarray) -> Rect:
    rows = np.flatnonzero(bits.any(axis=1))
    cols = np.flatnonzero(bits.any(axis=0))
    return Rect(int(rows[0]), int(cols[0]), int(rows[-1]) + 1, int(cols[-1]) + 1)


def _bounds_in_input(rect: Rect, working_shape: tuple[int, int], skew_angle: float,
                     scale: float, input_shape: tuple[int, int]) -> Rect:
    """Map a rectangle from the deskewed working frame back to input pixels."""
    corners = [(rect.r0, rect.c0), (rect.r0, rect.c1 - 1),
               (rect.r1 - 1, rect.c0), (rect.r1 - 1, rect.c1 - 1)]
    mapped = [map_point_from_rotated(p, working_shape, skew_angle) for p in corners]
    rows = [p[0] / scale for p in mapped]
    cols = [p[1] / scale for p in mapped]
    h, w = input_shape
    return Rect(
        max(0, int(np.floor(min(rows)))),
        max(0, int(np.floor(min(cols)))),
        min(h, int(np.ceil(max(rows))) + 1),
        min(w, int(np.ceil(max(cols))) + 1),
    )


def _rectangles_overlay(gray: np.ndarray, candidates) -> np.ndarray:
    """Candidate rectangles traced in white over a dimmed copy of the frame."""
    overlay = (gray // 2).astype(np.uint8)
    for cand in candidates:
        b = cand.bounds
        overlay[b.r0:b.r1, b.c0] = 255
        overlay[b.r0:b.r1, b.c1 - 1] = 255
        overlay[b.r0, b.c0:b.c1] = 255
        overlay[b.r1 - 1, b.c0:b.c1] = 255
    return overlay


def _rejection_report(trace) -> str:
    lines = []
    for comp, reason in trace.verdicts:
        b = comp.bounds
        verdict = reason if reason else "kept"
        lines.append(f"({b.r0},{b.c0})-({b.r1},{b.c1}) px={comp.pixel_count}: {verdict}")
    return "\n".join(lines) + "\n"


def _component_image(segments) -> np.ndarray:
    """Visualize ordered character boxes as distinct gray levels."""
    max_r = max(cb.component.bounds.r1 for cb, _ in segments)
    max_c = max(cb.component.bounds.c1 for cb, _ in segments)
    canvas = np.zeros((max_r, max_c), dtype=np.uint8)
    step = 255 // max(1, len(segments))
    for index, (cb, sub) in enumerate(segments):
        b = cb.component.bounds
        level = np.uint8(min(255, step * (index + 1)))
        region = canvas[b.r0:b.r1, b.c0:b.c1]
        region[sub > 0] = level
    return canvas
