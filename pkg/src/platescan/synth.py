"""Synthetic plate-scene generator with exact ground truth.

Scenes follow the mobile capture regime: 640x480 or smaller, one plate per
scene, variable lighting, optional shadow gradient, rotation and sensor
noise.  Plate texts follow the Indian format (state code, two district
digits, one or two series letters, four digits); series letters skip I and O,
which registration offices avoid because they read as 1 and 0.

Everything is driven by one seeded generator, so a (seed, parameters) pair
reproduces the corpus byte for byte.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .geometry import Rect
from .glyphs import GlyphAtlas
from .imaging import rotate_bilinear
from .raster import save_png

STATE_CODES = [
    "AP", "AS", "BR", "CG", "CH", "DL", "GA", "GJ", "HP", "HR", "JH", "JK",
    "KA", "KL", "MH", "ML", "MN", "MP", "MZ", "NL", "PB", "PY", "RJ", "SK",
    "TN", "TR", "TS", "UK", "UP", "WB",
]
SERIES_LETTERS = "ABCDEFGHJKLMNPQRSTUVWXYZ"  # no I, no O
TRUTH_FILE = "truth.csv"
META_FILE = "meta.json"


@dataclass(frozen=True)
class SceneTruth:
    """Ground truth for one generated scene."""

    image_name: str
    plate_text: str
    bounds: Rect
    line_count: int
    rotation_deg: float
    char_height: int


@dataclass(frozen=True)
class SynthConfig:
    count: int
    seed: int = 0
    noise_sigma: float = 0.0
    max_skew_deg: float = 0.0
    lines: int = 1
    shadow: bool = False
    decor: bool = False  # border frame + logo disc on the plate
    width: int = 640
    height: int = 480
    min_char_height: int = 22
    max_char_height: int = 28

    def __post_init__(self):
        if self.lines not in (1, 2):
            raise ValueError("lines must be 1 or 2")
        if self.count < 0 or self.noise_sigma < 0 or self.max_skew_deg < 0:
            raise ValueError("count, noise and skew must be non-negative")


def random_plate_text(rng: np.random.Generator) -> str:
    code = STATE_CODES[rng.integers(len(STATE_CODES))]
    district = f"{rng.integers(1, 100):02d}"
    series = "".join(SERIES_LETTERS[rng.integers(len(SERIES_LETTERS))]
                     for _ in range(int(rng.integers(1, 3))))
    number = f"{rng.integers(0, 10000):04d}"
    return code + district + series + number


def _split_lines(text: str, lines: int) -> list[str]:
    # Two-line plates carry the four-digit number on the bottom line.
    if lines == 1:
        return [text]
    return [text[:-4], text[-4:]]


def render_plate(text: str, lines: int, char_height: int,
                 rng: np.random.Generator, atlas: GlyphAtlas,
                 shadow: bool = False, decor: bool = False) -> np.ndarray:
    """Render a plate as a float array in [0, 255]."""
    h = char_height
    gap = max(5, int(round(0.16 * h)))
    line_gap = int(round(0.5 * h))
    pad_y = max(4, int(round(0.12 * h))) if not decor else max(9, int(round(0.22 * h)))
    pad_x = max(8, int(round(0.24 * h))) if not decor else max(9, int(round(0.28 * h)))

    ink = float(rng.integers(15, 61))
    paper = float(rng.integers(195, 246))

    line_masks = []
    for line in _split_lines(text, lines):
        masks = [atlas.scaled(c, h) for c in line]
        if any(m is None for m in masks):
            raise ValueError(f"font cannot render every character of {line!r}")
        width = sum(m.shape[1] for m in masks) + gap * (len(masks) - 1)
        row = np.zeros((h, width))
        x = 0
        for m in masks:
            row[:, x:x + m.shape[1]] = np.maximum(row[:, x:x + m.shape[1]], m)
            x += m.shape[1] + gap
        line_masks.append(row)

    logo_w = 0
    if decor:
        logo_w = int(round(0.28 * h)) + gap
    text_w = max(m.shape[1] for m in line_masks)
    plate_w = text_w + logo_w + 2 * pad_x
    plate_h = sum(m.shape[0] for m in line_masks) + line_gap * (len(line_masks) - 1) + 2 * pad_y

    mask = np.zeros((plate_h, plate_w))
    y = pad_y
    for row in line_masks:
        x = pad_x + logo_w + (text_w - row.shape[1]) // 2
        mask[y:y + row.shape[0], x:x + row.shape[1]] = row
        y += row.shape[0] + line_gap

    if decor:
        # Painted border frame, 2 px at a 1 px inset.
        mask[1:3, 1:-1] = 1.0
        mask[-3:-1, 1:-1] = 1.0
        mask[1:-1, 1:3] = 1.0
        mask[1:-1, -3:-1] = 1.0
        d = int(round(0.28 * h))
        cy = pad_y + h // 2
        cx = pad_x + d // 2
        yy, xx = np.ogrid[:plate_h, :plate_w]
        disc = ((yy - cy) ** 2 + (xx - cx) ** 2) <= (d / 2.0) ** 2
        mask[disc] = 1.0

    plate = paper + (ink - paper) * mask
    # Surface grain: embossing texture, dust and wear.  Besides looking
    # right, it floors the localization column profile so sparse letters
    # (L, T, 7) and the first/last characters stay above the strength cut.
    plate += rng.normal(0.0, rng.uniform(8.0, 14.0), plate.shape)
    if shadow:
        lo = rng.uniform(0.7, 0.85)
        ramp = np.linspace(1.0, lo, plate_w) if rng.random() < 0.5 \
            else np.linspace(lo, 1.0, plate_w)
        plate = plate * ramp[np.newaxis, :]
    return plate


def _background(rng: np.random.Generator, height: int, width: int) -> np.ndarray:
    top = float(rng.integers(70, 150))
    bottom = float(rng.integers(70, 170))
    base = np.linspace(top, bottom, height)[:, np.newaxis] * np.ones((1, width))
    # Low-frequency blobs plus fine grain.  The grain matters: it populates
    # the edge map with weak positives everywhere, the way asphalt, bumper
    # texture and sensor grain do, so the strongest-percentile cut keeps the
    # character strokes rather than climbing into them.
    from .imaging import resize_bilinear
    coarse = rng.uniform(-14.0, 14.0, size=(6, 8))
    base += resize_bilinear(coarse, height, width)
    base += rng.normal(0.0, 2.5, size=(height, width))
    return base


def _box_blur(img: np.ndarray, radius: int) -> np.ndarray:
    kernel = np.ones(2 * radius + 1) / (2 * radius + 1)
    out = np.apply_along_axis(lambda r: np.convolve(r, kernel, mode="same"), 1, img)
    return np.apply_along_axis(lambda c: np.convolve(c, kernel, mode="same"), 0, out)


def _compose_scene(plate: np.ndarray, rotation_deg: float,
                   rng: np.random.Generator, cfg: SynthConfig) -> tuple[np.ndarray, Rect]:
    scene = _background(rng, cfg.height, cfg.width)
    ph, pw = plate.shape
    slack = int(np.ceil(0.5 * (np.hypot(ph, pw) - min(ph, pw)))) + 2
    canvas = np.zeros((ph + 2 * slack, pw + 2 * slack))
    alpha = np.zeros_like(canvas)
    canvas[slack:slack + ph, slack:slack + pw] = plate
    alpha[slack:slack + ph, slack:slack + pw] = 1.0
    if rotation_deg != 0.0:
        canvas = rotate_bilinear(canvas, rotation_deg)
        alpha = rotate_bilinear(alpha, rotation_deg)
    # Feather the plate boundary: a hard paper-to-background step would be a
    # stronger vertical edge than any character stroke, which is not how
    # slightly defocused captures look.
    alpha = _box_blur(alpha, 2)

    rows = np.flatnonzero(alpha.max(axis=1) > 0.5)
    cols = np.flatnonzero(alpha.max(axis=0) > 0.5)
    canvas = canvas[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1]
    alpha = alpha[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1]

    ch, cw = canvas.shape
    margin = 8
    if ch + 2 * margin > cfg.height or cw + 2 * margin > cfg.width:
        raise ValueError(f"plate {cw}x{ch} does not fit the {cfg.width}x{cfg.height} scene")
    r0 = int(rng.integers(margin, cfg.height - ch - margin + 1))
    c0 = int(rng.integers(margin, cfg.width - cw - margin + 1))
    region = scene[r0:r0 + ch, c0:c0 + cw]
    scene[r0:r0 + ch, c0:c0 + cw] = region * (1.0 - alpha) + canvas * alpha
    return scene, Rect(r0, c0, r0 + ch, c0 + cw)


def generate_scene(cfg: SynthConfig, rng: np.random.Generator,
                   atlas: GlyphAtlas, index: int) -> tuple[np.ndarray, SceneTruth]:
    """Render one scene; returns the RGB image and its truth record."""
    text = random_plate_text(rng)
    char_height = int(rng.integers(cfg.min_char_height, cfg.max_char_height + 1))
    rotation = float(rng.uniform(-cfg.max_skew_deg, cfg.max_skew_deg)) if cfg.max_skew_deg else 0.0
    plate = render_plate(text, cfg.lines, char_height, rng, atlas,
                         shadow=cfg.shadow, decor=cfg.decor)
    scene, bounds = _compose_scene(plate, rotation, rng, cfg)
    if cfg.noise_sigma > 0:
        scene = scene + rng.normal(0.0, cfg.noise_sigma, scene.shape)
    gray = np.clip(np.floor(scene + 0.5), 0, 255).astype(np.uint8)
    rgb = np.stack([gray, gray, gray], axis=2)
    truth = SceneTruth(f"scene_{index:04d}.png", text, bounds, cfg.lines,
                       rotation, char_height)
    return rgb, truth


def generate_corpus(out_dir: str | Path, cfg: SynthConfig,
                    font_path: str | Path | None = None) -> list[SceneTruth]:
    """Write ``cfg.count`` scenes plus truth.csv and meta.json to ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(cfg.seed)
    atlas = GlyphAtlas(font_path)

    truths = []
    for i in range(cfg.count):
        rgb, truth = generate_scene(cfg, rng, atlas, i)
        save_png(out_dir / truth.image_name, rgb)
        truths.append(truth)

    write_truth_file(out_dir / TRUTH_FILE, truths)
    meta = {
        "generator": asdict(cfg),
        "scenes": [{"image": t.image_name, "rotation_deg": t.rotation_deg,
                    "char_height": t.char_height} for t in truths],
    }
    (out_dir / META_FILE).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return truths


def write_truth_file(path: str | Path, truths: list[SceneTruth]) -> None:
    """Ground-truth CSV: header ``image,plate,bounds,lines`` with bounds as
    half-open ``r0:c0:r1:c1``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["image", "plate", "bounds", "lines"])
        for t in truths:
            b = t.bounds
            writer.writerow([t.image_name, t.plate_text,
                             f"{b.r0}:{b.c0}:{b.r1}:{b.c1}", t.line_count])
