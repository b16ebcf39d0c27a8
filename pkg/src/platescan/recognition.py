"""Template-matching character recognition.

Each normalized 32x32 glyph is scored against a reference set of the 26
capital letters and 10 digits by Pearson correlation over the paired bits;
the best-scoring label wins.
"""

from __future__ import annotations

import zipfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import raster
from .imaging import GLYPH_SIZE

# Fixed tie-break order: letters before digits.
ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"


class TemplateError(ValueError):
    """Template archive failed validation."""

    def __init__(self, label: str | None, message: str):
        super().__init__(message)
        self.label = label


class MissingLabel(TemplateError):
    def __init__(self, label: str):
        super().__init__(label, f"archive is missing template {label!r}")


class DuplicateLabel(TemplateError):
    def __init__(self, label: str):
        super().__init__(label, f"archive defines template {label!r} twice")


class BadDimensions(TemplateError):
    def __init__(self, label: str, shape: tuple[int, ...]):
        super().__init__(label, f"template {label!r} has shape {shape}, expected "
                                f"{GLYPH_SIZE}x{GLYPH_SIZE}")


class ConstantTemplate(TemplateError):
    def __init__(self, label: str):
        super().__init__(label, f"template {label!r} is constant (all background or all ink)")


@dataclass(frozen=True)
class Template:
    label: str
    bits: np.ndarray


class TemplateSet:
    """Immutable, validated set of 36 reference templates.

    Safe to share across threads; construction is the only mutation.
    """

    def __init__(self, templates: list[Template], version: str):
        by_label = {}
        for t in templates:
            if t.label in by_label:
                raise DuplicateLabel(t.label)
            by_label[t.label] = t
        for label in ALPHABET:
            if label not in by_label:
                raise MissingLabel(label)
            t = by_label[label]
            if t.bits.shape != (GLYPH_SIZE, GLYPH_SIZE):
                raise BadDimensions(label, t.bits.shape)
            if t.bits.min() == t.bits.max():
                raise ConstantTemplate(label)
        self.templates = [by_label[label] for label in ALPHABET]
        self.version = version

    def __len__(self) -> int:
        return len(self.templates)

    def __getitem__(self, label: str) -> Template:
        return self.templates[ALPHABET.index(label)]


@dataclass(frozen=True)
class CharacterResult:
    label: str
    score: float
    runner_up: tuple[str, float]


@dataclass(frozen=True)
class PlateReading:
    text: str
    characters: list[CharacterResult]
    confidence: float


def correlation(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation of two equal-shaped bit grids.

    Returns 0.0 when either grid has zero variance, so a featureless glyph
    can never outscore a genuine positive match.
    """
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    am = a.astype(np.float64) - a.mean()
    bm = b.astype(np.float64) - b.mean()
    var_a = float(np.mean(am * am))
    var_b = float(np.mean(bm * bm))
    if var_a == 0.0 or var_b == 0.0:
        return 0.0
    return float(np.mean(am * bm)) / float(np.sqrt(var_a * var_b))


def classify_glyph(glyph: np.ndarray, templates: TemplateSet) -> CharacterResult:
    """Label a glyph by its best-correlating template.

    Ties go to the earliest label in A..Z0..9 order.
    """
    scores = [correlation(glyph, t.bits) for t in templates.templates]
    best = max(range(len(scores)), key=lambda i: (scores[i], -i))
    rest = [i for i in range(len(scores)) if i != best]
    second = max(rest, key=lambda i: (scores[i], -i))
    return CharacterResult(ALPHABET[best], scores[best],
                           (ALPHABET[second], scores[second]))


def read_plate(glyphs: list[np.ndarray], templates: TemplateSet) -> PlateReading:
    """Classify an ordered glyph sequence into a plate reading."""
    if not glyphs:
        raise ValueError("need at least one glyph")
    results = [classify_glyph(g, templates) for g in glyphs]
    text = "".join(r.label for r in results)
    confidence = sum(r.score for r in results) / len(results)
    return PlateReading(text, results, confidence)


MANIFEST_NAME = "manifest.txt"


def load_templates(source: str | Path) -> TemplateSet:
    """Load and validate a template archive (directory or zip).

    The archive holds 36 PGM files named ``<LABEL>.pgm`` (32x32, nominally
    {0, 255}; any value >= 128 reads as ink) plus ``manifest.txt`` with a
    ``version=<string>`` line.
    """
    source = Path(source)
    if source.is_dir():
        entries = {p.name: p.read_bytes() for p in sorted(source.iterdir()) if p.is_file()}
    elif zipfile.is_zipfile(source):
        with zipfile.ZipFile(source) as zf:
            entries = {Path(n).name: zf.read(n) for n in sorted(zf.namelist())
                       if not n.endswith("/")}
    else:
        raise TemplateError(None, f"{source} is neither a directory nor a zip archive")

    if MANIFEST_NAME not in entries:
        raise TemplateError(None, f"{source} has no {MANIFEST_NAME}")
    version = None
    for line in entries[MANIFEST_NAME].decode("utf-8").splitlines():
        key, _, value = line.partition("=")
        if key.strip() == "version":
            version = value.strip()
    if not version:
        raise TemplateError(None, f"{MANIFEST_NAME} lacks a version= line")

    templates = []
    seen = set()
    for name, data in entries.items():
        stem, dot, ext = name.partition(".")
        if ext != "pgm":
            continue
        label = stem.upper()
        if label not in ALPHABET:
            continue
        if label in seen:
            raise DuplicateLabel(label)
        seen.add(label)
        pixels = raster.parse_pgm(data, name)
        if pixels.shape != (GLYPH_SIZE, GLYPH_SIZE):
            raise BadDimensions(label, pixels.shape)
        templates.append(Template(label, (pixels >= 128).astype(np.uint8)))
    return TemplateSet(templates, version)


def default_template_path() -> Path:
    """Location of the template archive bundled with the package."""
    return Path(__file__).parent / "data" / "templates"
