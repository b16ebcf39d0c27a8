import zipfile

import numpy as np
import pytest

from platescan import recognition
from platescan.imaging import GLYPH_SIZE
from platescan.raster import write_pgm
from platescan.recognition import (
    ALPHABET,
    BadDimensions,
    ConstantTemplate,
    DuplicateLabel,
    MissingLabel,
    Template,
    TemplateError,
    TemplateSet,
    correlation,
)


def correlation_oracle(a: np.ndarray, b: np.ndarray) -> float:
    """Direct covariance-formula oracle: E[xy] - E[x]E[y] over explicit sums."""
    x = a.astype(np.float64).ravel()
    y = b.astype(np.float64).ravel()
    n = x.size
    ex = x.sum() / n
    ey = y.sum() / n
    cov = (x * y).sum() / n - ex * ey
    vx = (x * x).sum() / n - ex * ex
    vy = (y * y).sum() / n - ey * ey
    if vx <= 0 or vy <= 0:
        return 0.0
    return cov / np.sqrt(vx * vy)


def random_glyph(rng, density=None):
    density = density if density is not None else rng.uniform(0.2, 0.8)
    return (rng.random((GLYPH_SIZE, GLYPH_SIZE)) < density).astype(np.uint8)


class TestCorrelation:
    def test_self_is_exactly_one(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            g = random_glyph(rng)
            assert correlation(g, g) == 1.0

    def test_complement_is_exactly_minus_one(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            g = random_glyph(rng)
            assert correlation(g, 1 - g) == -1.0

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            a, b = random_glyph(rng), random_glyph(rng)
            assert correlation(a, b) == pytest.approx(correlation_oracle(a, b), abs=1e-12)

    def test_symmetric_and_bounded(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            a, b = random_glyph(rng), random_glyph(rng)
            s = correlation(a, b)
            assert s == correlation(b, a)
            assert -1.0 <= s <= 1.0

    def test_zero_variance_returns_zero(self):
        rng = np.random.default_rng(4)
        g = random_glyph(rng)
        assert correlation(np.zeros_like(g), g) == 0.0
        assert correlation(g, np.ones_like(g)) == 0.0


class TestClassify:
    def test_template_self_match(self, templates):
        result = recognition.classify_glyph(templates["K"].bits, templates)
        assert result.label == "K" and result.score == 1.0
        assert result.runner_up[1] < 1.0

    def test_full_self_recognition_sweep(self, templates):
        for t in templates.templates:
            result = recognition.classify_glyph(t.bits, templates)
            assert result.label == t.label
            assert result.score == 1.0

    def test_complement_never_wins(self, templates):
        result = recognition.classify_glyph(1 - templates["8"].bits, templates)
        assert result.label != "8"
        scores = {t.label: correlation(1 - templates["8"].bits, t.bits)
                  for t in templates.templates}
        assert scores["8"] == -1.0

    def test_noisy_glyph_still_classified(self, templates):
        rng = np.random.default_rng(5)
        glyph = templates["M"].bits.copy()
        flips = rng.random(glyph.shape) < 0.05
        glyph[flips] ^= 1
        assert recognition.classify_glyph(glyph, templates).label == "M"

    def test_deterministic(self, templates):
        rng = np.random.default_rng(6)
        g = random_glyph(rng)
        a = recognition.classify_glyph(g, templates)
        b = recognition.classify_glyph(g, templates)
        assert a == b

    def test_score_at_least_runner_up(self, templates):
        rng = np.random.default_rng(7)
        for _ in range(30):
            r = recognition.classify_glyph(random_glyph(rng), templates)
            assert r.score >= r.runner_up[1]


class TestReadPlate:
    def test_template_sequence(self, templates):
        glyphs = [templates[c].bits for c in "DL8C1234"]
        reading = recognition.read_plate(glyphs, templates)
        assert reading.text == "DL8C1234"
        assert reading.confidence == 1.0

    def test_single_glyph(self, templates):
        reading = recognition.read_plate([templates["Z"].bits], templates)
        assert len(reading.text) == 1

    def test_confidence_is_mean(self, templates):
        rng = np.random.default_rng(8)
        glyphs = [random_glyph(rng) for _ in range(5)]
        reading = recognition.read_plate(glyphs, templates)
        mean = sum(c.score for c in reading.characters) / 5
        assert reading.confidence == pytest.approx(mean, abs=1e-12)

    def test_empty_rejected(self, templates):
        with pytest.raises(ValueError):
            recognition.read_plate([], templates)


def write_archive(path, labels=ALPHABET, version="test-1", mutate=None):
    """Write a synthetic archive; `mutate(label, pixels)` can corrupt entries."""
    rng = np.random.default_rng(11)
    path.mkdir(parents=True, exist_ok=True)
    for label in labels:
        pixels = (rng.random((GLYPH_SIZE, GLYPH_SIZE)) < 0.5).astype(np.uint8) * 255
        pixels[0, 0] = 0
        pixels[0, 1] = 255  # never constant
        if mutate:
            pixels = mutate(label, pixels)
        write_pgm(path / f"{label}.pgm", pixels)
    (path / "manifest.txt").write_text(f"version={version}\n")
    return path


class TestLoadTemplates:
    def test_bundled_default(self, templates):
        assert len(templates) == 36
        assert templates.version == "default-1"

    def test_missing_label(self, tmp_path):
        write_archive(tmp_path / "a", labels=ALPHABET.replace("Q", ""))
        with pytest.raises(MissingLabel) as err:
            recognition.load_templates(tmp_path / "a")
        assert err.value.label == "Q"

    def test_constant_template(self, tmp_path):
        def blank_i(label, pixels):
            return np.full_like(pixels, 255) if label == "I" else pixels
        write_archive(tmp_path / "b", mutate=blank_i)
        with pytest.raises(ConstantTemplate) as err:
            recognition.load_templates(tmp_path / "b")
        assert err.value.label == "I"

    def test_bad_dimensions(self, tmp_path):
        archive = write_archive(tmp_path / "c")
        write_pgm(archive / "A.pgm", np.zeros((16, 16), np.uint8))
        with pytest.raises(BadDimensions):
            recognition.load_templates(archive)

    def test_missing_manifest(self, tmp_path):
        archive = write_archive(tmp_path / "d")
        (archive / "manifest.txt").unlink()
        with pytest.raises(TemplateError):
            recognition.load_templates(archive)

    def test_zip_archive_roundtrip(self, tmp_path):
        archive = write_archive(tmp_path / "e")
        zip_path = tmp_path / "templates.zip"
        with zipfile.ZipFile(zip_path, "w") as zf:
            for p in archive.iterdir():
                zf.write(p, p.name)
        loaded = recognition.load_templates(zip_path)
        assert len(loaded) == 36 and loaded.version == "test-1"

    def test_duplicate_label_in_zip(self, tmp_path):
        archive = write_archive(tmp_path / "f")
        zip_path = tmp_path / "dup.zip"
        with zipfile.ZipFile(zip_path, "w") as zf:
            for p in archive.iterdir():
                zf.write(p, p.name)
            zf.write(archive / "A.pgm", "a.pgm")  # same label, different case
        with pytest.raises(DuplicateLabel):
            recognition.load_templates(zip_path)

    def test_template_set_validates_directly(self):
        rng = np.random.default_rng(12)
        tmpl = [Template(c, (rng.random((32, 32)) < 0.5).astype(np.uint8))
                for c in ALPHABET[:-1]]
        with pytest.raises(MissingLabel):
            TemplateSet(tmpl, "x")
