"""Character glyph rendering from a TTF font.

One atlas serves two consumers: the template generator (tight-cropped glyph
stretched onto the canonical 32x32 grid) and the synthetic plate renderer
(tight-cropped glyph scaled to a uniform cap height).  Rendering both from
the same masks keeps recognition self-consistent.
"""

from __future__ import annotations

import zipfile
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from .imaging import GLYPH_SIZE, resize_bilinear
from .recognition import ALPHABET, MANIFEST_NAME

DEFAULT_TEMPLATE_VERSION = "default-1"
_RENDER_SIZE = 96


def default_font_path() -> Path:
    """DejaVu Sans Mono Bold as shipped with matplotlib.

    A bold monospaced face, like actual plate lettering: the dotted zero and
    serifed I keep 0/O and 1/I separable after anisotropic glyph
    normalization, and the wide strokes survive binarization at small
    capture sizes.
    """
    import matplotlib
    return (Path(matplotlib.__file__).parent / "mpl-data" / "fonts" / "ttf"
            / "DejaVuSansMono-Bold.ttf")


class GlyphAtlas:
    """Tight-cropped antialiased masks (float in [0, 1]) for A-Z and 0-9."""

    def __init__(self, font_path: str | Path | None = None, render_size: int = _RENDER_SIZE):
        path = Path(font_path) if font_path else default_font_path()
        self.font_path = path
        self._font = ImageFont.truetype(str(path), render_size)
        self._render_size = render_size
        self._masks: dict[str, np.ndarray | None] = {}

    def mask(self, char: str) -> np.ndarray | None:
        """Tight-cropped float mask for one character; None if the font
        renders it blank."""
        if char not in self._masks:
            canvas = Image.new("L", (2 * self._render_size, 2 * self._render_size), 0)
            ImageDraw.Draw(canvas).text(
                (self._render_size // 3, self._render_size // 3),
                char, font=self._font, fill=255)
            bbox = canvas.getbbox()
            if bbox is None:
                self._masks[char] = None
            else:
                arr = np.asarray(canvas.crop(bbox), dtype=np.float64) / 255.0
                self._masks[char] = arr
        return self._masks[char]

    def scaled(self, char: str, height: int) -> np.ndarray | None:
        """Mask scaled to the given height, width kept proportional.

        Downscaling is area-averaged (not plain bilinear sampling) so stroke
        boundaries carry the soft one-pixel ramp a camera would record
        instead of aliased staircase edges.
        """
        m = self.mask(char)
        if m is None:
            return None
        width = max(1, int(round(m.shape[1] * height / m.shape[0])))
        resized = Image.fromarray((m * 255.0).astype(np.uint8)).resize(
            (width, height), Image.BOX)
        return np.asarray(resized, dtype=np.float64) / 255.0

    def template_bits(self, char: str) -> np.ndarray | None:
        """Glyph stretched (anisotropically) onto the 32x32 grid, binarized."""
        m = self.mask(char)
        if m is None:
            return None
        stretched = resize_bilinear(m, GLYPH_SIZE, GLYPH_SIZE)
        return (stretched >= 0.5).astype(np.uint8)


def write_template_archive(out_path: str | Path,
                           font_path: str | Path | None = None,
                           version: str = DEFAULT_TEMPLATE_VERSION,
                           alphabet: str = ALPHABET) -> Path:
    """Render the 36-template archive to a directory or ``.zip``.

    Characters the font cannot render are skipped, which surfaces later as
    a MissingLabel validation error -- deliberately, so a broken glyph
    source cannot ship a silently incomplete archive.
    """
    from .raster import write_pgm

    atlas = GlyphAtlas(font_path)
    rendered: dict[str, np.ndarray] = {}
    for char in alphabet:
        bits = atlas.template_bits(char)
        if bits is not None:
            rendered[char] = bits * np.uint8(255)

    manifest = f"version={version}\n".encode("ascii")
    out_path = Path(out_path)
    if out_path.suffix == ".zip":
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with zipfile.ZipFile(out_path, "w", zipfile.ZIP_STORED) as zf:
            for char in sorted(rendered):
                info = zipfile.ZipInfo(f"{char}.pgm")  # fixed date => reproducible bytes
                h, w = rendered[char].shape
                header = f"P5\n{w} {h}\n255\n".encode("ascii")
                zf.writestr(info, header + rendered[char].tobytes())
            zf.writestr(zipfile.ZipInfo(MANIFEST_NAME), manifest)
    else:
        out_path.mkdir(parents=True, exist_ok=True)
        for char, pixels in rendered.items():
            write_pgm(out_path / f"{char}.pgm", pixels)
        (out_path / MANIFEST_NAME).write_bytes(manifest)
    return out_path
