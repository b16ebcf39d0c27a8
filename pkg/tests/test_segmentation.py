import sys

import numpy as np
import pytest

from platescan import imaging, segmentation
from platescan.geometry import Rect
from platescan.segmentation import ComponentBox


def flood_fill_components(bits: np.ndarray) -> list[frozenset]:
    """Recursive flood-fill oracle: the partition of foreground pixels."""
    sys.setrecursionlimit(100000)
    h, w = bits.shape
    seen = np.zeros_like(bits, dtype=bool)
    components = []

    def fill(r, c, acc):
        if r < 0 or r >= h or c < 0 or c >= w or seen[r, c] or not bits[r, c]:
            return
        seen[r, c] = True
        acc.append((r, c))
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr or dc:
                    fill(r + dr, c + dc, acc)

    for r in range(h):
        for c in range(w):
            if bits[r, c] and not seen[r, c]:
                acc = []
                fill(r, c, acc)
                components.append(frozenset(acc))
    return components


def component_pixel_sets(bits: np.ndarray) -> set[frozenset]:
    labels, count = segmentation.label_image(bits)
    out = {}
    ys, xs = np.nonzero(bits)
    for y, x in zip(ys, xs):
        out.setdefault(int(labels[y, x]), set()).add((int(y), int(x)))
    return {frozenset(v) for v in out.values()}


class TestConnectedComponents:
    def test_empty_image(self):
        assert segmentation.connected_components(np.zeros((5, 5), np.uint8)) == []

    def test_two_blocks(self):
        b = np.zeros((6, 6), np.uint8)
        b[0:2, 0:2] = 1
        b[4:6, 4:6] = 1
        comps = segmentation.connected_components(b)
        assert len(comps) == 2
        assert all(c.pixel_count == 4 for c in comps)

    def test_diagonal_is_connected(self):
        comps = segmentation.connected_components(np.eye(6, dtype=np.uint8))
        assert len(comps) == 1
        assert comps[0].pixel_count == 6

    def test_matches_flood_fill_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(60):
            density = rng.uniform(0.1, 0.9)
            bits = (rng.random((48, 48)) < density).astype(np.uint8)
            assert component_pixel_sets(bits) == set(flood_fill_components(bits))

    def test_partition_property(self):
        rng = np.random.default_rng(10)
        bits = (rng.random((64, 64)) < 0.4).astype(np.uint8)
        comps = segmentation.connected_components(bits)
        assert sum(c.pixel_count for c in comps) == int(bits.sum())
        for c in comps:
            assert 1 <= c.pixel_count <= c.bounds.area
            assert c.bounds.r0 <= c.centroid[0] < c.bounds.r1
            assert c.bounds.c0 <= c.centroid[1] < c.bounds.c1


def box(r0, c0, r1, c1, count=None):
    area = (r1 - r0) * (c1 - c0)
    count = count if count is not None else area
    return ComponentBox(Rect(r0, c0, r1, c1), count,
                        ((r0 + r1 - 1) / 2, (c0 + c1 - 1) / 2))


class TestFilterComponents:
    CROP = (200, 40)  # width, height

    def test_hollow_frame_rejected_by_existence(self):
        # 2 px frame around a 180x36 box: pixel count well under 20% of area
        frame_pixels = 2 * (180 * 2 + 36 * 2)
        frame = box(2, 10, 38, 190, count=frame_pixels)
        chars = [box(8, 20 + i * 15, 32, 32 + i * 15, count=200) for i in range(5)]
        kept = segmentation.filter_components([frame] + chars, self.CROP)
        assert frame not in kept and len(kept) == 5

    def test_logo_rejected_by_height_rule(self):
        logo = box(14, 4, 21, 11, count=38)  # 7x7 disc, existence ~0.78
        chars = [box(8, 20 + i * 15, 32, 32 + i * 15, count=170) for i in range(6)]
        kept = segmentation.filter_components([logo] + chars, self.CROP)
        assert logo not in kept and len(kept) == 6

    def test_near_equal_characters_all_kept(self):
        heights = [24, 24, 25, 24, 25, 24, 24, 25, 24, 24]
        chars = [box(8, 15 * (i + 1), 8 + h, 12 + 15 * (i + 1), count=int(9 * h * 0.5))
                 for i, h in enumerate(heights)]
        kept = segmentation.filter_components(chars, self.CROP)
        assert len(kept) == 10

    def test_aspect_rule(self):
        wide = box(8, 10, 32, 50, count=480)  # aspect 40/24 > 1
        kept = segmentation.filter_components([wide], self.CROP)
        assert kept == []

    def test_area_rule(self):
        tiny = box(8, 10, 10, 12, count=4)  # 4 px of 8000 < 0.5%
        kept = segmentation.filter_components([tiny], self.CROP)
        assert kept == []

    def test_cap_keeps_largest_twelve(self):
        chars = [box(8, 12 * (i + 1), 32, 12 * (i + 1) + 8 + (i % 3), count=120)
                 for i in range(15)]
        kept = segmentation.filter_components(chars, (240, 40))
        assert len(kept) == 12

    def test_idempotent(self):
        chars = [box(8, 20 + i * 15, 32, 32 + i * 15, count=170) for i in range(8)]
        once = segmentation.filter_components(chars, self.CROP)
        twice = segmentation.filter_components(once, self.CROP)
        assert once == twice


class TestOrderCharacters:
    def test_single_line_left_to_right(self):
        comps = [box(0, c, 20, c + 10, count=100) for c in (60, 20, 40)]
        ordered = segmentation.order_characters(comps)
        assert [cb.component.bounds.c0 for cb in ordered] == [20, 40, 60]
        assert all(cb.line_index == 0 for cb in ordered)
        assert [cb.position_in_line for cb in ordered] == [0, 1, 2]

    def test_two_lines_top_then_bottom(self):
        top = [box(0, c, 20, c + 10, count=100) for c in (10, 30, 50, 70, 90)]
        bottom = [box(40, c, 60, c + 10, count=100) for c in (20, 40, 60, 80)]
        ordered = segmentation.order_characters(bottom + top)
        assert [cb.line_index for cb in ordered] == [0] * 5 + [1] * 4
        top_cols = [cb.component.bounds.c0 for cb in ordered[:5]]
        assert top_cols == sorted(top_cols)

    def test_single_component(self):
        ordered = segmentation.order_characters([box(0, 0, 10, 5, count=30)])
        assert len(ordered) == 1
        assert (ordered[0].line_index, ordered[0].position_in_line) == (0, 0)

    def test_three_scattered_lines_raise(self):
        comps = [box(0, 0, 10, 8, count=40), box(40, 0, 50, 8, count=40),
                 box(80, 0, 90, 8, count=40)]
        with pytest.raises(segmentation.TooManyLines):
            segmentation.order_characters(comps)

    def test_dominant_two_lines_keep_most_populous(self):
        top = [box(0, c, 20, c + 10, count=100) for c in (10, 30, 50)]
        bottom = [box(40, c, 60, c + 10, count=100) for c in (10, 30, 50, 70)]
        stray = [box(90, 10, 110, 20, count=100)]
        ordered = segmentation.order_characters(top + bottom + stray)
        assert len(ordered) == 7
        assert {cb.line_index for cb in ordered} == {0, 1}

    def test_total_order(self):
        comps = [box(0, c, 20, c + 10, count=100) for c in (10, 30, 50, 70)]
        ordered = segmentation.order_characters(comps)
        keys = [(cb.line_index, cb.position_in_line) for cb in ordered]
        assert keys == sorted(keys) and len(set(keys)) == len(comps)


def render_crop(text, atlas, char_height=24, lines=1, seed=0):
    from platescan.synth import SynthConfig, render_plate

    rng = np.random.default_rng(seed)
    plate = render_plate(text, lines, char_height, rng, atlas)
    return np.clip(np.floor(plate + 0.5), 0, 255).astype(np.uint8)


class TestSegmentPlate:
    def test_clean_crop_exact_boxes(self, atlas, templates):
        from platescan.pipeline import _tight_box
        from platescan.recognition import read_plate

        text = "KA05NB1234"
        crop = render_crop(text, atlas)
        segments = segmentation.segment_plate(crop)
        assert len(segments) == len(text)
        glyphs = [imaging.normalize_glyph(sub, _tight_box(sub)) for _, sub in segments]
        assert read_plate(glyphs, templates).text == text

    def test_blank_crop_raises(self):
        with pytest.raises(segmentation.NoCharacters):
            segmentation.segment_plate(np.full((40, 200), 180, np.uint8))

    def test_broken_strokes_bridged(self, atlas):
        text = "HM184"
        crop = render_crop(text, atlas, char_height=26)
        broken = crop.copy()
        broken[18, :] = 230  # cut a 1 px horizontal slice through every stroke
        whole = segmentation.segment_plate(crop)
        rebuilt = segmentation.segment_plate(broken)
        assert len(rebuilt) == len(whole) == len(text)

    def test_two_line_crop_reading_order(self, atlas):
        text = "MH01A1234"
        crop = render_crop(text, atlas, lines=2)
        segments = segmentation.segment_plate(crop)
        assert len(segments) == len(text)
        lines = [cb.line_index for cb, _ in segments]
        assert lines == [0] * 5 + [1] * 4

    def test_string_order_invariant(self, atlas, templates):
        from platescan.pipeline import _tight_box
        from platescan.recognition import read_plate

        for seed, text in ((1, "DL8C1234"), (2, "TN09BC5678"), (3, "GJ1RT455")):
            crop = render_crop(text, atlas, seed=seed)
            segments = segmentation.segment_plate(crop)
            assert len(segments) == len(text)
            glyphs = [imaging.normalize_glyph(sub, _tight_box(sub)) for _, sub in segments]
            assert read_plate(glyphs, templates).text == text

    def test_tiny_crop_rejected(self):
        with pytest.raises(segmentation.NoCharacters):
            segmentation.segment_plate(np.zeros((5, 200), np.uint8))
