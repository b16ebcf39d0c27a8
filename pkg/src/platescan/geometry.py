"""Rectangle arithmetic shared by localization, segmentation and evaluation."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in (row, col) coordinates, half-open on both axes.

    Covers rows ``r0 .. r1-1`` and columns ``c0 .. c1-1``, matching numpy
    slicing: ``img[rect.r0:rect.r1, rect.c0:rect.c1]``.
    """

    r0: int
    c0: int
    r1: int
    c1: int

    def __post_init__(self):
        if self.r1 < self.r0 or self.c1 < self.c0:
            raise ValueError(f"degenerate rect {self}")

    @property
    def height(self) -> int:
        return self.r1 - self.r0

    @property
    def width(self) -> int:
        return self.c1 - self.c0

    @property
    def area(self) -> int:
        return self.height * self.width

    def pad(self, margin: int) -> "Rect":
        return Rect(self.r0 - margin, self.c0 - margin, self.r1 + margin, self.c1 + margin)

    def clamp(self, height: int, width: int) -> "Rect":
        return Rect(
            max(0, min(self.r0, height)),
            max(0, min(self.c0, width)),
            max(0, min(self.r1, height)),
            max(0, min(self.c1, width)),
        )

    def contains(self, other: "Rect") -> bool:
        return (self.r0 <= other.r0 and self.c0 <= other.c0
                and self.r1 >= other.r1 and self.c1 >= other.c1)

    def intersect(self, other: "Rect") -> "Rect | None":
        r0 = max(self.r0, other.r0)
        c0 = max(self.c0, other.c0)
        r1 = min(self.r1, other.r1)
        c1 = min(self.c1, other.c1)
        if r1 <= r0 or c1 <= c0:
            return None
        return Rect(r0, c0, r1, c1)

    def iou(self, other: "Rect") -> float:
        inter = self.intersect(other)
        if inter is None:
            return 0.0
        union = self.area + other.area - inter.area
        return inter.area / union if union else 0.0
