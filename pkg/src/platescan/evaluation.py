"""Batch accuracy measurement over a ground-truthed corpus.

Produces a machine-readable report (report.json), a per-image delimited
results file (results.csv) and a handful of matplotlib figures, so a
parameter sweep leaves comparable artifacts behind.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .datastore import normalize_plate
from .geometry import Rect
from .pipeline import PipelineConfig, recognize
from .raster import load_color_image
from .recognition import TemplateSet

REPORT_FILE = "report.json"
RESULTS_FILE = "results.csv"
FIGURE_DIR = "figures"


class TruthParseError(ValueError):
    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class GroundTruthEntry:
    image_path: Path
    plate_text: str
    bounds: Rect | None
    line_count: int | None


@dataclass
class EvalReport:
    images_total: int
    plate_localized: int
    plate_exact_match: int
    character_accuracy: float | None
    failure_histogram: dict[str, int]
    mean_latency_ms: float | None
    p50_latency_ms: float | None
    p95_latency_ms: float | None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ImageOutcome:
    image: str
    truth: str
    predicted: str | None
    status: str
    char_matches: int
    char_total: int
    iou: float | None
    latency_ms: float
    exact: bool


def load_truth(path: str | Path) -> list[GroundTruthEntry]:
    """Parse the ``image,plate,bounds,lines`` CSV; bounds are r0:c0:r1:c1."""
    path = Path(path)
    entries = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["image", "plate", "bounds", "lines"]:
            raise TruthParseError(1, f"bad header {header}")
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise TruthParseError(line_number, f"expected 4 fields, got {len(row)}")
            image, plate, bounds_text, lines_text = row
            plate = plate.strip().upper()
            if not plate.isalnum() or not 1 <= len(plate) <= 12:
                raise TruthParseError(line_number, f"bad plate text {plate!r}")
            bounds = None
            if bounds_text.strip():
                try:
                    r0, c0, r1, c1 = (int(v) for v in bounds_text.split(":"))
                    bounds = Rect(r0, c0, r1, c1)
                except (ValueError, TypeError) as exc:
                    raise TruthParseError(line_number, f"bad bounds {bounds_text!r}") from exc
            line_count = None
            if lines_text.strip():
                line_count = int(lines_text)
                if line_count not in (1, 2):
                    raise TruthParseError(line_number, f"lines must be 1 or 2, got {line_count}")
            entries.append(GroundTruthEntry(path.parent / image, plate, bounds, line_count))
    return entries


def align_matches(truth: str, predicted: str) -> int:
    """Matched characters in a minimal edit-script alignment.

    Among all minimum-cost alignments the one with the most matches is used,
    so the count is well-defined.
    """
    n, m = len(truth), len(predicted)
    # dp[i][j] = (cost, -matches) aligning truth[i:] with predicted[j:]
    dp = [[(0, 0)] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dp[i][m] = (n - i, 0)
    for j in range(m + 1):
        dp[n][j] = (m - j, 0)
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            c, neg = dp[i + 1][j + 1]
            best = (c + (truth[i] != predicted[j]), neg - (truth[i] == predicted[j]))
            for c2, neg2 in (dp[i + 1][j], dp[i][j + 1]):
                cand = (c2 + 1, neg2)
                if cand < best:
                    best = cand
            dp[i][j] = best
    return -dp[0][0][1]


def evaluate_corpus(entries: list[GroundTruthEntry], config: PipelineConfig,
                    templates: TemplateSet) -> tuple[EvalReport, list[ImageOutcome]]:
    """Run the pipeline over every entry and aggregate the report."""
    outcomes = []
    for entry in entries:
        pixels = load_color_image(entry.image_path)
        t0 = time.perf_counter()
        result = recognize(pixels, config, templates)
        latency = (time.perf_counter() - t0) * 1000.0
        predicted = result.plate.text if result.ok else None
        iou = None
        if entry.bounds is not None:
            iou = result.plate_bounds.iou(entry.bounds) if result.plate_bounds else 0.0
        truth_text = normalize_plate(entry.plate_text)
        outcomes.append(ImageOutcome(
            image=entry.image_path.name,
            truth=truth_text,
            predicted=predicted,
            status="ok" if result.ok else result.failure,
            char_matches=align_matches(truth_text, predicted or ""),
            char_total=len(truth_text),
            iou=iou,
            latency_ms=latency,
            exact=predicted == truth_text,
        ))
    return summarize(outcomes), outcomes


def summarize(outcomes: list[ImageOutcome]) -> EvalReport:
    total = len(outcomes)
    if total == 0:
        return EvalReport(0, 0, 0, None, {}, None, None, None)
    localized = sum(1 for o in outcomes
                    if (o.iou is not None and o.iou >= 0.5)
                    or (o.iou is None and o.status == "ok"))
    exact = sum(1 for o in outcomes if o.exact)
    char_total = sum(o.char_total for o in outcomes)
    char_acc = sum(o.char_matches for o in outcomes) / char_total if char_total else None
    histogram: dict[str, int] = {}
    for o in outcomes:
        if o.status != "ok":
            histogram[o.status] = histogram.get(o.status, 0) + 1
    latencies = np.array([o.latency_ms for o in outcomes])
    return EvalReport(
        images_total=total,
        plate_localized=localized,
        plate_exact_match=exact,
        character_accuracy=char_acc,
        failure_histogram=histogram,
        mean_latency_ms=float(latencies.mean()),
        p50_latency_ms=float(np.percentile(latencies, 50)),
        p95_latency_ms=float(np.percentile(latencies, 95)),
    )


def write_report(report: EvalReport, outcomes: list[ImageOutcome],
                 out_dir: str | Path) -> None:
    """Write report.json, results.csv and the figures directory."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / REPORT_FILE).write_text(
        json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    with open(out_dir / RESULTS_FILE, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["image", "truth", "predicted", "status", "char_matches",
                         "char_total", "iou", "latency_ms", "exact"])
        for o in outcomes:
            writer.writerow([
                o.image, o.truth, o.predicted or "", o.status, o.char_matches,
                o.char_total, "" if o.iou is None else f"{o.iou:.4f}",
                f"{o.latency_ms:.2f}", int(o.exact),
            ])
    if outcomes:
        render_figures(report, outcomes, out_dir / FIGURE_DIR)


def render_figures(report: EvalReport, outcomes: list[ImageOutcome],
                   fig_dir: str | Path) -> list[Path]:
    """Latency histogram, status breakdown and per-image character accuracy."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig_dir = Path(fig_dir)
    fig_dir.mkdir(parents=True, exist_ok=True)
    written = []

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist([o.latency_ms for o in outcomes], bins=30, color="#4878d0")
    ax.set_xlabel("latency (ms)")
    ax.set_ylabel("images")
    ax.set_title(f"Recognition latency (mean {report.mean_latency_ms:.0f} ms)")
    fig.tight_layout()
    path = fig_dir / "latency_hist.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    written.append(path)

    counts = {"ok": report.images_total - sum(report.failure_histogram.values())}
    counts.update(report.failure_histogram)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(list(counts), list(counts.values()),
           color=["#55a868" if k == "ok" else "#c44e52" for k in counts])
    ax.set_ylabel("images")
    ax.set_title("Outcome breakdown")
    fig.tight_layout()
    path = fig_dir / "status_breakdown.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    written.append(path)

    per_image = [o.char_matches / o.char_total for o in outcomes if o.char_total]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(per_image, bins=20, range=(0.0, 1.0), color="#dd8452")
    ax.set_xlabel("character accuracy")
    ax.set_ylabel("images")
    acc = report.character_accuracy
    ax.set_title("Per-image character accuracy"
                 + (f" (overall {acc:.3f})" if acc is not None else ""))
    fig.tight_layout()
    path = fig_dir / "char_accuracy_hist.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    written.append(path)
    return written


def format_table(report: EvalReport) -> str:
    """Human-readable summary for the terminal."""
    lines = [
        f"images          {report.images_total}",
        f"localized       {report.plate_localized}",
        f"exact match     {report.plate_exact_match}",
        "char accuracy   " + (f"{report.character_accuracy:.4f}"
                              if report.character_accuracy is not None else "n/a"),
        "latency ms      " + (f"mean {report.mean_latency_ms:.1f}  p50 {report.p50_latency_ms:.1f}"
                              f"  p95 {report.p95_latency_ms:.1f}"
                              if report.mean_latency_ms is not None else "n/a"),
    ]
    for status, count in sorted(report.failure_histogram.items()):
        lines.append(f"failure         {status}: {count}")
    return "\n".join(lines)
