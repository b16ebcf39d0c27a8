"""Command-line front door: single-image recognition, batch evaluation,
synthetic corpus generation, template generation, and the service launcher.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import evaluation, synth
from .datastore import open_store
from .pipeline import ConfigError, DumpIoError, PipelineConfig, recognize, recognize_with_diagnostics
from .raster import DecodeError, load_color_image
from .recognition import TemplateError, default_template_path, load_templates

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_RECOGNIZED = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="platescan",
                                     description="License plate recognition toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("recognize", help="recognize a single image locally")
    p.add_argument("image", type=Path)
    p.add_argument("--templates", type=Path, default=None,
                   help="template archive (default: bundled)")
    p.add_argument("--config", type=Path, default=None, help="pipeline config file")
    p.add_argument("--dump", type=Path, default=None,
                   help="write PGM stage dumps into this directory")

    p = sub.add_parser("batch", help="evaluate a corpus against a truth file")
    p.add_argument("corpus_dir", type=Path)
    p.add_argument("truth_file", type=Path)
    p.add_argument("--out", type=Path, default=None,
                   help="report directory (default: <corpus>/eval)")
    p.add_argument("--templates", type=Path, default=None)
    p.add_argument("--config", type=Path, default=None)

    p = sub.add_parser("synth", help="generate a synthetic ground-truthed corpus")
    p.add_argument("out_dir", type=Path)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.0, help="Gaussian pixel noise sigma")
    p.add_argument("--skew", type=float, default=0.0, help="max plate rotation (degrees)")
    p.add_argument("--lines", type=int, choices=(1, 2), default=1)
    p.add_argument("--shadow", action="store_true", help="shadow gradient on the plate")
    p.add_argument("--decor", action="store_true", help="border frame and logo on the plate")
    p.add_argument("--font", type=Path, default=None, help="TTF glyph source")

    p = sub.add_parser("templates", help="render a 36-character template archive")
    p.add_argument("out", type=Path, help="output directory or .zip path")
    p.add_argument("--font", type=Path, default=None,
                   help="TTF glyph source (default: bundled DejaVu Sans Mono Bold)")
    p.add_argument("--version", default=None, help="archive version string")

    p = sub.add_parser("serve", help="run the recognition HTTP service")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="0.0.0.0")
    p.add_argument("--db", type=Path, required=True, help="vehicle store (JSON lines)")
    p.add_argument("--templates", type=Path, default=None)
    p.add_argument("--sessions", type=Path, required=True, help="session log directory")
    p.add_argument("--config", type=Path, default=None)
    p.add_argument("--cors-origin", default="*")
    return parser


def _load_runtime(args) -> tuple[PipelineConfig, "TemplateSet"]:
    config = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    templates = load_templates(args.templates or default_template_path())
    return config, templates


def cmd_recognize(args) -> int:
    config, templates = _load_runtime(args)
    pixels = load_color_image(args.image)
    if args.dump:
        result = recognize_with_diagnostics(pixels, config, templates, args.dump)
    else:
        result = recognize(pixels, config, templates)
    if result.ok:
        print(f"plate       {result.plate.text}")
        print(f"confidence  {result.plate.confidence:.4f}")
        print(f"candidate   {result.candidate_used}")
    else:
        print(f"status      {result.failure}")
    for stage, ms in result.stage_timings.items():
        print(f"timing      {stage}: {ms:.1f} ms")
    return EXIT_OK if result.ok else EXIT_NOT_RECOGNIZED


def cmd_batch(args) -> int:
    config, templates = _load_runtime(args)
    entries = evaluation.load_truth(args.truth_file)
    missing = [e.image_path for e in entries if not e.image_path.exists()]
    if missing:
        raise FileNotFoundError(f"{len(missing)} corpus images missing, first: {missing[0]}")
    report, outcomes = evaluation.evaluate_corpus(entries, config, templates)
    out_dir = args.out or (args.corpus_dir / "eval")
    evaluation.write_report(report, outcomes, out_dir)
    print(evaluation.format_table(report))
    print(f"report written to {out_dir}")
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = synth.SynthConfig(
        count=args.count,
        seed=args.seed,
        noise_sigma=args.noise,
        max_skew_deg=args.skew,
        lines=args.lines,
        shadow=args.shadow,
        decor=args.decor,
    )
    truths = synth.generate_corpus(args.out_dir, cfg, font_path=args.font)
    print(f"wrote {len(truths)} scenes + {synth.TRUTH_FILE} to {args.out_dir}")
    return EXIT_OK


def cmd_templates(args) -> int:
    from .glyphs import DEFAULT_TEMPLATE_VERSION, write_template_archive

    out = write_template_archive(args.out, font_path=args.font,
                                 version=args.version or DEFAULT_TEMPLATE_VERSION)
    loaded = load_templates(out)
    print(f"wrote {len(loaded)} templates (version {loaded.version}) to {out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import serve

    serve(port=args.port, db_path=str(args.db),
          templates_path=str(args.templates or default_template_path()),
          sessions_dir=str(args.sessions),
          config_path=str(args.config) if args.config else None,
          cors_origin=args.cors_origin, host=args.host)
    return EXIT_OK


HANDLERS = {
    "recognize": cmd_recognize,
    "batch": cmd_batch,
    "synth": cmd_synth,
    "templates": cmd_templates,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return HANDLERS[args.command](args)
    except (DecodeError, ConfigError, TemplateError, DumpIoError,
            evaluation.TruthParseError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
