"""``plots`` command line: batch-render archived figure bundles."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bundle import BundleError
from .figures import FIGURE_IDS, FORMATS, render_figure

EXIT_OK = 0
EXIT_BUNDLE = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots", description="render data figures from archived CSV bundles"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one or more figures")
    p.add_argument(
        "ids",
        nargs="+",
        metavar="FIGURE",
        help="figure ids (F2..F10) or 'all'",
    )
    p.add_argument(
        "--bundles",
        default="figures",
        help="root directory holding one bundle per figure id (default: figures)",
    )
    p.add_argument(
        "--outdir", default="images", help="image output directory (default: images)"
    )
    p.add_argument(
        "--formats",
        default=",".join(FORMATS),
        help="comma-separated image formats (default: png,svg)",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    ids = list(FIGURE_IDS) if args.ids == ["all"] else [i.upper() for i in args.ids]
    for fid in ids:
        if fid not in FIGURE_IDS:
            print(
                f"unknown figure id {fid!r} (data figures are F2..F10)",
                file=sys.stderr,
            )
            return EXIT_USAGE
    formats = tuple(f.strip() for f in args.formats.split(",") if f.strip())
    try:
        for fid in ids:
            paths = render_figure(
                fid, Path(args.bundles) / fid, Path(args.outdir), formats
            )
            for path in paths:
                print(f"wrote {path}")
    except (BundleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUNDLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
