"""`render_figures`: heatmaps from exported comparison matrices.

Exit codes follow the main toolchain: 0 success, 1 usage error, 2 data
error, 3 internal error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from conceptgraph_figures import __version__
from conceptgraph_figures.artifact import load_artifact
from conceptgraph_figures.render import COLOR_SCALES, render_heatmap


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise _UsageError(f"{self.prog}: {message}")


def build_parser() -> _Parser:
    parser = _Parser(prog="render_figures", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--composition", required=True, help="composition matrix CSV"
    )
    parser.add_argument(
        "--cooccurrence", required=True, help="co-occurrence matrix CSV"
    )
    parser.add_argument(
        "--report",
        help="report JSON; adds per-cluster top concepts to the composition margin",
    )
    parser.add_argument("--out-dir", required=True, help="output directory")
    parser.add_argument(
        "--format", choices=("svg", "png"), default="svg", help="image format"
    )
    parser.add_argument(
        "--color-scale", choices=COLOR_SCALES, default="linear"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        jobs = (
            ("composition", args.composition, args.report),
            ("cooccurrence", args.cooccurrence, None),
        )
        for kind, path, report in jobs:
            artifact = load_artifact(path, kind, report_path=report)
            out = render_heatmap(
                artifact, out_dir / f"{kind}.{args.format}", args.color_scale
            )
            print(f"{kind} -> {out}")
        return 0
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())
