"""Command-line entry point: figure id, input CSV path(s), output image."""

from __future__ import annotations

import argparse
import sys

from .figures import GridMismatch, MissingColumn, render_fig3, render_fig4, render_fig5


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mzfiggen",
        description="Render publication-style figures from mzmemory CSV outputs",
    )
    sub = parser.add_subparsers(dest="figure", required=True)

    p = sub.add_parser("fig3", help="trace-distance trajectory family")
    p.add_argument("inputs", nargs="+", help="trajectory CSVs (with run manifests)")
    p.add_argument("--output", required=True)
    p.add_argument("--title", default=None)

    p = sub.add_parser("fig4", help="probability and memory measure vs delta_x")
    p.add_argument("inputs", nargs="+", help="sweep CSV, optionally a zoom sweep CSV")
    p.add_argument("--output", required=True)

    p = sub.add_parser("fig5", help="sensitivities vs the quantum bound")
    p.add_argument("inputs", nargs=1, help="long-format sensitivity CSV")
    p.add_argument("--output", required=True)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.figure == "fig3":
            render_fig3(args.inputs, args.output, title=args.title)
        elif args.figure == "fig4":
            if len(args.inputs) > 2:
                raise ValueError("fig4 takes one sweep CSV plus at most one zoom CSV")
            zoom = args.inputs[1] if len(args.inputs) == 2 else None
            render_fig4(args.inputs[0], args.output, zoom_csv=zoom)
        else:
            render_fig5(args.inputs[0], args.output)
    except (MissingColumn, GridMismatch, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
