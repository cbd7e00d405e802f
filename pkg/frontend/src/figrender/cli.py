"""Command line front end: render one figure from one sweep CSV."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigureSpec, render


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figrender",
        description="render comparison figures from hybridsim sweep CSVs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    ren = sub.add_parser("render", help="render one figure")
    ren.add_argument("--kind", choices=sorted(KINDS), required=True)
    ren.add_argument("--in", dest="input_csv", required=True, metavar="CSV")
    ren.add_argument("--out", dest="output_path", required=True, metavar="PNG")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    spec = FigureSpec(
        input_csv=args.input_csv, kind=args.kind, output_path=args.output_path
    )
    render(spec)
    print(f"wrote {args.output_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
