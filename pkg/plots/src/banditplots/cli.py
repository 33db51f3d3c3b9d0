"""plots <kind> --in <csv> --out <img> [--alpha A] [--title T] [--timestamps]

Exit codes: 0 rendered, 2 schema or usage problem, 3 rendering failure.
"""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots", description="render experiment CSVs as figures")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="input_csv", required=True,
                        help="input CSV (harness schema)")
    parser.add_argument("--out", dest="output_image", required=True,
                        help="output image path (.png, .svg, .pdf)")
    parser.add_argument("--alpha", type=float, default=0.05,
                        help="rejection threshold marker for pvalue-hist")
    parser.add_argument("--title", default=None)
    parser.add_argument("--timestamps", action="store_true",
                        help="keep format-native timestamp metadata "
                             "(suppressed by default for reproducible bytes)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(
            kind=args.kind,
            input_csv=args.input_csv,
            output_image=args.output_image,
            alpha=args.alpha,
            suppress_timestamps=not args.timestamps,
            title=args.title,
        )
        render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"render error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {args.output_image}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
