"""`figures <kind> --manifest <path> --out <file>` entry point.

Exit codes: 0 success, 1 data error (checksum mismatch, schema drift),
2 usage error.
"""

from __future__ import annotations

import argparse
import sys

from .io import SchemaError, StaleDataError
from .render import KINDS, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render publication figures from snls run directories.",
    )
    parser.add_argument("kind", choices=KINDS, help="figure kind")
    parser.add_argument("--manifest", required=True,
                        help="manifest.json of a finished run (or its directory)")
    parser.add_argument("--out", required=True, help="output image path (e.g. mass.png)")
    parser.add_argument("--dpi", type=int, default=150)
    parser.add_argument("--title", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(manifest=args.manifest, kind=args.kind, out=args.out,
                      dpi=args.dpi, title=args.title)
    try:
        image, sidecar = render(spec)
    except StaleDataError as exc:
        print(f"figures: refusing to plot stale data: {exc}", file=sys.stderr)
        return 1
    except SchemaError as exc:
        print(f"figures: schema error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {image} and {sidecar}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
