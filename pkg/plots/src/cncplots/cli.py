"""Command-line interface: cnc-plots render results.csv --out figs/"""

from __future__ import annotations

import argparse
import sys

from .render import SchemaError, render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="cnc-plots", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render", help="render figures from a sweep CSV")
    p_render.add_argument("csv")
    p_render.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)

    try:
        written = render(args.csv, args.out)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
