"""Command-line entry point: rodplot KIND --in FILE... --out FILE."""

import argparse
import sys

from .render import PLOT_KINDS, PlotSpec, SchemaMismatch, render


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="rodplot", description="render rod benchmark CSV outputs"
    )
    parser.add_argument("kind", choices=sorted(PLOT_KINDS))
    parser.add_argument(
        "--in", dest="inputs", nargs="+", required=True, metavar="FILE"
    )
    parser.add_argument("--out", required=True, metavar="FILE")
    args = parser.parse_args(argv)
    try:
        render(PlotSpec(kind=args.kind, inputs=tuple(args.inputs), output=args.out))
    except SchemaMismatch as exc:
        print(f"SchemaMismatch: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
