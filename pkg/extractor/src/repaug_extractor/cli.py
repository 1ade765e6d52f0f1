"""Command line front end: manifest of audio clips in, REPA file out."""

import argparse
import logging
import os
import sys

from . import extraction as ex


def build_parser():
    parser = argparse.ArgumentParser(
        prog="repaug-extract",
        description="Embed audio clips with a pretrained encoder and write "
                    "the pooled vectors as a REPA dataset file.")
    parser.add_argument("--manifest", required=True,
                        help="CSV of path,label,split rows")
    parser.add_argument("--encoder", required=True,
                        help="registered name (%s) or a local checkpoint dir"
                             % ", ".join(sorted(ex.ENCODERS)))
    parser.add_argument("--out", required=True, help="output .repa path")
    parser.add_argument("--duration", type=float, default=ex.TARGET_SECONDS,
                        help="standardized clip length in seconds "
                             "(default %(default)s)")
    parser.add_argument("--pad", choices=("cyclic", "zero"), default="cyclic",
                        help="policy for clips shorter than --duration")
    parser.add_argument("--crop", choices=("center", "start"),
                        default="center",
                        help="policy for clips longer than --duration")
    return parser


def entry():
    sys.exit(main(sys.argv[1:]))


def main(argv):
    level = os.environ.get("REPAUG_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code else 0
    try:
        entries = ex.load_manifest(args.manifest)
        if not entries:
            raise ex.ExtractionError(f"empty manifest {args.manifest}")
        spec = ex.ExtractionSpec(encoder=args.encoder, entries=entries,
                                 out_path=args.out, duration=args.duration,
                                 pad=args.pad, crop=args.crop)
        count = ex.extract(spec)
    except ex.ExtractionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {count} embeddings to {args.out}")
    return 0
