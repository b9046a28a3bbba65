#!/usr/bin/env python3
"""Export the bundled digit corpus as a PGM tree plus index file.

Usage: python scripts/make_digits_corpus.py DEST_DIR [--scale N]
"""

import argparse

from gridocr.datasets import export_digits_corpus


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("dest", help="output directory for images/ and index.txt")
    parser.add_argument("--scale", type=int, default=8,
                        help="bilinear upscale factor for the 8x8 glyphs (default 8)")
    args = parser.parse_args()
    index = export_digits_corpus(args.dest, scale=args.scale)
    print(f"index={index}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
