#!/usr/bin/env python3
"""Build the reference codebook and replay the walking path against it.

Same flags as ``rissim codebook``: --config, --seed, --out, --parallel,
plus --load-codebook PATH to reuse a saved book.
"""

import sys

from rissim.cli import main

if __name__ == "__main__":
    sys.exit(main(["codebook", *sys.argv[1:]]))
