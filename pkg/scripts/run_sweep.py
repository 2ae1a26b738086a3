#!/usr/bin/env python3
"""Greedy optimization over the configured receiver spots.

Same flags as ``rissim sweep``: --config, --seed, --out, --parallel.
"""

import sys

from rissim.cli import main

if __name__ == "__main__":
    sys.exit(main(["sweep", *sys.argv[1:]]))
