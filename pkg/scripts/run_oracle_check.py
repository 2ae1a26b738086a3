#!/usr/bin/env python3
"""Greedy vs. exhaustive search on a small panel; exits 3 on a negative gap.

Same flags as ``rissim oracle-check``: --config, --seed, --out, --parallel.
"""

import sys

from rissim.cli import main

if __name__ == "__main__":
    sys.exit(main(["oracle-check", *sys.argv[1:]]))
