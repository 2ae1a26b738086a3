#!/usr/bin/env python3
"""Compare element grouping sizes at the configured angles.

Same flags as ``rissim grouping``: --config, --seed, --out, --parallel,
plus --group-sizes "1,2,4" to restrict the sizes.
"""

import sys

from rissim.cli import main

if __name__ == "__main__":
    sys.exit(main(["grouping", *sys.argv[1:]]))
