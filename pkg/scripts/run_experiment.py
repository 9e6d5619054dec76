"""CLI wrapper to run a benchmark experiment from the repository root."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from bench.cli import main  # noqa: E402


if __name__ == "__main__":
    sys.exit(main(["run", *sys.argv[1:]]))
