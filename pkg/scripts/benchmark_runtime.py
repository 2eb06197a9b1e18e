"""
SketchNet: single-image runtime per architecture.

Times the forward pass of each builtin architecture on one 5x155x200 input and
prints it next to the published GPU figures (CPU numbers are expected to be
much larger; only the relative ordering is comparable).

Usage: python3 scripts/benchmark_runtime.py [--repeat 10] [--report out.csv]
"""

import argparse
import logging
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from core.config import LOG_LEVEL  # noqa: E402
from core.state import REPORTED_RUNTIME_MS  # noqa: E402
from pipeline.benchmark import benchmark_architectures  # noqa: E402
from tools.export_tools import write_benchmark_report  # noqa: E402

logging.basicConfig(
    level=getattr(logging, LOG_LEVEL, logging.INFO),
    format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
)


def main():
    parser = argparse.ArgumentParser(description="Forward-pass runtime per builtin architecture")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--report", type=Path)
    args = parser.parse_args()
    if args.repeat < 1:
        parser.error("--repeat must be >= 1")

    rows = benchmark_architectures(repeat=args.repeat, seed=args.seed)

    print(f"\n{'arch':<8}{'params':>11}{'CPU ms':>11}{'reported GPU ms':>18}")
    print("─" * 48)
    for row in rows:
        reported = REPORTED_RUNTIME_MS.get(row["arch"])
        print(f"{row['arch']:<8}{row['params']:>11,}{row['median_ms']:>11.1f}{reported:>18.1f}")

    if args.report:
        write_benchmark_report(rows, args.report)


if __name__ == "__main__":
    main()
