#!/usr/bin/env python3
"""Fixed task load, varying fleet size.

Runs all four metrics for the configured benchmarks over the server-count
axis (default 20..40 with 200 tasks) and writes detail, aggregate, and JSON
result files.
"""

import argparse
from dataclasses import replace

from edgecontract import default_config, load_config
from edgecontract.config import SERVER_SWEEP_VALUES
from edgecontract.harness import export_results, run_sweep


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", help="scenario config file (defaults baked in)")
    parser.add_argument("--out", default="results/server_sweep")
    parser.add_argument("--repeats", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()

    config = load_config(args.config) if args.config else default_config()
    if args.repeats is not None:
        config = replace(config, repeats=args.repeats)
    if args.seed is not None:
        config = replace(config, seed=args.seed)

    result = run_sweep(config, axis="servers", values=SERVER_SWEEP_VALUES)
    for path in export_results(result, args.out, fmt="csv", prefix="server_sweep"):
        print(path)
    for path in export_results(result, args.out, fmt="json", prefix="server_sweep"):
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
