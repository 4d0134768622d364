#!/usr/bin/env python3
"""Fixed fleet of 30 servers, varying task load.

Mirror experiment of run_server_sweep.py over the task-count axis
(default 100..300).
"""

import argparse
from dataclasses import replace

from edgecontract import default_config, load_config
from edgecontract.config import TASK_SWEEP_VALUES
from edgecontract.harness import export_results, run_sweep


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", help="scenario config file (defaults baked in)")
    parser.add_argument("--out", default="results/task_sweep")
    parser.add_argument("--repeats", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()

    config = load_config(args.config) if args.config else default_config()
    config = replace(config, topology=replace(config.topology, num_servers=30))
    if args.repeats is not None:
        config = replace(config, repeats=args.repeats)
    if args.seed is not None:
        config = replace(config, seed=args.seed)

    result = run_sweep(config, axis="tasks", values=TASK_SWEEP_VALUES)
    for path in export_results(result, args.out, fmt="csv", prefix="task_sweep"):
        print(path)
    for path in export_results(result, args.out, fmt="json", prefix="task_sweep"):
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
