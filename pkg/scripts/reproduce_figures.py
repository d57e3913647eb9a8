"""Regenerate the data behind the depth and cache figures.

Writes one CSV per panel into the output directory (default ./results):

    serial.csv     serial program accuracy over (k, L)
    windowed.csv   windowed pointer doubling over (s, L), with min-L rows
    random.csv     oblivious random caches in the stage game
    tradeoff.csv   lower / upper / serial depth over the cache grid

Plotting is left to whatever tool you prefer.
"""
import argparse
import csv
import os
import sys
import time
from pathlib import Path

from cachechase.bounds import depth_cache_curves
from cachechase.experiments import (
    emit_records,
    run_random_cache_sweep,
    run_serial_sweep,
    run_windowed_sweep,
)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--trials", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=int(os.environ.get("CACHECHASE_SEED", "0")))
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    jobs = [
        ("serial", lambda: run_serial_sweep(trials=args.trials, seed=args.seed)),
        ("windowed", lambda: run_windowed_sweep(trials=args.trials, seed=args.seed)),
        ("random", lambda: run_random_cache_sweep(trials=args.trials, seed=args.seed)),
    ]
    for name, job in jobs:
        t0 = time.perf_counter()
        emit_records(job(), "csv", out / f"{name}.csv")
        print(f"{name:<9} {time.perf_counter() - t0:6.1f}s -> {out / (name + '.csv')}")

    rows = depth_cache_curves()
    with open(out / "tradeoff.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    print(f"tradeoff          -> {out / 'tradeoff.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
