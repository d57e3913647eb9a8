"""Monte Carlo evidence for the open trace/chain step, per controller.

Prints the estimate, its Wilson interval and the E|T|/(n-1) reference for
every local controller.  Nothing here is a pass/fail check.
"""
import argparse
import json

from cachechase.controllers import LOCAL_NAMES
from cachechase.verify import estimate_star


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--k", type=int, default=8)
    ap.add_argument("--s", type=int, default=2)
    ap.add_argument("--L", type=int, default=4)
    ap.add_argument("--window", type=int, default=2)
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    for name in LOCAL_NAMES:
        est = estimate_star(name, a.n, a.k, a.s, a.window, a.trials, a.seed, L=a.L)
        row = {"controller": name, "estimate": round(est.estimate, 4),
               "ci": [round(est.ci_low, 4), round(est.ci_high, 4)],
               "reference": round(est.reference, 4), "mean_support": est.mean_support}
        print(json.dumps(row))


if __name__ == "__main__":
    main()
