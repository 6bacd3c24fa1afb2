#!/usr/bin/env python3
"""Per-round candidate growth table, averaged over random instances.

Prints, for each round up to --max-round, the average total number of
candidates, the average cumulative number of complete (stopped) candidates,
and their ratio.  Early rounds follow the 12 * 5^(n-1) growth law; the
complete/total ratio becomes nonzero once branches reach the stop rule.
"""

import argparse
import random

from a51gd.attack import BranchPolicy
from a51gd.cipher import A51, CipherState, state_output_bits
from a51gd.stats import growth_counts


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--instances", type=int, default=3)
    parser.add_argument("--max-round", type=int, default=13)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--policy", choices=[b.value for b in BranchPolicy], default="lazy"
    )
    args = parser.parse_args()

    rng = random.Random(args.seed)
    policy = BranchPolicy(args.policy)
    totals = [0] * (args.max_round + 1)
    completes = [0] * (args.max_round + 1)
    for i in range(args.instances):
        truth = CipherState(
            rng.getrandbits(19), rng.getrandbits(22), rng.getrandbits(23)
        )
        ks = state_output_bits(A51, truth, 64)
        growth = growth_counts(A51, truth.r1, ks, args.max_round, policy)
        for row in growth.rows:
            totals[row.round] += row.total
            completes[row.round] += row.complete
        print(f"# instance {i + 1}/{args.instances} done")

    print(f"{'round':>5} {'avg total':>14} {'avg complete':>14} {'ratio':>8}")
    for n in range(1, args.max_round + 1):
        t = totals[n] / args.instances
        c = completes[n] / args.instances
        ratio = c / t if t else 0.0
        print(f"{n:>5} {t:>14.1f} {c:>14.1f} {ratio:>8.4f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
