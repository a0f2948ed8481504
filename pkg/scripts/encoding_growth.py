"""Measure how much the environment encoding inflates a state space.

The encoding wraps every reachable state in one triggered and up to 2^|A|
allowing environments, so the worst case is a factor of 2^|A| + 1.  This
samples seeded terms per depth and reports the observed mean and maximum
blowup, which is usually far below the bound because most states enable
only a few actions:

    python3 scripts/encoding_growth.py --alphabet a,b,c --max-depth 5
"""

import argparse
import random
import statistics
import sys

from txbisim import GenConfig, StateBudgetError, explore, rand_term
from txbisim.encoding import encode
from txbisim.equiv import process_universe


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--per-depth", type=int, default=100, metavar="N")
    parser.add_argument("--min-depth", type=int, default=2)
    parser.add_argument("--max-depth", type=int, default=5)
    parser.add_argument("--alphabet", default="a,b")
    parser.add_argument("--state-cap", type=int, default=2000, metavar="N")
    args = parser.parse_args(argv)

    alphabet = tuple(args.alphabet.split(","))
    bound = 2 ** len(alphabet) + 1
    rng = random.Random(args.seed)
    print(f"alphabet {{{','.join(alphabet)}}}, worst-case factor {bound}")
    for depth in range(args.min_depth, args.max_depth + 1):
        cfg = GenConfig(alphabet=alphabet, max_depth=depth)
        ratios = []
        raw_total = enc_total = 0
        while len(ratios) < args.per_depth:
            term = rand_term(rng, cfg)
            try:
                lts = explore(term, args.state_cap)
                enc = encode(
                    lts, process_universe(term), args.state_cap * bound
                )
            except StateBudgetError:
                continue
            ratios.append(enc.n_states / lts.n_states)
            raw_total += lts.n_states
            enc_total += enc.n_states
        print(
            f"depth {depth}: {len(ratios)} terms, "
            f"{raw_total} raw states -> {enc_total} encoded, "
            f"mean factor {statistics.mean(ratios):.2f}, "
            f"max {max(ratios):.2f}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
