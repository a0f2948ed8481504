"""Cross-validate the two decision procedures on random pairs.

For each depth in a sweep this generates seeded pairs, decides plain and
rooted equivalence with the direct fixpoint and with the environment
encoding, and reports agreement plus wall-clock totals.  Any disagreement
is printed in full and the script exits nonzero, so it doubles as a slow
randomised check:

    python3 scripts/method_agreement.py --per-depth 200 --max-depth 5
"""

import argparse
import random
import sys
import time

from txbisim import (
    CheckOptions,
    GenConfig,
    StateBudgetError,
    brb,
    equivalent_pair,
    explore,
    rand_term,
    rbrb,
)
from txbisim.terms import term_text

DIRECT = CheckOptions(method="direct", max_states=4000)
ENCODE = CheckOptions(method="encode", max_states=4000)


def sample_pairs(rng, cfg, count, cap, rewrite_share):
    pairs = []
    while len(pairs) < count:
        if rng.random() < rewrite_share:
            p, q = equivalent_pair(rng, cfg)
        else:
            p, q = rand_term(rng, cfg), rand_term(rng, cfg)
        try:
            explore((p, q), cap)
        except StateBudgetError:
            continue
        pairs.append((p, q))
    return pairs


def run_depth(rng, depth, args):
    cfg = GenConfig(alphabet=tuple(args.alphabet.split(",")), max_depth=depth)
    pairs = sample_pairs(rng, cfg, args.per_depth, args.state_cap, 0.3)
    mismatches = []
    t_direct = t_encode = 0.0
    equivalent = 0
    for p, q in pairs:
        for relation in (brb, rbrb):
            t0 = time.perf_counter()
            d = bool(relation(p, q, DIRECT))
            t_direct += time.perf_counter() - t0
            t0 = time.perf_counter()
            e = bool(relation(p, q, ENCODE))
            t_encode += time.perf_counter() - t0
            if d != e:
                mismatches.append((relation.__name__, p, q, d, e))
        equivalent += bool(brb(p, q, DIRECT))
    print(
        f"depth {depth}: {len(pairs)} pairs, {equivalent} equivalent, "
        f"direct {t_direct:.2f}s, encode {t_encode:.2f}s, "
        f"{len(mismatches)} mismatches"
    )
    return mismatches


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--per-depth", type=int, default=200, metavar="N")
    parser.add_argument("--min-depth", type=int, default=2)
    parser.add_argument("--max-depth", type=int, default=5)
    parser.add_argument("--alphabet", default="a,b")
    parser.add_argument("--state-cap", type=int, default=600, metavar="N")
    args = parser.parse_args(argv)

    rng = random.Random(args.seed)
    bad = []
    for depth in range(args.min_depth, args.max_depth + 1):
        bad.extend(run_depth(rng, depth, args))
    if bad:
        print()
        for name, p, q, d, e in bad:
            print(
                f"{name}: direct={d} encode={e}\n"
                f"  left:  {term_text(p)}\n"
                f"  right: {term_text(q)}"
            )
        return 1
    print("methods agree everywhere")
    return 0


if __name__ == "__main__":
    sys.exit(main())
