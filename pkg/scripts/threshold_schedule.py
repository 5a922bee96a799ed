"""How often a fixed threshold breaks refinement compared with the depth schedule.

Draws random sample sets in [0, 1], builds thresholded maps at every pair of
depths up to --max-depth and counts the pairs whose refinement map fails to
be a morphism.
"""
import argparse
import random
from fractions import Fraction

from morse_persist.grid import Box, Grid
from morse_persist.timeseries import SampleSet, persistent_threshold, threshold_persistence_check

UNIT = Box((0,), (1,))


def random_samples(rng, n):
    # clustered points make dense coarse cells, which is what breaks a fixed threshold
    centres = [rng.random() for _ in range(rng.randint(1, 4))]
    pts = []
    for _ in range(n):
        x = min(max(rng.choice(centres) + rng.gauss(0, 0.08), 0), 1)
        y = min(max(rng.choice(centres) + rng.gauss(0, 0.08), 0), 1)
        pts.append((Fraction(x).limit_denominator(256), Fraction(y).limit_denominator(256)))
    return SampleSet(tuple(pts))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--max-depth", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    pairs = [(a, b) for a in range(args.max_depth + 1) for b in range(a)]

    print(f"{'mu':>5} {'fixed fails':>12} {'schedule fails':>15}")
    for mu in (Fraction(1, 10), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
        fixed = sched = 0
        for _ in range(args.trials):
            d = random_samples(rng, rng.randint(5, 60))
            for a, b in pairs:
                fine, coarse = Grid(UNIT, a), Grid(UNIT, b)
                fixed += not threshold_persistence_check(d, fine, coarse, mu, mu).holds
                sched += not threshold_persistence_check(d, fine, coarse, mu, persistent_threshold(mu, fine, coarse)).holds
        total = args.trials * len(pairs)
        print(f"{str(mu):>5} {fixed:>6}/{total:<5} {sched:>8}/{total:<5}")


if __name__ == "__main__":
    main()
