"""Run the matching dispatcher on a small mixed corpus and show the route taken.

Run: python3 demos/dispatcher_run.py [seed]
"""

import sys
from fractions import Fraction

from kpmatch import Bipartition, Params, StageFailed, codegrees, complete, derive_seed
from kpmatch import main_matching, matching_number, parity_family, random_instance, space_barrier


def corpus(seed):
    yield "complete n=6", complete(3, 6)
    yield "space a=(2,2,1)", space_barrier(3, 6, (2, 2, 1))
    yield "space a=(3,2,1)", space_barrier(3, 6, (3, 2, 1))
    bip = Bipartition.prefix((6,) * 3, (3, 3, 1))
    yield "even |A|=(3,3,1)", parity_family(3, 6, bip, "even")
    yield "odd |A|=(3,3,1)", parity_family(3, 6, bip, "odd")
    for i in range(4):
        yield f"random p=0.9 #{i}", random_instance(3, 6, Fraction(9, 10), derive_seed(seed, i))


def main(seed=0):
    for name, H in corpus(seed):
        goal = min(H.n - 1, sum(codegrees(H)))
        try:
            M, tr = main_matching(H, Params(seed=seed))
        except StageFailed as err:
            print(f"{name:20s} stage {err.stage} failed")
            continue
        print(f"{name:20s} size={len(M)} goal={goal} nu={matching_number(H)} "
              f"route={'/'.join(tr.route)} fallbacks={len(tr.fallbacks)}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 0)
