"""Tour of the two extremal constructions and what the exact solver says about them.

Run: python3 demos/barrier_tour.py
"""

from fractions import Fraction

from kpmatch import Bipartition, codegrees, complete, has_perfect_matching, matching_number
from kpmatch import parity_family, space_barrier
from kpmatch.solvers import fact_targets, greedy_fact_matching


def main():
    n = 6
    print("space barriers, k=3, n=6")
    for a in [(1, 1, 1), (2, 2, 1), (3, 2, 0), (2, 2, 2)]:
        H = space_barrier(3, n, a)
        print(f"  a={a}  codegrees={codegrees(H)}  nu={matching_number(H)}  edges={len(H)}")

    print("parity families, k=3, n=4")
    for A in [(2, 2, 1), (2, 2, 2)]:
        bip = Bipartition.prefix((4,) * 3, A)
        for side in ("even", "odd"):
            H = parity_family(3, 4, bip, side)
            ok, _ = has_perfect_matching(H)
            print(f"  |A|={A} side={side}  codegrees={codegrees(H)}  perfect={ok}  nu={matching_number(H)}")

    print("greedy bounds on the complete graph minus a corner")
    K = complete(3, 5)
    H = K.with_edges(sorted(e for e in K.edges if max(e) > 0))
    M = greedy_fact_matching(H)
    print(f"  targets={fact_targets(H)}  greedy={len(M)}  nu={matching_number(H)}")
    print(f"  density={Fraction(len(H), 125)}")


if __name__ == "__main__":
    main()
