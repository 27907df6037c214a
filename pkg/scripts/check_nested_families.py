"""Distance, kissing and volume formulas against short-vector search.

Draws random nested code pairs of length <= 12 and compares the formula
figures of each lattice with an exhaustive search of its basis.
"""

import argparse
import time
from fractions import Fraction

import numpy as np

from turbolattice.gf2 import gf2_rank
from turbolattice.lattice import construction_d, enumerated_figures, figures_construction_d
from turbolattice.turbo import nested_family, weight_spectrum


def random_family(rng, n_max, a_max):
    a = int(rng.integers(1, a_max + 1))
    n = int(rng.integers(max(2, a), n_max + 1))
    while True:
        k1 = int(rng.integers(a, n + 1))
        G = rng.integers(0, 2, (k1, n), dtype=np.uint8)
        if gf2_rank(G) == k1:
            break
    inner = sorted(int(k) for k in rng.choice(np.arange(1, k1), a - 1, replace=False))
    return nested_family(G, tuple(inner) + (k1,))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--families", type=int, default=1000)
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--levels", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    rng = np.random.default_rng(args.seed)
    t0 = time.perf_counter()
    counts = {"distance": 0, "kissing": 0, "volume": 0}
    tight = 0
    for _ in range(args.families):
        fam = random_family(rng, args.n_max, args.levels)
        B = construction_d(fam)
        spectra = [weight_spectrum(fam.generator(l)) for l in range(1, fam.levels + 1)]
        fig = figures_construction_d(fam, spectra)
        d2, tau = enumerated_figures(B)
        counts["distance"] += d2 != fig.d2
        counts["kissing"] += tau > fig.kissing
        counts["volume"] += abs(B.exact_det()) != Fraction(2) ** int(fig.log2_volume)
        tight += tau == fig.kissing
    print(f"{args.families} families in {time.perf_counter() - t0:.1f} s")
    for key, bad in counts.items():
        print(f"  {key} mismatches: {bad}")
    print(f"  kissing bound met with equality: {tight}")


if __name__ == "__main__":
    main()
