"""Tail-biting algebra and lattice figures for the rate-3/4 code at L = 8.

Solves f * r = q (mod x^8 - 1) for each input row, prints the circulant
parity blocks, then builds the three-level lattice from configs/example2.json
and reports its figures and basis determinant.
"""

from pathlib import Path

from turbolattice.convcode import RationalGeneratorMatrix
from turbolattice.gf2 import circulant, format_bits, solve_f
from turbolattice.lattice import figures_construction_d
from turbolattice.sim import build_lattice, load_config
from turbolattice.turbo import actual_rates, rates, weight_spectrum

ROOT = Path(__file__).resolve().parent.parent


def main():
    cfg, _ = load_config(ROOT / "configs" / "example2.json")
    G = RationalGeneratorMatrix.parse(cfg.lattice.code)
    L = cfg.lattice.L
    for i, (q, r) in enumerate(zip(G.q, G.r), start=1):
        f = solve_f(q[0], r, L)
        print(f"row {i}: q = {q[0]}, r = {r}, f = {f}")
        for line in circulant(f, L).dense:
            print("   ", format_bits(line))
    TL = build_lattice(cfg, ROOT / "configs")
    fam = TL.family
    spectra = [weight_spectrum(fam.generator(l)) for l in range(1, fam.levels + 1)]
    fig = figures_construction_d(fam, spectra)
    print(f"n = {fam.n}, k = {fam.ks}, rates = {[str(x) for x in rates(fam)]}, "
          f"actual = {[str(x) for x in actual_rates(fam)]}")
    print(f"level distances = {[s.d_min for s in spectra]}")
    print(f"formula: d^2 = {fig.d2}, log2 volume = {fig.log2_volume}, tau <= {fig.kissing}, "
          f"gain = {fig.coding_gain_db:.3f} dB")
    print(f"basis: {TL.n} x {TL.n}, |det| = {abs(TL.basis.exact_det())}")


if __name__ == "__main__":
    main()
