"""Turbo lattices: Construction A/D lattices from nested turbo codes, their
figures of merit, and multistage iterative decoding over the AWGN channel."""

from .convcode import (
    TAILBITING,
    TERMINATED,
    BlockGenerator,
    RationalGeneratorMatrix,
    Trellis,
    build_trellis,
    encode_block,
    observer_state_matrix,
    tailbite,
    tailbiting_feasible,
    terminate,
)
from .decoder import (
    MLDecoder,
    TurboDecoder,
    TurboLattice,
    bcjr,
    decode_level,
    make_turbo_lattice,
    mod2_metric,
    multistage_decode,
)
from .gf2 import (
    BinaryPolynomial,
    CirculantMatrix,
    NotCoprime,
    circulant,
    poly_add,
    poly_gcd,
    poly_mul_mod,
    solve_f,
)
from .interleaver import ConstructionFailed, Interleaver, append, apply, is_nested, s_random
from .lattice import (
    LatticeBasis,
    LatticeFigures,
    construction_a,
    construction_d,
    enumerate_short_vectors,
    figures_construction_a,
    figures_construction_d,
    vnr_to_sigma,
)
from .turbo import (
    BudgetExceeded,
    NestedTurboFamily,
    TurboGenerator,
    WeightSpectrum,
    actual_rates,
    build_pccc,
    encode,
    nested_family,
    rates,
    weight_spectrum,
)

__version__ = "0.1.0"

__all__ = [
    "BinaryPolynomial",
    "BlockGenerator",
    "BudgetExceeded",
    "CirculantMatrix",
    "ConstructionFailed",
    "Interleaver",
    "LatticeBasis",
    "LatticeFigures",
    "MLDecoder",
    "NestedTurboFamily",
    "NotCoprime",
    "RationalGeneratorMatrix",
    "TAILBITING",
    "TERMINATED",
    "Trellis",
    "TurboDecoder",
    "TurboGenerator",
    "TurboLattice",
    "WeightSpectrum",
    "actual_rates",
    "append",
    "apply",
    "bcjr",
    "build_pccc",
    "build_trellis",
    "circulant",
    "construction_a",
    "construction_d",
    "decode_level",
    "encode",
    "encode_block",
    "enumerate_short_vectors",
    "figures_construction_a",
    "figures_construction_d",
    "is_nested",
    "make_turbo_lattice",
    "mod2_metric",
    "multistage_decode",
    "nested_family",
    "observer_state_matrix",
    "poly_add",
    "poly_gcd",
    "poly_mul_mod",
    "rates",
    "s_random",
    "solve_f",
    "tailbite",
    "tailbiting_feasible",
    "terminate",
    "vnr_to_sigma",
    "weight_spectrum",
]
