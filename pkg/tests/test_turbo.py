import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from turbolattice.convcode import TERMINATED, tailbite, terminate
from turbolattice.gf2 import gf2_matmul, gf2_rank, in_row_space
from turbolattice.interleaver import Interleaver, append, apply, s_random
from turbolattice.turbo import (
    BudgetExceeded,
    actual_rates,
    build_pccc,
    encode,
    encode_branch,
    nested_family,
    pccc_length,
    rates,
    sampled_spectrum,
    weight_spectrum,
)


def _brute_spectrum(G):
    k, n = G.shape
    msgs = np.array(list(itertools.product([0, 1], repeat=k)), dtype=np.uint8)
    w = gf2_matmul(msgs, G).sum(axis=1)
    counts = np.bincount(w, minlength=n + 1)
    counts[0] -= 1
    return {i: int(c) for i, c in enumerate(counts) if c}


@pytest.fixture
def three_input_turbo(three_input):
    B = tailbite(three_input, 8)
    pi = append([s_random(8, 1, seed=s) for s in range(3)])
    return build_pccc(B, [pi], three_input)


def test_three_input_assembly(three_input_turbo):
    T = three_input_turbo
    assert T.matrix.shape == (24, 40)
    B = T.component
    F = B.parity
    P = T.interleavers[0].matrix()
    assert np.array_equal(T.matrix[:, :24], np.eye(24, dtype=np.uint8))
    assert np.array_equal(T.matrix[:, 24:32], F)
    assert np.array_equal(T.matrix[:, 32:], gf2_matmul(P, F))
    assert T.n == pccc_length(3, 4, 8)


def test_identity_interleaver_repeats_parity(ga):
    B = tailbite(ga, 5)
    T = build_pccc(B, [Interleaver.identity(5)])
    assert np.array_equal(T.matrix, np.hstack([np.eye(5, dtype=np.uint8), B.parity, B.parity]))


def test_terminated_turbo_is_30_8(ga):
    B = terminate(ga, 8)
    T = build_pccc(B, [s_random(8, 1, seed=0)], ga)
    assert (T.n, T.k) == (30, 8)
    assert T.n == pccc_length(1, 2, 8, 2, ga.memory, TERMINATED)
    spec = weight_spectrum(T)
    assert spec.total == 255
    assert spec.counts == _brute_spectrum(T.matrix)


def test_b_branch_length(ga):
    B = tailbite(ga, 7)
    pis = [s_random(7, 1, seed=s) for s in range(3)]
    T = build_pccc(B, pis)
    assert T.branches == 4
    assert T.n == 7 + 4 * 7 == pccc_length(1, 2, 7, 4)


def test_build_errors(ga):
    B = tailbite(ga, 5)
    with pytest.raises(ValueError):
        build_pccc(B, [Interleaver.identity(4)])
    with pytest.raises(ValueError):
        build_pccc(B, [])
    Bt = terminate(ga, 4)
    with pytest.raises(ValueError):
        build_pccc(Bt, [append([Interleaver.identity(2)] * 2)])


def test_nested_family_prefixes(three_input_turbo):
    fam = nested_family(three_input_turbo, (8, 16, 24))
    assert fam.levels == 3 and fam.ks == [24, 16, 8]
    assert np.array_equal(fam.generator(2), three_input_turbo.matrix[:16])
    assert np.array_equal(fam.generator(3), three_input_turbo.matrix[:8])
    assert in_row_space(fam.generator(1), fam.generator(2))
    assert in_row_space(fam.generator(2), fam.generator(3))


def test_single_level_family(three_input_turbo):
    fam = nested_family(three_input_turbo, (24,))
    assert fam.levels == 1
    assert np.array_equal(fam.generator(1), three_input_turbo.matrix)


def test_family_requires_nested_interleaver(ga):
    B = tailbite(ga, 8)
    T = build_pccc(B, [Interleaver.from_images([8, 2, 3, 4, 5, 6, 7, 1])])
    with pytest.raises(ValueError):
        nested_family(T, (4, 8))


@given(st.integers(0, 10_000))
def test_random_nested_family_rows_nest(seed):
    rng = np.random.default_rng(seed)
    from turbolattice.convcode import RationalGeneratorMatrix

    B = tailbite(RationalGeneratorMatrix.parse("101/111"), 8)
    parts = [Interleaver(tuple(int(x) for x in rng.permutation(4))) for _ in range(2)]
    T = build_pccc(B, [append(parts)])
    fam = nested_family(T, (4, 8))
    assert in_row_space(fam.generator(1), fam.generator(2))
    assert gf2_rank(fam.generator(2)) == 4


def test_rates_two_input(two_input):
    L = 4
    B = tailbite(two_input, L)
    pi = append([Interleaver.identity(L), Interleaver.identity(L)])
    fam = nested_family(build_pccc(B, [pi], two_input), (L, 2 * L))
    assert rates(fam) == [Fraction(1, 2), Fraction(1, 4)]
    # dropping the all-zero columns of the subcode gives rate 1/3
    assert actual_rates(fam) == [Fraction(1, 2), Fraction(1, 3)]
    r = rates(fam)
    assert all(a >= b for a, b in zip(r, r[1:]))


def test_single_level_rate(ga):
    B = tailbite(ga, 5)
    fam = nested_family(build_pccc(B, [Interleaver.identity(5)]), (5,))
    assert rates(fam) == [Fraction(1, 3)]


def test_encode_properties(three_input_turbo):
    T = three_input_turbo
    assert not encode(T, np.zeros(24, dtype=np.uint8)).any()
    rng = np.random.default_rng(0)
    u = rng.integers(0, 2, (10, 24), dtype=np.uint8)
    c = encode(T, u)
    assert np.array_equal(c[:, :24], u)
    sl = T.branch_slices()
    assert np.array_equal(c[:, sl[1]], encode_branch(T, u, 0))
    assert np.array_equal(c[:, sl[2]], encode_branch(T, u, 1))
    assert np.array_equal(encode_branch(T, u, 1), encode_branch(T, apply(T.interleavers[0], u), 0))
    with pytest.raises(ValueError):
        encode(T, np.zeros(23, dtype=np.uint8))


def test_hamming_spectrum(hamming):
    s = weight_spectrum(hamming)
    assert s.d_min == 3 and s.multiplicity(3) == 7
    assert s.counts == {3: 7, 4: 7, 7: 1}
    assert s.exhaustive


def test_repetition_spectrum():
    s = weight_spectrum(np.ones((1, 9), dtype=np.uint8))
    assert s.counts == {9: 1}


def test_gray_code_path_matches_brute_force():
    rng = np.random.default_rng(5)
    G = rng.integers(0, 2, (18, 70), dtype=np.uint8)
    s = weight_spectrum(G)
    assert s.counts == _brute_spectrum(G)
    assert s.total == (1 << 18) - 1


def test_spectrum_budget():
    with pytest.raises(BudgetExceeded):
        weight_spectrum(np.eye(25, dtype=np.uint8))


def test_nested_distances_non_decreasing(three_input_turbo):
    fam = nested_family(three_input_turbo, (8, 16, 24))
    d = [weight_spectrum(fam.generator(l)).d_min for l in (1, 2, 3)]
    assert d[0] <= d[1] <= d[2]


def test_sampled_spectrum_is_an_upper_bound(ga):
    B = terminate(ga, 8)
    T = build_pccc(B, [s_random(8, 1, seed=0)], ga)
    est = sampled_spectrum(T, samples=200, max_weight=1)
    assert not est.exhaustive
    assert est.d_min >= weight_spectrum(T).d_min
    full = sampled_spectrum(T, samples=4000, max_weight=3)
    assert full.d_min == weight_spectrum(T).d_min
