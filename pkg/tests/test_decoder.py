import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from turbolattice.convcode import TAILBITING, TERMINATED, build_trellis, encode_block, tailbite, terminate
from turbolattice.decoder import (
    MLDecoder,
    TurboDecoder,
    bcjr,
    decode_level,
    make_turbo_lattice,
    mod2_metric,
    multistage_decode,
    nearest_even_odd,
    round_half_down,
)
from turbolattice.interleaver import Interleaver, append, s_random
from turbolattice.turbo import build_pccc, encode, nested_family


def section_channel(tr, llr_cols):
    """Scatter block-layout column LLRs into (1, T, N) trellis sections."""
    ids = np.arange(tr.sections * tr.N).reshape(1, tr.sections, tr.N)
    where = tr.layout(ids)[0]
    ch = np.zeros(tr.sections * tr.N)
    ch[where] = llr_cols
    return ch.reshape(1, tr.sections, tr.N)


def brute_map(B, llr, apriori=None):
    k = B.rows
    msgs = np.array(list(itertools.product([0, 1], repeat=k)), dtype=np.uint8)
    cws = encode_block(B, msgs)
    logp = -(cws * llr).sum(axis=1)
    if apriori is not None:
        logp = logp - (msgs * apriori).sum(axis=1)
    out = []
    for i in range(k):
        out.append(np.logaddexp.reduce(logp[msgs[:, i] == 0]) - np.logaddexp.reduce(logp[msgs[:, i] == 1]))
    return np.array(out)


@pytest.fixture
def toy_lattice(ga):
    """n = 12, a = 2 lattice from the tail-bitten memory-2 code, chain (2, 4)."""
    B = tailbite(ga, 4)
    pi = append([Interleaver((1, 0)), Interleaver((1, 0))])
    T = build_pccc(B, [pi], ga)
    return make_turbo_lattice(nested_family(T, (2, 4)), decoder="ml")


def test_mod2_metric_examples():
    t, s = mod2_metric(np.array([0.3, 1.7, -0.2]))
    assert np.allclose(t, [0.4, 0.4, 0.6])
    assert np.allclose(s, [0.3, 1.7, 1.8])
    e, o = nearest_even_odd(np.array([0.3, 1.7, -0.2]))
    assert e.tolist() == [0, 2, 0] and o.tolist() == [1, 1, -1]


def test_mod2_metric_ties():
    # halfway between an even and an odd integer: no preference
    t, _ = mod2_metric(np.array([0.5, -1.5]))
    assert np.allclose(t, 0.0)
    # halfway between two evens: the lower one is taken
    e, o = nearest_even_odd(np.array([1.0, -1.0, 3.0]))
    assert e.tolist() == [0, -2, 2] and o.tolist() == [1, -1, 3]
    assert round_half_down(np.array([0.5, -0.5, 2.5])).tolist() == [0, -1, 2]


@given(st.floats(-50, 50, allow_nan=False))
def test_metric_sign_law_and_cost(r):
    t, s = mod2_metric(np.array([r]))
    e, o = nearest_even_odd(np.array([r]))
    de, do = abs(r - e[0]), abs(r - o[0])
    assert de <= 1 and do <= 1
    assert (t[0] > 0) == (de < do)
    assert np.isclose(t[0], do ** 2 - de ** 2, atol=1e-9)
    assert 0 <= s[0] < 2


def test_bcjr_matches_brute_force_map(ga):
    L = 4
    B = terminate(ga, L)
    tr = build_trellis(ga, L, TERMINATED)
    rng = np.random.default_rng(1)
    for _ in range(5):
        llr = rng.normal(0.5, 2.0, B.cols)
        ap = rng.normal(0, 1, L)
        ap_sec = np.zeros((1, tr.sections, 1))
        ap_sec[0, :L, 0] = ap
        out = bcjr(tr, section_channel(tr, llr), ap_sec)
        assert np.allclose(out.aposteriori[0, :L, 0], brute_map(B, llr, ap))
        # extrinsic removes the a-priori and systematic channel terms
        assert np.allclose(out.extrinsic[0, :L, 0], out.aposteriori[0, :L, 0] - ap - llr[:L])


def test_bcjr_noiseless_and_symmetric(ga):
    L = 6
    B = terminate(ga, L)
    tr = build_trellis(ga, L, TERMINATED)
    u = np.array([1, 0, 1, 1, 0, 0], dtype=np.uint8)
    c = encode_block(B, u)
    out = bcjr(tr, section_channel(tr, 20.0 * (1 - 2.0 * c)))
    assert ((out.aposteriori[0, :L, 0] < 0) == u.astype(bool)).all()
    zero = bcjr(tr, np.zeros((1, tr.sections, 2)))
    assert np.allclose(zero.extrinsic, 0.0)


def test_tailbiting_bcjr_noiseless(ga):
    L = 8
    B = tailbite(ga, L)
    tr = build_trellis(ga, L, TAILBITING)
    rng = np.random.default_rng(2)
    for _ in range(5):
        u = rng.integers(0, 2, L, dtype=np.uint8)
        c = encode_block(B, u)
        out = bcjr(tr, section_channel(tr, 10.0 * (1 - 2.0 * c)))
        assert ((out.aposteriori[0, :, 0] < 0) == u.astype(bool)).all()


def test_frozen_apriori_forces_zero(ga):
    L = 4
    tr = build_trellis(ga, L, TERMINATED)
    ap = np.zeros((1, tr.sections, 1))
    ap[0, 1, 0] = np.inf
    ch = np.zeros((1, tr.sections, 2))
    ch[0, 1, 0] = -30.0  # channel strongly says 1
    out = bcjr(tr, ch, ap)
    assert out.aposteriori[0, 1, 0] == np.inf
    assert out.extrinsic[0, 1, 0] == 0.0
    assert np.isfinite(out.extrinsic).all()


def test_turbo_decoder_noiseless_and_deterministic(ga):
    B = terminate(ga, 16)
    T = build_pccc(B, [s_random(16, 2, seed=4)], ga)
    dec = TurboDecoder(T, iterations=1)
    rng = np.random.default_rng(0)
    u = rng.integers(0, 2, (8, 16), dtype=np.uint8)
    c = encode(T, u)
    assert np.array_equal(dec.decode(8.0 * (1 - 2.0 * c)), c)
    noisy = 2.0 * (1 - 2.0 * c) + rng.normal(0, 2.0, c.shape)
    assert np.array_equal(dec.decode(noisy), dec.decode(noisy))
    assert dec.decode(noisy[0]).shape == (T.n,)


def test_tailbiting_turbo_decoder_noiseless(ga):
    B = tailbite(ga, 8)
    T = build_pccc(B, [s_random(8, 1, seed=0)], ga)
    dec = TurboDecoder(T)
    u = np.array([[1, 1, 0, 1, 0, 0, 1, 0]], dtype=np.uint8)
    c = encode(T, u)
    assert np.array_equal(dec.decode(6.0 * (1 - 2.0 * c)), c)


def test_turbo_close_to_ml(ga):
    # ~10% ML block error; agreement shrinks as k grows (about 0.88 at k = 10)
    B = terminate(ga, 6)
    T = build_pccc(B, [s_random(6, 1, seed=1)], ga)
    turbo, ml = TurboDecoder(T), MLDecoder(T)
    rng = np.random.default_rng(11)
    sigma = 1.22
    frames = 2000
    u = rng.integers(0, 2, (frames, 6), dtype=np.uint8)
    c = encode(T, u)
    y = (1 - 2.0 * c) + rng.normal(0, sigma, c.shape)
    llr = 2 * y / sigma ** 2
    d_ml, d_tb = ml.decode(llr), turbo.decode(llr)
    ml_err = np.mean((d_ml != c).any(axis=1))
    tb_err = np.mean((d_tb != c).any(axis=1))
    agree = np.mean((d_ml == d_tb).all(axis=1))
    assert 0.07 < ml_err < 0.14
    assert tb_err >= ml_err - 0.01
    assert agree > 0.9


def test_subcode_turbo_decoding_respects_frozen_bits(ga):
    B = tailbite(ga, 8)
    pi = append([s_random(4, 1, seed=1), s_random(4, 1, seed=2)])
    T = build_pccc(B, [pi], ga)
    dec = TurboDecoder(T, k_active=4)
    rng = np.random.default_rng(3)
    u = np.zeros((20, 8), dtype=np.uint8)
    u[:, :4] = rng.integers(0, 2, (20, 4))
    c = encode(T, u)
    out = dec.decode(1.5 * (1 - 2.0 * c) + rng.normal(0, 1, c.shape))
    # every output is a codeword of the subcode
    assert not out[:, 4:8].any()
    assert np.array_equal(encode(T, out[:, :8]), out)


def test_ml_decoder(hamming):
    dec = MLDecoder(hamming)
    c = dec.codewords[5]
    llr = 3.0 * (1 - 2.0 * c)
    llr[0] *= -0.5  # one weak flipped coordinate
    assert np.array_equal(dec.decode(llr), c)
    with pytest.raises(ValueError):
        MLDecoder(np.eye(17, dtype=np.uint8))


def test_decode_level_cases(hamming):
    dec = MLDecoder(hamming)
    r = np.array([2, 0, -4, 6, 0, 2, 8], dtype=float)
    res = decode_level(dec, r, 0.3)
    assert np.array_equal(res.x, r) and not res.codeword.any()
    rng = np.random.default_rng(4)
    for _ in range(50):
        c = dec.codewords[rng.integers(16)]
        x = c + 2 * rng.integers(-3, 4, 7)
        noise = rng.normal(0, 1, 7)
        noise *= 0.8 * (np.sqrt(3) / 2) / np.linalg.norm(noise)
        res = decode_level(dec, x + noise, 0.3)
        assert np.array_equal(res.x, x)
        assert np.array_equal(res.x % 2, res.codeword)
    tie = np.array([0.5, 0, 0, 0, 0, 0, 0])
    assert np.array_equal(decode_level(dec, tie, 0.3).x, decode_level(dec, tie, 0.3).x)


def test_multistage_exact_points(toy_lattice, hamming):
    TL = toy_lattice
    rng = np.random.default_rng(0)
    fam = TL.family
    for _ in range(20):
        c1 = (rng.integers(0, 2, 4) @ fam.generator(1)) % 2
        c2 = (rng.integers(0, 2, 2) @ fam.generator(2)) % 2
        x = TL.point([c1, c2], rng.integers(-3, 3, TL.n))
        res = multistage_decode(TL, x, 0.2)
        assert np.array_equal(res.x, x)
        assert TL.basis.contains(res.x)
        lhs = res.denominator * res.x
        rhs = res.codewords[1] + 2 * res.codewords[0] + 2 * res.w
        assert np.array_equal(lhs, rhs)
        assert (res.w % 2 == 0).all()
    single = make_turbo_lattice(nested_family(hamming, (4,)), decoder="ml")
    x = hamming[2] + 2.0 * np.arange(7)
    res = multistage_decode(single, x + 0.1, 0.3)
    assert np.array_equal(res.x, x) and res.denominator == 1


def test_multistage_output_is_a_lattice_point(toy_lattice):
    rng = np.random.default_rng(5)
    for _ in range(30):
        r = rng.normal(0, 2, toy_lattice.n)
        res = multistage_decode(toy_lattice, r, 0.5)
        assert toy_lattice.basis.contains(res.x)


def test_component_decodes_per_call(toy_lattice):
    before = [d.calls for d in toy_lattice.decoders]
    res = multistage_decode(toy_lattice, np.zeros(toy_lattice.n), 0.3)
    after = [d.calls for d in toy_lattice.decoders]
    assert sum(after) - sum(before) == toy_lattice.levels == res.decodes


def test_level_scaling_of_residuals(toy_lattice):
    rng = np.random.default_rng(6)
    r = rng.normal(0, 0.05, toy_lattice.n)
    res = multistage_decode(toy_lattice, r, 0.05)
    a = toy_lattice.levels
    assert all(not c.any() for c in res.codewords)
    for step, resid in enumerate(res.residuals):
        assert np.allclose(resid, res.residuals[0] / 2 ** step)
    assert np.allclose(res.residuals[0], 2 ** (a - 1) * r)


def test_bounded_distance_recovery(toy_lattice):
    from turbolattice.lattice import enumerated_figures

    TL = toy_lattice
    d2, _ = enumerated_figures(TL.basis)
    rng = np.random.default_rng(8)
    fam = TL.family
    for _ in range(500):
        c1 = (rng.integers(0, 2, 4) @ fam.generator(1)) % 2
        c2 = (rng.integers(0, 2, 2) @ fam.generator(2)) % 2
        x = TL.point([c1, c2], rng.integers(-2, 2, TL.n))
        e = rng.normal(0, 1, TL.n)
        e *= np.sqrt(float(d2) / 4) * rng.uniform() ** (1 / TL.n) * 0.999999 / np.linalg.norm(e)
        assert np.array_equal(multistage_decode(TL, x + e, 0.3).x, x)
