"""Soft decoding: log-domain BCJR, iterative turbo decoding, exhaustive ML,
the mod-2 coordinate metric, and multistage decoding of turbo lattices.

LLR convention everywhere: positive values favour bit 0.  Every decoder
accepts a single vector (n,) or a batch (B, n) and returns the same rank.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .convcode import TERMINATED, Trellis, build_trellis
from .gf2 import gf2_matmul
from .interleaver import apply, deapply
from .lattice import LatticeBasis, construction_d
from .turbo import NestedTurboFamily, TurboGenerator, nested_family

MAX_ML_K = 16
DEFAULT_ITERATIONS = 10


def _lse(x: np.ndarray, axis: int) -> np.ndarray:
    """log-sum-exp that tolerates all -inf slices."""
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis)


def _normalize(x: np.ndarray) -> np.ndarray:
    m = np.max(x, axis=-1, keepdims=True)
    return x - np.where(np.isfinite(m), m, 0.0)


# ---------------------------------------------------------------------------
# BCJR


@dataclass
class BcjrOutput:
    aposteriori: np.ndarray  # (B, T, K)
    extrinsic: np.ndarray    # (B, T, K)


def bcjr(trellis: Trellis, channel: np.ndarray, apriori: np.ndarray | None = None) -> BcjrOutput:
    """Forward-backward MAP over ``trellis``.

    ``channel`` holds per-section LLRs of the N edge output bits, shape
    (B, T, N) with T = trellis.sections (zero where a bit is not observed).
    ``apriori`` holds LLRs of the K input bits per section (B, T, K); +inf
    pins a bit to 0.  Extrinsic = aposteriori - apriori - systematic channel
    LLR, and is 0 where the a-priori value is infinite.
    """
    channel = np.asarray(channel, dtype=np.float64)
    if channel.ndim == 2:
        channel = channel[None]
    Bn, T, N = channel.shape
    S, U, K = trellis.num_states, trellis.num_inputs, trellis.K
    if T != trellis.sections or N != trellis.N:
        raise ValueError(f"channel shape {channel.shape[1:]} != ({trellis.sections}, {trellis.N})")
    if apriori is None:
        apriori = np.zeros((Bn, T, K))
    apriori = np.asarray(apriori, dtype=np.float64).reshape(Bn, T, K)

    out_bits = trellis.outputs.astype(bool)           # (S, U, N)
    in_bits = trellis.input_bits.astype(bool)         # (U, K)
    # log weight of an edge: -llr for every 1 it emits
    gamma = -np.einsum("btn,sun->btsu", channel, out_bits.astype(np.float64))
    ap_term = -np.where(in_bits[None, None], apriori[:, :, None, :], 0.0).sum(-1)  # (B, T, U)
    gamma = gamma + ap_term[:, :, None, :]
    if trellis.mode == TERMINATED and trellis.memory:
        allowed = np.arange(U)[None, :] == trellis.flush_input[:, None]  # (S, U)
        gamma[:, trellis.L:] = np.where(allowed[None, None], gamma[:, trellis.L:], -np.inf)

    ns = trellis.next_state
    ps, pu = trellis.pred_state, trellis.pred_input
    pmask = ps >= 0
    ps_safe, pu_safe = np.where(pmask, ps, 0), np.where(pmask, pu, 0)

    def forward(alpha0):
        alpha = np.empty((Bn, T + 1, S))
        alpha[:, 0] = alpha0
        for t in range(T):
            vals = alpha[:, t][:, ps_safe] + gamma[:, t][:, ps_safe, pu_safe]
            vals = np.where(pmask[None], vals, -np.inf)
            alpha[:, t + 1] = _normalize(_lse(vals, -1))
        return alpha

    def backward(betaT):
        beta = np.empty((Bn, T + 1, S))
        beta[:, T] = betaT
        for t in range(T - 1, -1, -1):
            vals = gamma[:, t] + beta[:, t + 1][:, ns]
            beta[:, t] = _normalize(_lse(vals, -1))
        return beta

    if trellis.mode == TERMINATED:
        start = np.full((Bn, S), -np.inf)
        start[:, 0] = 0.0
        alpha = forward(start)
        beta = backward(start)
    else:
        uniform = np.zeros((Bn, S))
        # one calibration wrap: the end distribution becomes the start distribution
        alpha = forward(_normalize(forward(uniform)[:, T]))
        beta = backward(_normalize(backward(uniform)[:, 0]))

    metric = alpha[:, :T, :, None] + gamma + beta[:, 1:][:, :, ns]  # (B, T, S, U)
    flat = metric.reshape(Bn, T, S * U)
    app = np.empty((Bn, T, K))
    for i in range(K):
        ones = np.tile(in_bits[:, i], S)
        app[:, :, i] = _lse(flat[:, :, ~ones], -1) - _lse(flat[:, :, ones], -1)
    with np.errstate(invalid="ignore"):
        ext = app - apriori - channel[:, :, :K]
    ext = np.where(np.isfinite(apriori), ext, 0.0)
    ext = np.nan_to_num(ext, nan=0.0)
    return BcjrOutput(app, ext)


# ---------------------------------------------------------------------------
# codeword decoders


class MLDecoder:
    """Exhaustive maximum-likelihood decoder over all 2^k codewords."""

    def __init__(self, G, k_active: int | None = None):
        G = np.asarray(G.matrix if hasattr(G, "matrix") else G, dtype=np.uint8)
        k = G.shape[0] if k_active is None else k_active
        if k > MAX_ML_K:
            raise ValueError(f"exhaustive ML needs k <= {MAX_ML_K}, got {k}")
        msgs = ((np.arange(1 << k)[:, None] >> np.arange(k)[None, :]) & 1).astype(np.uint8)
        self.codewords = gf2_matmul(msgs, G[:k])
        self.n = G.shape[1]
        self.calls = 0

    def decode(self, llr) -> np.ndarray:
        llr = np.asarray(llr, dtype=np.float64)
        single = llr.ndim == 1
        llr = np.atleast_2d(llr)
        self.calls += 1
        # cost of a codeword: sum of llr over its ones; ties go to the lowest index
        cost = llr @ self.codewords.T.astype(np.float64)
        out = self.codewords[np.argmin(cost, axis=1)]
        return out[0] if single else out


class TurboDecoder:
    """Iterative two-branch decoder for a turbo generator (or a row-prefix subcode)."""

    def __init__(self, T: TurboGenerator, trellis: Trellis | None = None,
                 k_active: int | None = None, iterations: int = DEFAULT_ITERATIONS):
        if T.branches != 2:
            raise ValueError("turbo decoding is implemented for two branches")
        if trellis is None:
            if T.code is None:
                raise ValueError("a trellis or the rational generator matrix is required")
            trellis = build_trellis(T.code, T.component.L, T.termination)
        if trellis.mode != T.termination:
            raise ValueError("trellis boundary mode does not match the component code")
        self.T = T
        self.trellis = trellis
        self.k_active = T.k if k_active is None else k_active
        self.iterations = iterations
        self.pi = T.interleavers[0]
        self.calls = 0
        self._build_index()

    def _build_index(self):
        B, tr = self.T.component, self.trellis
        K, N, L, m = tr.K, tr.N, tr.L, B.memory if B.form == TERMINATED else 0
        P, steps, k = N - K, tr.sections, B.k
        sl = self.T.branch_slices()
        # systematic columns of branch 1 per section (-1: not transmitted)
        sys1 = np.full((steps, K), -1, dtype=np.int64)
        for i in range(K):
            sys1[:L, i] = i * L + np.arange(L)
            if m:
                sys1[L:, i] = k + i * m + np.arange(m)
        par1 = np.empty((steps, P), dtype=np.int64)
        par2 = np.empty((steps, P), dtype=np.int64)
        p1_start = sl[1].start + B.tail_cols
        for j in range(P):
            par1[:, j] = p1_start + j * steps + np.arange(steps)
            par2[:, j] = sl[2].start + j * steps + np.arange(steps)
        self._sys1, self._par1, self._par2 = sys1, par1, par2
        frozen = np.zeros(k, dtype=bool)
        frozen[self.k_active:] = True
        self._frozen = frozen

    def _to_sections(self, info: np.ndarray) -> np.ndarray:
        """(B, K*L) stream-major -> (B, T, K) with zero tail sections."""
        tr = self.trellis
        Bn = info.shape[0]
        out = np.zeros((Bn, tr.sections, tr.K))
        out[:, : tr.L] = info.reshape(Bn, tr.K, tr.L).transpose(0, 2, 1)
        return out

    def _from_sections(self, sec: np.ndarray) -> np.ndarray:
        tr = self.trellis
        return sec[:, : tr.L].transpose(0, 2, 1).reshape(sec.shape[0], tr.K * tr.L)

    def decode_info(self, llr) -> np.ndarray:
        """Final a-posteriori LLRs of the k information bits."""
        llr = np.atleast_2d(np.asarray(llr, dtype=np.float64))
        Bn = llr.shape[0]
        tr, k = self.trellis, self.T.k

        def gather(idx):
            return np.where(idx >= 0, llr[:, np.where(idx >= 0, idx, 0)], 0.0)

        ch1 = np.concatenate([gather(self._sys1), llr[:, self._par1]], axis=2)
        sys_info = llr[:, :k]
        ch2_sys = self._to_sections(apply(self.pi, sys_info))
        ch2 = np.concatenate([ch2_sys, llr[:, self._par2]], axis=2)

        frozen_llr = np.where(self._frozen, np.inf, 0.0)
        frozen2 = apply(self.pi, frozen_llr)
        ext21 = np.zeros((Bn, k))
        app_info = None
        for _ in range(max(1, self.iterations)):
            ap1 = self._to_sections(np.broadcast_to(frozen_llr, (Bn, k)) + ext21)
            out1 = bcjr(tr, ch1, ap1)
            ext12 = apply(self.pi, self._from_sections(out1.extrinsic))
            ap2 = self._to_sections(np.broadcast_to(frozen2, (Bn, k)) + ext12)
            out2 = bcjr(tr, ch2, ap2)
            ext21 = deapply(self.pi, self._from_sections(out2.extrinsic))
            app_info = deapply(self.pi, self._from_sections(out2.aposteriori))
        return app_info

    def decode(self, llr) -> np.ndarray:
        llr = np.asarray(llr, dtype=np.float64)
        single = llr.ndim == 1
        self.calls += 1
        app = self.decode_info(llr)
        u = (app < 0).astype(np.uint8)
        u[:, self._frozen] = 0
        cw = gf2_matmul(u, self.T.matrix)
        return cw[0] if single else cw


# ---------------------------------------------------------------------------
# lattice decoding


def round_half_down(x):
    """Nearest integer, halves rounded toward -inf."""
    return np.ceil(np.asarray(x, dtype=np.float64) - 0.5)


def nearest_even_odd(r):
    r = np.asarray(r, dtype=np.float64)
    e = 2.0 * round_half_down(r / 2.0)
    o = 2.0 * round_half_down((r - 1.0) / 2.0) + 1.0
    return e, o


def mod2_metric(r):
    """(t, s): t = (r-o)^2 - (r-e)^2 (positive favours the even anchor), s = r mod 2."""
    r = np.asarray(r, dtype=np.float64)
    e, o = nearest_even_odd(r)
    mid = (e + o) / 2.0
    t = np.where(e < o, 2.0 * (mid - r), 2.0 * (r - mid))
    s = np.mod(r, 2.0)
    s = np.where(s >= 2.0, 0.0, s)  # -tiny mod 2 rounds up to 2
    return t, s


@dataclass
class LevelDecodeResult:
    x: np.ndarray          # integer point of C_l + 2Z^n
    codeword: np.ndarray   # x mod 2
    odd: np.ndarray        # True where the odd anchor was taken


def decode_level(decoder, r, sigma: float) -> LevelDecodeResult:
    """Closest point of C + 2Z^n via the mod-2 metric and a binary soft decoder."""
    r = np.asarray(r, dtype=np.float64)
    e, o = nearest_even_odd(r)
    t, _ = mod2_metric(r)
    # e and o are one apart: log p(r|e)/p(r|o) = t / (2 sigma^2)
    llr = t / (2.0 * sigma * sigma)
    c = np.asarray(decoder.decode(llr), dtype=np.uint8)
    odd = c.astype(bool)
    x = np.where(odd, o, e).astype(np.int64)
    return LevelDecodeResult(x, c, odd)


@dataclass(frozen=True, eq=False)
class TurboLattice:
    """A nested code family, one codeword decoder per level, and its lattice basis.

    The dense basis is n x n and only built when first asked for; simulation
    needs just the volume, which follows from n and the k_l.
    """

    family: NestedTurboFamily
    decoders: tuple  # decoders[l-1] decodes C_l

    @cached_property
    def basis(self) -> LatticeBasis:
        return construction_d(self.family)

    @property
    def log2_volume(self) -> Fraction:
        return Fraction(self.n - sum(self.family.ks))

    @property
    def n(self) -> int:
        return self.family.n

    @property
    def levels(self) -> int:
        return self.family.levels

    def point(self, codewords, z) -> np.ndarray:
        """sum_l 2^(1-l) c_l + 2z as a float vector."""
        x = 2.0 * np.asarray(z, dtype=np.float64)
        for l, c in enumerate(codewords, start=1):
            x = x + np.asarray(c, dtype=np.float64) / 2 ** (l - 1)
        return x


def make_turbo_lattice(family: NestedTurboFamily | TurboGenerator | np.ndarray,
                       decoder: str = "turbo", iterations: int = DEFAULT_ITERATIONS,
                       trellis: Trellis | None = None) -> TurboLattice:
    if not isinstance(family, NestedTurboFamily):
        k = (family.matrix if hasattr(family, "matrix") else np.asarray(family)).shape[0]
        family = nested_family(family, (k,))
    decs = []
    for l in range(1, family.levels + 1):
        kl = family.k_level(l)
        if decoder == "ml":
            decs.append(MLDecoder(family.matrix, kl))
        elif decoder == "turbo":
            if not isinstance(family.base, TurboGenerator):
                raise ValueError("turbo decoding needs a turbo generator")
            if trellis is None:
                trellis = build_trellis(family.base.code, family.base.component.L,
                                        family.base.termination)
            decs.append(TurboDecoder(family.base, trellis, kl, iterations))
        else:
            raise ValueError(f"unknown decoder {decoder!r}")
    return TurboLattice(family, tuple(decs))


@dataclass
class MultiStageResult:
    numerators: np.ndarray  # 2^(a-1) * x_tilde, integers
    denominator: int
    levels: list            # LevelDecodeResult for l = 1..a
    w: np.ndarray           # even integer vector
    residuals: list         # r_a, r_{a-1}, ..., r_0
    decodes: int            # component decodes performed

    @property
    def x(self) -> np.ndarray:
        return self.numerators / self.denominator

    @property
    def codewords(self) -> list:
        return [lv.codeword for lv in self.levels]


def multistage_decode(TL: TurboLattice, r, sigma: float) -> MultiStageResult:
    """Decode r to a point of C_1 + C_2/2 + ... + C_a/2^(a-1) + 2Z^n.

    Level l = a..1 decodes C_l + 2Z^n from r_l (noise deviation sigma*2^(l-1));
    the next residual is (r_l - c_l)/2 with c_l the decoded binary codeword.
    w = 2*round(r_0) recovers the 2Z^n part.
    """
    r = np.asarray(r, dtype=np.float64)
    a = TL.levels
    den = 1 << (a - 1)
    cur = den * r
    residuals = [cur]
    levels = {}
    for l in range(a, 0, -1):
        res = decode_level(TL.decoders[l - 1], cur, sigma * 2 ** (l - 1))
        levels[l] = res
        cur = (cur - res.codeword) / 2.0
        residuals.append(cur)
    w = (2 * round_half_down(cur)).astype(np.int64)
    num = den * w
    for l in range(1, a + 1):
        num = num + (1 << (a - l)) * levels[l].codeword.astype(np.int64)
    return MultiStageResult(num, den, [levels[l] for l in range(1, a + 1)], w, residuals, a)
