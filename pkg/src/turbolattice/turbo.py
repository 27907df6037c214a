"""Parallel concatenated (turbo) codes as block codes, nested families, spectra."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .convcode import TAILBITING, TERMINATED, BlockGenerator, RationalGeneratorMatrix
from .gf2 import gf2_matmul, in_row_space
from .interleaver import apply, is_nested

MAX_EXHAUSTIVE_K = 24


class BudgetExceeded(RuntimeError):
    """An exhaustive computation would exceed its configured budget."""


@dataclass(frozen=True, eq=False)
class TurboGenerator:
    """k x n generator [I_k | F | P_1 F | ... | P_{b-1} F].

    For terminated components the first branch also carries the tail-input
    columns of its encoder; later branches carry parity only.
    """

    matrix: np.ndarray
    component: BlockGenerator
    interleavers: tuple
    code: RationalGeneratorMatrix | None = None

    @property
    def k(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    @property
    def branches(self) -> int:
        return len(self.interleavers) + 1

    @property
    def termination(self) -> str:
        return self.component.form

    def branch_slices(self):
        """Column slices (systematic, branch-1 redundancy, branch-2 parity, ...)."""
        B = self.component
        k = B.k
        first = B.redundancy.shape[1]
        par = B.parity.shape[1]
        out = [slice(0, k), slice(k, k + first)]
        start = k + first
        for _ in self.interleavers:
            out.append(slice(start, start + par))
            start += par
        return out


def pccc_length(K: int, N: int, L: int, b: int = 2, memory: int = 0, form: str = TAILBITING) -> int:
    """Code length of a b-branch turbo code built from one component encoder."""
    if form == TAILBITING:
        return K * L + b * L * (N - K)
    return K * (L + memory) + b * (N - K) * (L + memory)


def build_pccc(B: BlockGenerator, pis, code: RationalGeneratorMatrix | None = None) -> TurboGenerator:
    pis = tuple(pis)
    if not pis:
        raise ValueError("need at least one interleaver (b >= 2)")
    for p in pis:
        if p.size != B.rows:
            raise ValueError(f"interleaver size {p.size} != {B.rows} information bits")
    if B.form == TERMINATED and any(p.chain is not None and len(p.chain) > 1 for p in pis):
        raise ValueError("terminated components only support single-level (Construction A) use")
    F = B.parity
    blocks = [np.eye(B.rows, dtype=np.uint8), B.redundancy]
    # P F permutes the rows of F: row perm[i] of P F is row i of F
    blocks += [F[p.inverse().array] for p in pis]
    return TurboGenerator(np.hstack(blocks), B, pis, code)


def encode(T: TurboGenerator, u) -> np.ndarray:
    u = np.asarray(u, dtype=np.uint8)
    if u.shape[-1] != T.k:
        raise ValueError(f"message length {u.shape[-1]} != k = {T.k}")
    return gf2_matmul(u, T.matrix)


def encode_branch(T: TurboGenerator, u, branch: int) -> np.ndarray:
    """Parity of one branch computed directly (branch 0 = uninterleaved)."""
    u = np.asarray(u, dtype=np.uint8)
    if branch > 0:
        u = apply(T.interleavers[branch - 1], u)
    return gf2_matmul(u, T.component.parity)


@dataclass(frozen=True, eq=False)
class NestedTurboFamily:
    """TC_1 >= TC_2 >= ... >= TC_a, level l generated by the first k_l rows.

    ``chain`` is stored increasing, (k_a, ..., k_1), as in the nested
    interleaver definition.
    """

    base: TurboGenerator | np.ndarray
    chain: tuple

    @property
    def matrix(self) -> np.ndarray:
        return self.base.matrix if isinstance(self.base, TurboGenerator) else self.base

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    @property
    def k(self) -> int:
        return self.matrix.shape[0]

    @property
    def levels(self) -> int:
        return len(self.chain)

    def k_level(self, level: int) -> int:
        """k_l for level l = 1..a."""
        return self.chain[-level]

    def generator(self, level: int) -> np.ndarray:
        return self.matrix[: self.k_level(level)]

    @property
    def ks(self) -> list:
        """(k_1, ..., k_a)."""
        return [self.k_level(l) for l in range(1, self.levels + 1)]


def nested_family(T: TurboGenerator | np.ndarray, chain) -> NestedTurboFamily:
    chain = tuple(int(c) for c in chain)
    mat = T.matrix if isinstance(T, TurboGenerator) else np.asarray(T, dtype=np.uint8)
    if chain[-1] != mat.shape[0]:
        raise ValueError(f"chain must end at k = {mat.shape[0]}")
    if any(b <= a for a, b in zip(chain, chain[1:])) or chain[0] <= 0:
        raise ValueError(f"chain {chain} must be strictly increasing")
    if isinstance(T, TurboGenerator):
        for p in T.interleavers:
            if not is_nested(p, chain):
                raise ValueError(f"interleaver is not {chain}-nested")
    fam = NestedTurboFamily(T, chain)
    for l in range(2, fam.levels + 1):
        if not in_row_space(fam.generator(l - 1), fam.generator(l)):
            raise ValueError("row spaces are not nested")
    return fam


def rates(F: NestedTurboFamily) -> list:
    """R_l = k_l / n, exact."""
    return [Fraction(kl, F.n) for kl in F.ks]


def actual_rates(F: NestedTurboFamily) -> list:
    """k_l / (n - k + k_l): the rate once the all-zero columns are punctured."""
    return [Fraction(kl, F.n - F.k + kl) for kl in F.ks]


@dataclass(frozen=True)
class WeightSpectrum:
    counts: dict = field(default_factory=dict)
    exhaustive: bool = True

    @property
    def d_min(self):
        """Least nonzero weight, or None for the zero code."""
        nz = [w for w, c in self.counts.items() if w > 0 and c > 0]
        return min(nz) if nz else None

    def multiplicity(self, w: int) -> int:
        return self.counts.get(w, 0)

    @property
    def total(self) -> int:
        return sum(c for w, c in self.counts.items() if w > 0)


def _pack_rows(G: np.ndarray) -> np.ndarray:
    """Pack each row into ceil(n/64) uint64 words."""
    k, n = G.shape
    words = max(1, -(-n // 64))
    padded = np.zeros((k, words * 64), dtype=np.uint8)
    padded[:, :n] = G
    bits = padded.reshape(k, words, 64).astype(np.uint64)
    return (bits << np.arange(64, dtype=np.uint64)).sum(axis=2).astype(np.uint64)


def weight_spectrum(G, max_k: int = MAX_EXHAUSTIVE_K) -> WeightSpectrum:
    """Exact weight distribution by enumerating all 2^k - 1 nonzero messages."""
    G = np.asarray(G.matrix if hasattr(G, "matrix") else G, dtype=np.uint8)
    k, n = G.shape
    if k > max_k:
        raise BudgetExceeded(f"k = {k} exceeds the exhaustive budget of {max_k}")
    if k == 0:
        return WeightSpectrum({})
    packed = _pack_rows(G)
    low = min(k, 16)
    # all codewords spanned by the first `low` rows
    table = np.zeros((1 << low, packed.shape[1]), dtype=np.uint64)
    for i in range(low):
        table[1 << i: 1 << (i + 1)] = table[: 1 << i] ^ packed[i]
    hist = np.zeros(n + 1, dtype=np.int64)
    offset = np.zeros(packed.shape[1], dtype=np.uint64)
    high = k - low
    for g in range(1 << high):
        if g:
            # Gray-code walk over the remaining rows
            flip = (g & -g).bit_length() - 1
            offset = offset ^ packed[low + flip]
        w = np.bitwise_count(table ^ offset).sum(axis=1)
        hist += np.bincount(w, minlength=n + 1)
    hist[0] -= 1
    return WeightSpectrum({w: int(c) for w, c in enumerate(hist) if c}, exhaustive=True)


def sampled_spectrum(G, samples: int = 20000, max_weight: int = 3, seed=0) -> WeightSpectrum:
    """Approximate low-weight spectrum from structured and random messages.

    Every message of weight <= ``max_weight`` is encoded, then ``samples``
    random messages.  The resulting d_min is an upper bound on the true
    minimum distance and the counts are lower bounds; ``exhaustive`` is False.
    """
    from itertools import combinations

    G = np.asarray(G.matrix if hasattr(G, "matrix") else G, dtype=np.uint8)
    k, n = G.shape
    seen = set()
    counts = Counter()

    def add(cw_rows):
        for row in cw_rows:
            key = row.tobytes()
            if key in seen or not row.any():
                continue
            seen.add(key)
            counts[int(row.sum())] += 1

    for w in range(1, max_weight + 1):
        if w > k:
            break
        batch = []
        for idx in combinations(range(k), w):
            batch.append(np.bitwise_xor.reduce(G[list(idx)], axis=0))
            if len(batch) >= 4096:
                add(batch)
                batch = []
        add(batch)
    rng = np.random.default_rng(seed)
    msgs = rng.integers(0, 2, size=(samples, k), dtype=np.uint8)
    add(gf2_matmul(msgs, G))
    return WeightSpectrum(dict(counts), exhaustive=False)
