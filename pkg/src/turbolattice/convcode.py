"""Systematic feed-back convolutional encoders and their block-code forms.

Bit layouts used throughout (0-based):

* message ``u`` of a K-input code over L steps is stream-major:
  ``u[i*L + t]`` is input stream i at time t.
* tail-bitten block code [LN, LK]: columns are ``[u | p_K | ... | p_{N-1}]``,
  each parity stream occupying L consecutive columns.
* terminated block code, length N(L+m): columns are
  ``[u | tail inputs (K*m, stream-major) | parity streams, L+m each]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .gf2 import (
    ONE,
    BinaryPolynomial,
    NotCoprime,
    circulant,
    gf2_matmul,
    poly_gcd,
    solve_f,
    x_pow_minus_one,
)

TAILBITING = "tailbiting"
TERMINATED = "terminated"

MAX_TRELLIS_STATES = 1 << 16


@dataclass(frozen=True)
class RationalGeneratorMatrix:
    """K x N systematic generator [I_K | q_ij / r_i].

    ``q[i][j]`` is the numerator for input row i and parity output j (0-based
    over the N-K parity columns); ``r[i]`` is the feed-back polynomial of row i.
    """

    q: tuple
    r: tuple

    def __post_init__(self):
        if len(self.q) != len(self.r) or not self.r:
            raise ValueError("need one feed-back polynomial per input row")
        widths = {len(row) for row in self.q}
        if len(widths) != 1:
            raise ValueError("every row needs the same number of parity entries")
        for i, ri in enumerate(self.r):
            if ri[0] != 1:
                raise ValueError(f"r_{i + 1}(0) must be 1 for a realizable feed-back")

    @classmethod
    def parse(cls, text: str) -> RationalGeneratorMatrix:
        """Parse one line per input row with entries ``q/r`` (bit strings, low first).

        A bare ``q`` means r = 1.  All entries of a row must share r.
        """
        q_rows, r_rows = [], []
        for line in text.strip().splitlines():
            line = line.split("#")[0].strip()
            if not line:
                continue
            qs, rs = [], set()
            for entry in line.replace(",", " ").split():
                num, _, den = entry.partition("/")
                qs.append(BinaryPolynomial.parse(num))
                rs.add(BinaryPolynomial.parse(den) if den else ONE)
            if len(rs) != 1:
                raise ValueError(f"row {line!r} mixes feed-back polynomials")
            q_rows.append(tuple(qs))
            r_rows.append(rs.pop())
        return cls(tuple(q_rows), tuple(r_rows))

    def to_text(self) -> str:
        return "\n".join(
            " ".join(f"{qij.to_string()}/{ri.to_string()}" for qij in row)
            for row, ri in zip(self.q, self.r)
        )

    @property
    def K(self) -> int:
        return len(self.r)

    def is_reduced(self) -> bool:
        """True if every nonzero q_ij is coprime to its r_i."""
        return all(poly_gcd(qij, ri) == ONE
                   for row, ri in zip(self.q, self.r) for qij in row if qij)

    @property
    def N(self) -> int:
        return self.K + len(self.q[0])

    @cached_property
    def register_lengths(self) -> tuple:
        out = []
        for row, ri in zip(self.q, self.r):
            degs = [max(p.degree, 0) for p in (ri, *row)]
            out.append(int(max(degs)))
        return tuple(out)

    @property
    def memory(self) -> int:
        """Longest shift register (number of flush steps)."""
        return max(self.register_lengths)

    @property
    def constraint_length(self) -> int:
        """Total number of state bits, nu."""
        return sum(self.register_lengths)


def observer_state_matrix(r: BinaryPolynomial) -> np.ndarray:
    """m x m observer-form state matrix: ones on the subdiagonal, last column r_m..r_1."""
    if r.is_zero() or r.degree < 1:
        raise ValueError("feed-back polynomial must have degree >= 1")
    m = r.degree
    a = np.zeros((m, m), dtype=np.uint8)
    a[np.arange(1, m), np.arange(m - 1)] = 1
    a[:, m - 1] = [r[m - i] for i in range(m)]
    return a


def tailbiting_feasible(r: BinaryPolynomial, L: int) -> bool:
    if r.is_zero() or r.degree < 1:
        raise ValueError("feed-back polynomial must have degree >= 1")
    return poly_gcd(r, x_pow_minus_one(L)) == ONE


@dataclass(frozen=True, eq=False)
class BlockGenerator:
    """k x n binary generator of a tail-bitten or terminated convolutional code."""

    matrix: np.ndarray
    K: int
    N: int
    L: int
    memory: int
    form: str

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]

    @property
    def k(self) -> int:
        return self.K * self.L

    @property
    def tail_cols(self) -> int:
        return self.K * self.memory if self.form == TERMINATED else 0

    @property
    def steps(self) -> int:
        return self.L + (self.memory if self.form == TERMINATED else 0)

    @property
    def redundancy(self) -> np.ndarray:
        """All non-information columns (tail inputs and parity)."""
        return self.matrix[:, self.k:]

    @property
    def parity(self) -> np.ndarray:
        """Parity columns only (F in [I | F])."""
        return self.matrix[:, self.k + self.tail_cols:]


def tailbite(G: RationalGeneratorMatrix, L: int) -> BlockGenerator:
    """[LK, LN] tail-biting generator [I_LK | F], F block (i,j) = circ(f_ij)."""
    K, P = G.K, G.N - G.K
    for i, ri in enumerate(G.r):
        if ri.degree >= 1 and not tailbiting_feasible(ri, L):
            raise NotCoprime(f"tail-biting infeasible at L={L}: row {i + 1} feed-back "
                             f"{ri.to_string()} shares a factor with x^{L}-1")
    F = np.zeros((K * L, P * L), dtype=np.uint8)
    for i in range(K):
        for j in range(P):
            f = solve_f(G.q[i][j] % x_pow_minus_one(L), G.r[i], L)
            F[i * L:(i + 1) * L, j * L:(j + 1) * L] = circulant(f, L).dense
    mat = np.hstack([np.eye(K * L, dtype=np.uint8), F])
    return BlockGenerator(mat, K, G.N, L, G.memory, TAILBITING)


def terminate(G: RationalGeneratorMatrix, L: int) -> BlockGenerator:
    """Zero-tail block code: L information steps plus ``memory`` flush steps."""
    trellis = build_trellis(G, L, TERMINATED)
    mat = trellis.encode_block_bits(np.eye(G.K * L, dtype=np.uint8))
    return BlockGenerator(mat, G.K, G.N, L, G.memory, TERMINATED)


def encode_block(B: BlockGenerator | np.ndarray, u) -> np.ndarray:
    """u . B over GF(2); ``u`` may be a single message or a 2-D batch."""
    mat = B.matrix if isinstance(B, BlockGenerator) else np.asarray(B)
    u = np.asarray(u, dtype=np.uint8)
    if u.shape[-1] != mat.shape[0]:
        raise ValueError(f"message length {u.shape[-1]} != {mat.shape[0]} rows")
    return gf2_matmul(u, mat)


@dataclass(frozen=True, eq=False)
class Trellis:
    """Time-invariant section table of a controller-form RSC encoder.

    ``next_state[s, u]`` and ``outputs[s, u]`` (N bits: K systematic then
    N-K parity) describe every edge; ``u`` packs input bit i at bit i.
    Terminated trellises append ``memory`` flush sections in which only
    ``flush_input[s]`` is allowed.
    """

    K: int
    N: int
    L: int
    memory: int
    mode: str
    next_state: np.ndarray
    outputs: np.ndarray
    flush_input: np.ndarray
    pred_state: np.ndarray = field(repr=False)
    pred_input: np.ndarray = field(repr=False)

    @property
    def num_states(self) -> int:
        return self.next_state.shape[0]

    @property
    def num_inputs(self) -> int:
        return self.next_state.shape[1]

    @property
    def sections(self) -> int:
        return self.L + (self.memory if self.mode == TERMINATED else 0)

    @cached_property
    def input_bits(self) -> np.ndarray:
        u = np.arange(self.num_inputs)
        return ((u[:, None] >> np.arange(self.K)[None, :]) & 1).astype(np.uint8)

    def step(self, states: np.ndarray, inputs: np.ndarray):
        return self.next_state[states, inputs], self.outputs[states, inputs]

    def run(self, u_seq: np.ndarray, start: np.ndarray | int = 0, flush: bool = False):
        """Drive the encoder with input symbols ``u_seq`` of shape (batch, T).

        Returns (section outputs (batch, T', N), input symbols (batch, T'),
        final states).  With ``flush`` the ``memory`` tail steps are appended.
        """
        u_seq = np.atleast_2d(u_seq)
        batch, T = u_seq.shape
        state = np.broadcast_to(np.asarray(start), (batch,)).copy()
        total = T + (self.memory if flush else 0)
        outs = np.zeros((batch, total, self.N), dtype=np.uint8)
        used = np.zeros((batch, total), dtype=np.int64)
        for t in range(total):
            u = u_seq[:, t] if t < T else self.flush_input[state]
            used[:, t] = u
            outs[:, t] = self.outputs[state, u]
            state = self.next_state[state, u]
        return outs, used, state

    def symbols_from_message(self, u: np.ndarray) -> np.ndarray:
        """Stream-major bits (batch, K*L) -> input symbols (batch, L)."""
        u = np.atleast_2d(u).reshape(-1, self.K, self.L)
        weights = (1 << np.arange(self.K))[None, :, None]
        return (u.astype(np.int64) * weights).sum(axis=1)

    def layout(self, outs: np.ndarray) -> np.ndarray:
        """Section outputs (batch, T, N) -> block codeword in the module's column layout."""
        batch = outs.shape[0]
        K, L = self.K, self.L
        info = outs[:, :L, :K].transpose(0, 2, 1).reshape(batch, K * L)
        parts = [info]
        if self.mode == TERMINATED:
            tail = outs[:, L:, :K].transpose(0, 2, 1).reshape(batch, K * self.memory)
            parts.append(tail)
        parts.append(outs[:, :, K:].transpose(0, 2, 1).reshape(batch, -1))
        return np.hstack(parts)

    def encode_block_bits(self, u: np.ndarray) -> np.ndarray:
        """Zero-started (and, if terminated, flushed) encoding of stream-major messages."""
        if self.mode != TERMINATED:
            raise ValueError("state-machine block encoding is only defined for terminated mode")
        outs, _, _ = self.run(self.symbols_from_message(u), 0, flush=True)
        return self.layout(outs)


def build_trellis(G: RationalGeneratorMatrix, L: int, mode: str = TERMINATED) -> Trellis:
    """Section table for ``G`` with L information sections and the given boundary mode."""
    if mode not in (TERMINATED, TAILBITING):
        raise ValueError(f"unknown boundary mode {mode!r}")
    if mode == TAILBITING:
        for i, ri in enumerate(G.r):
            if ri.degree >= 1 and not tailbiting_feasible(ri, L):
                raise NotCoprime(f"tail-biting infeasible at L={L} (row {i + 1})")
    K, N, P = G.K, G.N, G.N - G.K
    lengths = G.register_lengths
    offsets = np.concatenate([[0], np.cumsum(lengths)]).astype(int)
    S = 1 << int(offsets[-1])
    if S > MAX_TRELLIS_STATES:
        raise ValueError(f"{S} states exceeds the trellis budget of {MAX_TRELLIS_STATES}")
    U = 1 << K
    next_state = np.zeros((S, U), dtype=np.int64)
    outputs = np.zeros((S, U, N), dtype=np.uint8)
    flush = np.zeros(S, dtype=np.int64)

    rbits = [[ri[k] for k in range(lengths[i] + 1)] for i, ri in enumerate(G.r)]
    qbits = [[[G.q[i][j][k] for k in range(lengths[i] + 1)] for j in range(P)] for i in range(K)]

    for s in range(S):
        regs = []
        for i in range(K):
            M = lengths[i]
            # regs[i][k-1] = w_{t-k}
            regs.append([(s >> (offsets[i] + k)) & 1 for k in range(M)])
        fbs = [sum(rbits[i][k + 1] & regs[i][k] for k in range(lengths[i])) & 1 for i in range(K)]
        flush[s] = sum(fb << i for i, fb in enumerate(fbs))
        for u in range(U):
            ns = 0
            par = [0] * P
            for i in range(K):
                ui = (u >> i) & 1
                w = ui ^ fbs[i]
                hist = [w] + regs[i]
                for j in range(P):
                    par[j] ^= sum(qbits[i][j][k] & hist[k] for k in range(lengths[i] + 1)) & 1
                for k in range(lengths[i]):
                    ns |= hist[k] << (offsets[i] + k)
            next_state[s, u] = ns
            outputs[s, u, :K] = [(u >> i) & 1 for i in range(K)]
            outputs[s, u, K:] = par

    # predecessor lists, padded with -1 where in-degrees differ
    preds = [[] for _ in range(S)]
    for s in range(S):
        for u in range(U):
            preds[next_state[s, u]].append((s, u))
    width = max(len(p) for p in preds)
    pred_state = np.full((S, width), -1, dtype=np.int64)
    pred_input = np.full((S, width), -1, dtype=np.int64)
    for s2, plist in enumerate(preds):
        for p, (s, u) in enumerate(plist):
            pred_state[s2, p] = s
            pred_input[s2, p] = u
    return Trellis(K, N, L, G.memory, mode, next_state, outputs, flush, pred_state, pred_input)
