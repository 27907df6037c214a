"""Permutations for turbo codes: S-random, nested, and appended interleavers.

An interleaver of size k is stored 0-based as ``perm`` with ``perm[x] = Pi(x)``.
Applying it to a vector gives ``out[i] = v[perm[i]]``, which is the row
vector product ``v . P`` with ``P[perm[i], i] = 1``.  Text files are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class ConstructionFailed(RuntimeError):
    """No permutation satisfying the spread constraint was found."""


@dataclass(frozen=True)
class Interleaver:
    perm: tuple
    chain: tuple | None = None

    def __post_init__(self):
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError("interleaver map is not a bijection")
        if self.chain is not None:
            _check_chain(self.chain, self.size)
            if not is_nested(self, self.chain):
                raise ValueError(f"permutation is not {self.chain}-nested")

    @classmethod
    def identity(cls, k: int, chain=None) -> Interleaver:
        return cls(tuple(range(k)), None if chain is None else tuple(chain))

    @classmethod
    def from_images(cls, images, chain=None) -> Interleaver:
        """Build from 1-based images Pi(1), ..., Pi(k)."""
        return cls(tuple(int(x) - 1 for x in images), None if chain is None else tuple(chain))

    @property
    def size(self) -> int:
        return len(self.perm)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.perm, dtype=np.int64)

    def inverse(self) -> Interleaver:
        inv = np.empty(self.size, dtype=np.int64)
        inv[self.array] = np.arange(self.size)
        return Interleaver(tuple(int(x) for x in inv), self.chain)

    def matrix(self) -> np.ndarray:
        """Permutation matrix P with v . P == apply(self, v)."""
        P = np.zeros((self.size, self.size), dtype=np.uint8)
        P[self.array, np.arange(self.size)] = 1
        return P

    def with_chain(self, chain) -> Interleaver:
        return Interleaver(self.perm, tuple(chain))

    def min_spread(self, S: int) -> int | None:
        """Smallest |Pi(i) - Pi(j)| over 0 < |i - j| <= S (None if no such pair)."""
        p = self.array
        best = None
        for d in range(1, min(S, self.size - 1) + 1):
            gap = int(np.abs(p[d:] - p[:-d]).min())
            best = gap if best is None else min(best, gap)
        return best

    def to_text(self) -> str:
        return f"{self.size}\n" + " ".join(str(x + 1) for x in self.perm) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Interleaver:
        tokens = text.split()
        if not tokens:
            raise ValueError("empty interleaver file")
        k = int(tokens[0])
        images = tokens[1:]
        if len(images) != k:
            raise ValueError(f"expected {k} images, found {len(images)}")
        return cls.from_images(images)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> Interleaver:
        return cls.from_text(Path(path).read_text())


def _check_chain(chain, size: int) -> None:
    chain = tuple(int(c) for c in chain)
    if not chain or chain[0] <= 0 or any(b <= a for a, b in zip(chain, chain[1:])):
        raise ValueError(f"chain {chain} must be strictly increasing and positive")
    if chain[-1] != size:
        raise ValueError(f"chain {chain} must end at the interleaver size {size}")


def is_nested(pi: Interleaver, chain) -> bool:
    """True if every prefix block {0..k_l-1} of ``chain`` (k_a < ... < k_1) is invariant."""
    _check_chain(chain, pi.size)
    p = pi.array
    return all(int(p[:kl].max(initial=-1)) < kl for kl in chain)


def apply(pi: Interleaver, v) -> np.ndarray:
    v = np.asarray(v)
    if v.shape[-1] != pi.size:
        raise ValueError(f"vector length {v.shape[-1]} != interleaver size {pi.size}")
    return v[..., pi.array]


def deapply(pi: Interleaver, v) -> np.ndarray:
    """Inverse of :func:`apply`."""
    v = np.asarray(v)
    if v.shape[-1] != pi.size:
        raise ValueError(f"vector length {v.shape[-1]} != interleaver size {pi.size}")
    out = np.empty_like(v)
    out[..., pi.array] = v
    return out


def s_random(k: int, S: int, seed=None, max_restarts: int = 100) -> Interleaver:
    """Random permutation with |Pi(i) - Pi(j)| > S whenever 0 < |i - j| <= S.

    Positions are filled left to right from a shuffled pool; the first pool
    entry compatible with the previous S images is taken.  At a dead end a
    single swap with an earlier position is attempted before restarting the
    whole permutation from the same generator stream.
    """
    if k < 1:
        raise ValueError("size must be positive")
    if S < 0:
        raise ValueError("spread must be non-negative")
    rng = np.random.default_rng(seed)
    for _ in range(max_restarts):
        out = _s_random_attempt(k, S, rng)
        if out is not None:
            return Interleaver(tuple(int(x) for x in out))
    raise ConstructionFailed(f"no spread-{S} permutation of size {k} after {max_restarts} restarts")


def _s_random_attempt(k: int, S: int, rng):
    pool = list(rng.permutation(k))
    out = np.empty(k, dtype=np.int64)
    for i in range(k):
        recent = out[max(0, i - S):i]
        pick = None
        if S == 0 or i == 0:
            pick = 0
        else:
            cand = np.asarray(pool)
            good = np.flatnonzero(np.all(np.abs(cand[:, None] - recent[None, :]) > S, axis=1))
            if good.size:
                pick = int(good[0])
        if pick is not None:
            out[i] = pool.pop(pick)
            continue
        if not _repair(out, i, pool, S, rng):
            return None
    return out


def _repair(out, i, pool, S, rng) -> bool:
    """Fill position i by moving an earlier image there and a pool value into its slot."""
    filled = out[:i]
    lo = max(0, i - S)
    window = out[lo:i]
    # moved[j]: image out[j] is compatible with position i once j itself is vacated
    clash = np.abs(filled[:, None] - window[None, :]) <= S
    own = np.arange(i)[:, None] == np.arange(lo, i)[None, :]
    moved = ~np.any(clash & ~own, axis=1)
    if not moved.any():
        return False
    near_i = np.arange(i) >= i - S
    for idx in rng.permutation(len(pool)):
        v = pool[idx]
        bad = (np.abs(filled - v) <= S).astype(np.int64)
        csum = np.concatenate([[0], np.cumsum(bad)])
        j = np.arange(i)
        hits = csum[np.minimum(j + S + 1, i)] - csum[np.maximum(j - S, 0)] - bad
        ok = moved & (hits == 0) & ~(near_i & (np.abs(filled - v) <= S))
        cands = np.flatnonzero(ok)
        if cands.size:
            jj = int(cands[0])
            out[i] = out[jj]
            out[jj] = v
            pool.pop(idx)
            return True
    return False


def append(parts) -> Interleaver:
    """Block-diagonal concatenation; the chain is the running sum of part sizes."""
    parts = list(parts)
    if not parts:
        raise ValueError("nothing to append")
    if len(parts) == 1:
        return parts[0]
    perm, chain, offset = [], [], 0
    for p in parts:
        perm.extend(offset + x for x in p.perm)
        offset += p.size
        chain.append(offset)
    return Interleaver(tuple(perm), tuple(chain))
