"""Polynomials and matrices over GF(2).

A binary polynomial a_0 + a_1 x + ... + a_d x^d is stored bit-packed in a
Python int (bit i = coefficient of x^i).  Text form is the coefficient string
lowest degree first, so ``"10101"`` is 1 + x^2 + x^4.

Matrices are numpy ``uint8`` arrays holding 0/1 entries.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

# degree of the zero polynomial; compares below every integer
ZERO_DEGREE = float("-inf")


class NotCoprime(ValueError):
    """Raised when a polynomial has no inverse modulo x^L - 1."""


class BinaryPolynomial:
    """Immutable polynomial over GF(2)."""

    __slots__ = ("_bits",)

    def __init__(self, bits: int = 0):
        if bits < 0:
            raise ValueError("bit pattern must be non-negative")
        self._bits = int(bits)

    @classmethod
    def from_coeffs(cls, coeffs) -> BinaryPolynomial:
        """Build from a low-to-high coefficient sequence."""
        bits = 0
        for i, c in enumerate(coeffs):
            if int(c) & 1:
                bits |= 1 << i
        return cls(bits)

    @classmethod
    def parse(cls, text: str) -> BinaryPolynomial:
        """Parse the low-degree-first bit string (``"101"`` is 1 + x^2)."""
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a binary coefficient string: {text!r}")
        return cls.from_coeffs(int(c) for c in text)

    @classmethod
    def monomial(cls, power: int) -> BinaryPolynomial:
        return cls(1 << power)

    @property
    def bits(self) -> int:
        return self._bits

    @property
    def degree(self):
        """Index of the highest nonzero coefficient, ``ZERO_DEGREE`` for 0."""
        if self._bits == 0:
            return ZERO_DEGREE
        return self._bits.bit_length() - 1

    def is_zero(self) -> bool:
        return self._bits == 0

    def coeffs(self, length: int | None = None) -> np.ndarray:
        """Coefficient vector, low to high, optionally zero-padded to ``length``."""
        size = self._bits.bit_length() if length is None else length
        if size < self._bits.bit_length():
            raise ValueError(f"degree {self.degree} does not fit in length {length}")
        return np.array([(self._bits >> i) & 1 for i in range(size)], dtype=np.uint8)

    def __getitem__(self, i: int) -> int:
        return (self._bits >> i) & 1

    def __call__(self, x: int) -> int:
        """Evaluate at x in GF(2)."""
        if x & 1:
            return self._bits.bit_count() & 1
        return self._bits & 1

    def __add__(self, other: BinaryPolynomial) -> BinaryPolynomial:
        return BinaryPolynomial(self._bits ^ other._bits)

    __sub__ = __add__

    def __mul__(self, other: BinaryPolynomial) -> BinaryPolynomial:
        a, b = self._bits, other._bits
        out = 0
        while b:
            if b & 1:
                out ^= a
            a <<= 1
            b >>= 1
        return BinaryPolynomial(out)

    def __divmod__(self, other: BinaryPolynomial):
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        q, r = 0, self._bits
        db = other._bits.bit_length()
        while r.bit_length() >= db:
            shift = r.bit_length() - db
            q |= 1 << shift
            r ^= other._bits << shift
        return BinaryPolynomial(q), BinaryPolynomial(r)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __eq__(self, other) -> bool:
        if isinstance(other, BinaryPolynomial):
            return self._bits == other._bits
        return NotImplemented

    def __hash__(self) -> int:
        return hash(("gf2poly", self._bits))

    def __bool__(self) -> bool:
        return self._bits != 0

    def to_string(self, length: int | None = None) -> str:
        if self._bits == 0 and length is None:
            return "0"
        return "".join(str(b) for b in self.coeffs(length))

    def __str__(self) -> str:
        if self._bits == 0:
            return "0"
        terms = []
        for i in range(self._bits.bit_length()):
            if self[i]:
                terms.append("1" if i == 0 else ("x" if i == 1 else f"x^{i}"))
        return "+".join(terms)

    def __repr__(self) -> str:
        return f"BinaryPolynomial('{self.to_string()}')"


ONE = BinaryPolynomial(1)
ZERO = BinaryPolynomial(0)


def x_pow_minus_one(L: int) -> BinaryPolynomial:
    """The modulus x^L - 1 (= x^L + 1 over GF(2))."""
    return BinaryPolynomial((1 << L) | 1)


def poly_add(a: BinaryPolynomial, b: BinaryPolynomial) -> BinaryPolynomial:
    return a + b


def poly_mul_mod(a: BinaryPolynomial, b: BinaryPolynomial, L: int) -> BinaryPolynomial:
    """Product of ``a`` and ``b`` reduced modulo x^L - 1."""
    if L < 1:
        raise ValueError("L must be positive")
    prod = (a * b).bits
    mask = (1 << L) - 1
    out = 0
    # x^L = 1: fold every length-L chunk onto the low chunk
    while prod:
        out ^= prod & mask
        prod >>= L
    return BinaryPolynomial(out)


def poly_gcd(a: BinaryPolynomial, b: BinaryPolynomial) -> BinaryPolynomial:
    """Greatest common divisor (monic is automatic over GF(2))."""
    if a.is_zero() and b.is_zero():
        raise ValueError("gcd(0, 0) is undefined")
    while b:
        a, b = b, a % b
    return a


def poly_xgcd(a: BinaryPolynomial, b: BinaryPolynomial):
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b)."""
    if a.is_zero() and b.is_zero():
        raise ValueError("gcd(0, 0) is undefined")
    r0, r1 = a, b
    s0, s1 = ONE, ZERO
    t0, t1 = ZERO, ONE
    while r1:
        q, r = divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 + q * s1
        t0, t1 = t1, t0 + q * t1
    return r0, s0, t0


def poly_inverse_mod(r: BinaryPolynomial, L: int) -> BinaryPolynomial:
    """Inverse of ``r`` modulo x^L - 1; raises :class:`NotCoprime` if none exists."""
    modulus = x_pow_minus_one(L)
    g, s, _ = poly_xgcd(r % modulus, modulus)
    if g != ONE:
        raise NotCoprime(f"gcd({r.to_string()}, x^{L}-1) = {g.to_string()} != 1")
    return s % modulus


def solve_f(q: BinaryPolynomial, r: BinaryPolynomial, L: int) -> BinaryPolynomial:
    """The unique f of degree < L with f*r = q (mod x^L - 1)."""
    if q.degree >= L:
        raise ValueError(f"deg q = {q.degree} must be below L = {L}")
    return poly_mul_mod(q, poly_inverse_mod(r, L), L)


@dataclass(frozen=True)
class CirculantMatrix:
    """L x L binary circulant; row i is ``top_row`` cyclically shifted right by i."""

    size: int
    top_row: tuple

    def __post_init__(self):
        if len(self.top_row) != self.size:
            raise ValueError("top row length must equal size")

    @classmethod
    def from_poly(cls, f: BinaryPolynomial, L: int) -> CirculantMatrix:
        return cls(L, tuple(int(b) for b in f.coeffs(L)))

    @property
    def poly(self) -> BinaryPolynomial:
        return BinaryPolynomial.from_coeffs(self.top_row)

    @cached_property
    def dense(self) -> np.ndarray:
        top = np.array(self.top_row, dtype=np.uint8)
        idx = (np.arange(self.size)[None, :] - np.arange(self.size)[:, None]) % self.size
        return top[idx]

    def __matmul__(self, other: CirculantMatrix) -> CirculantMatrix:
        if other.size != self.size:
            raise ValueError("circulant sizes differ")
        return CirculantMatrix.from_poly(poly_mul_mod(self.poly, other.poly, self.size), self.size)


def circulant(f: BinaryPolynomial, L: int) -> CirculantMatrix:
    if f.degree >= L:
        raise ValueError(f"deg f = {f.degree} does not fit a {L}x{L} circulant")
    return CirculantMatrix.from_poly(f, L)


# ---------------------------------------------------------------------------
# dense GF(2) linear algebra


def gf2_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (np.asarray(a, dtype=np.int64) @ np.asarray(b, dtype=np.int64) % 2).astype(np.uint8)


def gf2_rref(m: np.ndarray):
    """Reduced row echelon form over GF(2). Returns (rref, pivot_columns)."""
    a = np.array(m, dtype=np.uint8) & 1
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hit = np.nonzero(a[r:, c])[0]
        if hit.size == 0:
            continue
        p = r + hit[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        others = np.nonzero(a[:, c])[0]
        others = others[others != r]
        a[others] ^= a[r]
        pivots.append(c)
        r += 1
    return a, pivots


def gf2_rank(m: np.ndarray) -> int:
    return len(gf2_rref(m)[1])


def gf2_det(m: np.ndarray) -> int:
    """Determinant over GF(2) (0 or 1) of a square matrix."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("square matrix required")
    return int(gf2_rank(m) == m.shape[0])


def gf2_matpow(m: np.ndarray, e: int) -> np.ndarray:
    out = np.eye(m.shape[0], dtype=np.uint8)
    base = np.asarray(m, dtype=np.uint8)
    while e:
        if e & 1:
            out = gf2_matmul(out, base)
        base = gf2_matmul(base, base)
        e >>= 1
    return out


def in_row_space(g: np.ndarray, v: np.ndarray) -> bool:
    """True if every row of ``v`` lies in the GF(2) row space of ``g``."""
    v = np.atleast_2d(v)
    if g.shape[0] == 0:
        return not v.any()
    return gf2_rank(np.vstack([g, v])) == gf2_rank(g)


def parse_bits(text: str) -> np.ndarray:
    text = "".join(text.split())
    if set(text) - {"0", "1"}:
        raise ValueError(f"not a bit string: {text!r}")
    return np.array([int(c) for c in text], dtype=np.uint8)


def format_bits(v) -> str:
    return "".join(str(int(b)) for b in v)
