"""Construction A / D lattices from nested binary codes and their figures of merit.

A :class:`LatticeBasis` stores an integer numerator matrix and a common
denominator, so every entry is exact.  Volumes are kept as base-2 logarithms
because they reach 2^1000 and beyond for realistic code lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .turbo import BudgetExceeded, NestedTurboFamily, TurboGenerator, WeightSpectrum

MAX_ENUM_DIM = 16
MAX_ENUM_RADIUS2 = 8
MAX_ENUM_VECTORS = 2_000_000

CONSTRUCTION_A = "A"
CONSTRUCTION_D = "D"


class RankDeficient(ValueError):
    """The code generator does not have full row rank."""


@dataclass(frozen=True, eq=False)
class LatticeBasis:
    """Rows of ``numerators / denominator`` generate the lattice."""

    numerators: np.ndarray
    denominator: int = 1
    levels: int = 1
    ranks: tuple = ()
    construction: str = "generic"
    pivots: tuple = field(default=(), repr=False)

    @property
    def n(self) -> int:
        return self.numerators.shape[1]

    @property
    def matrix(self) -> np.ndarray:
        """Float view of the basis."""
        return self.numerators.astype(np.float64) / self.denominator

    def entry(self, i: int, j: int) -> Fraction:
        return Fraction(int(self.numerators[i, j]), self.denominator)

    def scaled(self, factor: int) -> LatticeBasis:
        """Basis of factor * lattice for a positive integer factor."""
        return LatticeBasis(self.numerators * factor, self.denominator, self.levels,
                            self.ranks, self.construction, self.pivots)

    @property
    def log2_volume(self):
        """log2 |det B|: an exact integer for coded constructions, a float otherwise."""
        if self.construction in (CONSTRUCTION_A, CONSTRUCTION_D):
            return Fraction(self.n - sum(self.ranks))
        det = abs(self.exact_det())
        if det == 0:
            raise RankDeficient("basis is singular")
        return math.log2(det.numerator) - math.log2(det.denominator)

    @property
    def volume(self) -> float:
        return 2.0 ** float(self.log2_volume)

    def exact_det(self) -> Fraction:
        num = _bareiss_det([[int(v) for v in row] for row in self.numerators])
        return Fraction(num, self.denominator ** self.n)

    def coordinates(self, x) -> np.ndarray | None:
        """Integer z with z B = x, or None if x is not a lattice point."""
        x = np.asarray(x, dtype=np.float64)
        scaled = x * self.denominator
        target = np.rint(scaled)
        if not np.allclose(scaled, target, atol=1e-9):
            return None
        z = np.linalg.solve(self.numerators.astype(np.float64).T, target)
        zi = np.rint(z).astype(np.int64)
        if not np.array_equal(zi.astype(object) @ self.numerators.astype(object),
                              target.astype(np.int64).astype(object)):
            return None
        return zi

    def contains(self, x) -> bool:
        return self.coordinates(x) is not None

    def to_text(self) -> str:
        lines = []
        for row in self.numerators:
            lines.append(" ".join(_frac_text(Fraction(int(v), self.denominator)) for v in row))
        return "\n".join(lines) + "\n"


def _frac_text(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _bareiss_det(m) -> int:
    """Fraction-free Gaussian elimination on Python ints."""
    a = [row[:] for row in m]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


def _level_echelon(G: np.ndarray):
    """Reduce row j by earlier rows only, so every row prefix keeps its span.

    Returns (rows, pivots); raises :class:`RankDeficient` on a dependent row.
    """
    rows = np.array(G, dtype=np.uint8) & 1
    pivots = []
    for j in range(rows.shape[0]):
        for i, p in enumerate(pivots):
            if rows[j, p]:
                rows[j] ^= rows[i]
        nz = np.flatnonzero(rows[j])
        if nz.size == 0:
            raise RankDeficient(f"row {j + 1} is dependent on the rows above it")
        pivots.append(int(nz[0]))
    return rows, pivots


def _level_of_rows(ks) -> np.ndarray:
    """Level index l (1-based) of every row of G_1 given (k_1, ..., k_a)."""
    ks = list(ks)
    lev = np.ones(ks[0], dtype=np.int64)
    for l in range(2, len(ks) + 1):
        lev[: ks[l - 1]] = l
    return lev


def _assemble(G: np.ndarray, ks, construction: str) -> LatticeBasis:
    G = np.asarray(G, dtype=np.uint8)
    n = G.shape[1]
    a = len(ks)
    den = 1 << (a - 1)
    if G.shape[0] == 0:
        return LatticeBasis(2 * np.eye(n, dtype=np.int64), 1, 1, (0,), construction, ())
    rows, pivots = _level_echelon(G)
    lev = _level_of_rows(ks)
    num = np.zeros((n, n), dtype=np.int64)
    # level-l rows carry 2^(1-l) = 2^(a-l) / 2^(a-1)
    num[: len(rows)] = rows.astype(np.int64) * (1 << (a - lev))[:, None]
    free = [c for c in range(n) if c not in set(pivots)]
    for r, c in enumerate(free, start=len(rows)):
        num[r, c] = 2 * den
    return LatticeBasis(num, den, a, tuple(int(k) for k in ks), construction, tuple(pivots))


def construction_a(C) -> LatticeBasis:
    """Basis of {c + 2z : c in C, z in Z^n}."""
    G = np.asarray(C.matrix if hasattr(C, "matrix") else C, dtype=np.uint8)
    if G.ndim != 2:
        raise ValueError("generator must be a 2-D matrix")
    return _assemble(G, (G.shape[0],), CONSTRUCTION_A)


MAX_LEAD_SEARCH_K = 16


def _lead_with_min_weight(G: np.ndarray, k: int) -> np.ndarray:
    """Rewrite rows 0..k-1 so row 0 is a minimum-weight word of their span.

    The span of every row prefix from k on is unchanged.  Row 0 survives the
    level echelon untouched, so the scaled minimum-weight word is itself a
    lattice vector.
    """
    G = np.array(G, dtype=np.uint8)
    top = G[:k].astype(np.int64)
    msgs = (np.arange(1, 1 << k)[:, None] >> np.arange(k)) & 1
    words = (msgs @ top) % 2
    best = int(np.argmin(words.sum(axis=1)))
    pick = int(np.flatnonzero(msgs[best])[0])
    G[pick] = words[best]
    G[[0, pick]] = G[[pick, 0]]
    return G


def construction_d(F: NestedTurboFamily) -> LatticeBasis:
    """Basis of C_1 + C_2/2 + ... + C_a/2^(a-1) + 2Z^n.

    Rows k_{l+1}+1..k_l of G_1 are scaled by 2^(1-l); 2e_i completes the
    coordinates that are not pivots of G_1.  A turbo generator is used row
    for row.  For an explicit generator the innermost code's rows are first
    rewritten to lead with one of its minimum-weight words (when k_a <= 16),
    which makes the lattice attain d^(a)/4^(a-1) whenever that term is the
    minimum.
    """
    if F.levels == 1:
        return _assemble(F.matrix, tuple(F.ks), CONSTRUCTION_A)
    G = F.matrix
    k_top = F.k_level(F.levels)
    if not isinstance(F.base, TurboGenerator) and k_top <= MAX_LEAD_SEARCH_K:
        G = _lead_with_min_weight(G, k_top)
    return _assemble(G, tuple(F.ks), CONSTRUCTION_D)


# ---------------------------------------------------------------------------
# figures of merit


@dataclass(frozen=True)
class LatticeFigures:
    n: int
    d2: Fraction
    log2_volume: Fraction
    kissing: int | None
    kissing_is_bound: bool
    exact: bool = True
    table_gain: float | None = None

    @property
    def volume(self) -> float:
        return 2.0 ** float(self.log2_volume)

    @property
    def coding_gain(self) -> float:
        """d^2 / vol^(2/n)."""
        return float(self.d2) * 2.0 ** (-2.0 * float(self.log2_volume) / self.n)

    @property
    def coding_gain_db(self) -> float:
        return 10.0 * math.log10(self.coding_gain)

    @property
    def normalized_kissing(self) -> float | None:
        return None if self.kissing is None else self.kissing / self.n

    def as_dict(self) -> dict:
        out = {
            "n": self.n,
            "d2": str(self.d2),
            "d2_float": float(self.d2),
            "log2_volume": str(self.log2_volume),
            "coding_gain": self.coding_gain,
            "coding_gain_db": self.coding_gain_db,
            "kissing": self.kissing,
            "kissing_is_bound": self.kissing_is_bound,
            "normalized_kissing": self.normalized_kissing,
            "exact": self.exact,
        }
        if self.table_gain is not None:
            out["construction_a_table_gain"] = self.table_gain
            out["construction_a_table_gain_db"] = 10.0 * math.log10(self.table_gain)
        return out


def _spectrum_pair(s):
    if isinstance(s, WeightSpectrum):
        d = s.d_min
        return d, (s.multiplicity(d) if d is not None else 0), s.exhaustive
    d, A = s
    return d, A, True


def construction_a_figures(n: int, k: int, d, A, exact: bool = True) -> LatticeFigures:
    """Minimum distance, volume and kissing number of a Construction A lattice.

    ``d`` is the code's minimum distance (None for the zero code).
    """
    if d is None:
        d2, tau = Fraction(4), 2 * n
    else:
        d2 = Fraction(min(4, d))
        if d < 4:
            tau = 2 ** d * A
        elif d == 4:
            tau = 2 * n + 16 * A
        else:
            tau = 2 * n
    dd = float(d2)
    table = (4.0 ** (k / n)) if d is None or d >= 4 else dd / 2.0 * 4.0 ** (k / n)
    return LatticeFigures(n, d2, Fraction(n - k), tau, False, exact, table)


def figures_construction_a(C, spectrum: WeightSpectrum) -> LatticeFigures:
    G = np.asarray(C.matrix if hasattr(C, "matrix") else C)
    d, A, exact = _spectrum_pair(spectrum)
    return construction_a_figures(G.shape[1], G.shape[0], d, A, exact)


def construction_d_figures(n: int, rates, distances, multiplicities=None,
                           exact: bool = True) -> LatticeFigures:
    """Figures from per-level rates R_l and distances d^(l), l = 1..a.

    d^2 = min_l min(4, d^(l)/4^(l-1)); tau is the upper bound
    2n + sum over levels with d^(l) <= 4^l of 2^d A_d (None if some needed A
    is unknown).
    """
    rates = [Fraction(r) for r in rates]
    if len(rates) != len(distances):
        raise ValueError("need one distance per level")
    d2 = Fraction(4)
    for l, d in enumerate(distances, start=1):
        if d is not None:
            d2 = min(d2, Fraction(d, 4 ** (l - 1)))
    tau = 2 * n
    for l, d in enumerate(distances, start=1):
        if d is not None and d <= 4 ** l:
            A = None if multiplicities is None else multiplicities[l - 1]
            if A is None:
                tau = None
                break
            tau += 2 ** d * A
    log2_vol = n * (1 - sum(rates))
    return LatticeFigures(n, d2, log2_vol, tau, True, exact)


def figures_construction_d(F: NestedTurboFamily, spectra) -> LatticeFigures:
    if len(spectra) != F.levels:
        raise ValueError("need one spectrum per level")
    pairs = [_spectrum_pair(s) for s in spectra]
    if F.levels == 1:
        d, A, exact = pairs[0]
        return construction_a_figures(F.n, F.k, d, A, exact)
    rates = [Fraction(k, F.n) for k in F.ks]
    return construction_d_figures(F.n, rates, [p[0] for p in pairs], [p[1] for p in pairs],
                                  all(p[2] for p in pairs))


def gain_from_rates(rates, d2) -> float:
    """4^(sum R - 1) * d^2, equal to d^2 / vol^(2/n) for Construction D."""
    return 4.0 ** (float(sum(Fraction(r) for r in rates)) - 1.0) * float(d2)


# ---------------------------------------------------------------------------
# short-vector enumeration


def enumerate_short_vectors(B: LatticeBasis, radius2, max_vectors: int = MAX_ENUM_VECTORS,
                            max_radius2=MAX_ENUM_RADIUS2):
    """All nonzero lattice vectors of squared norm <= radius2.

    Returns a list of (norm2 as Fraction, integer numerator vector); the
    vector is ``numerators / B.denominator``.  Depth-first search over
    coefficient vectors on the Cholesky factor of the Gram matrix, with every
    candidate rechecked in exact integer arithmetic.
    """
    radius2 = Fraction(radius2)
    n = B.n
    if n > MAX_ENUM_DIM:
        raise BudgetExceeded(f"dimension {n} exceeds the enumeration budget of {MAX_ENUM_DIM}")
    if radius2 > max_radius2:
        raise BudgetExceeded(f"radius^2 {radius2} exceeds the enumeration budget of {max_radius2}")
    num = B.numerators.astype(np.int64)
    den2 = B.denominator ** 2
    bound = float(radius2) * den2
    gram = (num @ num.T).astype(np.float64)
    R = np.linalg.cholesky(gram).T  # gram = R^T R, R upper triangular
    diag = np.diag(R)
    mu = R / diag[:, None]
    slack = 1e-7 * max(1.0, bound)
    limit_exact = radius2 * den2

    out = []
    z = np.zeros(n, dtype=np.int64)

    def recurse(i: int, partial: float):
        # centre of coordinate i given z[i+1:]
        c = -float(mu[i, i + 1:] @ z[i + 1:])
        rem = bound + slack - partial
        if rem < 0:
            return
        half = math.sqrt(rem) / diag[i]
        lo, hi = math.ceil(c - half), math.floor(c + half)
        for v in range(lo, hi + 1):
            z[i] = v
            term = (diag[i] * (v - c)) ** 2
            if partial + term > bound + slack:
                continue
            if i == 0:
                if z.any():
                    vec = z @ num
                    norm = int(vec @ vec)
                    if norm <= limit_exact:
                        out.append((Fraction(norm, den2), vec.copy()))
                        if len(out) > max_vectors:
                            raise BudgetExceeded(f"more than {max_vectors} short vectors")
            else:
                recurse(i - 1, partial + term)
        z[i] = 0

    recurse(n - 1, 0.0)
    return out


def enumerated_figures(B: LatticeBasis):
    """(d^2, kissing number) of the lattice by exhaustive search.

    The shortest basis row bounds d^2 from above and sets the search radius;
    so does 4 whenever 2Z^n is a sublattice, as for every coded construction.
    """
    num = B.numerators.astype(np.int64)
    radius2 = Fraction(int((num * num).sum(axis=1).min()), B.denominator ** 2)
    if B.construction in (CONSTRUCTION_A, CONSTRUCTION_D):
        radius2 = min(radius2, Fraction(4))
    vecs = enumerate_short_vectors(B, radius2)
    d2 = min(v[0] for v in vecs)
    return d2, sum(1 for v in vecs if v[0] == d2)


# ---------------------------------------------------------------------------
# channel scaling


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def vnr_to_sigma(B, alpha2_db: float, n: int | None = None) -> float:
    """Noise deviation for volume-to-noise ratio alpha^2 (in dB).

    sigma^2 = vol^(2/n) / (2 pi e alpha^2).  ``B`` is a LatticeBasis or a
    log2 volume (then ``n`` is required).
    """
    if isinstance(B, LatticeBasis):
        log2_vol, n = float(B.log2_volume), B.n
    else:
        if n is None:
            raise ValueError("dimension required with a bare volume")
        log2_vol = float(B)
    alpha2 = db_to_linear(alpha2_db)
    if alpha2 <= 0:
        raise ValueError("alpha^2 must be positive")
    var = 2.0 ** (2.0 * log2_vol / n) / (2.0 * math.pi * math.e * alpha2)
    return math.sqrt(var)
