"""Configuration, lattice assembly from configs, and the unconstrained-AWGN
Monte Carlo harness."""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .convcode import TAILBITING, TERMINATED, RationalGeneratorMatrix, tailbite, terminate
from .decoder import DEFAULT_ITERATIONS, TurboLattice, make_turbo_lattice, multistage_decode
from .gf2 import parse_bits
from .interleaver import Interleaver, append, s_random
from .lattice import vnr_to_sigma
from .turbo import NestedTurboFamily, TurboGenerator, build_pccc, nested_family

CSV_COLUMNS = ["alpha2_db", "sigma", "symbols", "symbol_errors", "ser",
               "block_errors", "blocks", "seconds", "capped"]


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


@dataclass(frozen=True)
class LatticeSpec:
    """How to build the lattice.

    Either a convolutional component (``code``, ``L``, ``termination``,
    ``interleavers``) or an explicit binary ``generator`` (rows of bit
    strings, with ``n`` for the zero code).  ``chain`` is (k_a, ..., k_1),
    increasing; omitted means a single level.
    """

    construction: str = "A"
    code: str | None = None
    L: int | None = None
    termination: str = TAILBITING
    branches: int = 2
    interleavers: tuple = ()
    chain: tuple | None = None
    generator: tuple | None = None
    n: int | None = None

    @classmethod
    def from_dict(cls, d: dict) -> LatticeSpec:
        d = dict(d)
        known = {f for f in cls.__dataclass_fields__}
        if "interleaver" in d:
            d["interleavers"] = [d.pop("interleaver")]
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown lattice keys: {sorted(unknown)}")
        code = d.get("code")
        if isinstance(code, list):
            d["code"] = "\n".join(code)
        d["interleavers"] = tuple(_freeze(x) for x in d.get("interleavers", ()))
        if d.get("chain") is not None:
            d["chain"] = tuple(int(c) for c in d["chain"])
        if d.get("generator") is not None:
            d["generator"] = tuple(d["generator"])
        spec = cls(**d)
        spec.validate()
        return spec

    def to_dict(self) -> dict:
        out = asdict(self)
        out["interleavers"] = [_thaw(x) for x in self.interleavers]
        return {k: v for k, v in out.items() if v is not None}

    def validate(self) -> None:
        if self.construction not in ("A", "D"):
            raise ConfigError(f"construction must be A or D, not {self.construction!r}")
        if (self.code is None) == (self.generator is None):
            raise ConfigError("give exactly one of 'code' or 'generator'")
        if self.code is not None:
            if not self.L or self.L < 1:
                raise ConfigError("'L' must be a positive integer")
            if self.termination not in (TAILBITING, TERMINATED):
                raise ConfigError(f"termination must be {TAILBITING} or {TERMINATED}")
            if self.branches < 2:
                raise ConfigError("at least two branches are required")
            if self.interleavers and len(self.interleavers) != self.branches - 1:
                raise ConfigError(f"need {self.branches - 1} interleavers, got {len(self.interleavers)}")
        if self.construction == "A" and self.chain is not None and len(self.chain) > 1:
            raise ConfigError("Construction A uses a single level; drop the chain or use D")
        if self.construction == "D" and self.code is not None and self.termination == TERMINATED:
            raise ConfigError("terminated components support Construction A only")


def _freeze(x):
    if isinstance(x, dict):
        return tuple(sorted((k, _freeze(v)) for k, v in x.items()))
    if isinstance(x, list):
        return tuple(_freeze(v) for v in x)
    return x


def _thaw(x):
    if isinstance(x, tuple) and x and all(isinstance(p, tuple) and len(p) == 2 and isinstance(p[0], str) for p in x):
        return {k: _thaw(v) for k, v in x}
    if isinstance(x, tuple):
        return [_thaw(v) for v in x]
    return x


def _as_dict(desc) -> dict:
    return _thaw(desc) if isinstance(desc, tuple) else dict(desc)


def build_interleaver(desc, k: int, base_dir: Path | None = None) -> Interleaver:
    d = _as_dict(desc)
    kind = d.get("type", "s_random")
    if kind == "identity":
        return Interleaver.identity(k)
    if kind == "s_random":
        size = int(d.get("size", k))
        return s_random(size, int(d.get("S", 0)), d.get("seed", 0), int(d.get("max_restarts", 100)))
    if kind == "file":
        path = Path(d["path"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return Interleaver.load(path)
    if kind == "append":
        parts = [build_interleaver(p, int(_as_dict(p).get("size", 0)), base_dir) for p in d["parts"]]
        out = append(parts)
        if out.size != k:
            raise ConfigError(f"appended interleaver has size {out.size}, need {k}")
        return out
    raise ConfigError(f"unknown interleaver type {kind!r}")


def build_code(spec: LatticeSpec, base_dir: Path | None = None):
    """The (turbo) generator and nested family described by ``spec``."""
    if spec.generator is not None:
        rows = [parse_bits(r) for r in spec.generator]
        if rows:
            G = np.vstack(rows)
        else:
            if not spec.n:
                raise ConfigError("an empty generator needs 'n'")
            G = np.zeros((0, spec.n), dtype=np.uint8)
        if G.shape[0] == 0:
            return G, None
        chain = spec.chain or (G.shape[0],)
        return G, nested_family(G, chain)
    G = RationalGeneratorMatrix.parse(spec.code)
    B = tailbite(G, spec.L) if spec.termination == TAILBITING else terminate(G, spec.L)
    k = B.rows
    descs = spec.interleavers or tuple({"type": "identity"} for _ in range(spec.branches - 1))
    pis = []
    for desc in descs:
        pi = build_interleaver(desc, k, base_dir)
        if spec.chain is not None and len(spec.chain) > 1:
            pi = pi.with_chain(spec.chain)
        pis.append(pi)
    T = build_pccc(B, pis, G)
    chain = spec.chain or (k,)
    return T, nested_family(T, chain)


@dataclass(frozen=True)
class SimConfig:
    lattice: LatticeSpec
    vnr_db: tuple
    iterations: int = DEFAULT_ITERATIONS
    min_errors: int = 100
    max_symbols: int = 10_000_000
    block_size: int = 256
    seed: int = 0
    decoder: str = "turbo"
    mode: str = "zero"
    workers: int = 1
    timing: bool = True

    def __post_init__(self):
        if not self.vnr_db:
            raise ConfigError("the VNR grid is empty")
        if self.min_errors < 1 or self.max_symbols < 1 or self.block_size < 1:
            raise ConfigError("stopping thresholds and block size must be positive")
        if self.iterations < 1:
            raise ConfigError("iterations must be positive")
        if self.decoder not in ("turbo", "ml"):
            raise ConfigError(f"decoder must be turbo or ml, not {self.decoder!r}")
        if self.mode not in ("zero", "random"):
            raise ConfigError(f"mode must be zero or random, not {self.mode!r}")
        if self.workers < 1:
            raise ConfigError("workers must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> SimConfig:
        d = dict(d)
        if "lattice" not in d:
            raise ConfigError("missing 'lattice' section")
        known = set(cls.__dataclass_fields__) | {"analyze", "description"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        d.pop("analyze", None)
        d.pop("description", None)
        lat = LatticeSpec.from_dict(d.pop("lattice"))
        grid = d.pop("vnr_db", None)
        if grid is None:
            raise ConfigError("missing 'vnr_db'")
        grid = tuple(float(v) for v in (grid if isinstance(grid, list) else [grid]))
        try:
            for key in ("max_symbols", "min_errors", "block_size", "iterations", "seed", "workers"):
                if key in d:
                    d[key] = int(d[key])
            return cls(lattice=lat, vnr_db=grid, **d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        out = asdict(self)
        out["lattice"] = self.lattice.to_dict()
        out["vnr_db"] = list(self.vnr_db)
        return out


def load_config(path) -> tuple[SimConfig, dict]:
    """Parse a JSON config; returns (config, raw document)."""
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return SimConfig.from_dict(raw), raw


def build_lattice(cfg: SimConfig, base_dir: Path | None = None) -> TurboLattice:
    code, family = build_code(cfg.lattice, base_dir)
    if family is None:
        # zero code: the lattice is 2Z^n, decoded by plain rounding
        return make_turbo_lattice(NestedTurboFamily(code, (0,)), "ml")
    decoder = cfg.decoder if isinstance(family.base, TurboGenerator) else "ml"
    return make_turbo_lattice(family, decoder, cfg.iterations)


# ---------------------------------------------------------------------------
# Monte Carlo


def block_rng(seed: int, point: int, block: int) -> np.random.Generator:
    """Independent stream keyed by (master seed, grid point, block index)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, point, block])))


def awgn_sample(n, sigma: float, rng: np.random.Generator) -> np.ndarray:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return rng.normal(0.0, sigma, size=n)


def random_points(TL: TurboLattice, count: int, rng: np.random.Generator, spread: int = 4) -> np.ndarray:
    """Uniformly drawn codewords per level plus 2z with z in [-spread, spread)."""
    fam = TL.family
    cws = []
    for l in range(1, fam.levels + 1):
        kl = fam.k_level(l)
        u = rng.integers(0, 2, size=(count, kl), dtype=np.uint8)
        cws.append((u.astype(np.int64) @ fam.matrix[:kl].astype(np.int64)) % 2)
    z = rng.integers(-spread, spread, size=(count, fam.n))
    return TL.point(cws, z)


@dataclass
class BlockResult:
    symbols: int
    symbol_errors: int
    block_errors: int


def run_block(TL: TurboLattice, sigma: float, count: int, rng: np.random.Generator,
              mode: str = "zero") -> BlockResult:
    n = TL.n
    x = np.zeros((count, n)) if mode == "zero" else random_points(TL, count, rng)
    r = x + awgn_sample((count, n), sigma, rng)
    res = multistage_decode(TL, r, sigma)
    wrong = res.x != x
    return BlockResult(count * n, int(wrong.sum()), int(wrong.any(axis=1).sum()))


@dataclass
class SerRow:
    alpha2_db: float
    sigma: float
    symbols: int = 0
    symbol_errors: int = 0
    block_errors: int = 0
    blocks: int = 0
    seconds: float = 0.0
    capped: bool = False

    @property
    def ser(self) -> float:
        return self.symbol_errors / self.symbols if self.symbols else 0.0

    def as_csv(self) -> list:
        return [f"{self.alpha2_db:g}", f"{self.sigma:.10g}", self.symbols, self.symbol_errors,
                f"{self.ser:.6e}", self.block_errors, self.blocks, f"{self.seconds:.3f}",
                int(self.capped)]


_WORKER = {}


def _worker_init(cfg_dict, base_dir):
    cfg = SimConfig.from_dict(cfg_dict)
    _WORKER["cfg"] = cfg
    _WORKER["TL"] = build_lattice(cfg, base_dir)


def _worker_block(args):
    sigma, point, block = args
    cfg, TL = _WORKER["cfg"], _WORKER["TL"]
    return run_block(TL, sigma, cfg.block_size, block_rng(cfg.seed, point, block), cfg.mode)


def run_point(cfg: SimConfig, TL: TurboLattice, alpha2_db: float, point: int = 0,
              pool: ProcessPoolExecutor | None = None) -> SerRow:
    """Simulate one VNR value until ``min_errors`` symbol errors or ``max_symbols``.

    Blocks are consumed in index order; with a pool they are computed in
    waves and any block past the stopping point is discarded, so serial and
    parallel runs report identical counts.
    """
    sigma = vnr_to_sigma(TL.log2_volume, alpha2_db, TL.n)
    row = SerRow(alpha2_db, sigma)
    t0 = time.perf_counter()
    block = 0
    done = False
    while not done:
        if pool is None:
            results = [run_block(TL, sigma, cfg.block_size, block_rng(cfg.seed, point, block), cfg.mode)]
        else:
            wave = [(sigma, point, block + i) for i in range(cfg.workers)]
            results = list(pool.map(_worker_block, wave))
        for res in results:
            row.symbols += res.symbols
            row.symbol_errors += res.symbol_errors
            row.block_errors += res.block_errors
            row.blocks += 1
            block += 1
            if row.symbol_errors >= cfg.min_errors:
                done = True
                break
            if row.symbols >= cfg.max_symbols:
                row.capped = True
                done = True
                break
    row.seconds = time.perf_counter() - t0 if cfg.timing else 0.0
    return row


def csv_header() -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerow(CSV_COLUMNS)
    return buf.getvalue()


def sweep(cfg: SimConfig, TL: TurboLattice | None = None, out=None, base_dir: Path | None = None,
          progress=None) -> list:
    """run_point over the grid, writing each CSV row as soon as it is known."""
    if TL is None:
        TL = build_lattice(cfg, base_dir)
    writer = csv.writer(out, lineterminator="\n") if out is not None else None
    if writer is not None:
        writer.writerow(CSV_COLUMNS)
        out.flush()
    rows = []
    pool = None
    if cfg.workers > 1:
        pool = ProcessPoolExecutor(cfg.workers, initializer=_worker_init,
                                   initargs=(cfg.to_dict(), base_dir))
    try:
        for i, db in enumerate(cfg.vnr_db):
            row = run_point(cfg, TL, db, i, pool)
            rows.append(row)
            if writer is not None:
                writer.writerow(row.as_csv())
                out.flush()
            if progress is not None:
                progress(row)
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    return rows


def read_csv(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
