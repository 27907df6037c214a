import io
import json
import math

import numpy as np
import pytest

from turbolattice.lattice import vnr_to_sigma
from turbolattice.sim import (
    CSV_COLUMNS,
    ConfigError,
    LatticeSpec,
    SimConfig,
    awgn_sample,
    block_rng,
    build_lattice,
    load_config,
    run_block,
    run_point,
    sweep,
)

Z2 = {"lattice": {"generator": [], "n": 1}, "vnr_db": [0.0], "min_errors": 200, "block_size": 4096}
TOY = {
    "lattice": {"construction": "D", "code": "101/111", "L": 4, "chain": [2, 4],
                "interleavers": [{"type": "append", "parts": [{"type": "identity", "size": 2},
                                                              {"type": "identity", "size": 2}]}]},
    "vnr_db": [1.0, 3.0], "min_errors": 30, "block_size": 64, "decoder": "ml", "timing": False,
}


def two_z_ser(sigma):
    """Probability that AWGN leaves the Voronoi cell (-1, 1) of 2Z."""
    return math.erfc(1 / (sigma * math.sqrt(2)))


def test_awgn_moments():
    x = awgn_sample(1_000_000, 0.7, block_rng(3, 0, 0))
    assert abs(x.mean()) < 3 * 0.7 / math.sqrt(x.size)
    assert abs(x.var() / 0.49 - 1) < 3 * math.sqrt(2 / x.size)
    assert np.abs(awgn_sample(8, 1e-12, block_rng(3, 0, 1))).max() < 1e-10
    with pytest.raises(ValueError):
        awgn_sample(3, 0.0, block_rng(0, 0, 0))


def test_tiny_noise_gives_no_errors():
    cfg = SimConfig.from_dict({**TOY, "max_symbols": 3000})
    row = run_point(cfg, build_lattice(cfg), 60.0)
    assert row.symbol_errors == 0 and row.capped and row.ser == 0.0


def test_block_streams_are_distinct_and_repeatable():
    a = block_rng(1, 0, 0).normal(size=4)
    assert np.array_equal(a, block_rng(1, 0, 0).normal(size=4))
    assert not np.array_equal(a, block_rng(1, 0, 1).normal(size=4))
    assert not np.array_equal(a, block_rng(1, 1, 0).normal(size=4))


@pytest.mark.parametrize("db", [0.0, 3.0])
def test_two_z_ser_matches_closed_form(db):
    cfg = SimConfig.from_dict(Z2)
    TL = build_lattice(cfg)
    row = run_point(cfg, TL, db)
    p = two_z_ser(row.sigma)
    se = math.sqrt(p * (1 - p) / row.symbols)
    assert abs(row.ser - p) < 3 * se


def test_vnr_definition_on_integer_lattice():
    # Z has volume 1: at 0 dB, sigma^2 = 1 / (2 pi e)
    assert math.isclose(vnr_to_sigma(0, 0.0, n=1), 1 / math.sqrt(2 * math.pi * math.e))
    assert math.isclose(vnr_to_sigma(0, 10.0, n=1), vnr_to_sigma(0, 0.0, n=1) / math.sqrt(10))


def test_sweep_is_deterministic_without_timing():
    cfg = SimConfig.from_dict(TOY)
    outs = []
    for _ in range(2):
        buf = io.StringIO()
        sweep(cfg, out=buf)
        outs.append(buf.getvalue())
    assert outs[0] == outs[1]
    lines = outs[0].splitlines()
    assert lines[0].split(",") == CSV_COLUMNS
    assert len(lines) == 1 + len(cfg.vnr_db)


def test_parallel_matches_serial():
    serial = SimConfig.from_dict(TOY)
    parallel = SimConfig.from_dict({**TOY, "workers": 2})
    a = sweep(serial)
    b = sweep(parallel)
    for ra, rb in zip(a, b):
        assert ra.as_csv() == rb.as_csv()


def test_budget_cap_is_flagged():
    cfg = SimConfig.from_dict({**TOY, "min_errors": 10**6, "max_symbols": 500, "vnr_db": [2.0]})
    row = sweep(cfg)[0]
    assert row.capped and row.symbols >= 500
    assert row.symbols < 500 + cfg.block_size * 12


def test_stops_at_error_target():
    cfg = SimConfig.from_dict({**TOY, "vnr_db": [0.0], "min_errors": 20})
    row = sweep(cfg)[0]
    assert not row.capped and row.symbol_errors >= 20


def test_random_points_agree_with_zero():
    base = {**TOY, "vnr_db": [2.0], "min_errors": 10**6, "max_symbols": 40_000, "block_size": 500}
    z = sweep(SimConfig.from_dict(base))[0]
    r = sweep(SimConfig.from_dict({**base, "mode": "random", "seed": 9}))[0]
    p = (z.symbol_errors + r.symbol_errors) / (z.symbols + r.symbols)
    se = math.sqrt(p * (1 - p) * (1 / z.symbols + 1 / r.symbols))
    assert abs(z.ser - r.ser) < 3 * se


def test_random_mode_sends_lattice_points():
    cfg = SimConfig.from_dict({**TOY, "mode": "random"})
    TL = build_lattice(cfg)
    from turbolattice.sim import random_points

    pts = random_points(TL, 20, block_rng(0, 0, 0))
    assert all(TL.basis.contains(p) for p in pts)
    # noiseless transmission is decoded exactly
    res = run_block(TL, 1e-6, 20, block_rng(0, 0, 0), "random")
    assert res.symbol_errors == 0


@pytest.mark.parametrize("bad", [
    {**Z2, "vnr_db": []},
    {**Z2, "mode": "ones"},
    {**Z2, "decoder": "fast"},
    {**Z2, "workers": 0},
    {**Z2, "colour": 1},
    {"vnr_db": [1.0]},
    {**Z2, "lattice": {"code": "101/111"}},
    {**Z2, "lattice": {"code": "101/111", "L": 4, "construction": "E"}},
    {**Z2, "lattice": {"code": "101/111", "L": 4, "chain": [2, 4]}},
    {**Z2, "lattice": {"code": "101/111", "L": 4, "construction": "D", "chain": [2, 4],
                       "termination": "terminated"}},
])
def test_config_errors(bad):
    with pytest.raises(ConfigError):
        SimConfig.from_dict(bad)


def test_config_round_trip(tmp_path):
    cfg = SimConfig.from_dict(TOY)
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    again, _ = load_config(path)
    assert again == cfg
    assert LatticeSpec.from_dict(cfg.lattice.to_dict()) == cfg.lattice
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
