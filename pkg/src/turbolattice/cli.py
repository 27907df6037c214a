"""Command-line interface: construct, analyze, encode, decode, simulate, sweep."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .gf2 import NotCoprime, format_bits, parse_bits
from .interleaver import ConstructionFailed
from .lattice import (
    RankDeficient,
    construction_d_figures,
    enumerated_figures,
    figures_construction_d,
    vnr_to_sigma,
)
from .decoder import multistage_decode
from .sim import (
    ConfigError,
    build_code,
    build_lattice,
    csv_header,
    load_config,
    run_point,
    sweep,
)
from .turbo import (
    BudgetExceeded,
    MAX_EXHAUSTIVE_K,
    actual_rates,
    rates,
    sampled_spectrum,
    weight_spectrum,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_BUDGET = 4

HEADER_NOTE = ("symbol = one lattice coordinate; SER = wrong coordinates / coordinates; "
               "VNR alpha2_db = 10 log10(vol^(2/n) / (2 pi e sigma^2))")


def _load(args):
    cfg, raw = load_config(args.config)
    return cfg, raw, Path(args.config).resolve().parent


def _print_report(report: dict, as_json: bool, out=None):
    out = out or sys.stdout
    if as_json:
        json.dump(report, out, indent=2, default=str)
        out.write("\n")
        return
    for key, value in report.items():
        if isinstance(value, list):
            value = " ".join(str(v) for v in value)
        out.write(f"{key}: {value}\n")


def _parse_list(text, cast):
    if text is None:
        return None
    return [cast(x) for x in text.replace(",", " ").split()]


def cmd_construct(args) -> int:
    cfg, _, base = _load(args)
    TL = build_lattice(cfg, base)
    fam = TL.family
    if args.basis_out:
        Path(args.basis_out).write_text(TL.basis.to_text())
    if args.generator_out:
        Path(args.generator_out).write_text("\n".join(format_bits(r) for r in fam.matrix) + "\n")
    report = {
        "n": TL.n,
        "levels": TL.levels,
        "k": fam.ks,
        "rates": [str(r) for r in rates(fam)] if fam.k else ["0"],
        "log2_volume": str(TL.log2_volume),
        "basis_denominator": TL.basis.denominator,
    }
    _print_report(report, args.json)
    if not args.basis_out and not args.json:
        sys.stdout.write(TL.basis.to_text())
    return EXIT_OK


def cmd_analyze(args) -> int:
    supplied = {}
    has_lattice = False
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        supplied = dict(raw.get("analyze", {}))
        has_lattice = "lattice" in raw
        if has_lattice:
            cfg, raw, base = _load(args)
    for key, val in (("n", args.n), ("rates", args.rates), ("distances", args.distances),
                     ("multiplicities", args.multiplicities)):
        if val is not None:
            supplied[key] = val
    if isinstance(supplied.get("rates"), str):
        supplied["rates"] = _parse_list(supplied["rates"], Fraction)
    for key in ("distances", "multiplicities"):
        if isinstance(supplied.get(key), str):
            supplied[key] = _parse_list(supplied[key], int)

    if not has_lattice:
        if not {"n", "rates", "distances"} <= set(supplied):
            raise ConfigError("without a lattice, n, rates and distances must be supplied")
        rate_list = [Fraction(r) for r in supplied["rates"]]
        fig = construction_d_figures(int(supplied["n"]), rate_list, supplied["distances"],
                                     supplied.get("multiplicities"))
        report = {"source": "supplied", "rates": [str(r) for r in rate_list],
                  "distances": supplied["distances"], **fig.as_dict()}
        _print_report(report, args.json)
        return EXIT_OK

    _, fam = build_code(cfg.lattice, base)
    if fam is None:
        TL = build_lattice(cfg, base)
        fam = TL.family
    spectra = []
    approximate = False
    dists = supplied.get("distances")
    mults = supplied.get("multiplicities")
    for l in range(1, fam.levels + 1):
        kl = fam.k_level(l)
        if dists is not None:
            spectra.append((dists[l - 1], None if mults is None else mults[l - 1]))
        elif kl <= args.max_k:
            spectra.append(weight_spectrum(fam.generator(l), args.max_k))
        elif args.estimate:
            spectra.append(sampled_spectrum(fam.generator(l), samples=args.samples, seed=cfg.seed))
            approximate = True
        else:
            raise BudgetExceeded(f"level {l} has k = {kl} > {args.max_k}; supply distances "
                                 "in the config or pass --estimate")
    fig = figures_construction_d(fam, spectra)
    report = {
        "n": fam.n,
        "levels": fam.levels,
        "k": fam.ks,
        "rates": [str(r) for r in rates(fam)] if fam.k else ["0"],
        "actual_rates": [str(r) for r in actual_rates(fam)] if fam.k else ["0"],
        "level_distances": [s.d_min if hasattr(s, "d_min") else s[0] for s in spectra],
        "level_multiplicities": [
            (s.multiplicity(s.d_min) if s.d_min is not None else 0) if hasattr(s, "d_min") else s[1]
            for s in spectra],
        **fig.as_dict(),
    }
    if approximate:
        report["exact"] = False
        report["note"] = "sampled spectrum: distance is an upper bound, multiplicity a lower bound"
    if args.enumerate:
        TL = build_lattice(cfg, base)
        d2, tau = enumerated_figures(TL.basis)
        report["enumerated_d2"] = str(d2)
        report["enumerated_kissing"] = tau
    _print_report(report, args.json)
    return EXIT_OK


def cmd_encode(args) -> int:
    cfg, _, base = _load(args)
    _, fam = build_code(cfg.lattice, base)
    if fam is None:
        raise ConfigError("the zero code has no messages to encode")
    u = parse_bits(args.message if args.message else Path(args.message_file).read_text())
    kl = fam.k_level(args.level)
    if u.size != kl:
        raise ConfigError(f"message has {u.size} bits, level {args.level} needs {kl}")
    cw = (u.astype(np.int64) @ fam.generator(args.level).astype(np.int64)) % 2
    print(format_bits(cw))
    return EXIT_OK


def cmd_decode(args) -> int:
    cfg, _, base = _load(args)
    TL = build_lattice(cfg, base)
    r = np.array([float(v) for v in Path(args.input).read_text().split()])
    if r.size != TL.n:
        raise ConfigError(f"received vector has {r.size} entries, lattice dimension is {TL.n}")
    sigma = args.sigma if args.sigma is not None else vnr_to_sigma(TL.log2_volume, args.vnr_db, TL.n)
    res = multistage_decode(TL, r, sigma)
    den = res.denominator
    print(" ".join(str(int(v)) if den == 1 else str(Fraction(int(v), den)) for v in res.numerators))
    return EXIT_OK


def _apply_overrides(cfg, args):
    from dataclasses import replace

    changes = {}
    for key in ("workers", "seed", "min_errors", "max_symbols", "iterations", "block_size"):
        val = getattr(args, key, None)
        if val is not None:
            changes[key] = val
    if getattr(args, "no_timing", False):
        changes["timing"] = False
    return replace(cfg, **changes) if changes else cfg


def cmd_simulate(args) -> int:
    cfg, _, base = _load(args)
    cfg = _apply_overrides(cfg, args)
    TL = build_lattice(cfg, base)
    db = args.vnr_db if args.vnr_db is not None else cfg.vnr_db[0]
    if cfg.workers > 1:
        import dataclasses

        cfg1 = dataclasses.replace(cfg, vnr_db=(db,))
        row = sweep(cfg1, TL, base_dir=base)[0]
    else:
        row = run_point(cfg, TL, db)
    sys.stdout.write(csv_header())
    sys.stdout.write(",".join(str(v) for v in row.as_csv()) + "\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg, _, base = _load(args)
    cfg = _apply_overrides(cfg, args)
    TL = build_lattice(cfg, base)

    def progress(row):
        flag = " (budget-capped)" if row.capped else ""
        print(f"# {row.alpha2_db:g} dB: {row.symbol_errors}/{row.symbols} ser={row.ser:.3e}{flag}",
              file=sys.stderr)

    print(f"# {HEADER_NOTE}", file=sys.stderr)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            sweep(cfg, TL, fh, base, progress)
    else:
        sweep(cfg, TL, sys.stdout, base, progress)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="turbolattice", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build the lattice and emit its basis")
    c.add_argument("config")
    c.add_argument("--basis-out")
    c.add_argument("--generator-out")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_construct)

    a = sub.add_parser("analyze", help="minimum distance, coding gain, kissing number")
    a.add_argument("config", nargs="?")
    a.add_argument("--n", type=int)
    a.add_argument("--rates", help="per-level rates R_1,...,R_a, e.g. 1/2,1/3")
    a.add_argument("--distances", help="per-level minimum distances")
    a.add_argument("--multiplicities", help="per-level minimum-weight codeword counts")
    a.add_argument("--max-k", type=int, default=MAX_EXHAUSTIVE_K)
    a.add_argument("--estimate", action="store_true", help="sample the spectrum past the budget")
    a.add_argument("--samples", type=int, default=20000)
    a.add_argument("--enumerate", action="store_true", help="cross-check by short-vector search")
    a.add_argument("--json", action="store_true")
    a.set_defaults(func=cmd_analyze)

    e = sub.add_parser("encode", help="encode a message with the level-l code")
    e.add_argument("config")
    g = e.add_mutually_exclusive_group(required=True)
    g.add_argument("--message")
    g.add_argument("--message-file")
    e.add_argument("--level", type=int, default=1)
    e.set_defaults(func=cmd_encode)

    d = sub.add_parser("decode", help="multistage-decode one received vector")
    d.add_argument("config")
    d.add_argument("--input", required=True, help="whitespace-separated reals")
    grp = d.add_mutually_exclusive_group(required=True)
    grp.add_argument("--sigma", type=float)
    grp.add_argument("--vnr-db", type=float)
    d.set_defaults(func=cmd_decode)

    for name, func, hlp in (("simulate", cmd_simulate, "one VNR point"),
                            ("sweep", cmd_sweep, "the whole VNR grid to CSV")):
        s = sub.add_parser(name, help=hlp)
        s.add_argument("config")
        if name == "simulate":
            s.add_argument("--vnr-db", type=float)
        else:
            s.add_argument("--out")
        s.add_argument("--workers", type=int)
        s.add_argument("--seed", type=int)
        s.add_argument("--min-errors", type=int)
        s.add_argument("--max-symbols", type=int)
        s.add_argument("--iterations", type=int)
        s.add_argument("--block-size", type=int)
        s.add_argument("--no-timing", action="store_true", help="write 0 seconds for byte-stable output")
        s.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NotCoprime, ConstructionFailed, RankDeficient) as exc:
        print(f"construction infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        print("interrupted; rows written so far are complete", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
