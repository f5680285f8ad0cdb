"""Command-line entry point.

    irs-tdma run [--config PATH | --profile desk|full] [--experiment NAME]
                 [--Z 1,10,20] [--bits cont,5,2] [--drops N] [--seed U64]
                 [--workers N] [--out DIR] [key=value ...]
    irs-tdma run --audit OUT/results.csv

Exit status: 0 success, 1 runtime failure or audit mismatch, 2 bad
configuration.
"""
import argparse
import csv
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import evaluation as ev
from .channel import build_channels, generate_scenario
from .config import (ConfigError, RunConfig, apply_overrides, dump_config, load_config,
                     load_profile, parse_bits_list, parse_list, validate)
from .irs_opt import optimize_all

log = logging.getLogger("irs_tdma")

RESULTS = "results.csv"
AGGREGATE = "aggregate.csv"
SUMMARY = "summary.txt"
CONFIG_COPY = "config.ini"
PER_UE = "per_ue.csv"


def build_parser():
    p = argparse.ArgumentParser(prog="irs-tdma", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment or audit a results file")
    src = r.add_mutually_exclusive_group()
    src.add_argument("--config", metavar="PATH")
    src.add_argument("--profile", default=None, help="shipped profile: desk (default) or full")
    r.add_argument("--experiment", choices=["sweep-z", "sweep-irs-size", "sweep-quantization", "single"])
    r.add_argument("--Z", dest="z_values", metavar="LIST")
    r.add_argument("--bits", metavar="LIST|cont")
    r.add_argument("--drops", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--workers", type=int)
    r.add_argument("--out", metavar="DIR")
    r.add_argument("--audit", metavar="CSVPATH", help="re-derive every row of a results CSV")
    r.add_argument("-v", "--verbose", action="store_true")
    r.add_argument("overrides", nargs="*", metavar="key=value")
    return p


def _base_config(args):
    if args.config:
        with open(args.config) as fh:
            return load_config(fh.read())
    return load_profile(args.profile or "desk")


def resolve_config(args):
    cfg = _base_config(args)
    cfg = apply_overrides(cfg, args.overrides)
    flags = {}
    if args.experiment:
        flags["experiment"] = args.experiment
    if args.z_values:
        flags["z_values"] = parse_list(args.z_values)
    if args.bits:
        flags["bits"] = parse_bits_list(args.bits)
    for key in ("drops", "seed", "workers", "out"):
        if getattr(args, key) is not None:
            flags[key] = getattr(args, key)
    return replace(cfg, **flags)


def execute(cfg):
    """Run the configured experiment; returns the per-drop reports."""
    s = cfg.scenario
    common = dict(master_seed=cfg.seed, workers=cfg.workers, rate_tol=cfg.rate_tol, max_iter=cfg.max_iter)
    if cfg.experiment == "single":
        common["workers"] = 1
    drops = 1 if cfg.experiment == "single" else cfg.drops
    return ev.run_sweep(s, cfg.policies, cfg.z_values, drops, bits_values=cfg.bits,
                        irs_sizes=cfg.irs_sizes, **common)


def summary_text(cfg, rows):
    lines = [
        f"experiment: {cfg.experiment}",
        f"K={cfg.scenario.K}  drops={1 if cfg.experiment == 'single' else cfg.drops}  master seed={cfg.seed}",
        "mean rate per slot [bit/slot], averaged over drops",
        "",
    ]
    zs = list(cfg.z_values)
    head = f"{'policy':<12}{'bits':>5}{'irs':>8} " + "".join(f"{'Z=' + str(z):>10}" for z in zs)
    lines.append(head)
    table = {}
    for row in rows:
        key = (row["policy"], row["bits"], (row["irs_rows"], row["irs_cols"]))
        table.setdefault(key, {})[row["Z"]] = row["mean_rate"]
    for (policy, bits, (rr, cc)), vals in table.items():
        cells = "".join(f"{vals[z]:>10.4f}" if z in vals else f"{'-':>10}" for z in zs)
        lines.append(f"{policy:<12}{ev.fmt(bits):>5}{f'{rr}x{cc}':>8} {cells}")
    return "\n".join(lines) + "\n"


def _write_per_ue(path, cfg):
    seed = ev.drop_seeds(cfg.seed, 1)[0]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["policy", "Z", "bits", "ue", "cluster", "rate"])
        for rows, cols in cfg.irs_sizes:
            scen = generate_scenario(replace(cfg.scenario, n_i=(rows, cols), seed=seed))
            ch = build_channels(scen)
            for bits in cfg.bits:
                links = optimize_all(ch, bits=bits, rate_tol=cfg.rate_tol, max_iter=cfg.max_iter)
                for policy in cfg.policies:
                    for Z in cfg.z_values:
                        out = ev.run_policy(policy, links, Z, seed=ev.policy_seed(seed, policy, Z), bits=bits)
                        rep = ev.frame_sum_rate(out, links, Z=Z)
                        for k in range(len(links)):
                            w.writerow([policy.value, Z, ev.fmt(bits), k, int(out.assignment[k]),
                                        ev.fmt(float(rep.per_ue_rate[k]))])


def run_experiment(cfg):
    os.makedirs(cfg.out, exist_ok=True)
    reports = execute(cfg)
    rows = ev.aggregate(reports)
    ev.write_reports_csv(os.path.join(cfg.out, RESULTS), reports)
    ev.write_aggregate_csv(os.path.join(cfg.out, AGGREGATE), rows)
    with open(os.path.join(cfg.out, CONFIG_COPY), "w") as fh:
        fh.write(dump_config(cfg))
    text = summary_text(cfg, rows)
    with open(os.path.join(cfg.out, SUMMARY), "w") as fh:
        fh.write(text)
    if cfg.experiment == "single":
        _write_per_ue(os.path.join(cfg.out, PER_UE), cfg)
    sys.stdout.write(text)
    return reports


def audit(csv_path, cfg):
    """Recompute every row of a results CSV; returns the list of mismatching rows."""
    bad = []
    cache = {}
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        seed = int(row["seed"])
        bits = ev.parse_bits(row["bits"])
        size = (int(row["irs_rows"]), int(row["irs_cols"]))
        key = (seed, bits, size)
        if key not in cache:
            scen = generate_scenario(replace(cfg.scenario, n_i=size, seed=seed))
            cache[key] = optimize_all(build_channels(scen), bits=bits, rate_tol=cfg.rate_tol,
                                      max_iter=cfg.max_iter)
        rep = ev.evaluate_policy(cache[key], row["policy"], int(row["Z"]), seed, bits=bits,
                                 irs_rows=size[0], irs_cols=size[1], drop=int(row["drop"]))
        redo = dict(zip(ev.CSV_HEADER, ev.report_row(rep)))
        if any(redo[k] != row[k] for k in ev.CSV_HEADER):
            bad.append((row, redo))
    return bad


def run(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.audit and not args.config and args.profile is None:
            cfg_path = os.path.join(os.path.dirname(os.path.abspath(args.audit)), CONFIG_COPY)
            with open(cfg_path) as fh:
                cfg = load_config(fh.read())
            cfg = apply_overrides(cfg, args.overrides)
        else:
            cfg = resolve_config(args)
        cfg = cfg.resolved()
    except ConfigError as exc:
        print(f"irs-tdma: configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"irs-tdma: {exc}", file=sys.stderr)
        return 2
    problems = validate(cfg)
    if problems:
        for p in problems:
            print(f"irs-tdma: invalid parameter: {p}", file=sys.stderr)
        return 2
    try:
        if args.audit:
            bad = audit(args.audit, cfg)
            for row, redo in bad:
                print(f"mismatch: {row} != {redo}", file=sys.stderr)
            print(f"audited rows from {args.audit}: {'OK' if not bad else f'{len(bad)} mismatches'}")
            return 1 if bad else 0
        run_experiment(cfg)
    except Exception as exc:  # noqa: BLE001 - exit status contract
        log.exception("run failed")
        print(f"irs-tdma: run failed: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
