"""Frame-level rates and Monte Carlo sweeps.

A frame serves each UE once. UEs are scheduled cluster by cluster (cluster
index order, then UE index order) and the IRS is reconfigured whenever the
serving configuration changes. Rates are spectral efficiencies
``log2(1+SNR)`` per slot; ``mean_rate`` is their mean over the K slots.
"""
from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import build_channels, generate_scenario
from .clustering import Policy, run_policy
from .irs_opt import optimize_all

ALL_POLICIES = tuple(Policy)
CSV_HEADER = ["policy", "Z", "bits", "irs_rows", "irs_cols", "drop", "seed",
              "mean_rate", "sum_rate", "reconfigs"]
AGG_HEADER = ["policy", "Z", "bits", "irs_rows", "irs_cols", "drops",
              "mean_rate", "mean_rate_std", "sum_rate", "sum_rate_std", "reconfigs"]


@dataclass
class RateReport:
    policy: Policy
    Z: int
    per_ue_rate: np.ndarray = field(repr=False)
    sum_rate: float
    mean_rate: float
    num_reconfigurations: int
    seed: int = 0
    bits: int = None
    irs_rows: int = 0
    irs_cols: int = 0
    drop: int = 0


def slot_order(assignment):
    """UE indices in serving order: by cluster index, then UE index."""
    return np.lexsort((np.arange(len(assignment)), assignment))


def count_reconfigurations(outcome):
    """Slots at which the serving configuration differs from the previous slot.

    The first slot counts; with distinct centroids this equals the number of
    non-empty clusters.
    """
    order = slot_order(outcome.assignment)
    seq = outcome.centroids[outcome.assignment[order]]
    if seq.shape[0] == 0:
        return 0
    changes = np.any(seq[1:] != seq[:-1], axis=1)
    return 1 + int(changes.sum())


def frame_sum_rate(outcome, links, Z=None, **meta):
    """Evaluate a clustering: each UE served with its cluster's configuration."""
    K = len(links)
    labels = np.asarray(outcome.assignment)
    cent = np.asarray(outcome.centroids)
    if labels.shape != (K,):
        raise ValueError(f"assignment covers {labels.size} UEs, expected {K}")
    if K and (labels.min() < 0 or labels.max() >= cent.shape[0]):
        raise ValueError("assignment refers to a cluster without a centroid")
    if K and cent.shape[1] != links[0].coupling.size:
        raise ValueError("centroid length does not match the IRS size")
    coupling = np.stack([l.coupling for l in links])
    scale = np.array([l.scale for l in links])
    gamma = np.abs((coupling * np.exp(1j * cent[labels])).sum(axis=1)) ** 2 * scale
    rates = np.log2(1.0 + gamma)
    total = float(rates.sum())
    return RateReport(
        policy=Policy(outcome.policy),
        Z=outcome.n_clusters if Z is None else Z,
        per_ue_rate=rates,
        sum_rate=total,
        mean_rate=total / K,
        num_reconfigurations=count_reconfigurations(outcome),
        **meta,
    )


def drop_seeds(master_seed, drops):
    """One 64-bit seed per drop, derived from the master seed."""
    children = np.random.SeedSequence(int(master_seed)).spawn(drops)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


def policy_seed(drop_seed, policy, Z):
    idx = list(Policy).index(Policy(policy))
    return int(np.random.SeedSequence([int(drop_seed), idx, int(Z)]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class _DropTask:
    scenario: object
    drop: int
    seed: int
    policies: tuple
    z_values: tuple
    bits_values: tuple
    irs_sizes: tuple
    rate_tol: float
    max_iter: int


def evaluate_policy(links, policy, Z, drop_seed, bits=None, **meta):
    """Run one policy at one budget on optimized links and score the frame."""
    policy = Policy(policy)
    outcome = run_policy(policy, links, Z, seed=policy_seed(drop_seed, policy, Z), bits=bits)
    return frame_sum_rate(outcome, links, Z=Z, seed=drop_seed, bits=bits, **meta)


def _run_drop(task):
    reports = []
    for rows, cols in task.irs_sizes:
        scen = generate_scenario(replace(task.scenario, n_i=(rows, cols), seed=task.seed))
        channels = build_channels(scen)
        for bits in task.bits_values:
            links = optimize_all(channels, bits=bits, rate_tol=task.rate_tol, max_iter=task.max_iter)
            for policy in task.policies:
                for Z in task.z_values:
                    reports.append(evaluate_policy(
                        links, policy, Z, task.seed, bits=bits,
                        irs_rows=rows, irs_cols=cols, drop=task.drop,
                    ))
    return reports


def run_sweep(scenario, policies, z_values, drops, master_seed=None, bits_values=(None,),
              irs_sizes=None, workers=1, rate_tol=1e-4, max_iter=50):
    """Monte Carlo sweep over drops x IRS sizes x bit widths x policies x Z.

    Each drop gets its own seed from ``master_seed`` (default: the
    scenario's seed), so results do not depend on ``workers``.
    """
    if drops < 1:
        raise ValueError("drops must be >= 1")
    bad = [z for z in z_values if not 1 <= z <= scenario.K]
    if bad:
        raise ValueError(f"Z values outside [1, K={scenario.K}]: {bad}")
    master = scenario.seed if master_seed is None else master_seed
    sizes = tuple(irs_sizes) if irs_sizes else (tuple(scenario.n_i),)
    tasks = [
        _DropTask(scenario, d, s, tuple(Policy(p) for p in policies), tuple(z_values),
                  tuple(bits_values), sizes, rate_tol, max_iter)
        for d, s in enumerate(drop_seeds(master, drops))
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            chunks = list(pool.map(_run_drop, tasks))
    else:
        chunks = [_run_drop(t) for t in tasks]
    return [r for chunk in chunks for r in chunk]


def sweep_z(scenario, policies=ALL_POLICIES, z_values=None, drops=20, master_seed=None,
            bits=None, workers=1, **kw):
    z_values = z_values or sorted({1, *range(10, scenario.K + 1, 10), scenario.K})
    return run_sweep(scenario, policies, z_values, drops, master_seed,
                     bits_values=(bits,), workers=workers, **kw)


def sweep_irs_size(scenario, sizes, z_values, drops=20, master_seed=None,
                   policies=(Policy.CWC,), workers=1, **kw):
    return run_sweep(scenario, policies, z_values, drops, master_seed,
                     irs_sizes=sizes, workers=workers, **kw)


def sweep_quantization(scenario, b_values, z_values, drops=20, master_seed=None,
                       policies=(Policy.CWC,), workers=1, **kw):
    """``None`` in ``b_values`` stands for continuous phases."""
    return run_sweep(scenario, policies, z_values, drops, master_seed,
                     bits_values=tuple(b_values), workers=workers, **kw)


def _key(r):
    return (r.policy.value, r.Z, r.bits, r.irs_rows, r.irs_cols)


def aggregate(reports):
    """Mean and sample standard deviation across drops, in first-seen order."""
    groups = {}
    for r in reports:
        groups.setdefault(_key(r), []).append(r)
    rows = []
    for (policy, Z, bits, rr, cc), rs in groups.items():
        mr = np.array([r.mean_rate for r in rs])
        sr = np.array([r.sum_rate for r in rs])
        ddof = 1 if len(rs) > 1 else 0
        rows.append({
            "policy": policy, "Z": Z, "bits": bits, "irs_rows": rr, "irs_cols": cc,
            "drops": len(rs),
            "mean_rate": float(mr.mean()), "mean_rate_std": float(mr.std(ddof=ddof)),
            "sum_rate": float(sr.mean()), "sum_rate_std": float(sr.std(ddof=ddof)),
            "reconfigs": float(np.mean([r.num_reconfigurations for r in rs])),
        })
    return rows


def mean_rate_table(reports):
    """``{(policy, Z, bits, (rows, cols)): mean over drops of mean_rate}``."""
    return {
        (row["policy"], row["Z"], row["bits"], (row["irs_rows"], row["irs_cols"])): row["mean_rate"]
        for row in aggregate(reports)
    }


def fmt(x):
    if x is None:
        return "cont"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{x:.10g}"


def report_row(r):
    return [r.policy.value, fmt(r.Z), fmt(r.bits), fmt(r.irs_rows), fmt(r.irs_cols),
            fmt(r.drop), fmt(r.seed), fmt(r.mean_rate), fmt(r.sum_rate), fmt(r.num_reconfigurations)]


def write_reports_csv(path, reports):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(report_row(r) for r in reports)


def write_aggregate_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGG_HEADER)
        for row in rows:
            w.writerow([row["policy"]] + [fmt(row[k]) for k in AGG_HEADER[1:]])


def parse_bits(text):
    return None if text in ("cont", "", None) else int(text)

