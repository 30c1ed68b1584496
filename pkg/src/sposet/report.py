"""Size-sweep reports: delimited output plus rendered figures.

Builds oracles over a family of generated instances, writes the per-run
measurements to ``sizes.csv``, and renders two PNGs next to it: the ratio
of total structure bits to n^2/4 across sizes, and a stacked breakdown of
where the bits go.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .gen import random_dag, random_layered_poset
from .oracle import build_succinct_poset, space_report
from .order import transitive_closure

PARTS = ("wy_bits", "sparse_payload_bits", "membership_bits", "record_bits")


def measure(kind, n, seed):
    if kind == "random_layered":
        closure = random_layered_poset(n, seed)
    elif kind == "random_dag":
        closure = transitive_closure(random_dag(n, 0.1, seed))
    else:
        raise ValueError(f"unknown report kind {kind!r}")
    rep = space_report(build_succinct_poset(closure))
    row = {
        "kind": kind,
        "n": n,
        "seed": seed,
        "total_bits": rep["total_bits"],
        "flatten_bits": rep["flatten_bits"],
        "quarter_square_bits": rep["quarter_square_bits"],
        "triangular_bits": rep["triangular_bits"],
        "ratio_quarter_square": rep["total_bits"] / rep["quarter_square_bits"],
    }
    for part in PARTS:
        row[part] = rep["compress"][part]
    return row


def run_report(out_dir, kind="random_layered", sizes=(128, 256, 512), seeds=3,
               base_seed=0):
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for n in sizes:
        for k in range(seeds):
            rows.append(measure(kind, n, base_seed + k))

    csv_path = os.path.join(out_dir, "sizes.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)

    by_n = {}
    for row in rows:
        by_n.setdefault(row["n"], []).append(row)
    ns = sorted(by_n)
    ratios = [sum(r["ratio_quarter_square"] for r in by_n[n]) / len(by_n[n])
              for n in ns]

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ns, ratios, "o-", label="total / (n$^2$/4)")
    ax.axhline(2.0, color="gray", linestyle="--", linewidth=1,
               label="upper-triangular matrix")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("elements n")
    ax.set_ylabel("size ratio")
    ax.set_title(f"oracle size vs. information bound ({kind})")
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "ratio_trend.png"), dpi=120)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6, 4))
    bottoms = [0.0] * len(ns)
    for part in PARTS + ("flatten_bits",):
        vals = [sum(r[part] for r in by_n[n]) / len(by_n[n]) for n in ns]
        ax.bar([str(n) for n in ns], vals, bottom=bottoms, label=part)
        bottoms = [b + v for b, v in zip(bottoms, vals)]
    ax.set_xlabel("elements n")
    ax.set_ylabel("bits")
    ax.set_title("structure size breakdown")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "breakdown.png"), dpi=120)
    plt.close(fig)
    return csv_path
