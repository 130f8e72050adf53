#!/usr/bin/env python3
"""Sweep both tradeoff frontiers of the shipped SC-1 instances and plot them.

Usage: python scripts/sc1_frontiers.py [--points N] [--out-dir DIR]
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

import isackit as ik

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=21)
    ap.add_argument("--out-dir", default=str(ROOT / "out"))
    args = ap.parse_args()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    sc1 = ik.load_model(ROOT / "models" / "sc1.json")
    sc1ht = ik.load_model(ROOT / "models" / "sc1ht.json")

    rd = ik.rd_frontier(sc1, args.points)
    re_ = ik.re_frontier(sc1ht, args.points)

    print("# rate-distortion frontier (SC-1)")
    print("D,R,px_0,px_1")
    for p in rd:
        print(f"{p.objective},{p.rate},{p.p_x[0]},{p.p_x[1]}")
    print()
    print("# rate-exponent frontier (SC-1-HT)")
    print("E,R,px_0,px_1")
    for p in re_:
        print(f"{p.objective},{p.rate},{p.p_x[0]},{p.p_x[1]}")

    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    axes[0].plot([p.objective for p in rd], [p.rate for p in rd], marker=".")
    axes[0].set_xlabel("distortion cap D")
    axes[0].set_ylabel("rate (bits/use)")
    axes[0].set_title("SC-1 rate vs distortion")
    axes[1].plot([p.objective for p in re_], [p.rate for p in re_], marker=".")
    axes[1].set_xlabel("exponent target E (bits)")
    axes[1].set_ylabel("rate (bits/use)")
    axes[1].set_title("SC-1-HT rate vs detection exponent")
    fig.tight_layout()
    target = out_dir / "sc1_frontiers.png"
    fig.savefig(target, dpi=150)
    print(f"\nwrote {target}")


if __name__ == "__main__":
    main()
