#!/usr/bin/env python3
"""Run the complete analysis pipeline on a synthetic dataset.

Generates a confounded dataset, then produces every report and figure the
toolkit emits: robustness index, frequency curves, 2D projection colorings,
probe accuracies (embedding and 2D inputs), same-center confounder curves,
and the center-error relation.

Example:
    python scripts/run_full_analysis.py --out runs/demo --seed 7 --quick
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from embrobust.cli import main as cli


def run(args: list[str]) -> None:
    print(f"$ embrobust {' '.join(args)}")
    rc = cli(args)
    if rc != 0:
        sys.exit(rc)


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/full_analysis")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--n-per-cell", type=int, default=80)
    parser.add_argument("--dim", type=int, default=768)
    parser.add_argument("--bio-strength", type=float, default=0.7)
    parser.add_argument("--conf-strength", type=float, default=1.0)
    parser.add_argument("--noise-sigma", type=float, default=0.15)
    parser.add_argument("--quick", action="store_true",
                        help="small dataset and short projection for a fast demo")
    return parser.parse_args()


def main() -> None:
    args = parse_args()
    out = Path(args.out)
    data = out / "data"
    reports = out / "reports"
    if args.quick:
        args.n_per_cell, args.dim = 12, 64

    t0 = time.time()
    run(["synth", "--out-dir", str(data),
         "--n-bio", "5", "--n-conf", "5",
         "--per-cell", str(args.n_per_cell), "--dim", str(args.dim),
         "--bio-strength", str(args.bio_strength),
         "--conf-strength", str(args.conf_strength),
         "--noise-sigma", str(args.noise_sigma), "--seed", str(args.seed)])
    ds = ["--manifest", str(data / "manifest.csv"),
          "--embeddings", str(data / "embeddings.bin")]
    seed = ["--seed", str(args.seed)]
    run(["index", *ds, "--name", "synthetic", "--k", "50",
         "--out-dir", str(reports), *seed])
    run(["curves", *ds, "--out-dir", str(reports), *seed])
    tsne_flags = ["--tsne-iters", "400", "--perplexity", "15"] if args.quick else []
    run(["tsne", *ds, "--out-dir", str(reports), *seed, *tsne_flags])
    run(["eval", *ds, "--out-dir", str(reports), *seed,
         "--coords", str(reports / "tsne_coords.csv")])
    run(["confounders", *ds, "--out-dir", str(reports), *seed]
        + (["--k-grid", "1,2,4,8,16", "--reps", "2"] if args.quick else []))
    run(["relation", *ds, "--out-dir", str(reports), *seed]
        + (["--k-grid", "1,2,4,8,16", "--reps", "2"] if args.quick else []))
    print(f"done in {time.time() - t0:.0f}s; reports in {reports}/")


if __name__ == "__main__":
    main()
