#!/usr/bin/env python3
"""Boundary behaviour of diagonal-kernel ratios.

Sweeps K_a(r, r) / K_b(r, r) toward the boundary for a pair of kernels, in
both orders (the vanishing direction is what kills nonzero intertwiners), and
does the same for the separator kernel built from the pair.  Emits plot-ready
CSVs.

    python scripts/boundary_ratio_study.py --out-dir ratios/
"""

import argparse
from pathlib import Path

import numpy as np

from cdlab.kernels import (bergman_kernel, diagonal_ratio,
                           required_truncation, separator_kernel)
from cdlab.serialize import write_ratio_csv


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-a", type=int, default=1)
    parser.add_argument("--n-b", type=int, default=2)
    parser.add_argument("--r-max", type=float, default=0.999)
    parser.add_argument("--steps", type=int, default=24)
    parser.add_argument("--out-dir", type=Path, default=Path("ratio-study"))
    args = parser.parse_args()

    radii = list(1.0 - np.geomspace(0.5, 1.0 - args.r_max, args.steps))
    trunc = required_truncation(max(radii))
    print(f"radii up to {max(radii)}, truncation {trunc}")
    ka = bergman_kernel(args.n_a, trunc)
    kb = bergman_kernel(args.n_b, trunc)
    ks = separator_kernel(ka, kb)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    sweeps = {
        f"ratio_{args.n_a}_over_{args.n_b}.csv": (ka, kb),
        f"ratio_{args.n_b}_over_{args.n_a}.csv": (kb, ka),
        f"separator_over_{args.n_a}.csv": (ks, ka),
        f"separator_over_{args.n_b}.csv": (ks, kb),
    }
    for name, (top, bottom) in sweeps.items():
        samples = diagonal_ratio(top, bottom, radii)
        write_ratio_csv(args.out_dir / name, samples)
        print(f"{name}: ratio {samples[0].ratio:.4g} -> {samples[-1].ratio:.4g}")


if __name__ == "__main__":
    main()
