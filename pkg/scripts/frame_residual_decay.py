#!/usr/bin/env python3
"""Eigenframe residual decay with truncation.

For the coupled model over a bergman(1)/bergman(2) pair with a seeded random
coupling, tabulates the worst eigen-residual ||(T - w) gamma_i(w)|| on a
|w| <= r grid as the truncation doubles.  The decay should be geometric in r.

    python scripts/frame_residual_decay.py --radius 0.8
"""

import argparse

import numpy as np

from cdlab.geometry import eigenframe, polar_grid
from cdlab.kernels import bergman_kernel
from cdlab.operators import assemble_model, random_operator, shift_from_kernel


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--radius", type=float, default=0.8)
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[40, 80, 160, 320])
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--x-norm", type=float, default=0.5)
    args = parser.parse_args()

    grid = polar_grid(radii=[args.radius / 2, args.radius], n_angles=8)
    print(f"{'N':>6} {'worst residual':>16} {'ratio to prev':>14}")
    previous = None
    for size in args.sizes:
        t0 = shift_from_kernel(bergman_kernel(1, size))
        t1 = shift_from_kernel(bergman_kernel(2, size))
        x = random_operator(size, args.seed, norm=args.x_norm)
        frame = eigenframe(assemble_model(t0, t1, x), grid)
        worst = float(np.max(frame.eigen_residuals))
        ratio = "" if previous is None else f"{worst / previous:14.3e}"
        print(f"{size:>6} {worst:16.3e} {ratio:>14}")
        previous = worst


if __name__ == "__main__":
    main()
