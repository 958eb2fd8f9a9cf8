"""Pattern error between near-field patterns at growing radius and the far-field pattern.

    python3 scripts/nf_ff_sweep.py --scene scenes/reference_scene.yaml --step 2 --out sweep.csv
"""

import argparse
import csv

import numpy as np

from ppw_metasurface import radiation
from ppw_metasurface.cli import parse_scene
from ppw_metasurface.io import fmt
from ppw_metasurface.scene import AngularGrid, ObservationSet, fraunhofer_distance
from ppw_metasurface.solver import solve_moments


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scene", default="scenes/reference_scene.yaml")
    parser.add_argument("--step", type=float, default=2.0, help="grid step [deg]")
    parser.add_argument("--radii", type=float, nargs="+", default=[0.2, 0.4, 1, 3, 10, 30, 100, 300])
    parser.add_argument("--out", help="optional CSV with radius_m, radius_over_fraunhofer, error_percent")
    args = parser.parse_args()

    scene = parse_scene(args.scene)
    grid = AngularGrid(theta_step=args.step, phi_step=args.step)
    m = solve_moments(scene)
    ff = radiation.pattern(scene, ObservationSet("ff", 1.0, grid), moments=m)
    r_ff = fraunhofer_distance(scene) if scene.plate_size else float("nan")
    half_diag = np.hypot(*scene.plate_size) / 2 if scene.plate_size else 0.0

    rows = []
    print(f"Fraunhofer distance {r_ff:.4f} m")
    print(f"{'R [m]':>10} {'R/R_FF':>10} {'error [%]':>12}")
    for r in args.radii:
        if r <= half_diag:
            continue
        nf = radiation.pattern(scene, ObservationSet("nf", r, grid), moments=m)
        err = radiation.pattern_error(nf, ff, grid)
        rows.append((r, r / r_ff, err))
        print(f"{r:>10g} {r / r_ff:>10.3f} {err:>12.5f}")

    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["radius_m", "radius_over_fraunhofer", "error_percent"])
            w.writerows([[fmt(v) for v in row] for row in rows])


if __name__ == "__main__":
    main()
