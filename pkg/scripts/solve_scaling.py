"""Wall time and conditioning of the coupled solve versus element count.

    python3 scripts/solve_scaling.py --sizes 10 50 100 200 400 --seed 1
"""

import argparse
import time

import numpy as np

from ppw_metasurface.scene import random_scene
from ppw_metasurface.solver import factorize, fixed_point_residual


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[10, 50, 100, 200, 400])
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--size", type=float, default=0.4, help="square side [m]")
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'N':>6} {'solve [s]':>10} {'cond':>10} {'residual':>10}")
    for n in args.sizes:
        scene = random_scene(rng, n, size=args.size)
        start = time.perf_counter()
        system = factorize(scene)
        m = system.moments()
        elapsed = time.perf_counter() - start
        res = fixed_point_residual(scene, None, m)
        print(f"{n:>6} {elapsed:>10.4f} {system.condition:>10.2e} {res:>10.1e}")


if __name__ == "__main__":
    main()
