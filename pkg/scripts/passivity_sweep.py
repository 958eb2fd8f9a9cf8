"""Per-element power balance of a scene as the ohmic loss parameter grows.

Loss is given in units of |Im{G(0)}|; zero loss should give P_rad / P_sup = 1.

    python3 scripts/passivity_sweep.py --decades -4 1 --points 11
"""

import argparse

import numpy as np

from ppw_metasurface.cli import parse_scene
from ppw_metasurface.polarizability import element_intrinsic, passivity_check, rr_correct, scene_self_term
from ppw_metasurface.scene import Element
from ppw_metasurface.solver import power_report


def with_loss(scene, delta):
    return scene.with_elements([Element(e.position, e.l1, e.l2, delta, e.intrinsic_override)
                                for e in scene.elements])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scene", default="scenes/reference_scene.yaml")
    parser.add_argument("--decades", type=float, nargs=2, default=(-4.0, 1.0))
    parser.add_argument("--points", type=int, default=11)
    args = parser.parse_args()

    scene = parse_scene(args.scene)
    g0 = scene_self_term(scene)
    print(f"|g0| = {abs(g0.value):.6e} 1/m^3")
    print(f"{'delta/|g0|':>12} {'P_sup [W]':>14} {'P_rad [W]':>14} {'min ratio':>10} {'max ratio':>10} {'min eig':>12}")
    for rel in np.concatenate([[0.0], np.logspace(*args.decades, args.points)]):
        lossy = with_loss(scene, rel * abs(g0.value))
        report = power_report(lossy)
        eig = min(passivity_check(rr_correct(element_intrinsic(e), g0), g0).min_eigenvalue
                  for e in lossy.elements)
        ratios = report.ratios
        print(f"{rel:>12.3e} {report.total_supplied:>14.6e} {report.total_radiated:>14.6e} "
              f"{np.nanmin(ratios):>10.6f} {np.nanmax(ratios):>10.6f} {eig:>12.4e}")


if __name__ == "__main__":
    main()
