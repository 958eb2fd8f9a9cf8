"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 numerical failure,
3 I/O failure. Worker threads for pattern evaluation come from the
``PPW_THREADS`` environment variable (0 or unset = all cores).
"""

import argparse
import logging
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import checks, radiation
from .errors import CoincidentPointsError, SceneValidationError, SingularSystemError
from .io import (SceneFileError, load_scene, read_pattern_csv, save_scene, write_matrix_csv,
                 write_pattern_csv, write_power_csv)
from .coupling import assemble_interaction, feed_matrix
from .scene import AngularGrid, ObservationSet, random_scene, validate
from .solver import power_report, solve_moments

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("ppw_metasurface")


@dataclass
class RunConfig:
    command: str
    scene_path: str = None
    mode: str = None
    radius: float = None
    dtheta: float = None
    dphi: float = None
    output_path: str = None
    compare: tuple = None
    seed: int = None
    elements: int = 10


def parse_scene(path):
    """Load and validate a scene file; warnings are logged, violations raise."""
    scene = load_scene(path)
    report = validate(scene)
    for w in report.warnings:
        log.warning("%s: %s", path, w)
    if not report.ok:
        raise SceneValidationError(report.violations)
    return scene


def observation_for(config, scene):
    """Merge CLI flags over the scene file's observation block."""
    base = scene.observation or ObservationSet()
    mode = (config.mode or base.mode).lower()
    radius = config.radius if config.radius is not None else base.radius
    grid = replace(base.grid,
                   theta_step=config.dtheta if config.dtheta is not None else base.grid.theta_step,
                   phi_step=config.dphi if config.dphi is not None else base.grid.phi_step)
    obs = ObservationSet(mode, radius, grid)
    problems = validate(replace(scene, observation=obs)).violations
    if problems:
        raise SceneValidationError(problems)
    return obs


def run_validate(config):
    scene = parse_scene(config.scene_path)
    results = checks.run_checks(scene)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_INVALID


def run_pattern(config):
    scene = parse_scene(config.scene_path)
    obs = observation_for(config, scene)
    u = radiation.pattern(scene, obs)
    write_pattern_csv(config.output_path, obs.grid, u)
    print(f"wrote {u.size} samples ({obs.mode}, R={obs.reference_radius:g} m) to {config.output_path}")
    return EXIT_OK


def run_channel(config):
    scene = parse_scene(config.scene_path)
    obs = observation_for(config, scene)
    h = radiation.channel_matrix(scene, obs.points().reshape(-1, 3), obs.mode)
    write_matrix_csv(config.output_path, h)
    print(f"wrote {h.shape[0]}x{h.shape[1]} channel matrix to {config.output_path}")
    return EXIT_OK


def run_power(config):
    scene = parse_scene(config.scene_path)
    report = power_report(scene)
    write_power_csv(config.output_path, report)
    margin = float(np.min(report.margins))
    print(f"total P_sup {report.total_supplied:.6e} W, total P_rad {report.total_radiated:.6e} W, "
          f"min passivity margin {margin:.6e} W")
    return EXIT_OK


def _grid_from_csv(theta_deg, phi_deg):
    thetas, phis = np.unique(theta_deg), np.unique(phi_deg)
    if thetas.size * phis.size != theta_deg.size:
        raise SceneValidationError(["pattern CSV is not a full theta x phi grid"])
    steps = []
    for values in (thetas, phis):
        diffs = np.diff(values) if values.size > 1 else np.array([1.0])
        if np.ptp(diffs) > 1e-9 * max(1.0, diffs.max()):
            raise SceneValidationError(["pattern CSV grid is not uniform"])
        steps.append(float(diffs[0]))
    grid = AngularGrid(thetas[0] - steps[0] / 2, thetas[-1] + steps[0] / 2, steps[0],
                       phis[0] - steps[1] / 2, phis[-1] + steps[1] / 2, steps[1])
    expected_t, expected_p = (a.ravel() for a in grid.mesh_deg())
    if not (np.allclose(expected_t, theta_deg, atol=1e-9) and np.allclose(expected_p, phi_deg, atol=1e-9)):
        raise SceneValidationError(["pattern CSV rows are not in theta-major grid order"])
    return grid


def run_compare(config):
    path_a, path_b = config.compare
    ta, pa, ua = read_pattern_csv(path_a)
    tb, pb, ub = read_pattern_csv(path_b)
    if ta.shape != tb.shape or not (np.array_equal(ta, tb) and np.array_equal(pa, pb)):
        raise SceneValidationError([f"grids of {path_a} and {path_b} do not match"])
    grid = _grid_from_csv(ta, pa)
    ua, ub = ua.reshape(grid.shape), ub.reshape(grid.shape)
    raw = radiation.pattern_error_raw(ua, ub, grid)
    print(f"pattern_error {100 * raw:.6f} % (raw integral {raw:.17e})")
    if config.output_path:
        w = grid.weights()
        diff = np.abs(ua / np.sum(ua * w) - ub / np.sum(ub * w))
        write_pattern_csv(config.output_path, grid, diff)
    return EXIT_OK


def run_matrices(config):
    scene = parse_scene(config.scene_path)
    prefix = config.output_path
    write_matrix_csv(f"{prefix}_interaction.csv", assemble_interaction(scene))
    write_matrix_csv(f"{prefix}_feed.csv", feed_matrix(scene))
    write_matrix_csv(f"{prefix}_moments.csv", solve_moments(scene)[:, None])
    print(f"wrote {prefix}_interaction.csv, {prefix}_feed.csv, {prefix}_moments.csv")
    return EXIT_OK


def run_generate(config):
    rng = np.random.default_rng(config.seed)
    scene = random_scene(rng, config.elements)
    save_scene(scene, config.output_path)
    print(f"wrote random scene with {config.elements} elements to {config.output_path}")
    return EXIT_OK


COMMANDS = {
    "validate": run_validate,
    "pattern": run_pattern,
    "channel": run_channel,
    "power": run_power,
    "compare": run_compare,
    "matrices": run_matrices,
    "generate": run_generate,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="ppw-meta", description="Coupled-dipole PPW metasurface simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def scene_cmd(name, help_text, out=True, grid=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scene", required=True, metavar="PATH", help="YAML scene file")
        if grid:
            p.add_argument("--mode", choices=["nf", "ff"], help="near- or far-field evaluation")
            p.add_argument("--radius", type=float, metavar="METERS", help="observation radius")
            p.add_argument("--dtheta", type=float, metavar="DEG", help="theta step")
            p.add_argument("--dphi", type=float, metavar="DEG", help="phi step")
        if out:
            p.add_argument("--out", required=True, metavar="PATH", help="output CSV")
        return p

    scene_cmd("validate", "run the invariant suite on a scene", out=False)
    scene_cmd("pattern", "intensity pattern CSV", grid=True)
    scene_cmd("channel", "dual-polarised channel matrix CSV", grid=True)
    scene_cmd("power", "per-element power accounting CSV")
    scene_cmd("matrices", "dump interaction, feed and moment matrices (--out is a prefix)")

    p = sub.add_parser("compare", help="pattern error between two pattern CSVs")
    p.add_argument("--compare", nargs=2, required=True, metavar=("A", "B"))
    p.add_argument("--out", metavar="PATH", help="optional CSV of |normalised difference|")

    p = sub.add_parser("generate", help="write a random scene file")
    p.add_argument("--elements", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, metavar="PATH")
    return parser


def config_from_args(args):
    return RunConfig(
        command=args.command,
        scene_path=getattr(args, "scene", None),
        mode=getattr(args, "mode", None),
        radius=getattr(args, "radius", None),
        dtheta=getattr(args, "dtheta", None),
        dphi=getattr(args, "dphi", None),
        output_path=getattr(args, "out", None),
        compare=tuple(args.compare) if getattr(args, "compare", None) else None,
        seed=getattr(args, "seed", None),
        elements=getattr(args, "elements", 10),
    )


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    config = config_from_args(build_parser().parse_args(argv))
    try:
        return COMMANDS[config.command](config)
    except (SceneFileError, SceneValidationError) as exc:
        violations = getattr(exc, "violations", [str(exc)])
        for v in violations:
            print(f"error: {v}", file=sys.stderr)
        return EXIT_INVALID
    except (SingularSystemError, CoincidentPointsError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
